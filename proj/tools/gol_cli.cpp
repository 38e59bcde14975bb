// gol: command-line front end for the gol library.
//
// Exit codes: 0 success, 1 failed check, 2 usage or parse error,
// 3 numerical divergence during training.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gol/analysis.hpp"
#include "gol/classifier_init.hpp"
#include "gol/error.hpp"
#include "gol/gradcheck.hpp"
#include "gol/io.hpp"
#include "gol/longtail_data.hpp"
#include "gol/trainer.hpp"

namespace fs = std::filesystem;
using namespace gol;

namespace {

constexpr int kExitFailedCheck = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDivergence = 3;

constexpr double kGradTolerance = 1e-5;

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ParseError(flag + ": not a number: \"" + item + "\"");
        }
    }
    if (out.empty()) throw ParseError(flag + ": empty list");
    return out;
}

// GOL_SEED, when set, replaces the seed from the config file.
void apply_seed_override(TrainConfig& cfg) {
    const char* env = std::getenv("GOL_SEED");
    if (!env) return;
    const std::string s(env);
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
        throw ParseError("GOL_SEED: expected a non-negative integer, got \"" + s + "\"");
    }
    cfg.seed = std::stoull(s);
}

std::string opt(const std::optional<double>& v) {
    if (!v) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return buf;
}

void print_summary(const RunReport& r) {
    std::printf("loss %s, seed %llu\n", r.loss.c_str(), static_cast<unsigned long long>(r.seed));
    if (!r.epoch_loss.empty()) {
        std::printf("stage 1: %zu epochs, final loss %.6f\n", r.epoch_loss.size(),
                    r.epoch_loss.back());
    }
    if (!r.stage2_epoch_loss.empty()) {
        std::printf("stage 2: %zu epochs, final loss %.6f\n", r.stage2_epoch_loss.size(),
                    r.stage2_epoch_loss.back());
    }
    if (r.stage1_metrics) {
        std::printf("stage 1 accuracy %.4f\n", r.stage1_metrics->overall_accuracy);
    }
    const auto& m = r.metrics;
    std::printf("accuracy %.4f (per-sample %.4f)\n", m.overall_accuracy, m.sample_accuracy);
    std::printf("  rare %s  common %s  frequent %s\n", opt(m.group_accuracy[0]).c_str(),
                opt(m.group_accuracy[1]).c_str(), opt(m.group_accuracy[2]).c_str());
    std::printf("weight norms: mean %.4f, cv %.4f\n", r.weight_norms.mean, r.weight_norms.cv);
    const auto& g = r.positive_gradient.group_mean_db;
    std::printf("positive gradient dB: rare %s  common %s  frequent %s\n", opt(g[0]).c_str(),
                opt(g[1]).c_str(), opt(g[2]).c_str());
    std::printf("wall time %.2f s\n", r.wall_time_seconds);
}

int cmd_grad_check(const std::string& loss_name, const std::string& grid_text,
                   const std::string& out_path) {
    const std::vector<LossKind> losses{loss_kind_from_string(loss_name)};
    if (losses[0] == LossKind::eql_gumbel) {
        throw ParseError("--loss: grad-check supports sigmoid_bce, softmax_ce, gumbel, gol");
    }
    const std::vector<double> grid = grid_text == "default"
                                         ? std::vector<double>{-4, -2, 0, 1, 3, 6, 10}
                                         : parse_list(grid_text, "--grid");
    const auto rows = gradient_check_grid(losses, grid);
    const std::string csv = gradcheck_csv(rows);
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        write_file(out_path, csv);
    }
    double worst = 0.0;
    for (const auto& r : rows) worst = std::max(worst, r.rel_error);
    std::fprintf(stderr, "%s: max rel error %.3e over %zu points\n", loss_name.c_str(), worst,
                 rows.size());
    return worst < kGradTolerance ? 0 : kExitFailedCheck;
}

int cmd_init_solve(long classes) {
    if (classes < 2) throw ParseError("--classes: need at least 2 classes");
    const double b = solve_bias(classes);
    const double residual = std::abs(initial_total_gradient(classes, b));
    std::printf("classes %ld\nbias %.6f\nresidual %.3e\n", classes, b, residual);
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& out_dir) {
    TrainConfig cfg = load_train_config(config_path);
    apply_seed_override(cfg);
    const auto result = run_experiment(cfg);
    print_summary(result.report);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(out_dir + "/report.json", to_json(result.report).dump(2) + "\n");
        write_file(out_dir + "/metrics.csv", epoch_metrics_csv(result.report));
        write_file(out_dir + "/classes.csv", class_metrics_csv(result.report));
        write_file(out_dir + "/config.json", to_json(cfg).dump(2) + "\n");
        std::printf("wrote %s/{report.json,metrics.csv,classes.csv,config.json}\n", out_dir.c_str());
    }
    return 0;
}

int cmd_dist(const std::string& annotations, std::size_t grid_h, std::size_t grid_w,
             const std::string& out_dir) {
    const auto table = load_annotations(annotations);
    const auto counts = cell_counts(table, grid_h, grid_w);
    const auto freq = frequency_table(table);
    const std::string grid_dir = out_dir + "/grids";
    fs::create_directories(grid_dir);

    nlohmann::json summary = {{"annotations", annotations},
                              {"objects", table.objects.size()},
                              {"grid_h", grid_h},
                              {"grid_w", grid_w},
                              {"categories", nlohmann::json::array()}};
    const auto occ = occurrence_grid(counts);
    write_file(grid_dir + "/occurrence.csv", grid_to_csv(occ));
    summary["occurrence"] = to_json(occ);
    for (std::size_t c = 0; c < table.categories.size(); ++c) {
        const auto& cat = table.categories[c];
        const auto joint = joint_grid(counts, c);
        const auto memb = membership_grid(counts, c);
        const std::string stem = std::to_string(cat.id);
        write_file(grid_dir + "/joint_" + stem + ".csv", grid_to_csv(joint));
        write_file(grid_dir + "/membership_" + stem + ".csv", grid_to_csv(memb));
        summary["categories"].push_back({{"id", cat.id},
                                         {"name", cat.name},
                                         {"instances", freq[c].instance_count},
                                         {"images", freq[c].image_count},
                                         {"group", to_string(freq[c].group)},
                                         {"joint", to_json(joint)},
                                         {"membership", to_json(memb)}});
    }
    write_file(out_dir + "/distributions.json", summary.dump(2) + "\n");
    std::printf("%zu objects, %zu categories, %zux%zu grid -> %s\n", table.objects.size(),
                table.categories.size(), grid_h, grid_w, out_dir.c_str());
    return 0;
}

int cmd_kl(const std::string& p_path, const std::string& q_path, double eps) {
    const auto p = load_grid_csv(p_path);
    const auto q = load_grid_csv(q_path);
    std::cout << to_json(kl_divergence(p, q, eps)).dump(2) << "\n";
    return 0;
}

int cmd_sweep_sigma(const std::string& config_path, const std::string& values_text,
                    const std::string& out_dir) {
    const auto values = parse_list(values_text, "--values");
    for (double s : values) {
        if (s < 0.8 - 1e-12 || s > 1.2 + 1e-12) {
            throw ParseError("--values: temperature " + std::to_string(s) +
                             " outside the supported range [0.8, 1.2]");
        }
    }
    TrainConfig base = load_train_config(config_path);
    apply_seed_override(base);
    if (!uses_gumbel(base.loss)) {
        throw ParseError(config_path + ": $.loss: sweep-sigma needs a Gumbel-family loss, got " +
                         to_string(base.loss));
    }
    std::string table = "sigma,overall_accuracy,rare,common,frequent\n";
    std::printf("%-6s %-8s %-8s %-8s %-8s\n", "sigma", "overall", "rare", "common", "frequent");
    for (double s : values) {
        TrainConfig cfg = base;
        cfg.temperature = s;
        const auto m = run_experiment(cfg).report.metrics;
        char line[160];
        std::snprintf(line, sizeof line, "%.2f,%.6f,%s,%s,%s\n", s, m.overall_accuracy,
                      opt(m.group_accuracy[0]).c_str(), opt(m.group_accuracy[1]).c_str(),
                      opt(m.group_accuracy[2]).c_str());
        table += line;
        std::printf("%-6.2f %-8.4f %-8s %-8s %-8s\n", s, m.overall_accuracy,
                    opt(m.group_accuracy[0]).c_str(), opt(m.group_accuracy[1]).c_str(),
                    opt(m.group_accuracy[2]).c_str());
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(out_dir + "/sweep_sigma.csv", table);
    }
    return 0;
}

int cmd_report(const std::string& path) {
    print_summary(load_report(path));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gumbel activation and loss tools for long-tailed classification"};
    app.require_subcommand(1);

    std::string loss = "gumbel", grid = "default", out;
    auto* grad = app.add_subcommand("grad-check", "Compare analytic and finite-difference gradients");
    grad->add_option("--loss", loss, "sigmoid_bce, softmax_ce, gumbel or gol")->capture_default_str();
    grad->add_option("--grid", grid, "comma-separated scores, or 'default'")->capture_default_str();
    grad->add_option("--out", out, "write the CSV here instead of stdout");

    long classes = 0;
    auto* init = app.add_subcommand("init-solve", "Solve the zero-gradient classifier bias");
    init->add_option("--classes", classes, "number of classes")->required();

    std::string config;
    auto* train = app.add_subcommand("train", "Train on a synthetic long-tailed task");
    train->add_option("--config", config, "JSON training config")->required();
    train->add_option("--out", out, "output directory for report.json and CSVs");

    std::string annotations;
    std::size_t grid_h = 32, grid_w = 0;
    auto* dist = app.add_subcommand("dist", "Spatial object distributions from annotations");
    dist->add_option("--annotations", annotations, "COCO-style annotation JSON")->required();
    dist->add_option("--grid", grid_h, "grid rows (and columns unless --grid-w)")->capture_default_str();
    dist->add_option("--grid-w", grid_w, "grid columns");
    dist->add_option("--out", out, "output directory")->required();

    std::string p_path, q_path;
    double eps = 1e-12;
    auto* kl = app.add_subcommand("kl", "KL(P || Q) between two grid CSV files");
    kl->add_option("--p", p_path, "grid CSV for P")->required();
    kl->add_option("--q", q_path, "grid CSV for Q")->required();
    kl->add_option("--eps", eps, "smoothing added to every cell")->capture_default_str();

    std::string values = "0.8,0.9,1.0,1.1,1.2";
    auto* sweep = app.add_subcommand("sweep-sigma", "Accuracy across Gumbel temperatures");
    sweep->add_option("--config", config, "JSON training config")->required();
    sweep->add_option("--values", values, "comma-separated temperatures in [0.8, 1.2]")
        ->capture_default_str();
    sweep->add_option("--out", out, "output directory for sweep_sigma.csv");

    std::string report_path;
    auto* report = app.add_subcommand("report", "Summarize a report.json");
    report->add_option("report", report_path, "path to report.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*grad) return cmd_grad_check(loss, grid, out);
        if (*init) return cmd_init_solve(classes);
        if (*train) return cmd_train(config, out);
        if (*dist) return cmd_dist(annotations, grid_h, grid_w == 0 ? grid_h : grid_w, out);
        if (*kl) return cmd_kl(p_path, q_path, eps);
        if (*sweep) return cmd_sweep_sigma(config, values, out);
        if (*report) return cmd_report(report_path);
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitDivergence;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFailedCheck;
    }
    return kExitUsage;
}

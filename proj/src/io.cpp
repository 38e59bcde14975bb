#include "gol/io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "gol/error.hpp"

namespace gol {

using nlohmann::json;

namespace {

class Reader {
public:
    Reader(const json& obj, std::string path, std::set<std::string> allowed)
        : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ParseError(path_ + ": expected an object");
        for (const auto& [key, _] : obj_.items()) {
            if (!allowed.contains(key)) throw ParseError(path_ + "." + key + ": unknown key");
        }
    }

    const json* find(const char* key) const {
        const auto it = obj_.find(key);
        return it == obj_.end() || it->is_null() ? nullptr : &*it;
    }

    std::string where(const char* key) const { return path_ + "." + key; }

    void number(const char* key, double& out) const {
        if (const json* v = find(key)) {
            if (!v->is_number()) throw ParseError(where(key) + ": expected a number");
            out = v->get<double>();
        }
    }

    template <typename Int>
    void integer(const char* key, Int& out) const {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) throw ParseError(where(key) + ": expected an integer");
            if constexpr (std::is_unsigned_v<Int>) {
                if (v->get<long long>() < 0) throw ParseError(where(key) + ": must be non-negative");
            }
            out = v->get<Int>();
        }
    }

    std::optional<std::string> string(const char* key) const {
        if (const json* v = find(key)) {
            if (!v->is_string()) throw ParseError(where(key) + ": expected a string");
            return v->get<std::string>();
        }
        return std::nullopt;
    }

private:
    const json& obj_;
    std::string path_;
};

template <typename Fn>
auto with_path(const std::string& path, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        // Errors from nested readers already carry their own path.
        if (e.what()[0] == '$') throw;
        throw ParseError(path + ": " + e.what());
    }
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& v) {
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
}

json metrics_json(const EvalMetrics& m) {
    json per_class = json::array();
    for (const auto& a : m.per_class_accuracy) per_class.push_back(optional_json(a));
    return {{"overall_accuracy", m.overall_accuracy},
            {"sample_accuracy", m.sample_accuracy},
            {"group_accuracy",
             {{"rare", optional_json(m.group_accuracy[0])},
              {"common", optional_json(m.group_accuracy[1])},
              {"frequent", optional_json(m.group_accuracy[2])}}},
            {"per_class_accuracy", per_class}};
}

EvalMetrics metrics_from_json(const json& j) {
    EvalMetrics m;
    m.overall_accuracy = j.at("overall_accuracy").get<double>();
    m.sample_accuracy = j.at("sample_accuracy").get<double>();
    const json& g = j.at("group_accuracy");
    m.group_accuracy = {optional_from(g.at("rare")), optional_from(g.at("common")),
                        optional_from(g.at("frequent"))};
    for (const auto& v : j.at("per_class_accuracy")) m.per_class_accuracy.push_back(optional_from(v));
    return m;
}

FrequencyGroup group_from_string(const std::string& s) {
    for (FrequencyGroup g : kAllGroups) {
        if (to_string(g) == s) return g;
    }
    throw ParseError("unknown frequency group \"" + s + "\"");
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

TrainConfig parse_train_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("$: invalid JSON: ") + e.what());
    }
    TrainConfig cfg;
    const Reader r(doc, "$",
                   {"loss", "epochs", "batch_size", "lr", "momentum", "weight_decay", "seed",
                    "sampler", "rfs_threshold", "hidden", "clip", "temperature", "lambda",
                    "bias_init", "stage2", "data"});
    if (auto s = r.string("loss")) cfg.loss = with_path(r.where("loss"), [&] { return loss_kind_from_string(*s); });
    r.integer("epochs", cfg.epochs);
    r.integer("batch_size", cfg.batch_size);
    r.number("lr", cfg.lr);
    r.number("momentum", cfg.momentum);
    r.number("weight_decay", cfg.weight_decay);
    r.integer("seed", cfg.seed);
    if (auto s = r.string("sampler")) cfg.sampler = with_path(r.where("sampler"), [&] { return sampler_kind_from_string(*s); });
    r.number("rfs_threshold", cfg.rfs_threshold);
    r.integer("hidden", cfg.hidden);
    if (const json* clip = r.find("clip")) {
        if (!clip->is_array() || clip->size() != 2 || !(*clip)[0].is_number() || !(*clip)[1].is_number()) {
            throw ParseError(r.where("clip") + ": expected [lo, hi]");
        }
        cfg.clip = {(*clip)[0].get<double>(), (*clip)[1].get<double>()};
    }
    r.number("temperature", cfg.temperature);
    r.number("lambda", cfg.lambda);
    if (r.find("bias_init")) {
        double b = 0.0;
        r.number("bias_init", b);
        cfg.bias_init = b;
    }
    if (const json* s2 = r.find("stage2")) {
        const Reader sr(*s2, "$.stage2", {"epochs", "lr", "loss"});
        Stage2Config stage2;
        sr.integer("epochs", stage2.epochs);
        sr.number("lr", stage2.lr);
        if (auto s = sr.string("loss")) stage2.loss = with_path(sr.where("loss"), [&] { return loss_kind_from_string(*s); });
        cfg.stage2 = stage2;
    }
    if (const json* d = r.find("data")) {
        const Reader dr(*d, "$.data",
                        {"classes", "imbalance_factor", "n_head", "dim", "mean_scale",
                         "test_fraction", "rare_max", "common_max"});
        dr.integer("classes", cfg.data.longtail.classes);
        dr.number("imbalance_factor", cfg.data.longtail.imbalance_factor);
        dr.integer("n_head", cfg.data.longtail.n_head);
        dr.integer("dim", cfg.data.longtail.dim);
        dr.number("mean_scale", cfg.data.longtail.mean_scale);
        dr.number("test_fraction", cfg.data.test_fraction);
        dr.integer("rare_max", cfg.data.groups.rare_max);
        dr.integer("common_max", cfg.data.groups.common_max);
    }
    with_path("$", [&] {
        cfg.validate();
        return 0;
    });
    return cfg;
}

TrainConfig load_train_config(const std::string& path) {
    const std::string text = read_file(path);
    try {
        return parse_train_config(text);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

json to_json(const TrainConfig& cfg) {
    json j = {{"loss", to_string(cfg.loss)},
              {"epochs", cfg.epochs},
              {"batch_size", cfg.batch_size},
              {"lr", cfg.lr},
              {"momentum", cfg.momentum},
              {"weight_decay", cfg.weight_decay},
              {"seed", cfg.seed},
              {"sampler", to_string(cfg.sampler)},
              {"rfs_threshold", cfg.rfs_threshold},
              {"hidden", cfg.hidden},
              {"clip", {cfg.clip.lo, cfg.clip.hi}},
              {"temperature", cfg.temperature},
              {"lambda", cfg.lambda},
              {"bias_init", optional_json(cfg.bias_init)},
              {"data",
               {{"classes", cfg.data.longtail.classes},
                {"imbalance_factor", cfg.data.longtail.imbalance_factor},
                {"n_head", cfg.data.longtail.n_head},
                {"dim", cfg.data.longtail.dim},
                {"mean_scale", cfg.data.longtail.mean_scale},
                {"test_fraction", cfg.data.test_fraction},
                {"rare_max", cfg.data.groups.rare_max},
                {"common_max", cfg.data.groups.common_max}}}};
    if (cfg.stage2) {
        j["stage2"] = {{"epochs", cfg.stage2->epochs},
                       {"lr", cfg.stage2->lr},
                       {"loss", to_string(cfg.stage2->loss)}};
    } else {
        j["stage2"] = nullptr;
    }
    return j;
}

json to_json(const RunReport& report) {
    json groups = json::array();
    for (FrequencyGroup g : report.class_groups) groups.push_back(to_string(g));
    json mean_abs = json::array();
    json db = json::array();
    for (std::size_t c = 0; c < report.positive_gradient.db.size(); ++c) {
        mean_abs.push_back(optional_json(report.positive_gradient.mean_abs[c]));
        db.push_back(optional_json(report.positive_gradient.db[c]));
    }
    const auto& gdb = report.positive_gradient.group_mean_db;
    return {{"loss", report.loss},
            {"seed", report.seed},
            {"epoch_loss", report.epoch_loss},
            {"stage2_epoch_loss", report.stage2_epoch_loss},
            {"metrics", metrics_json(report.metrics)},
            {"stage1_metrics",
             report.stage1_metrics ? metrics_json(*report.stage1_metrics) : json(nullptr)},
            {"train_class_counts", report.train_class_counts},
            {"class_groups", groups},
            {"weight_norms",
             {{"norms", report.weight_norms.norms},
              {"by_frequency", report.weight_norms.by_frequency},
              {"mean", report.weight_norms.mean},
              {"cv", report.weight_norms.cv}}},
            {"positive_gradient",
             {{"convention", report.db_convention},
              {"mean_abs", mean_abs},
              {"db", db},
              {"group_mean_db",
               {{"rare", optional_json(gdb[0])},
                {"common", optional_json(gdb[1])},
                {"frequent", optional_json(gdb[2])}}}}},
            {"wall_time_seconds", report.wall_time_seconds}};
}

RunReport report_from_json(const json& doc) {
    try {
        RunReport r;
        r.loss = doc.at("loss").get<std::string>();
        r.seed = doc.at("seed").get<std::uint64_t>();
        r.epoch_loss = doc.at("epoch_loss").get<std::vector<double>>();
        r.stage2_epoch_loss = doc.at("stage2_epoch_loss").get<std::vector<double>>();
        r.metrics = metrics_from_json(doc.at("metrics"));
        if (!doc.at("stage1_metrics").is_null()) r.stage1_metrics = metrics_from_json(doc.at("stage1_metrics"));
        r.train_class_counts = doc.at("train_class_counts").get<std::vector<long>>();
        for (const auto& g : doc.at("class_groups")) r.class_groups.push_back(group_from_string(g.get<std::string>()));
        const json& wn = doc.at("weight_norms");
        r.weight_norms.norms = wn.at("norms").get<std::vector<double>>();
        r.weight_norms.by_frequency = wn.at("by_frequency").get<std::vector<std::size_t>>();
        r.weight_norms.mean = wn.at("mean").get<double>();
        r.weight_norms.cv = wn.at("cv").get<double>();
        const json& pg = doc.at("positive_gradient");
        r.db_convention = pg.at("convention").get<std::string>();
        for (const auto& v : pg.at("mean_abs")) r.positive_gradient.mean_abs.push_back(optional_from(v));
        for (const auto& v : pg.at("db")) r.positive_gradient.db.push_back(optional_from(v));
        const json& gdb = pg.at("group_mean_db");
        r.positive_gradient.group_mean_db = {optional_from(gdb.at("rare")),
                                             optional_from(gdb.at("common")),
                                             optional_from(gdb.at("frequent"))};
        r.wall_time_seconds = doc.at("wall_time_seconds").get<double>();
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("report: ") + e.what());
    }
}

RunReport load_report(const std::string& path) {
    const std::string text = read_file(path);
    try {
        return report_from_json(json::parse(text));
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": invalid JSON: " + e.what());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::string epoch_metrics_csv(const RunReport& report) {
    std::string out = "stage,epoch,loss\n";
    for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
        out += "1," + std::to_string(e + 1) + "," + fmt(report.epoch_loss[e]) + "\n";
    }
    for (std::size_t e = 0; e < report.stage2_epoch_loss.size(); ++e) {
        out += "2," + std::to_string(e + 1) + "," + fmt(report.stage2_epoch_loss[e]) + "\n";
    }
    return out;
}

std::string class_metrics_csv(const RunReport& report) {
    std::string out = "class,group,train_count,accuracy,weight_norm,positive_grad_db\n";
    const std::size_t n = report.class_groups.size();
    for (std::size_t c = 0; c < n; ++c) {
        const auto& acc = report.metrics.per_class_accuracy.at(c);
        const auto& db = report.positive_gradient.db.at(c);
        out += std::to_string(c) + "," + to_string(report.class_groups[c]) + "," +
               std::to_string(report.train_class_counts.at(c)) + "," + (acc ? fmt(*acc) : "") +
               "," + fmt(report.weight_norms.norms.at(c)) + "," + (db ? fmt(*db) : "") + "\n";
    }
    return out;
}

json to_json(const SpatialGrid& grid) {
    json rows = json::array();
    for (std::size_t i = 0; i < grid.grid_h; ++i) {
        const auto r = grid.cells.row(i);
        rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    json j = {{"grid_h", grid.grid_h}, {"grid_w", grid.grid_w}, {"kind", to_string(grid.kind)},
              {"cells", rows}};
    if (!grid.empty_mask.empty()) {
        json mask = json::array();
        for (std::size_t i = 0; i < grid.grid_h; ++i) {
            json row = json::array();
            for (std::size_t jx = 0; jx < grid.grid_w; ++jx) {
                row.push_back(grid.empty_mask[i * grid.grid_w + jx] != 0);
            }
            mask.push_back(row);
        }
        j["empty_mask"] = mask;
    }
    return j;
}

json to_json(const KLResult& kl) {
    return {{"direction", "KL(P || Q)"},
            {"value", kl.value},
            {"support_cells", kl.support_cells},
            {"smoothing_eps", kl.smoothing_eps}};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(path + ": cannot write file");
    out << contents;
}

}  // namespace gol

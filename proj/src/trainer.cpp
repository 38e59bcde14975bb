#include "gol/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "gol/error.hpp"

namespace gol {

std::string to_string(SamplerKind kind) {
    return kind == SamplerKind::random ? "random" : "repeat_factor";
}

SamplerKind sampler_kind_from_string(std::string_view name) {
    if (name == "random") return SamplerKind::random;
    if (name == "repeat_factor") return SamplerKind::repeat_factor;
    throw ParseError("unknown sampler \"" + std::string(name) + "\"");
}

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw Error("lr must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw Error("momentum must lie in [0, 1)");
    if (batch_size < 1) throw Error("batch_size must be at least 1");
    if (epochs < 0) throw Error("epochs must be non-negative");
    if (weight_decay < 0.0) throw Error("weight_decay must be non-negative");
    if (!(clip.lo < clip.hi)) throw Error("clip range must satisfy lo < hi");
    if (!(temperature > 0.0)) throw Error("temperature must be positive");
    if (!(lambda > 0.0)) throw Error("lambda must be positive");
    if (sampler == SamplerKind::repeat_factor && !(rfs_threshold > 0.0 && rfs_threshold <= 1.0)) {
        throw Error("rfs_threshold must lie in (0, 1]");
    }
    if (stage2) {
        if (stage2->epochs < 0) throw Error("stage2.epochs must be non-negative");
        if (!(stage2->lr > 0.0)) throw Error("stage2.lr must be positive");
    }
    if (!(data.test_fraction > 0.0 && data.test_fraction < 1.0)) {
        throw Error("data.test_fraction must lie in (0, 1)");
    }
}

bool same_results(const RunReport& a, const RunReport& b) {
    auto same_stats = [](const PositiveGradientStats& x, const PositiveGradientStats& y) {
        return x.mean_abs == y.mean_abs && x.db == y.db && x.group_mean_db == y.group_mean_db;
    };
    return a.loss == b.loss && a.seed == b.seed && a.epoch_loss == b.epoch_loss &&
           a.stage2_epoch_loss == b.stage2_epoch_loss && a.metrics == b.metrics &&
           a.stage1_metrics == b.stage1_metrics && a.train_class_counts == b.train_class_counts &&
           a.class_groups == b.class_groups && a.weight_norms == b.weight_norms &&
           same_stats(a.positive_gradient, b.positive_gradient);
}

namespace {

// Independent generator per purpose, derived from the run seed.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t purpose) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(purpose)};
    return std::mt19937_64(seq);
}

constexpr double kBaselineHeadStd = 0.01;

enum Stream : std::uint64_t { kInit = 1, kShuffle = 2, kSplit = 3, kStage2Init = 4 };

ClassifierParams head_init(std::size_t feature_dim, std::size_t classes, LossKind kind,
                           const TrainConfig& cfg, std::mt19937_64& rng) {
    if (uses_gumbel(kind)) {
        ClassifierInitOptions opts;
        opts.bias_override = cfg.bias_init;
        return init_classifier(feature_dim, classes, opts);
    }
    return normal_classifier(feature_dim, classes, kBaselineHeadStd, rng);
}

void sgd_step(std::span<double> params, std::span<double> velocity, std::span<const double> grads,
              const TrainConfig& cfg, double lr) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        velocity[i] = cfg.momentum * velocity[i] - lr * (grads[i] + cfg.weight_decay * params[i]);
        params[i] += velocity[i];
    }
}

struct Velocity {
    std::vector<double> hidden_w, hidden_b, cls_w, cls_b;

    explicit Velocity(const Model& m)
        : cls_w(m.classifier.weights.size(), 0.0), cls_b(m.classifier.bias.size(), 0.0) {
        if (m.hidden) {
            hidden_w.assign(m.hidden->weights.size(), 0.0);
            hidden_b.assign(m.hidden->bias.size(), 0.0);
        }
    }
};

std::vector<std::size_t> epoch_order(std::size_t n, const TrainConfig& cfg,
                                     const std::vector<double>& repeat, std::mt19937_64& rng) {
    std::vector<std::size_t> order;
    if (cfg.sampler == SamplerKind::repeat_factor) {
        order = expand_repeat_factors(repeat, rng);
    } else {
        order.resize(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
    }
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

FitOutput run_sgd(Model& model, const Matrix& features, std::span<const int> labels,
                  const TrainConfig& cfg, const LossSpec& spec, int epochs, double lr,
                  const ClassFrequencyTable& freq, std::mt19937_64& rng) {
    FitOutput out{{}, PositiveGradientAccumulator(model.class_count())};
    std::vector<double> repeat;
    if (cfg.sampler == SamplerKind::repeat_factor) {
        const auto cat = category_repeat_factors(freq, cfg.rfs_threshold);
        std::vector<std::vector<std::size_t>> image_cats(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            image_cats[i] = {static_cast<std::size_t>(labels[i])};
        }
        repeat = image_repeat_factors(image_cats, cat);
    }
    Velocity vel(model);
    for (int epoch = 1; epoch <= epochs; ++epoch) {
        const auto order = epoch_order(labels.size(), cfg, repeat, rng);
        double loss_sum = 0.0;
        long step = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            ++step;
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            const std::span<const std::size_t> rows(order.data() + start, end - start);
            BatchResult batch = batch_loss_grad(model, spec, features, labels, rows);
            if (!std::isfinite(batch.loss)) {
                throw DivergenceError(epoch, step);
            }
            for (std::size_t b = 0; b < rows.size(); ++b) {
                out.positive.add(static_cast<std::size_t>(labels[rows[b]]), batch.positive_grad[b]);
                loss_sum += batch.per_sample_loss[b];
            }
            sgd_step(model.classifier.weights.flat(), vel.cls_w,
                     batch.grads.classifier.weights.flat(), cfg, lr);
            sgd_step(model.classifier.bias, vel.cls_b, batch.grads.classifier.bias, cfg, lr);
            if (model.hidden) {
                sgd_step(model.hidden->weights.flat(), vel.hidden_w,
                         batch.grads.hidden->weights.flat(), cfg, lr);
                sgd_step(model.hidden->bias, vel.hidden_b, batch.grads.hidden->bias, cfg, lr);
            }
        }
        const double mean = loss_sum / static_cast<double>(order.size());
        if (!std::isfinite(mean)) throw DivergenceError(epoch, step);
        out.epoch_loss.push_back(mean);
    }
    return out;
}

}  // namespace

Model init_model(std::size_t input_dim, std::size_t class_count, const TrainConfig& cfg) {
    auto rng = stream(cfg.seed, kInit);
    Model model;
    model.activation = cfg.loss;
    model.clip = cfg.clip;
    model.temperature = Temperature(cfg.temperature);
    std::size_t feature_dim = input_dim;
    if (cfg.hidden > 0) {
        model.hidden = fan_in_hidden(input_dim, cfg.hidden, rng);
        feature_dim = cfg.hidden;
    }
    model.classifier = head_init(feature_dim, class_count, cfg.loss, cfg, rng);
    return model;
}

LossSpec loss_spec(const TrainConfig& cfg, LossKind kind, const ClassFrequencyTable& freq) {
    return {kind, cfg.clip, Temperature(cfg.temperature), &freq, cfg.lambda};
}

FitOutput fit(Model& model, const Dataset& train, const TrainConfig& cfg,
              const ClassFrequencyTable& freq) {
    cfg.validate();
    auto rng = stream(cfg.seed, kShuffle);
    return run_sgd(model, train.features, train.labels, cfg, loss_spec(cfg, cfg.loss, freq),
                   cfg.epochs, cfg.lr, freq, rng);
}

Model retrain_classifier(const Model& model, const Dataset& train, const TrainConfig& cfg,
                         const ClassFrequencyTable& freq, FitOutput* out) {
    if (!cfg.stage2) {
        throw Error("stage2 missing from training config");
    }
    cfg.validate();
    const Stage2Config& s2 = *cfg.stage2;

    // Frozen features are computed once; the head is trained as a linear model on them.
    Matrix features(train.size(), model.feature_dim());
    const auto n = static_cast<long>(train.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        model.embed(train.features.row(static_cast<std::size_t>(i)),
                    features.row(static_cast<std::size_t>(i)));
    }

    auto init_rng = stream(cfg.seed, kStage2Init);
    Model head;
    head.activation = s2.loss;
    head.clip = cfg.clip;
    head.temperature = Temperature(cfg.temperature);
    head.classifier = head_init(model.feature_dim(), model.class_count(), s2.loss, cfg, init_rng);

    auto rng = stream(cfg.seed + 1, kShuffle);
    FitOutput fitted = run_sgd(head, features, train.labels, cfg, loss_spec(cfg, s2.loss, freq),
                               s2.epochs, s2.lr, freq, rng);
    if (out != nullptr) *out = std::move(fitted);

    Model result = model;
    result.classifier = std::move(head.classifier);
    result.activation = s2.loss;
    return result;
}

EvalMetrics evaluate_predictions(std::span<const int> predicted, std::span<const int> truth,
                                 const ClassFrequencyTable& freq) {
    if (predicted.size() != truth.size()) {
        throw Error("prediction and label counts differ");
    }
    const std::size_t classes = freq.size();
    std::vector<long> hits(classes, 0), totals(classes, 0);
    long correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto y = static_cast<std::size_t>(truth[i]);
        if (y >= classes) throw Error("label " + std::to_string(truth[i]) + " out of range");
        ++totals[y];
        if (predicted[i] == truth[i]) {
            ++hits[y];
            ++correct;
        }
    }
    EvalMetrics m;
    m.per_class_accuracy.resize(classes);
    std::array<double, 3> group_sum{};
    std::array<long, 3> group_n{};
    double class_sum = 0.0;
    long present = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        if (totals[c] == 0) continue;
        const double acc = static_cast<double>(hits[c]) / static_cast<double>(totals[c]);
        m.per_class_accuracy[c] = acc;
        class_sum += acc;
        ++present;
        const auto g = static_cast<std::size_t>(freq.group(c));
        group_sum[g] += acc;
        ++group_n[g];
    }
    for (std::size_t g = 0; g < 3; ++g) {
        if (group_n[g] > 0) m.group_accuracy[g] = group_sum[g] / static_cast<double>(group_n[g]);
    }
    m.overall_accuracy = present > 0 ? class_sum / static_cast<double>(present) : 0.0;
    m.sample_accuracy =
        truth.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(truth.size());
    return m;
}

EvalMetrics evaluate(const Model& model, const Dataset& split, const ClassFrequencyTable& freq) {
    std::vector<int> predicted(split.size());
    const auto n = static_cast<long>(split.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        predicted[static_cast<std::size_t>(i)] =
            model.predict(split.features.row(static_cast<std::size_t>(i)));
    }
    return evaluate_predictions(predicted, split.labels, freq);
}

TrainResult train(const SyntheticDataset& data, const TrainConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const Split split = stratified_split(data, cfg.data.test_fraction, cfg.seed);
    const ClassFrequencyTable freq =
        ClassFrequencyTable::from_labels(split.train.labels, data.class_count, cfg.data.groups);

    TrainResult result;
    result.model = init_model(data.dim(), data.class_count, cfg);
    FitOutput stage1 = fit(result.model, split.train, cfg, freq);

    RunReport& report = result.report;
    report.loss = to_string(cfg.loss);
    report.seed = cfg.seed;
    report.epoch_loss = std::move(stage1.epoch_loss);
    PositiveGradientAccumulator positive = std::move(stage1.positive);

    if (cfg.stage2) {
        report.stage1_metrics = evaluate(result.model, split.test, freq);
        FitOutput stage2;
        result.model = retrain_classifier(result.model, split.train, cfg, freq, &stage2);
        report.stage2_epoch_loss = std::move(stage2.epoch_loss);
        report.loss += "+" + to_string(cfg.stage2->loss);
        // Gradient statistics describe the head that is finally used.
        positive = std::move(stage2.positive);
    }

    report.metrics = evaluate(result.model, split.test, freq);
    for (std::size_t c = 0; c < freq.size(); ++c) {
        report.train_class_counts.push_back(freq[c].image_count);
        report.class_groups.push_back(freq.group(c));
    }
    report.weight_norms = weight_norm_report(result.model.classifier, freq);
    report.positive_gradient = positive_gradient_stats(positive, freq);
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

SyntheticDataset make_dataset(const TrainConfig& cfg) {
    LongtailSpec spec = cfg.data.longtail;
    spec.seed = cfg.seed;
    return make_longtail(spec);
}

TrainResult run_experiment(const TrainConfig& cfg) { return train(make_dataset(cfg), cfg); }

}  // namespace gol

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gol/analysis.hpp"
#include "gol/batch_kernels.hpp"
#include "gol/frequency.hpp"
#include "gol/longtail_data.hpp"
#include "gol/losses.hpp"
#include "gol/model.hpp"

namespace gol {

enum class SamplerKind { random, repeat_factor };

std::string to_string(SamplerKind kind);
SamplerKind sampler_kind_from_string(std::string_view name);

// Classifier-only retraining on frozen features.
struct Stage2Config {
    int epochs = 12;
    double lr = 1e-2;
    LossKind loss = LossKind::gumbel;
};

struct DataConfig {
    LongtailSpec longtail{};
    double test_fraction = 0.2;
    GroupThresholds groups{};
};

struct TrainConfig {
    LossKind loss = LossKind::softmax_ce;
    int epochs = 12;
    std::size_t batch_size = 64;
    double lr = 0.02;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    std::uint64_t seed = 0;
    SamplerKind sampler = SamplerKind::random;
    double rfs_threshold = 0.001;
    // 0 trains a linear classifier on the raw features.
    std::size_t hidden = 64;
    ClipRange clip{};
    double temperature = 1.0;
    double lambda = 0.0011;
    // Fixed classifier bias for the Gumbel paths instead of -log(log C).
    std::optional<double> bias_init;
    std::optional<Stage2Config> stage2;
    DataConfig data{};

    // Throws Error on out-of-range fields.
    void validate() const;
};

struct EvalMetrics {
    std::vector<std::optional<double>> per_class_accuracy;  // nullopt: class absent from split
    std::array<std::optional<double>, 3> group_accuracy{};  // indexed by FrequencyGroup
    double overall_accuracy = 0.0;  // mean of per-class accuracies
    double sample_accuracy = 0.0;   // top-1 over all samples

    bool operator==(const EvalMetrics&) const = default;
};

struct RunReport {
    std::string loss;
    std::uint64_t seed = 0;
    std::vector<double> epoch_loss;
    std::vector<double> stage2_epoch_loss;
    EvalMetrics metrics;
    std::optional<EvalMetrics> stage1_metrics;
    std::vector<long> train_class_counts;
    std::vector<FrequencyGroup> class_groups;
    WeightNormReport weight_norms;
    PositiveGradientStats positive_gradient;
    std::string db_convention = "10*log10(mean |dL/dq|)";
    double wall_time_seconds = 0.0;
};

// Everything in a report except the wall time.
bool same_results(const RunReport& a, const RunReport& b);

struct TrainResult {
    Model model;
    RunReport report;
};

// Initial model: fan-in hidden layer; Gumbel-family heads use the
// zero-gradient initialization, others N(0, 0.01^2) weights and zero bias.
Model init_model(std::size_t input_dim, std::size_t class_count, const TrainConfig& cfg);

LossSpec loss_spec(const TrainConfig& cfg, LossKind kind, const ClassFrequencyTable& freq);

// SGD with momentum on `train`. Fills epoch_loss and positive gradients.
// Throws DivergenceError on a non-finite batch loss.
struct FitOutput {
    std::vector<double> epoch_loss;
    PositiveGradientAccumulator positive;
};
FitOutput fit(Model& model, const Dataset& train, const TrainConfig& cfg,
              const ClassFrequencyTable& freq);

// Freezes the hidden layer, re-initializes the classifier and trains it
// with cfg.stage2. Throws if cfg.stage2 is unset.
Model retrain_classifier(const Model& model, const Dataset& train, const TrainConfig& cfg,
                         const ClassFrequencyTable& freq, FitOutput* out = nullptr);

EvalMetrics evaluate_predictions(std::span<const int> predicted, std::span<const int> truth,
                                 const ClassFrequencyTable& freq);
EvalMetrics evaluate(const Model& model, const Dataset& split, const ClassFrequencyTable& freq);

// Stratified split, stage-1 fit, optional stage 2, evaluation on the test split.
TrainResult train(const SyntheticDataset& data, const TrainConfig& cfg);
// Generates the synthetic dataset from cfg.data (seeded by cfg.seed) and trains.
TrainResult run_experiment(const TrainConfig& cfg);
SyntheticDataset make_dataset(const TrainConfig& cfg);

}  // namespace gol

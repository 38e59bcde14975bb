#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "gol/activation.hpp"
#include "gol/frequency.hpp"

namespace gol {

using TargetVector = std::vector<int>;
using WeightVector = std::vector<double>;

struct LossBreakdown {
    double total = 0.0;
    std::vector<double> per_class;
    std::vector<double> grad;  // dL/dq per class
};

// Loss and derivative for one binary (one-vs-all) output.
struct LossTerm {
    double loss = 0.0;
    double grad = 0.0;
};

LossTerm gumbel_term(double q, int y, Temperature t = {});
LossTerm sigmoid_term(double q, int y);

// Sum over classes of the Gumbel cross-entropy. q is expected to be clipped.
LossBreakdown gumbel_loss(std::span<const double> q, std::span<const int> y, Temperature t = {});
LossBreakdown sigmoid_bce(std::span<const double> q, std::span<const int> y);
// y must be one-hot.
LossBreakdown softmax_ce(std::span<const double> q, std::span<const int> y);

// Inputs to the DropLoss background branch. The two Bernoulli means are
// the shares of foreground proposals whose categories are rare+common and
// frequent respectively.
struct DropState {
    double lambda = 0.0011;
    double mu_rare_common = 0.0;
    double mu_frequent = 0.0;
    std::uint64_t rng_seed = 0;

    static DropState from_group_counts(long n_rare, long n_common, long n_frequent,
                                       double lambda, std::uint64_t seed);
};

// Foreground: w_j = 1 - T(f_j)(1 - y_j). Background: w_j ~ Bernoulli(mu_{f_j}).
WeightVector droploss_weights(std::span<const int> y, const ClassFrequencyTable& freq,
                              bool is_foreground, const DropState& state, std::mt19937_64& rng);
// Seeds a fresh generator from state.rng_seed.
WeightVector droploss_weights(std::span<const int> y, const ClassFrequencyTable& freq,
                              bool is_foreground, const DropState& state);

// Deterministic EQL weights: w_j = 1 - E(r) T(f_j)(1 - y_j).
WeightVector eql_weights(std::span<const int> y, const ClassFrequencyTable& freq,
                         bool is_foreground, double lambda);

// Gumbel loss with per-class weights in [0,1]; classes with w_j = 0 are
// excluded (zero loss, zero gradient).
LossBreakdown gol_loss(std::span<const double> q, std::span<const int> y,
                       std::span<const double> weights, Temperature t = {});
LossBreakdown gol_loss(std::span<const double> q, std::span<const int> y,
                       const ClassFrequencyTable& freq, bool is_foreground, const DropState& state);

// Running sum of |dL/dq| over positive (y = 1) outputs, per class.
class PositiveGradientAccumulator {
public:
    explicit PositiveGradientAccumulator(std::size_t class_count = 0)
        : sum_abs_(class_count, 0.0), count_(class_count, 0) {}

    void add(std::size_t cls, double grad);
    void merge(const PositiveGradientAccumulator& other);

    std::size_t size() const noexcept { return sum_abs_.size(); }
    double sum_abs(std::size_t c) const { return sum_abs_.at(c); }
    long count(std::size_t c) const { return count_.at(c); }

private:
    std::vector<double> sum_abs_;
    std::vector<long> count_;
};

// Power convention: dB = 10 log10(mean |g|).
struct PositiveGradientStats {
    std::vector<std::optional<double>> mean_abs;
    std::vector<std::optional<double>> db;
    std::array<std::optional<double>, 3> group_mean_db{};  // indexed by FrequencyGroup
};

double to_db(double magnitude);

PositiveGradientStats positive_gradient_stats(const PositiveGradientAccumulator& acc,
                                              const ClassFrequencyTable& freq);
// grads[c] holds the positive-sample gradients observed for class c.
PositiveGradientStats positive_gradient_stats(std::span<const std::vector<double>> grads,
                                              const ClassFrequencyTable& freq);

}  // namespace gol

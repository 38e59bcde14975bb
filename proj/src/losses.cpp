#include "gol/losses.hpp"

#include <cmath>
#include <string>

#include "gol/error.hpp"

namespace gol {

namespace {

void check_inputs(std::span<const double> q, std::span<const int> y) {
    if (q.size() != y.size()) {
        throw Error("length mismatch: " + std::to_string(q.size()) + " scores vs " +
                    std::to_string(y.size()) + " targets");
    }
    for (int v : y) {
        if (v != 0 && v != 1) {
            throw Error("target entries must be 0 or 1, got " + std::to_string(v));
        }
    }
}

void check_frequency(std::size_t classes, const ClassFrequencyTable& freq, double lambda) {
    if (!(lambda > 0.0)) {
        throw Error("frequency threshold lambda must be positive");
    }
    if (freq.size() < classes) {
        throw Error("frequency table covers " + std::to_string(freq.size()) + " classes, need " +
                    std::to_string(classes));
    }
}

}  // namespace

LossTerm gumbel_term(double q, int y, Temperature t) {
    const double s = t.sigma();
    const double a = std::exp(-q / s);
    if (y == 1) {
        // -log(exp(-a)) = a
        return {a, -a / s};
    }
    // d/dq -log(1 - exp(-a)) = a exp(-a) / (1 - exp(-a)) / s, i.e. a / (exp(a) - 1) / s
    return {-log1mexp(a), a * std::exp(-a) / -std::expm1(-a) / s};
}

LossTerm sigmoid_term(double q, int y) {
    if (y == 1) {
        return {softplus(-q), -sigmoid(-q)};
    }
    return {softplus(q), sigmoid(q)};
}

LossBreakdown gumbel_loss(std::span<const double> q, std::span<const int> y, Temperature t) {
    check_inputs(q, y);
    LossBreakdown out{0.0, std::vector<double>(q.size()), std::vector<double>(q.size())};
    for (std::size_t i = 0; i < q.size(); ++i) {
        const LossTerm term = gumbel_term(q[i], y[i], t);
        out.per_class[i] = term.loss;
        out.grad[i] = term.grad;
        out.total += term.loss;
    }
    return out;
}

LossBreakdown sigmoid_bce(std::span<const double> q, std::span<const int> y) {
    check_inputs(q, y);
    LossBreakdown out{0.0, std::vector<double>(q.size()), std::vector<double>(q.size())};
    for (std::size_t i = 0; i < q.size(); ++i) {
        const LossTerm term = sigmoid_term(q[i], y[i]);
        out.per_class[i] = term.loss;
        out.grad[i] = term.grad;
        out.total += term.loss;
    }
    return out;
}

LossBreakdown softmax_ce(std::span<const double> q, std::span<const int> y) {
    check_inputs(q, y);
    std::size_t positives = 0;
    for (int v : y) positives += static_cast<std::size_t>(v);
    if (positives != 1) {
        throw Error("softmax cross-entropy needs a one-hot target, got " +
                    std::to_string(positives) + " positive entries");
    }
    std::vector<double> logp(q.size());
    log_softmax(q, logp);
    LossBreakdown out{0.0, std::vector<double>(q.size(), 0.0), std::vector<double>(q.size())};
    for (std::size_t i = 0; i < q.size(); ++i) {
        out.grad[i] = std::exp(logp[i]) - y[i];
        if (y[i] == 1) {
            out.per_class[i] = -logp[i];
            out.total = -logp[i];
        }
    }
    return out;
}

DropState DropState::from_group_counts(long n_rare, long n_common, long n_frequent, double lambda,
                                       std::uint64_t seed) {
    const long n_all = n_rare + n_common + n_frequent;
    if (n_rare < 0 || n_common < 0 || n_frequent < 0 || n_all == 0) {
        throw Error("drop state needs non-negative group counts with a positive total");
    }
    DropState s;
    s.lambda = lambda;
    s.mu_rare_common = static_cast<double>(n_rare + n_common) / static_cast<double>(n_all);
    s.mu_frequent = static_cast<double>(n_frequent) / static_cast<double>(n_all);
    s.rng_seed = seed;
    return s;
}

WeightVector droploss_weights(std::span<const int> y, const ClassFrequencyTable& freq,
                              bool is_foreground, const DropState& state, std::mt19937_64& rng) {
    check_frequency(y.size(), freq, state.lambda);
    WeightVector w(y.size());
    if (is_foreground) {
        for (std::size_t j = 0; j < y.size(); ++j) {
            const double tail = freq.is_tail(j, state.lambda) ? 1.0 : 0.0;
            w[j] = 1.0 - tail * (1.0 - y[j]);
        }
        return w;
    }
    for (double mu : {state.mu_rare_common, state.mu_frequent}) {
        if (!(mu >= 0.0 && mu <= 1.0)) {
            throw Error("drop state Bernoulli mean outside [0,1]");
        }
    }
    std::bernoulli_distribution tail_draw(state.mu_rare_common);
    std::bernoulli_distribution head_draw(state.mu_frequent);
    for (std::size_t j = 0; j < y.size(); ++j) {
        const bool keep = freq.is_tail(j, state.lambda) ? tail_draw(rng) : head_draw(rng);
        w[j] = keep ? 1.0 : 0.0;
    }
    return w;
}

WeightVector droploss_weights(std::span<const int> y, const ClassFrequencyTable& freq,
                              bool is_foreground, const DropState& state) {
    std::mt19937_64 rng(state.rng_seed);
    return droploss_weights(y, freq, is_foreground, state, rng);
}

WeightVector eql_weights(std::span<const int> y, const ClassFrequencyTable& freq,
                         bool is_foreground, double lambda) {
    check_frequency(y.size(), freq, lambda);
    WeightVector w(y.size(), 1.0);
    if (!is_foreground) return w;
    for (std::size_t j = 0; j < y.size(); ++j) {
        const double tail = freq.is_tail(j, lambda) ? 1.0 : 0.0;
        w[j] = 1.0 - tail * (1.0 - y[j]);
    }
    return w;
}

LossBreakdown gol_loss(std::span<const double> q, std::span<const int> y,
                       std::span<const double> weights, Temperature t) {
    check_inputs(q, y);
    if (weights.size() != q.size()) {
        throw Error("length mismatch: " + std::to_string(weights.size()) + " weights vs " +
                    std::to_string(q.size()) + " scores");
    }
    LossBreakdown out{0.0, std::vector<double>(q.size(), 0.0), std::vector<double>(q.size(), 0.0)};
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double w = weights[i];
        if (!(w >= 0.0 && w <= 1.0)) {
            throw Error("class weights must lie in [0,1]");
        }
        if (w == 0.0) continue;
        const LossTerm term = gumbel_term(q[i], y[i], t);
        out.per_class[i] = w == 1.0 ? term.loss : term.loss - std::log(w);
        out.grad[i] = term.grad;
        out.total += out.per_class[i];
    }
    return out;
}

LossBreakdown gol_loss(std::span<const double> q, std::span<const int> y,
                       const ClassFrequencyTable& freq, bool is_foreground,
                       const DropState& state) {
    const WeightVector w = droploss_weights(y, freq, is_foreground, state);
    return gol_loss(q, y, w);
}

void PositiveGradientAccumulator::add(std::size_t cls, double grad) {
    sum_abs_.at(cls) += std::abs(grad);
    ++count_.at(cls);
}

void PositiveGradientAccumulator::merge(const PositiveGradientAccumulator& other) {
    if (other.size() != size()) {
        throw Error("cannot merge gradient accumulators of different class counts");
    }
    for (std::size_t c = 0; c < size(); ++c) {
        sum_abs_[c] += other.sum_abs_[c];
        count_[c] += other.count_[c];
    }
}

double to_db(double magnitude) { return 10.0 * std::log10(magnitude); }

PositiveGradientStats positive_gradient_stats(const PositiveGradientAccumulator& acc,
                                              const ClassFrequencyTable& freq) {
    if (freq.size() != acc.size()) {
        throw Error("frequency table and gradient accumulator class counts differ");
    }
    PositiveGradientStats stats;
    stats.mean_abs.resize(acc.size());
    stats.db.resize(acc.size());
    std::array<double, 3> group_sum{};
    std::array<long, 3> group_n{};
    for (std::size_t c = 0; c < acc.size(); ++c) {
        if (acc.count(c) == 0) continue;
        const double mean = acc.sum_abs(c) / static_cast<double>(acc.count(c));
        stats.mean_abs[c] = mean;
        stats.db[c] = to_db(mean);
        const auto g = static_cast<std::size_t>(freq.group(c));
        group_sum[g] += *stats.db[c];
        ++group_n[g];
    }
    for (std::size_t g = 0; g < 3; ++g) {
        if (group_n[g] > 0) stats.group_mean_db[g] = group_sum[g] / static_cast<double>(group_n[g]);
    }
    return stats;
}

PositiveGradientStats positive_gradient_stats(std::span<const std::vector<double>> grads,
                                              const ClassFrequencyTable& freq) {
    PositiveGradientAccumulator acc(grads.size());
    for (std::size_t c = 0; c < grads.size(); ++c) {
        for (double g : grads[c]) acc.add(c, g);
    }
    return positive_gradient_stats(acc, freq);
}

}  // namespace gol

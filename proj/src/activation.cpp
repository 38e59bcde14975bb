#include "gol/activation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gol/error.hpp"

namespace gol {

Temperature::Temperature(double sigma) : sigma_(sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw Error("temperature sigma must be positive and finite");
    }
}

double clip_score(double q, ClipRange range) {
    if (!std::isfinite(q)) {
        throw Error("non-finite score");
    }
    return std::clamp(q, range.lo, range.hi);
}

ScoreVector clip_scores(std::span<const double> q, ClipRange range) {
    ScoreVector out(q.size());
    std::transform(q.begin(), q.end(), out.begin(),
                   [range](double v) { return clip_score(v, range); });
    return out;
}

double sigmoid(double q) {
    if (q >= 0.0) {
        return 1.0 / (1.0 + std::exp(-q));
    }
    const double e = std::exp(q);
    return e / (1.0 + e);
}

double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double log_sigmoid(double q) { return -softplus(-q); }

void log_softmax(std::span<const double> q, std::span<double> out) {
    if (q.empty()) {
        throw Error("softmax of an empty score vector");
    }
    const double m = *std::max_element(q.begin(), q.end());
    double sum = 0.0;
    for (double v : q) {
        sum += std::exp(v - m);
    }
    const double lse = m + std::log(sum);
    for (std::size_t i = 0; i < q.size(); ++i) {
        out[i] = q[i] - lse;
    }
}

ProbVector softmax(std::span<const double> q) {
    if (q.empty()) {
        throw Error("softmax of an empty score vector");
    }
    const double m = *std::max_element(q.begin(), q.end());
    ProbVector p(q.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        p[i] = std::exp(q[i] - m);
        sum += p[i];
    }
    for (double& v : p) {
        v /= sum;
    }
    return p;
}

double gumbel_cdf(double q, Temperature t) { return std::exp(-std::exp(-q / t.sigma())); }

double gumbel_log_cdf(double q, Temperature t) { return -std::exp(-q / t.sigma()); }

double log1mexp(double a) {
    // Switch point ln 2 keeps both branches accurate (Maechler 2012).
    if (a <= std::numbers::ln2) {
        return std::log(-std::expm1(-a));
    }
    return std::log1p(-std::exp(-a));
}

double gumbel_log_survival(double q, Temperature t) { return log1mexp(std::exp(-q / t.sigma())); }

}  // namespace gol

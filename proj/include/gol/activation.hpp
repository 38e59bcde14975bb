#pragma once

#include <span>
#include <vector>

namespace gol {

using ScoreVector = std::vector<double>;
using ProbVector = std::vector<double>;

struct ClipRange {
    double lo = -4.0;
    double hi = 10.0;
};

// Scale of a non-standard Gumbel activation, exp(-exp(-q / sigma)).
class Temperature {
public:
    Temperature() = default;
    explicit Temperature(double sigma);

    double sigma() const noexcept { return sigma_; }

private:
    double sigma_ = 1.0;
};

// Elementwise clamp into [range.lo, range.hi]. Throws on NaN or infinite input.
ScoreVector clip_scores(std::span<const double> q, ClipRange range = {});
double clip_score(double q, ClipRange range = {});

double sigmoid(double q);
// log(sigmoid(q)), computed without cancellation for large |q|.
double log_sigmoid(double q);
// log(1 + exp(x))
double softplus(double x);

ProbVector softmax(std::span<const double> q);
// Writes log(softmax(q)) into out; out.size() must equal q.size().
void log_softmax(std::span<const double> q, std::span<double> out);

double gumbel_cdf(double q, Temperature t = {});
// log(gumbel_cdf(q)) = -exp(-q / sigma), analytic.
double gumbel_log_cdf(double q, Temperature t = {});
// log(1 - gumbel_cdf(q)), accurate in both tails.
double gumbel_log_survival(double q, Temperature t = {});

// log(1 - exp(-a)) for a > 0.
double log1mexp(double a);

}  // namespace gol

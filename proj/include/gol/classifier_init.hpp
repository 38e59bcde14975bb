#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "gol/matrix.hpp"

namespace gol {

// Final linear layer q = W^T z + b. weights is feature_dim x class_count;
// column k holds the weights of class k.
struct ClassifierParams {
    Matrix weights;
    std::vector<double> bias;

    std::size_t feature_dim() const noexcept { return weights.rows(); }
    std::size_t class_count() const noexcept { return weights.cols(); }

    bool operator==(const ClassifierParams&) const = default;
};

inline constexpr double kGumbelInitWeight = 0.001;

// Bias that zeroes the summed Gumbel-loss gradient when every score equals
// the bias and exactly one class is positive: b = -log(log(C)).
double solve_bias(long class_count);

// -exp(-b) + (C - 1) exp(-b) / (exp(exp(-b)) - 1). Throws for b < -4, where
// exp(exp(-b)) leaves the range the clipped activation is designed for.
double initial_total_gradient(long class_count, double bias);

struct ClassifierInitOptions {
    double weight = kGumbelInitWeight;
    // Replaces solve_bias(C), e.g. the rounded -2.0 used for 1204 classes.
    std::optional<double> bias_override;
};

ClassifierParams init_classifier(std::size_t feature_dim, std::size_t class_count,
                                 const ClassifierInitOptions& options = {});

}  // namespace gol

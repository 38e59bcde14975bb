#include "gol/classifier_init.hpp"

#include <cmath>
#include <string>

#include "gol/error.hpp"

namespace gol {

double solve_bias(long class_count) {
    if (class_count < 2) {
        throw Error("degenerate class count " + std::to_string(class_count));
    }
    return -std::log(std::log(static_cast<double>(class_count)));
}

double initial_total_gradient(long class_count, double bias) {
    if (class_count < 2) {
        throw Error("degenerate class count " + std::to_string(class_count));
    }
    if (!std::isfinite(bias) || bias < -4.0) {
        throw Error("initial gradient overflows for bias " + std::to_string(bias) +
                    " (must be >= -4)");
    }
    const double a = std::exp(-bias);
    return -a + static_cast<double>(class_count - 1) * a / std::expm1(a);
}

ClassifierParams init_classifier(std::size_t feature_dim, std::size_t class_count,
                                 const ClassifierInitOptions& options) {
    if (feature_dim == 0 || class_count == 0) {
        throw Error("classifier dimensions must be positive");
    }
    const double b = options.bias_override ? *options.bias_override
                                           : solve_bias(static_cast<long>(class_count));
    return {Matrix(feature_dim, class_count, options.weight), std::vector<double>(class_count, b)};
}

}  // namespace gol

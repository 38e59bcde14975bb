#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gol/classifier_init.hpp"
#include "gol/frequency.hpp"
#include "gol/longtail_data.hpp"
#include "gol/model.hpp"

namespace gol {

struct KLResult {
    double value = 0.0;              // nats
    std::size_t support_cells = 0;   // cells where P or Q is non-zero before smoothing
    double smoothing_eps = 0.0;
};

// KL(P || Q) after adding eps to every cell of both grids and renormalizing.
KLResult kl_divergence(const SpatialGrid& p, const SpatialGrid& q, double eps = 1e-12);

struct WeightNormReport {
    std::vector<double> norms;              // L2 norm of each class column
    std::vector<std::size_t> by_frequency;  // class indices, most images first
    double mean = 0.0;
    double cv = 0.0;  // population standard deviation / mean

    bool operator==(const WeightNormReport&) const = default;
};

WeightNormReport weight_norm_report(const ClassifierParams& params,
                                    const ClassFrequencyTable& freq);

// Maps an object feature vector to per-category probabilities, indexed like
// AnnotationTable::categories.
using Predictor = std::function<ProbVector(std::span<const double>)>;

// Joint grid with the class indicator of every object replaced by the
// predicted probability of the category: sum over objects in u of p / M.
SpatialGrid predicted_joint_grid(const Predictor& predict, const AnnotationTable& table,
                                 long category_id, std::size_t grid_h, std::size_t grid_w);
SpatialGrid predicted_joint_grid(const Model& model, const AnnotationTable& table,
                                 long category_id, std::size_t grid_h, std::size_t grid_w);

}  // namespace gol

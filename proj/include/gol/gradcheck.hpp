#pragma once

#include <span>
#include <string>
#include <vector>

#include "gol/model.hpp"

namespace gol {

inline constexpr double kGradCheckStep = 1e-5;

struct GradCheckRow {
    LossKind loss = LossKind::gumbel;
    double q = 0.0;
    int y = 0;
    std::vector<double> analytic;
    std::vector<double> numeric;
    // max|analytic - numeric| / max(max|analytic|, max|numeric|)
    double rel_error = 0.0;
};

// Central differences of the loss with respect to every score. Per-class
// losses use the single score q. Softmax CE uses scores [q, 0.5, -1] with the
// true class 0 when y = 1 and class 1 otherwise. gol runs with all weights 1.
GradCheckRow gradient_check(LossKind loss, double q, int y, double h = kGradCheckStep);

std::vector<GradCheckRow> gradient_check_grid(std::span<const LossKind> losses,
                                              std::span<const double> grid,
                                              double h = kGradCheckStep);

// Header plus one line per row: loss,q,y,analytic,numeric,rel_error.
// Multi-score rows report the component at index 0.
std::string gradcheck_csv(std::span<const GradCheckRow> rows);

}  // namespace gol

#include "gol/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "gol/error.hpp"

namespace gol {

KLResult kl_divergence(const SpatialGrid& p, const SpatialGrid& q, double eps) {
    if (p.grid_h != q.grid_h || p.grid_w != q.grid_w) {
        throw Error("grid dimensions differ: " + std::to_string(p.grid_h) + "x" +
                    std::to_string(p.grid_w) + " vs " + std::to_string(q.grid_h) + "x" +
                    std::to_string(q.grid_w));
    }
    if (!(eps > 0.0)) {
        throw Error("smoothing eps must be positive");
    }
    const auto pv = p.cells.flat();
    const auto qv = q.cells.flat();
    KLResult result;
    result.smoothing_eps = eps;
    double p_total = 0.0;
    double q_total = 0.0;
    for (std::size_t u = 0; u < pv.size(); ++u) {
        if (pv[u] < 0.0 || qv[u] < 0.0 || !std::isfinite(pv[u]) || !std::isfinite(qv[u])) {
            throw Error("grid cells must be finite and non-negative");
        }
        if (pv[u] > 0.0 || qv[u] > 0.0) ++result.support_cells;
        p_total += pv[u] + eps;
        q_total += qv[u] + eps;
    }
    double kl = 0.0;
    for (std::size_t u = 0; u < pv.size(); ++u) {
        const double ps = (pv[u] + eps) / p_total;
        const double qs = (qv[u] + eps) / q_total;
        kl += ps * std::log(ps / qs);
    }
    // Rounding can leave a tiny negative sum for nearly equal grids.
    result.value = std::max(kl, 0.0);
    return result;
}

WeightNormReport weight_norm_report(const ClassifierParams& params,
                                    const ClassFrequencyTable& freq) {
    const std::size_t classes = params.class_count();
    if (freq.size() != classes) {
        throw Error("frequency table has " + std::to_string(freq.size()) + " classes, classifier " +
                    std::to_string(classes));
    }
    WeightNormReport report;
    report.norms.assign(classes, 0.0);
    for (std::size_t i = 0; i < params.weights.rows(); ++i) {
        const auto row = params.weights.row(i);
        for (std::size_t c = 0; c < classes; ++c) report.norms[c] += row[c] * row[c];
    }
    for (double& n : report.norms) n = std::sqrt(n);

    report.by_frequency.resize(classes);
    std::iota(report.by_frequency.begin(), report.by_frequency.end(), std::size_t{0});
    std::stable_sort(report.by_frequency.begin(), report.by_frequency.end(),
                     [&](std::size_t a, std::size_t b) {
                         return freq[a].image_count > freq[b].image_count;
                     });

    const double n = static_cast<double>(classes);
    report.mean = std::accumulate(report.norms.begin(), report.norms.end(), 0.0) / n;
    double var = 0.0;
    for (double v : report.norms) var += (v - report.mean) * (v - report.mean);
    var /= n;
    report.cv = report.mean > 0.0 ? std::sqrt(var) / report.mean : 0.0;
    return report;
}

SpatialGrid predicted_joint_grid(const Predictor& predict, const AnnotationTable& table,
                                 long category_id, std::size_t grid_h, std::size_t grid_w) {
    if (grid_h == 0 || grid_w == 0) throw Error("grid dimensions must be at least 1");
    if (table.objects.empty()) throw Error("no objects");
    const std::size_t cls = table.category_index(category_id);
    std::unordered_map<long, std::size_t> images;
    for (std::size_t i = 0; i < table.images.size(); ++i) images.emplace(table.images[i].id, i);

    const std::size_t n = table.objects.size();
    std::vector<double> prob(n);
    std::vector<std::size_t> cell(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& obj = table.objects[k];
        if (obj.features.empty()) {
            throw Error("missing features for object " + std::to_string(k));
        }
        const auto it = images.find(obj.image_id);
        if (it == images.end()) throw Error("unknown image_id " + std::to_string(obj.image_id));
        const ImageInfo& img = table.images[it->second];
        cell[k] = cell_index(obj.cy / img.height, grid_h) * grid_w +
                  cell_index(obj.cx / img.width, grid_w);
    }
    const auto nl = static_cast<long>(n);
    bool bad_width = false;
#pragma omp parallel for schedule(static)
    for (long k = 0; k < nl; ++k) {
        const ProbVector p = predict(table.objects[static_cast<std::size_t>(k)].features);
        if (p.size() != table.categories.size()) {
#pragma omp critical
            bad_width = true;
            continue;
        }
        prob[static_cast<std::size_t>(k)] = p[cls];
    }
    if (bad_width) throw Error("predictor output does not match the category count");

    SpatialGrid grid{grid_h, grid_w, GridKind::joint, Matrix(grid_h, grid_w, 0.0), {}};
    auto cells = grid.cells.flat();
    std::vector<double> sums(grid_h * grid_w, 0.0);
    for (std::size_t k = 0; k < n; ++k) sums[cell[k]] += prob[k];
    const auto m = static_cast<double>(n);
    for (std::size_t u = 0; u < sums.size(); ++u) cells[u] = sums[u] / m;
    return grid;
}

SpatialGrid predicted_joint_grid(const Model& model, const AnnotationTable& table,
                                 long category_id, std::size_t grid_h, std::size_t grid_w) {
    const Predictor p = [&model](std::span<const double> x) { return model.predict_proba(x); };
    return predicted_joint_grid(p, table, category_id, grid_h, grid_w);
}

}  // namespace gol

#include <doctest.h>

#include <cmath>

#include "gol/analysis.hpp"
#include "gol/error.hpp"

using namespace gol;

namespace {

SpatialGrid grid(std::size_t h, std::size_t w, std::vector<double> values) {
    SpatialGrid g;
    g.grid_h = h;
    g.grid_w = w;
    g.kind = GridKind::joint;
    g.cells = Matrix(h, w, 0.0);
    for (std::size_t k = 0; k < values.size(); ++k) g.cells.flat()[k] = values[k];
    return g;
}

const std::string kData = GOL_TEST_DATA_DIR;

}  // namespace

TEST_CASE("KL divergence values") {
    const auto p = grid(1, 2, {0.5, 0.5});
    const auto q = grid(1, 2, {0.25, 0.75});
    // 0.5 ln 2 + 0.5 ln(2/3)
    CHECK(kl_divergence(p, q).value == doctest::Approx(0.14384103622589045).epsilon(1e-10));
    CHECK(kl_divergence(p, p).value == 0.0);
    CHECK(kl_divergence(q, p).value != doctest::Approx(kl_divergence(p, q).value));
    CHECK(kl_divergence(p, q).support_cells == 2);

    const auto sparse = grid(2, 2, {1.0, 0.0, 0.0, 0.0});
    const auto spread = grid(2, 2, {0.25, 0.25, 0.25, 0.25});
    const auto r = kl_divergence(sparse, spread);
    CHECK(r.value == doctest::Approx(std::log(4.0)).epsilon(1e-9));
    // Smoothing keeps the reverse direction finite: 0.25 ln 0.25 + 0.75 ln(0.25 / eps) to first order.
    const double eps = 1e-12;
    CHECK(kl_divergence(spread, sparse).value ==
          doctest::Approx(0.25 * std::log(0.25) + 0.75 * std::log(0.25 / eps)).epsilon(1e-9));
}

TEST_CASE("KL divergence is non-negative and rejects bad input") {
    const auto p = grid(2, 2, {0.1, 0.2, 0.3, 0.4});
    const auto q = grid(2, 2, {0.4, 0.3, 0.2, 0.1});
    CHECK(kl_divergence(p, q).value > 0.0);
    CHECK_THROWS_AS(kl_divergence(p, grid(1, 4, {0.25, 0.25, 0.25, 0.25})), Error);
    CHECK_THROWS_AS(kl_divergence(p, q, 0.0), Error);
    CHECK_THROWS_AS(kl_divergence(p, q, -1.0), Error);
}

TEST_CASE("weight-norm report") {
    ClassifierParams params{Matrix(2, 2, 0.0), {0.0, 0.0}};
    params.weights(0, 0) = 3.0;
    params.weights(1, 0) = 4.0;
    params.weights(1, 1) = 1.0;
    const auto freq = ClassFrequencyTable::from_counts(std::vector<long>{2, 40},
                                                       std::vector<long>{2, 40}, 42);
    const auto r = weight_norm_report(params, freq);
    CHECK(r.norms == std::vector<double>{5.0, 1.0});
    CHECK(r.mean == 3.0);
    CHECK(r.cv == doctest::Approx(2.0 / 3.0));
    CHECK(r.by_frequency == std::vector<std::size_t>{1, 0});
}

TEST_CASE("predicted joint grid") {
    auto table = load_annotations(kData + "/ten_objects.json");
    CHECK_THROWS_AS(predicted_joint_grid([](std::span<const double>) { return ProbVector{1, 0, 0}; },
                                         table, 1, 4, 4),
                    Error);
    // Features carry the one-hot category; a perfect predictor reproduces the joint grid.
    for (auto& obj : table.objects) {
        obj.features.assign(3, 0.0);
        obj.features[table.category_index(obj.category_id)] = 1.0;
    }
    const Predictor oracle = [](std::span<const double> x) { return ProbVector(x.begin(), x.end()); };
    for (const auto& cat : table.categories) {
        const auto pred = predicted_joint_grid(oracle, table, cat.id, 4, 4);
        CHECK(pred.cells == joint_grid(table, cat.id, 4, 4).cells);
    }
    const Predictor flat = [](std::span<const double>) { return ProbVector{0.5, 0.5, 0.5}; };
    const auto half = predicted_joint_grid(flat, table, 2, 4, 4);
    CHECK(half.sum() == doctest::Approx(0.5));
}

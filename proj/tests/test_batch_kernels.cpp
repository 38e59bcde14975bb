#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "gol/batch_kernels.hpp"
#include "gol/classifier_init.hpp"
#include "gol/losses.hpp"
#include "oracles.hpp"

using namespace gol;

namespace {

struct Fixture {
    Model model;
    Matrix features;
    std::vector<int> labels;
    std::vector<std::size_t> rows;
    ClassFrequencyTable freq;
};

Fixture make_fixture(LossKind kind, bool hidden, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::size_t n = 40, dim = 6, width = 9, classes = 5;
    Fixture f;
    if (hidden) f.model.hidden = fan_in_hidden(dim, width, rng);
    f.model.classifier = normal_classifier(hidden ? width : dim, classes, 0.3, rng);
    f.model.activation = kind;
    f.features = Matrix(n, dim, 0.0);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (double& v : f.features.flat()) v = nd(rng);
    for (std::size_t i = 0; i < n; ++i) f.labels.push_back(static_cast<int>(i % classes));
    // Shuffled subset with a repeat, as an epoch slice would look.
    f.rows = {3, 17, 0, 22, 9, 9, 31, 5, 38, 12, 27, 14};
    // Classes 0 and 1 fall below the 0.0011 image fraction.
    f.freq = ClassFrequencyTable::from_counts(std::vector<long>{1, 2, 50, 900, 9000},
                                              std::vector<long>{1, 2, 50, 900, 9000}, 10000);
    return f;
}

LossSpec spec_for(const Fixture& f, LossKind kind) {
    LossSpec s;
    s.kind = kind;
    s.freq = &f.freq;
    return s;
}

const LossKind kAllKinds[] = {LossKind::sigmoid_bce, LossKind::softmax_ce, LossKind::gumbel,
                              LossKind::gol, LossKind::eql_gumbel};

}  // namespace

TEST_CASE("parallel batch kernel equals the serial reference bitwise") {
    for (LossKind kind : kAllKinds) {
        for (bool hidden : {false, true}) {
            const auto f = make_fixture(kind, hidden, 5);
            const auto spec = spec_for(f, kind);
            const auto a = batch_loss_grad(f.model, spec, f.features, f.labels, f.rows);
            const auto b = reference::batch_loss_grad(f.model, spec, f.features, f.labels, f.rows);
            INFO(to_string(kind), " hidden=", hidden);
            CHECK(a.loss == b.loss);
            CHECK(a.per_sample_loss == b.per_sample_loss);
            CHECK(a.positive_grad == b.positive_grad);
            CHECK(a.grads.classifier == b.grads.classifier);
            CHECK(a.grads.hidden == b.grads.hidden);
        }
    }
}

TEST_CASE("batch gradients match finite differences on sampled parameters") {
    const double h = 1e-6;
    for (LossKind kind : kAllKinds) {
        auto f = make_fixture(kind, true, 21);
        const auto spec = spec_for(f, kind);
        const auto res = batch_loss_grad(f.model, spec, f.features, f.labels, f.rows);
        auto loss_at = [&]() {
            return reference::batch_loss_grad(f.model, spec, f.features, f.labels, f.rows).loss;
        };
        std::vector<double> analytic, numeric;
        // Five classifier parameters and five hidden-layer parameters.
        std::vector<double*> params;
        std::vector<double> grads;
        auto& W = f.model.classifier.weights;
        auto& W1 = f.model.hidden->weights;
        for (std::size_t k = 0; k < 4; ++k) {
            params.push_back(&W(k * 2, k));
            grads.push_back(res.grads.classifier.weights(k * 2, k));
        }
        params.push_back(&f.model.classifier.bias[3]);
        grads.push_back(res.grads.classifier.bias[3]);
        for (std::size_t k = 0; k < 4; ++k) {
            params.push_back(&W1(k, 2 * k));
            grads.push_back(res.grads.hidden->weights(k, 2 * k));
        }
        params.push_back(&f.model.hidden->bias[1]);
        grads.push_back(res.grads.hidden->bias[1]);
        for (std::size_t k = 0; k < params.size(); ++k) {
            const double x = *params[k];
            *params[k] = x + h;
            const double up = loss_at();
            *params[k] = x - h;
            const double down = loss_at();
            *params[k] = x;
            numeric.push_back((up - down) / (2.0 * h));
            analytic.push_back(grads[k]);
        }
        INFO(to_string(kind));
        CHECK(testing::relative_error(analytic, numeric) < 1e-4);
    }
}

TEST_CASE("gumbel clipping blocks gradient outside the range") {
    LossSpec spec;
    spec.kind = LossKind::gumbel;
    std::vector<double> dq(3);
    const std::vector<double> q{12.0, 0.5, -9.0};
    const double loss = sample_loss(spec, q, 0, dq);
    CHECK(dq[0] == 0.0);
    CHECK(dq[2] == 0.0);
    CHECK(dq[1] == gumbel_term(0.5, 0).grad);
    const double expected =
        gumbel_term(10.0, 1).loss + gumbel_term(0.5, 0).loss + gumbel_term(-4.0, 0).loss;
    CHECK(loss == doctest::Approx(expected).epsilon(1e-15));

    spec.kind = LossKind::softmax_ce;
    sample_loss(spec, q, 0, dq);
    CHECK(dq[0] != 0.0);
}

TEST_CASE("EQL drops rare negatives inside the batch loss") {
    const auto f = make_fixture(LossKind::eql_gumbel, false, 2);
    const auto spec = spec_for(f, LossKind::eql_gumbel);
    std::vector<double> dq(5);
    const std::vector<double> q{0.1, 0.2, 0.3, 0.4, 0.5};
    sample_loss(spec, q, 3, dq);
    CHECK(dq[0] == 0.0);
    CHECK(dq[1] == 0.0);
    CHECK(dq[2] != 0.0);
    CHECK(dq[3] < 0.0);
    sample_loss(spec, q, 0, dq);
    CHECK(dq[0] < 0.0);
    CHECK(dq[1] == 0.0);
}

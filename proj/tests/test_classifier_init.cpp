#include <doctest.h>

#include <cmath>

#include "gol/classifier_init.hpp"
#include "gol/error.hpp"

using namespace gol;

TEST_CASE("solve_bias reference values") {
    // -log(log C), 40-digit references
    CHECK(solve_bias(3) == doctest::Approx(-0.094047827616699016).epsilon(1e-14));
    CHECK(solve_bias(10) == doctest::Approx(-0.83403244524795578).epsilon(1e-14));
    CHECK(solve_bias(15) == doctest::Approx(-0.99622889295139486).epsilon(1e-14));
    CHECK(solve_bias(100) == doctest::Approx(-1.5271796258079011).epsilon(1e-14));
    CHECK(solve_bias(1204) == doctest::Approx(-1.9591654263942200).epsilon(1e-14));
    CHECK(solve_bias(100000) == doctest::Approx(-2.4434703576820560).epsilon(1e-14));
    CHECK(solve_bias(1204) >= -1.97);
    CHECK(solve_bias(1204) <= -1.95);
    CHECK_THROWS_WITH_AS(solve_bias(1), "degenerate class count 1", Error);
    CHECK_THROWS_AS(solve_bias(0), Error);
}

TEST_CASE("solve_bias is monotone decreasing in C") {
    double prev = solve_bias(2);
    for (long c = 3; c <= 5000; c += 7) {
        const double b = solve_bias(c);
        CHECK(b < prev);
        prev = b;
    }
}

TEST_CASE("the solved bias zeroes the initial total gradient") {
    for (long c : {2L, 3L, 10L, 100L, 1204L, 100000L}) {
        CHECK(std::abs(initial_total_gradient(c, solve_bias(c))) < 1e-9);
    }
    CHECK(initial_total_gradient(2, 0.0) == doctest::Approx(-0.41802329313067358).epsilon(1e-14));
    CHECK(initial_total_gradient(1204, 0.0) == doctest::Approx(699.11797836379970).epsilon(1e-14));
    CHECK_THROWS_AS(initial_total_gradient(10, -4.5), Error);
}

TEST_CASE("init_classifier fills weights and bias") {
    const auto p = init_classifier(5, 12);
    CHECK(p.feature_dim() == 5);
    CHECK(p.class_count() == 12);
    for (double w : p.weights.flat()) CHECK(w == kGumbelInitWeight);
    for (double b : p.bias) CHECK(b == solve_bias(12));

    const auto o = init_classifier(3, 1204, {0.0, -2.0});
    for (double w : o.weights.flat()) CHECK(w == 0.0);
    for (double b : o.bias) CHECK(b == -2.0);
    CHECK(init_classifier(5, 12) == p);
}

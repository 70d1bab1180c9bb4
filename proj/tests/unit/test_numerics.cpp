#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "crlab/numerics.hpp"

using namespace crlab::numerics;

TEST_CASE("gauss_legendre integrates polynomials of degree 2n-1 exactly") {
    for (std::size_t n : {1u, 2u, 5u, 12u, 40u}) {
        const auto rule = gauss_legendre(n);
        for (std::size_t d = 0; d <= 2 * n - 1; ++d) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += rule.weights[i] * std::pow(rule.nodes[i], static_cast<double>(d));
            const double exact = d % 2 ? 0.0 : 2.0 / (d + 1.0);
            CHECK(s == doctest::Approx(exact).epsilon(1e-13));
        }
    }
    CHECK_THROWS(gauss_legendre(0));
}

TEST_CASE("compensated sum recovers cancellation") {
    std::vector<double> v{1e16, 1.0, -1e16, 1.0};
    CHECK(compensated_sum(v) == 2.0);
}

TEST_CASE("adaptive quadrature on smooth and flat integrands") {
    const auto r = adaptive_gauss_legendre([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-14);
    CHECK(r.value == doctest::Approx(std::numbers::e - 1.0).epsilon(1e-14));
    const auto flat = adaptive_gauss_legendre(
        [](double t) { return t > 0.0 && t < 1.0 ? std::exp(-1.0 / (t * (1.0 - t))) : 0.0; }, 0.0, 1.0, 1e-13);
    const auto finer = adaptive_gauss_legendre(
        [](double t) { return t > 0.0 && t < 1.0 ? std::exp(-1.0 / (t * (1.0 - t))) : 0.0; }, 0.0, 1.0, 1e-15, 30);
    CHECK(std::abs(flat.value - finer.value) <= 1e-13 * finer.value);
}

TEST_CASE("safeguarded newton agrees with bisection") {
    const auto f = [](double x, double& v, double& d) {
        v = std::exp(2.0 * x) + 0.5 * std::exp(5.0 * x) - 1.3;
        d = 2.0 * std::exp(2.0 * x) + 2.5 * std::exp(5.0 * x);
    };
    const auto g = [](double x) { return std::exp(2.0 * x) + 0.5 * std::exp(5.0 * x) - 1.3; };
    const auto n = safeguarded_newton(f, -1.0, 1.0);
    const auto b = bisection(g, -1.0, 1.0, 1e-15);
    CHECK(std::abs(n.root - b.root) <= 1e-14);
    CHECK(std::abs(n.residual) <= 1e-15);

    // Reversed bracket and a flat start that would send plain Newton out of range.
    const auto atan_f = [](double x, double& v, double& d) {
        v = std::atan(x - 0.3);
        d = 1.0 / (1.0 + (x - 0.3) * (x - 0.3));
    };
    const auto r = safeguarded_newton(atan_f, 20.0, -15.0);
    CHECK(r.root == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(r.bisection_steps > 0);
    CHECK_THROWS_AS(safeguarded_newton(atan_f, 1.0, 2.0), BracketError);
}

TEST_CASE("symmetric bracket expansion") {
    const auto f = [](double s) { return std::exp(2.0 * s) - 1.5; };
    const Bracket b = expand_symmetric_bracket(f, 1e-3, 1.0);
    CHECK(f(b.lo) * f(b.hi) <= 0.0);
    CHECK_THROWS_WITH_AS(expand_symmetric_bracket(f, 1e-3, 0.1), doctest::Contains("bracket not found"), BracketError);
}

#include <doctest.h>

#include <cmath>

#include "crlab/diagnostics.hpp"
#include "crlab/spectrum.hpp"
#include "helpers.hpp"

using namespace crlab;

TEST_CASE("round sphere spectrum: ordering, eigenvalues and norms") {
    const SasakianModel m = make_weighted_sphere(1, 1, 32);
    const Spectrum spec = enumerate_modes(m, 20);
    REQUIRE(spec.size() == 20u * 23u / 2u);
    CHECK(spec[0].a == 0);
    CHECK(spec[0].b == 1);
    CHECK(spec[1].a == 1);
    CHECK(spec[1].b == 0);
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const EigenMode& e = spec[j];
        CHECK(e.index == j);
        CHECK(e.lambda == doctest::Approx(e.a + e.b));
        if (j > 0) CHECK(spec[j - 1].lambda <= e.lambda);
        const double oracle = testing::factorial_ratio(e.a, e.b);
        CHECK(std::abs(e.norm_sq - oracle) <= 1e-12 * oracle);
    }
}

TEST_CASE("weighted norms agree with direct integration") {
    const SasakianModel m = make_weighted_sphere(2, 3, 48);
    const Spectrum spec = enumerate_modes(m, 12);
    for (const auto& e : spec.modes()) {
        // int_0^1 u^a (1-u)^b / (p u + q (1-u))^2 du by an independent midpoint sum
        const int n = 200000;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double u = (i + 0.5) / n;
            const double d = 2 * u + 3 * (1 - u);
            acc += std::pow(u, e.a) * std::pow(1 - u, e.b) / (d * d);
        }
        acc /= n;
        CHECK(std::abs(e.norm_sq - acc) <= 1e-8 * acc);
    }
}

TEST_CASE("modes are orthonormal under the model quadrature") {
    const SasakianModel m = make_weighted_sphere(1, 2, 40);
    const Spectrum spec = enumerate_modes(m, 8);
    double worst = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const cplx g = integrate(m, [&](const ModelPoint& x) {
                return eval_mode(spec[i], x) * std::conj(eval_mode(spec[j], x));
            });
            worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
        }
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("eigenfunction of the Reeb field") {
    const SasakianModel m = make_weighted_sphere(2, 3, 8);
    const Spectrum spec = enumerate_modes(m, 15);
    const auto pts = sample_points(m, SampleScheme::QuasiRandom, 10, 5);
    for (const auto& x : pts) {
        for (const auto& e : spec.modes()) {
            // d/dt f(reeb_flow(x, t)) = i lambda f(x)
            const double h = 1e-5;
            const cplx d = (eval_mode(e, reeb_flow(m, x, h)) - eval_mode(e, reeb_flow(m, x, -h))) / (2 * h);
            const cplx f = eval_mode(e, x);
            CHECK(std::abs(d - cplx(0, e.lambda) * f) <= 1e-6 * (1 + std::abs(e.lambda * f)));
            const HolomorphicGradient g = eval_mode_gradient(e, x);
            CHECK(std::abs(m.reeb_vector(x).apply_holomorphic(g.dz, g.dw) - cplx(0, e.lambda) * f) <=
                  1e-12 * (1 + std::abs(e.lambda * f)));
        }
    }
}

TEST_CASE("extension to the cylinder and point values") {
    const SasakianModel m = make_weighted_sphere(1, 1, 8);
    const Spectrum spec = enumerate_modes(m, 4);
    const ModelPoint x = ModelPoint::from_ambient({0.6, 0.0}, {0.0, 0.8});
    for (const auto& e : spec.modes()) {
        const cplx f0 = eval_mode(e, x);
        const cplx direct = std::pow(x.z(), e.a) * std::pow(x.w(), e.b) / std::sqrt(e.norm_sq);
        CHECK(std::abs(f0 - direct) <= 1e-14);
        CHECK(std::abs(eval_mode(e, x, 0.3) - std::exp(0.3 * e.lambda) * f0) <= 1e-13);
        CHECK(mode_abs_sq(e, x) == doctest::Approx(std::norm(f0)).epsilon(1e-13));
    }
    // z^0 at z = 0 is 1, not nan
    const ModelPoint pole = ModelPoint::from_ambient({0, 0}, {1, 0});
    CHECK(std::abs(eval_mode(spec[0], pole) - 1.0 / std::sqrt(spec[0].norm_sq)) <= 1e-14);
}

TEST_CASE("abs_sq_jet matches finite differences of the homogeneous extension") {
    const SasakianModel m = make_weighted_sphere(1, 1, 8);
    const Spectrum spec = enumerate_modes(m, 5);
    const double U = 0.3;
    const double V = 0.7;
    const ModelPoint x = ModelPoint::from_ambient({std::sqrt(U), 0}, {0, std::sqrt(V)});
    for (const auto& e : spec.modes()) {
        const auto g = [&](double u, double v) {
            return std::pow(u, e.a) * std::pow(v, e.b) * std::pow(u + v, -(e.a + e.b)) / e.norm_sq;
        };
        const InvariantJet j = abs_sq_jet(e, x);
        const double h = 1e-4;
        CHECK(j.value == doctest::Approx(g(U, V)).epsilon(1e-13));
        CHECK(j.dU == doctest::Approx((g(U + h, V) - g(U - h, V)) / (2 * h)).epsilon(1e-6));
        CHECK(j.dV == doctest::Approx((g(U, V + h) - g(U, V - h)) / (2 * h)).epsilon(1e-6));
        const double uu = (g(U + h, V) - 2 * g(U, V) + g(U - h, V)) / (h * h);
        const double uv = (g(U + h, V + h) - g(U + h, V - h) - g(U - h, V + h) + g(U - h, V - h)) / (4 * h * h);
        CHECK(std::abs(j.dUU - uu) <= 1e-5 * (1 + std::abs(uu)));
        CHECK(std::abs(j.dUV - uv) <= 1e-5 * (1 + std::abs(uv)));
    }
}

TEST_CASE("counting function") {
    const SasakianModel m = make_weighted_sphere(1, 1, 16);
    const Spectrum spec = enumerate_modes(m, 128);
    std::vector<std::pair<double, double>> pairs;
    std::vector<std::pair<double, double>> oracle;
    for (int k : {8, 16, 32, 64, 128}) {
        CHECK(spec.count_at_most(k) == static_cast<std::size_t>(k * (k + 3) / 2));
        pairs.emplace_back(k, static_cast<double>(spec.count_at_most(k)));
        oracle.emplace_back(k, k * (k + 3) / 2.0);
    }
    const RateFit full = fit_rate(pairs);
    const RateFit exact = fit_rate(oracle);
    CHECK(full.slope == doctest::Approx(exact.slope).epsilon(1e-12));
    // The +3k term keeps the slope over 8..128 just below 1.9.
    CHECK(full.slope == doctest::Approx(1.8966).epsilon(1e-4));
    pairs.erase(pairs.begin());
    const RateFit tail = fit_rate(pairs);
    CHECK(tail.slope >= 1.9);
    CHECK(tail.slope <= 2.1);

    const SasakianModel w = make_weighted_sphere(2, 3, 16);
    const Spectrum ws = enumerate_modes(w, 40);
    for (double x : {5.0, 12.5, 40.0}) {
        std::size_t n = 0;
        for (int a = 0; 2 * a <= x; ++a)
            for (int b = 0; 2 * a + 3 * b <= x; ++b) n += (a + b > 0);
        CHECK(ws.count_at_most(x) == n);
    }
    const auto [first, last] = spec.open_range(2.0, 4.0);
    CHECK(last - first == 4u);
    CHECK(spec[first].lambda == 3.0);
}

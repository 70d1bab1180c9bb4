#include <doctest.h>

#include <cmath>

#include "crlab/calculus.hpp"

using namespace crlab;

namespace {

// On the round sphere the level-m modes satisfy sum |f_j|^2 = m + 1 at every point.
double round_oracle(const CutoffSpec& c, double k, double s, int l) {
    double acc = 0.0;
    for (int m = 1; m < k; ++m) {
        const double x = c.chi(m / k);
        acc += std::pow(m, l) * std::exp(2.0 * m * s) * (m + 1.0) * x * x;
    }
    return acc;
}

}  // namespace

TEST_CASE("diagonal sums on the round sphere") {
    const SasakianModel m = make_weighted_sphere(1, 1, 16);
    const Spectrum spec = enumerate_modes(m, 100);
    const CutoffSpec c = make_bump(0.25, 0.75, 8);
    const auto pts = sample_points(m, SampleScheme::QuasiRandom, 12, 3);
    for (double k : {16.0, 48.0, 100.0}) {
        const double oracle = round_oracle(c, k, 0.0, 0);
        for (const auto& x : pts) {
            CHECK(std::abs(cutoff_diagonal_sum(spec, c, k, x) - oracle) <= 1e-12 * oracle);
            CHECK(std::abs(diagonal_sum(spec, cutoff_symbol(c, k), x) - oracle) <= 1e-12 * oracle);
            for (int l = 0; l <= 2; ++l) {
                const double o = round_oracle(c, k, -0.01, l);
                CHECK(std::abs(taylor_family_sum(spec, c, -0.01, k, l, x) - o) <= 1e-12 * o);
            }
        }
    }
}

TEST_CASE("symbols: indicator counts modes and the cap is enforced") {
    const SasakianModel m = make_weighted_sphere(2, 3, 16);
    const Spectrum spec = enumerate_modes(m, 30);
    const ModelPoint x = ModelPoint::from_hopf(0.7, 0.2, 1.3);
    // tau = 1 on all modes: sum |f_j|^2 integrates to the count, so check the mean
    const Symbol one{[](double) { return 1.0; }, 30.0};
    const double total = integrate(m, [&](const ModelPoint& y) { return cplx(diagonal_sum(spec, one, y)); }).real();
    CHECK(total == doctest::Approx(static_cast<double>(spec.size())).epsilon(1e-10));
    CHECK(diagonal_sum(spec, one, x) > 0.0);
    const Symbol wide{[](double) { return 1.0; }, 31.0};
    CHECK_THROWS_AS(diagonal_sum(spec, wide, x), TruncationError);
    const CutoffSpec c = make_bump(0.25, 0.75, 8);
    CHECK_THROWS_AS(cutoff_diagonal_sum(spec, c, 41.0, x), TruncationError);
    CHECK_NOTHROW(cutoff_diagonal_sum(spec, c, 40.0, x));
}

TEST_CASE("leading coefficient converges at rate 1/k") {
    const SasakianModel m = make_weighted_sphere(1, 1, 16);
    const Spectrum spec = enumerate_modes(m, 128);
    const CutoffSpec c = make_bump(0.25, 0.75, 8);
    const auto pts = sample_points(m, SampleScheme::HopfGrid, 16);
    const LeadingCoefficientReport r = verify_leading_coefficient(m, spec, c, {16, 32, 64, 128}, pts);
    CHECK(r.a0 == c.moment(1));
    REQUIRE(r.rows.size() == 4);
    for (const auto& row : r.rows) {
        CHECK(row.spread <= 1e-9 * r.a0);
        CHECK(row.max_deviation / r.a0 <= 16.0 / row.k);
    }
    CHECK(r.remainder_slope <= -0.8);
    CHECK(r.remainder_slope >= -1.2);
    CHECK_THROWS(verify_leading_coefficient(m, spec, c, {16, 32, 64}, pts));
    CHECK_THROWS(verify_leading_coefficient(m, spec, c, {16, 64, 32, 128}, pts));
}

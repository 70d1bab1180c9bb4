#include <doctest.h>

#include <cmath>
#include <numbers>

#include "crlab/diagnostics.hpp"

using namespace crlab;

TEST_CASE("fit_rate recovers exact power laws") {
    std::vector<std::pair<double, double>> pairs;
    for (double k : {16.0, 32.0, 64.0, 128.0}) pairs.emplace_back(k, 3.0 * std::pow(k, -1.5));
    const RateFit f = fit_rate(pairs);
    CHECK(f.slope == doctest::Approx(-1.5).epsilon(1e-13));
    CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(f.r_squared == doctest::Approx(1.0));
    CHECK_THROWS_AS(fit_rate({{1, 1}, {2, 2}}), InvalidInput);
    CHECK_THROWS_AS(fit_rate({{1, 1}, {2, 0}, {3, 1}}), InvalidInput);
}

TEST_CASE("smallest singular value") {
    // columns (3,0,...), (0,2,...), (0,0,1 + i) as real vectors: singular values 3, 2, sqrt 2
    const std::vector<std::vector<cplx>> cols{{3.0, 0.0}, {cplx(0, 2), 0.0}, {0.0, cplx(1, 1)}};
    CHECK(smallest_singular_value(cols) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    const std::vector<std::vector<cplx>> rank_deficient{{1.0, 0.0}, {2.0, 0.0}, {0.0, 1.0}};
    CHECK(smallest_singular_value(rank_deficient) <= 1e-7);
}

TEST_CASE("identity map diagnostics") {
    const SasakianModel m = make_weighted_sphere(1, 1, 8);
    const SphereMap id = [](const ModelPoint& x) { return std::vector<cplx>{x.z(), x.w()}; };
    const auto samples = sample_points(m, SampleScheme::QuasiRandom, 64, 1);
    const MapDiagnostics d = map_diagnostics(id, samples, samples, nullptr, 5);
    CHECK(d.min_singular_value == doctest::Approx(1.0).epsilon(1e-8));
    // chord / arc >= 2/pi on the unit sphere
    CHECK(d.min_separation_ratio >= 2.0 / std::numbers::pi - 1e-12);
    CHECK(d.min_separation_ratio <= 1.0);
    CHECK(d.sample_count == 64);
    CHECK(d.seed == 5);

    // the Hopf-type map (z^2, w^2) identifies x and -x
    const SphereMap sq = [](const ModelPoint& x) { return std::vector<cplx>{x.z() * x.z(), x.w() * x.w()}; };
    std::vector<ModelPoint> pair_set = samples;
    pair_set.push_back(ModelPoint::from_ambient(-samples[0].z(), -samples[0].w()));
    const MapDiagnostics e = map_diagnostics(sq, samples, pair_set, nullptr, 5);
    CHECK(e.min_separation_ratio <= 1e-12);

    const ModelPoint x = samples[3];
    const Vec4 v = tangent_orthonormal_frame(x)[0];
    const auto g = geodesic_difference(id, x, v, kMapDifferenceStep);
    CHECK(std::abs(g[0] - cplx(v[0], v[1])) <= 1e-9);
    CHECK(std::abs(g[1] - cplx(v[2], v[3])) <= 1e-9);
}

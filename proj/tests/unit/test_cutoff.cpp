#include <doctest.h>

#include <cmath>

#include "crlab/cutoff.hpp"
#include "crlab/models.hpp"

using namespace crlab;

namespace {

// chi^2 t^p vanishes to infinite order at both ends, so the plain
// trapezoid rule converges faster than any power.
double trapezoid_moment(double d1, double d2, int p, int n) {
    const double h = (d2 - d1) / n;
    double acc = 0.0;
    for (int i = 1; i < n; ++i) {
        const double t = d1 + i * h;
        const double c = std::exp(-1.0 / ((t - d1) * (d2 - t)));
        acc += c * c * std::pow(t, p);
    }
    return acc * h;
}

}  // namespace

TEST_CASE("bump values and support") {
    const CutoffSpec c = make_bump(0.25, 0.75, 6);
    CHECK(c.chi(0.25) == 0.0);
    CHECK(c.chi(0.75) == 0.0);
    CHECK(c.chi(0.1) == 0.0);
    CHECK(c.chi(0.9) == 0.0);
    CHECK(c.chi(0.5) == doctest::Approx(std::exp(-16.0)).epsilon(1e-14));
    CHECK(eval_chi_k(c, 32.0, 64.0) == doctest::Approx(c.chi(0.5)));
    CHECK(c.chi(0.3) > 0.0);
}

TEST_CASE("moments against the trapezoid oracle") {
    for (auto [d1, d2] : {std::pair{0.25, 0.75}, std::pair{0.1, 0.9}}) {
        const CutoffSpec c = make_bump(d1, d2, 8);
        for (int p = 0; p <= 8; ++p) {
            const double oracle = trapezoid_moment(d1, d2, p, 4000);
            CHECK(std::abs(c.moment(p) - oracle) <= 1e-12 * oracle);
        }
    }
}

TEST_CASE("refinement stability and derived constants") {
    const double m1a = bump_moment(0.25, 0.75, 1, 1e-13, 20);
    const double m1b = bump_moment(0.25, 0.75, 1, 1e-14, 30);
    CHECK(std::abs(m1a - m1b) <= 1e-12 * m1b);
    const CutoffSpec c = make_bump(0.25, 0.75, 8);
    CHECK(c.a0() == c.moment(1));
    CHECK(c.c_chi() == doctest::Approx(1.0 / std::sqrt(c.moment(1))));
    CHECK(c.b(0) == 1.0);
    CHECK(c.b(2) == doctest::Approx(c.moment(3) / c.moment(1)));
    // moments decrease in p and b_l sits between delta1^l and delta2^l
    for (int l = 1; l <= 6; ++l) {
        CHECK(c.moment(l + 1) < c.moment(l));
        CHECK(c.b(l) > std::pow(0.25, l));
        CHECK(c.b(l) < std::pow(0.75, l));
    }
}

TEST_CASE("rejected cutoffs") {
    CHECK_THROWS_AS(make_bump(0.5, 0.25, 8), InvalidInput);
    CHECK_THROWS_AS(make_bump(0.0, 0.5, 8), InvalidInput);
    CHECK_THROWS_AS(make_bump(0.25, 1.0, 8), InvalidInput);
    CHECK_THROWS_AS(make_bump(0.25, 0.75, 4), InvalidInput);
    const CutoffSpec c = make_bump(0.25, 0.75, 5);
    CHECK_THROWS(c.moment(6));
}

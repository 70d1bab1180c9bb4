#include <doctest.h>

#include <cmath>

#include "crlab/deformation.hpp"
#include "helpers.hpp"

using namespace crlab;

namespace {

const cplx I{0.0, 1.0};

// Radial projection keeps finite-difference stencils on the sphere; tangential
// derivatives are unaffected.
ModelPoint project(const Vec4& r) { return ModelPoint::from_real(r / r.norm()); }

// Derivative of a map along a complex tangent vector, from real central differences.
std::vector<cplx> map_derivative(const std::function<std::array<cplx, 2>(const ModelPoint&)>& map,
                                 const TangentVector& v, double h) {
    const CVec4 c = v.real_components();
    const Vec4 r = v.base.real();
    std::vector<cplx> out(2);
    for (int part = 0; part < 2; ++part) {
        const Vec4 dir = part == 0 ? Vec4(c.real()) : Vec4(c.imag());
        const auto fp = map(project(r + h * dir));
        const auto fm = map(project(r - h * dir));
        for (int j = 0; j < 2; ++j) out[j] += (part == 0 ? cplx(1.0) : I) * (fp[j] - fm[j]) / (2 * h);
    }
    return out;
}

}  // namespace

TEST_CASE("frame decomposition reconstructs tangent vectors") {
    const SasakianModel m = make_weighted_sphere(2, 3, 8);
    for (const auto& x : sample_points(m, SampleScheme::QuasiRandom, 10, 4)) {
        const TangentVector Z = cr_frame(m, x);
        const TangentVector T = m.reeb_vector(x);
        for (const Vec4& e : tangent_orthonormal_frame(x)) {
            const TangentVector v = TangentVector::from_real(x, e);
            const FrameDecomposition d = decompose(m, v);
            const TangentVector back = Z * d.a + Z.conj() * d.b + T * d.c;
            for (int i = 0; i < 4; ++i) CHECK(std::abs(back.coeff[i] - v.coeff[i]) <= 1e-13);
        }
    }
}

TEST_CASE("bracket [Z, Zbar] in closed form") {
    const SasakianModel m = make_weighted_sphere(1, 1, 8);
    const ModelPoint x = ModelPoint::from_hopf(0.6, 0.4, 2.0);
    const TangentVector b = frame_bracket(x);
    // Z = wbar d/dz - zbar d/dw gives [Z, Zbar] = z d/dz + w d/dw - zbar d/dzbar - wbar d/dwbar = -i T
    CHECK(std::abs(b.coeff[0] - x.z()) <= 1e-14);
    CHECK(std::abs(b.coeff[1] - x.w()) <= 1e-14);
    CHECK(std::abs(b.coeff[2] + std::conj(x.z())) <= 1e-14);
    CHECK(std::abs(b.coeff[3] + std::conj(x.w())) <= 1e-14);
    const TangentVector T = m.reeb_vector(x);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(b.coeff[i] + I * T.coeff[i]) <= 1e-14);
}

TEST_CASE("undeformed Levi form") {
    const SasakianModel round = make_weighted_sphere(1, 1, 8);
    for (const auto& x : sample_points(round, SampleScheme::QuasiRandom, 10, 8))
        CHECK(levi_undeformed(round, x) == doctest::Approx(0.5).epsilon(1e-13));
    const SasakianModel w = make_weighted_sphere(2, 3, 8);
    for (const auto& x : sample_points(w, SampleScheme::QuasiRandom, 10, 8)) {
        // 1/2 |Z|^2 / (sum beta |z_j|^2) with |Z|^2 = 1 on the sphere
        CHECK(levi_undeformed(w, x) == doctest::Approx(0.5 / w.weighted_radius(x)).epsilon(1e-12));
        const ScalarJet zero;
        CHECK(levi_deformed(w, zero, x) == doctest::Approx(levi_undeformed(w, x)).epsilon(1e-13));
    }
}

TEST_CASE("deformed Levi form on the example family: two oracles") {
    const SasakianModel m = make_weighted_sphere(1, 1, 8);
    for (double eps : {0.0, 0.1, 0.5, 2.0}) {
        const ExampleFamily fam(eps);
        const DeformedStructure st{&m, [&](const ModelPoint& x) { return fam.phi_jet(x); }};
        for (const auto& x : sample_points(m, SampleScheme::QuasiRandom, 12, 17)) {
            const ScalarJet j = fam.phi_jet(x);
            const TangentVector Z = cr_frame(m, x);
            const TangentVector T = m.reeb_vector(x);

            // Z(Zbar phi) by nested finite differences of the scalar phi
            const auto zbar_phi = [&](const ModelPoint& y) {
                const CVec4 c = cr_frame(m, y).conj().real_components();
                const auto f = [&](const Vec4& r) { return cplx(fam.phi(project(r))); };
                return testing::complex_difference(f, y.real(), c, 1e-5);
            };
            const auto outer = [&](const Vec4& r) { return zbar_phi(project(r)); };
            const cplx zzbar = testing::complex_difference(outer, x.real(), Z.real_components(), 1e-4);
            CHECK(std::abs(frame_second_derivative(j, x) - zzbar) <= 1e-5 * (1 + eps));

            // pullback of the sphere's Levi form by the CR map F_eps
            const TangentVector V = Z - T * (I * j.derivative(Z));
            const auto dF = map_derivative([&](const ModelPoint& y) { return fam.map(y); }, V, 1e-6);
            const auto F = fam.map(x);
            const double oracle = 0.5 * (std::norm(dF[0]) + std::norm(dF[1])) / (std::norm(F[0]) + std::norm(F[1]));
            const double levi = levi_deformed(st, x);
            CHECK(std::abs(levi - oracle) <= 1e-7);
            CHECK(levi > 0.0);

            // F_eps is CR for the deformed structure: dF(Vbar) = 0
            const auto dbar = map_derivative([&](const ModelPoint& y) { return fam.map(y); }, V.conj(), 1e-6);
            CHECK(std::abs(dbar[0]) + std::abs(dbar[1]) <= 1e-8);
            // gamma on the frame
            CHECK(std::abs(gamma(m, j, T)) <= 1e-14);
            CHECK(std::abs(gamma(m, j, Z) - I * j.derivative(Z)) <= 1e-14);
        }
    }
}

TEST_CASE("example certificate") {
    const SasakianModel m = make_weighted_sphere(1, 1, 8);
    const auto pts = sample_points(m, SampleScheme::QuasiRandom, 50, 6);
    for (double eps : {0.0, 0.3, 1.0, 5.0}) {
        const ExampleFamily fam = example_family(eps);
        for (const auto& x : pts) {
            const auto F = fam.map(x);
            CHECK(std::norm(F[0]) + std::norm(F[1]) == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(fam.phi(x) == doctest::Approx(-0.5 * std::log1p(eps * std::norm(x.z()))).epsilon(1e-14));
        }
        const CertificateReport r = certificate_PN(fam.certificate(m, pts));
        CHECK(r.pass);
        CHECK(r.max_abs <= 1e-13);
    }
    // a wrong phi fails the certificate
    CertificateProblem bad = example_family(1.0).certificate(m, pts);
    bad.phi = [](const ModelPoint&) { return 0.0; };
    CHECK_FALSE(certificate_PN(bad).pass);
}

TEST_CASE("continuation map") {
    const SasakianModel m = make_weighted_sphere(1, 1, 8);
    const auto pts = sample_points(m, SampleScheme::QuasiRandom, 30, 12);
    ContinuationProblem prob = degree_one_base(pts);
    // equal weights: closed form -log(sum r^2 |f|^2) / 2
    const std::vector<double> r{1.2, 0.9};
    const ContinuationSolution sol = continuation_solve(prob, r);
    CHECK(sol.max_residual <= 1e-14);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double s = 1.44 * std::norm(pts[i].z()) + 0.81 * std::norm(pts[i].w());
        CHECK(sol.values[i] == doctest::Approx(-0.5 * std::log(s)).epsilon(1e-14));
    }
    // unequal weights: Newton against bisection
    prob.beta = {1.0, 2.5};
    const ContinuationSolution un = continuation_solve(prob, r);
    const auto bis = continuation_solve_bisection(prob, r);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(std::abs(un.values[i] - bis[i]) <= 1e-13);
    CHECK(un.max_residual <= 1e-13);

    // derivative against finite differences of the solution
    const std::vector<double> v{0.3, -0.7};
    const auto A = continuation_derivative(prob, r, un.values, v);
    const double h = 1e-6;
    const auto gp = continuation_solve(prob, {r[0] + h * v[0], r[1] + h * v[1]}).values;
    const auto gm = continuation_solve(prob, {r[0] - h * v[0], r[1] - h * v[1]}).values;
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(std::abs(A[i] - (gp[i] - gm[i]) / (2 * h)) <= 1e-7);
    // phi0 not on the level set is rejected
    std::vector<double> off = un.values;
    off[0] += 1e-3;
    CHECK_THROWS(continuation_derivative(prob, r, off, v));
}

#include "crlab/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "crlab/numerics.hpp"

namespace crlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const cplx kI{0.0, 1.0};

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    return a < 0.0 ? a + kTwoPi : a;
}

}  // namespace

WeightVector::WeightVector(std::vector<double> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw InvalidInput("weight vector must be non-empty");
    for (double b : entries_) {
        if (!(b > 0.0) || !std::isfinite(b)) {
            throw InvalidInput("weight vector entries must be positive, got " + std::to_string(b));
        }
    }
}

// ---------------------------------------------------------------------------
// ModelPoint

ModelPoint::ModelPoint(cplx z, cplx w) : z_(z), w_(w) {
    hopf_.theta = std::atan2(std::abs(w_), std::abs(z_));
    hopf_.phi1 = std::abs(z_) > 0.0 ? wrap_angle(std::arg(z_)) : 0.0;
    hopf_.phi2 = std::abs(w_) > 0.0 ? wrap_angle(std::arg(w_)) : 0.0;
}

ModelPoint ModelPoint::from_ambient(cplx z, cplx w) {
    const double r2 = std::norm(z) + std::norm(w);
    if (!std::isfinite(r2) || std::abs(r2 - 1.0) > 1e-9) {
        throw InvalidInput("point is not on the unit sphere: |z|^2+|w|^2 = " + std::to_string(r2));
    }
    const double r = std::sqrt(r2);
    return ModelPoint(z / r, w / r);
}

ModelPoint ModelPoint::from_hopf(double theta, double phi1, double phi2) {
    ModelPoint p(std::polar(std::cos(theta), phi1), std::polar(std::sin(theta), phi2));
    return p;
}

ModelPoint ModelPoint::from_real(const Vec4& x) {
    return from_ambient(cplx{x[0], x[1]}, cplx{x[2], x[3]});
}

double geodesic_distance(const ModelPoint& a, const ModelPoint& b) {
    const double chord = (a.real() - b.real()).norm();
    return 2.0 * std::asin(std::min(1.0, 0.5 * chord));
}

// ---------------------------------------------------------------------------
// TangentVector

TangentVector TangentVector::from_real(const ModelPoint& base, const Vec4& v) {
    TangentVector t{base, {}};
    t.coeff[0] = cplx{v[0], v[1]};
    t.coeff[1] = cplx{v[2], v[3]};
    t.coeff[2] = cplx{v[0], -v[1]};
    t.coeff[3] = cplx{v[2], -v[3]};
    return t;
}

CVec4 TangentVector::real_components() const {
    CVec4 r;
    r[0] = 0.5 * (coeff[0] + coeff[2]);
    r[1] = 0.5 * kI * (coeff[2] - coeff[0]);
    r[2] = 0.5 * (coeff[1] + coeff[3]);
    r[3] = 0.5 * kI * (coeff[3] - coeff[1]);
    return r;
}

cplx TangentVector::defining_function_derivative() const {
    const cplx z = base.z();
    const cplx w = base.w();
    return coeff[0] * std::conj(z) + coeff[2] * z + coeff[1] * std::conj(w) + coeff[3] * w;
}

TangentVector TangentVector::conj() const {
    return {base, {std::conj(coeff[2]), std::conj(coeff[3]), std::conj(coeff[0]), std::conj(coeff[1])}};
}

TangentVector TangentVector::operator+(const TangentVector& o) const {
    TangentVector r = *this;
    for (int i = 0; i < 4; ++i) r.coeff[i] += o.coeff[i];
    return r;
}

TangentVector TangentVector::operator-(const TangentVector& o) const {
    TangentVector r = *this;
    for (int i = 0; i < 4; ++i) r.coeff[i] -= o.coeff[i];
    return r;
}

TangentVector TangentVector::operator*(cplx c) const {
    TangentVector r = *this;
    for (auto& x : r.coeff) x *= c;
    return r;
}

std::array<Vec4, 3> tangent_orthonormal_frame(const ModelPoint& x) {
    const Vec4 v = x.real();
    const double a = v[0], b = v[1], c = v[2], d = v[3];
    return {Vec4{-b, a, -d, c}, Vec4{-c, d, a, -b}, Vec4{-d, -c, b, a}};
}

// ---------------------------------------------------------------------------
// SasakianModel

SasakianModel::SasakianModel(WeightVector beta, int resolution)
    : beta_(std::move(beta)), resolution_(resolution) {
    if (beta_.size() != 2) throw InvalidInput("the shipped models are 3-spheres: need exactly two weights");
    if (resolution_ < 4) throw InvalidInput("quadrature resolution must be at least 4");

    quadrature_.theta_nodes = resolution_;
    quadrature_.phi_nodes = resolution_;
    const auto gl = numerics::gauss_legendre(static_cast<std::size_t>(resolution_));
    const int nphi = quadrature_.phi_nodes;
    const double dphi = kTwoPi / nphi;
    quadrature_.nodes.reserve(static_cast<std::size_t>(resolution_) * nphi * nphi);
    numerics::CompensatedSum mass;
    for (int i = 0; i < resolution_; ++i) {
        const double x = gl.nodes[i];
        const double theta = 0.5 * std::acos(x);
        // |dx/dtheta| = 2 sin(2 theta) = 2 sqrt(1 - x^2)
        const double jac = gl.weights[i] / (2.0 * std::sqrt(1.0 - x * x));
        for (int j = 0; j < nphi; ++j) {
            for (int l = 0; l < nphi; ++l) {
                const ModelPoint pt = ModelPoint::from_hopf(theta, j * dphi, l * dphi);
                const double w = jac * hopf_volume_density(pt) * dphi * dphi;
                quadrature_.nodes.push_back({pt, w});
                mass.add(w);
            }
        }
    }
    total_mass_ = mass.value();
}

double SasakianModel::weighted_radius(const ModelPoint& x) const {
    return p() * std::norm(x.z()) + q() * std::norm(x.w());
}

cplx SasakianModel::alpha(const TangentVector& v) const {
    const cplx z = v.base.z();
    const cplx w = v.base.w();
    const cplx a0 = (std::conj(z) * v.coeff[0] - z * v.coeff[2] + std::conj(w) * v.coeff[1] - w * v.coeff[3]) /
                    (2.0 * kI);
    return a0 / weighted_radius(v.base);
}

cplx SasakianModel::dalpha(const TangentVector& v1, const TangentVector& v2) const {
    const cplx z = v1.base.z();
    const cplx w = v1.base.w();
    const auto alpha0 = [&](const TangentVector& v) {
        return (std::conj(z) * v.coeff[0] - z * v.coeff[2] + std::conj(w) * v.coeff[1] - w * v.coeff[3]) /
               (2.0 * kI);
    };
    const auto dD = [&](const TangentVector& v) {
        return p() * (std::conj(z) * v.coeff[0] + z * v.coeff[2]) + q() * (std::conj(w) * v.coeff[1] + w * v.coeff[3]);
    };
    // d(alpha_0) = i (dz ^ dzbar + dw ^ dwbar)
    const cplx da0 = kI * (v1.coeff[0] * v2.coeff[2] - v1.coeff[2] * v2.coeff[0] + v1.coeff[1] * v2.coeff[3] -
                           v1.coeff[3] * v2.coeff[1]);
    const double D = weighted_radius(v1.base);
    return da0 / D - (dD(v1) * alpha0(v2) - dD(v2) * alpha0(v1)) / (D * D);
}

cplx SasakianModel::alpha_wedge_dalpha(const TangentVector& v1, const TangentVector& v2,
                                       const TangentVector& v3) const {
    return alpha(v1) * dalpha(v2, v3) - alpha(v2) * dalpha(v1, v3) + alpha(v3) * dalpha(v1, v2);
}

TangentVector SasakianModel::reeb_vector(const ModelPoint& x) const {
    const cplx z = x.z();
    const cplx w = x.w();
    return {x, {kI * p() * z, kI * q() * w, -kI * p() * std::conj(z), -kI * q() * std::conj(w)}};
}

double SasakianModel::hopf_volume_density(const ModelPoint& x) const {
    const auto& h = x.hopf();
    const double ct = std::cos(h.theta);
    const double st = std::sin(h.theta);
    const cplx e1 = std::polar(1.0, h.phi1);
    const cplx e2 = std::polar(1.0, h.phi2);
    const auto real_vec = [&](cplx dz, cplx dw) {
        return TangentVector{x, {dz, dw, std::conj(dz), std::conj(dw)}};
    };
    const TangentVector d_theta = real_vec(-st * e1, ct * e2);
    const TangentVector d_phi1 = real_vec(kI * x.z(), 0.0);
    const TangentVector d_phi2 = real_vec(0.0, kI * x.w());
    const double form = std::abs(alpha_wedge_dalpha(d_theta, d_phi1, d_phi2));
    return form / (kTwoPi * kTwoPi);
}

InvariantRule SasakianModel::invariant_rule(int min_nodes) const {
    const int n = std::max(resolution_, min_nodes);
    const auto gl = numerics::gauss_legendre(static_cast<std::size_t>(n));
    InvariantRule rule;
    rule.u.reserve(n);
    rule.v.reserve(n);
    rule.weight.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double x = gl.nodes[i];
        const double theta = 0.5 * std::acos(x);
        const ModelPoint pt = ModelPoint::from_hopf(theta, 0.0, 0.0);
        const double jac = gl.weights[i] / (2.0 * std::sqrt(1.0 - x * x));
        rule.u.push_back(0.5 * (1.0 + x));
        rule.v.push_back(0.5 * (1.0 - x));
        rule.weight.push_back(jac * hopf_volume_density(pt) * kTwoPi * kTwoPi);
    }
    return rule;
}

double SasakianModel::integrate_invariant(const std::function<double(double)>& g, int min_nodes) const {
    const InvariantRule rule = invariant_rule(min_nodes);
    numerics::CompensatedSum acc;
    for (std::size_t i = 0; i < rule.u.size(); ++i) acc.add(rule.weight[i] * g(rule.u[i]));
    return acc.value();
}

SasakianModel make_weighted_sphere(double p, double q, int resolution) {
    return SasakianModel(WeightVector({p, q}), resolution);
}

ModelPoint reeb_flow(const SasakianModel& model, const ModelPoint& x, double t) {
    return ModelPoint::from_ambient(x.z() * std::polar(1.0, model.p() * t), x.w() * std::polar(1.0, model.q() * t));
}

// ---------------------------------------------------------------------------
// Sampling

SampleScheme parse_sample_scheme(const std::string& name) {
    if (name == "hopf-grid") return SampleScheme::HopfGrid;
    if (name == "quasi-random") return SampleScheme::QuasiRandom;
    throw InvalidInput("unknown sample scheme '" + name + "'");
}

std::string to_string(SampleScheme scheme) {
    return scheme == SampleScheme::HopfGrid ? "hopf-grid" : "quasi-random";
}

namespace {

double radical_inverse(std::uint64_t i, std::uint64_t base) {
    double result = 0.0;
    double f = 1.0 / static_cast<double>(base);
    while (i > 0) {
        result += f * static_cast<double>(i % base);
        i /= base;
        f /= static_cast<double>(base);
    }
    return result;
}

double unit_from_bits(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

ModelPoint point_from_unit_cube(double s, double t1, double t2) {
    const double x = std::clamp(2.0 * s - 1.0, -1.0, 1.0);
    return ModelPoint::from_hopf(0.5 * std::acos(x), kTwoPi * t1, kTwoPi * t2);
}

}  // namespace

std::vector<ModelPoint> sample_points(const SasakianModel& /*model*/, SampleScheme scheme, std::size_t count,
                                      std::uint64_t seed) {
    if (count == 0) throw InvalidInput("sample count must be at least 1");
    std::vector<ModelPoint> pts;
    pts.reserve(count);
    if (scheme == SampleScheme::HopfGrid) {
        // Plastic-number rank-1 lattice on the torus angles.
        constexpr double rho = 1.32471795724474602596;
        const double g1 = 1.0 / rho;
        const double g2 = 1.0 / (rho * rho);
        for (std::size_t i = 0; i < count; ++i) {
            const double s = (static_cast<double>(i) + 0.5) / static_cast<double>(count);
            const double t1 = std::fmod(0.5 + g1 * static_cast<double>(i), 1.0);
            const double t2 = std::fmod(0.5 + g2 * static_cast<double>(i), 1.0);
            pts.push_back(point_from_unit_cube(s, t1, t2));
        }
    } else {
        std::mt19937_64 rng(seed);
        const double shift[3] = {unit_from_bits(rng()), unit_from_bits(rng()), unit_from_bits(rng())};
        for (std::size_t i = 0; i < count; ++i) {
            double c[3] = {radical_inverse(i + 1, 2), radical_inverse(i + 1, 3), radical_inverse(i + 1, 5)};
            for (int d = 0; d < 3; ++d) c[d] = std::fmod(c[d] + shift[d], 1.0);
            pts.push_back(point_from_unit_cube(c[0], c[1], c[2]));
        }
    }
    return pts;
}

TangentVector cr_frame(const SasakianModel& /*model*/, const ModelPoint& x) {
    return {x, {std::conj(x.w()), -std::conj(x.z()), 0.0, 0.0}};
}

cplx integrate(const SasakianModel& model, const std::function<cplx(const ModelPoint&)>& integrand) {
    numerics::CompensatedSum re;
    numerics::CompensatedSum im;
    for (const auto& node : model.quadrature().nodes) {
        const cplx v = node.weight * integrand(node.point);
        re.add(v.real());
        im.add(v.imag());
    }
    return {re.value(), im.value()};
}

}  // namespace crlab

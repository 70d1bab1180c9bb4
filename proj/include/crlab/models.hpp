#pragma once

// Weighted 3-sphere models: points, Reeb flow, contact form, CR frame and
// quadrature on S^3 = {|z|^2 + |w|^2 = 1} in C^2.

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace crlab {

using cplx = std::complex<double>;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using CVec4 = Eigen::Vector4cd;

/// Points must lie on the unit sphere within this tolerance.
inline constexpr double kSphereTolerance = 1e-12;

class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

class WeightVector {
public:
    explicit WeightVector(std::vector<double> entries);

    std::size_t size() const { return entries_.size(); }
    double operator[](std::size_t i) const { return entries_[i]; }
    const std::vector<double>& entries() const { return entries_; }

private:
    std::vector<double> entries_;
};

struct HopfCoordinates {
    double theta = 0.0;  // in [0, pi/2]; |z| = cos(theta)
    double phi1 = 0.0;
    double phi2 = 0.0;
};

/// A point of S^3. The ambient pair (z, w) is canonical; Hopf coordinates are
/// cached at construction.
class ModelPoint {
public:
    ModelPoint() : ModelPoint(cplx{1.0, 0.0}, cplx{0.0, 0.0}) {}

    /// Rejects points farther than 1e-9 from the sphere; closer points are
    /// renormalized onto it.
    static ModelPoint from_ambient(cplx z, cplx w);
    static ModelPoint from_hopf(double theta, double phi1, double phi2);
    /// Real coordinates (x1, y1, x2, y2) with z = x1 + i y1, w = x2 + i y2.
    static ModelPoint from_real(const Vec4& x);

    cplx z() const { return z_; }
    cplx w() const { return w_; }
    const HopfCoordinates& hopf() const { return hopf_; }
    Vec4 real() const { return {z_.real(), z_.imag(), w_.real(), w_.imag()}; }
    /// |z|^2, the torus-invariant coordinate.
    double u() const { return std::norm(z_); }
    double sphere_defect() const { return std::abs(std::norm(z_) + std::norm(w_) - 1.0); }

private:
    ModelPoint(cplx z, cplx w);

    cplx z_;
    cplx w_;
    HopfCoordinates hopf_;
};

/// Geodesic (great-circle) distance on the round sphere.
double geodesic_distance(const ModelPoint& a, const ModelPoint& b);

/// A complexified tangent vector in Wirtinger form: coefficients of
/// d/dz, d/dw, d/dzbar, d/dwbar at a base point.
struct TangentVector {
    ModelPoint base;
    std::array<cplx, 4> coeff{};

    static TangentVector from_real(const ModelPoint& base, const Vec4& v);

    /// Coefficients along d/dx1, d/dy1, d/dx2, d/dy2 (complex for non-real vectors).
    CVec4 real_components() const;
    /// Derivative of |z|^2 + |w|^2 - 1 along the vector.
    cplx defining_function_derivative() const;
    /// Derivative of a holomorphic function with gradient (df/dz, df/dw).
    cplx apply_holomorphic(cplx dfdz, cplx dfdw) const { return coeff[0] * dfdz + coeff[1] * dfdw; }

    TangentVector conj() const;
    TangentVector operator+(const TangentVector& o) const;
    TangentVector operator-(const TangentVector& o) const;
    TangentVector operator*(cplx c) const;
};

/// Orthonormal real tangent frame at x given by the quaternion units applied to x.
std::array<Vec4, 3> tangent_orthonormal_frame(const ModelPoint& x);

struct QuadratureNode {
    ModelPoint point;
    double weight = 0.0;
};

/// Product rule in Hopf coordinates: Gauss-Legendre in x = cos(2 theta)
/// times the trapezoid rule in phi1 and phi2.
struct QuadratureRule {
    std::string scheme = "hopf-product-gl";
    int theta_nodes = 0;
    int phi_nodes = 0;
    std::vector<QuadratureNode> nodes;
};

/// One-dimensional rule for torus-invariant integrands g(|z|^2): the
/// weights already carry the dV density integrated over both torus angles.
struct InvariantRule {
    std::vector<double> u;  // |z|^2 at each node
    std::vector<double> v;  // |w|^2 at each node, computed without cancellation
    std::vector<double> weight;
};

class SasakianModel {
public:
    SasakianModel(WeightVector beta, int resolution);

    int cr_dimension() const { return 1; }
    const WeightVector& beta() const { return beta_; }
    double p() const { return beta_[0]; }
    double q() const { return beta_[1]; }
    int resolution() const { return resolution_; }
    double total_mass() const { return total_mass_; }
    const QuadratureRule& quadrature() const { return quadrature_; }

    /// Weighted contact form alpha_beta pulled back to the sphere.
    cplx alpha(const TangentVector& v) const;
    /// d(alpha_beta)(v1, v2) with d(a)(X,Y) = X a(Y) - Y a(X) - a([X,Y]).
    cplx dalpha(const TangentVector& v1, const TangentVector& v2) const;
    /// (alpha ^ d alpha)(v1, v2, v3).
    cplx alpha_wedge_dalpha(const TangentVector& v1, const TangentVector& v2,
                            const TangentVector& v3) const;
    /// Reeb field T_beta = i sum beta_j (z_j d/dz_j - zbar_j d/dzbar_j).
    TangentVector reeb_vector(const ModelPoint& x) const;
    /// sum beta_j |z_j|^2 at x.
    double weighted_radius(const ModelPoint& x) const;

    /// Density of dV = alpha ^ d alpha / ((2 pi)^2 1!) with respect to
    /// d(theta) d(phi1) d(phi2).
    double hopf_volume_density(const ModelPoint& x) const;

    /// Integral of a torus-invariant integrand g(|z|^2) using a Gauss-Legendre
    /// rule in x = cos(2 theta) with at least `min_nodes` nodes (and never
    /// fewer than the model resolution).
    double integrate_invariant(const std::function<double(double)>& g, int min_nodes = 0) const;
    InvariantRule invariant_rule(int min_nodes = 0) const;

private:
    WeightVector beta_;
    int resolution_;
    QuadratureRule quadrature_;
    double total_mass_ = 0.0;
};

SasakianModel make_weighted_sphere(double p, double q, int resolution);

/// Flow of T_beta for time t: (z, w) -> (e^{ipt} z, e^{iqt} w).
ModelPoint reeb_flow(const SasakianModel& model, const ModelPoint& x, double t);

enum class SampleScheme { HopfGrid, QuasiRandom };

SampleScheme parse_sample_scheme(const std::string& name);
std::string to_string(SampleScheme scheme);

/// Deterministic point sets. HopfGrid is a rank-1 lattice in Hopf
/// coordinates, equal-area in cos(2 theta); QuasiRandom is a Halton sequence
/// with a seeded Cranley-Patterson shift.
std::vector<ModelPoint> sample_points(const SasakianModel& model, SampleScheme scheme, std::size_t count,
                                      std::uint64_t seed = 0);

/// Z = wbar d/dz - zbar d/dw, a nowhere-vanishing section of T^{1,0} S^3.
TangentVector cr_frame(const SasakianModel& model, const ModelPoint& x);

/// Quadrature sum of the integrand against dV.
cplx integrate(const SasakianModel& model, const std::function<cplx(const ModelPoint&)>& integrand);

}  // namespace crlab

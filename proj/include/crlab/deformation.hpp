#pragma once

// Deformed CR structures V(phi) = {Z - i Z(phi) T}, their Levi forms, the
// weighted-sphere certificate P_N(F, phi) = 1 and the continuation map g(r).

#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crlab/jets.hpp"
#include "crlab/spectrum.hpp"

namespace crlab {

/// Ambient second-order jet of a Reeb-invariant function phi.
using PhiJet = std::function<ScalarJet(const ModelPoint&)>;

struct DeformedStructure {
    const SasakianModel* model = nullptr;
    PhiJet phi;
};

/// V = a Z + b Zbar + c T_beta for a tangent vector V at its base point.
struct FrameDecomposition {
    cplx a;
    cplx b;
    cplx c;
};

FrameDecomposition decompose(const SasakianModel& model, const TangentVector& v);

/// [Z, Zbar] for Z = wbar d/dz - zbar d/dw, from the linear coefficient matrices.
TangentVector frame_bracket(const ModelPoint& x);

/// Z(Zbar phi) at x from the ambient jet of phi.
cplx frame_second_derivative(const ScalarJet& jet, const ModelPoint& x);

/// gamma^phi(V), fixed by gamma(T) = 0, gamma(Z) = i dphi(Z), gamma(Zbar) = -i dphi(Zbar).
cplx gamma(const SasakianModel& model, const ScalarJet& jet, const TangentVector& v);
cplx gamma(const DeformedStructure& structure, const TangentVector& v);

/// (1/2i) d alpha(Z, Zbar).
double levi_undeformed(const SasakianModel& model, const ModelPoint& x);

/// (1/2i) d alpha(Z, Zbar) - (1/2i) gamma([Z, Zbar]) - Re Z(Zbar phi).
double levi_deformed(const DeformedStructure& structure, const ModelPoint& x);
double levi_deformed(const SasakianModel& model, const ScalarJet& jet, const ModelPoint& x);

struct CertificateComponent {
    cplx coefficient;
    EigenMode mode;
    double beta = 1.0;
};

struct CertificateProblem {
    std::vector<CertificateComponent> components;
    std::function<double(const ModelPoint&)> phi;
    std::vector<ModelPoint> samples;
};

inline constexpr double kCertificateTolerance = 1e-10;

struct CertificateReport {
    std::vector<double> residuals;  // sum |F_j|^2 e^{2 beta_j phi} - 1 per sample
    double max_abs = 0.0;
    double mean_abs = 0.0;
    double threshold = kCertificateTolerance;
    bool pass = false;
};

CertificateReport certificate_PN(const CertificateProblem& problem, double threshold = kCertificateTolerance);

class ContinuationFailure : public std::runtime_error {
public:
    ContinuationFailure(const std::string& what, std::size_t sample) : std::runtime_error(what), sample(sample) {}
    std::size_t sample;
};

struct ContinuationProblem {
    std::vector<std::function<cplx(const ModelPoint&)>> f;
    std::vector<double> beta;
    std::vector<ModelPoint> samples;
};

struct ContinuationSolution {
    std::vector<double> values;     // g(r) at each sample
    std::vector<double> residuals;  // G(r, g(r)) - 1
    double max_residual = 0.0;
};

/// Pointwise root of sum r_j^2 |f_j|^2 e^{2 beta_j phi} = 1.
ContinuationSolution continuation_solve(const ContinuationProblem& problem, const std::vector<double>& r);
/// The same roots by bisection, used as an oracle.
std::vector<double> continuation_solve_bisection(const ContinuationProblem& problem, const std::vector<double>& r,
                                                 double x_tol = 1e-15);

/// A(v) = -(sum 2 beta_j r0_j^2 |f_j|^2 e^{2 beta_j phi0})^{-1} sum 2 r0_j v_j |f_j|^2 e^{2 beta_j phi0}.
std::vector<double> continuation_derivative(const ContinuationProblem& problem, const std::vector<double>& r0,
                                            const std::vector<double>& phi0, const std::vector<double>& v,
                                            double membership_tolerance = kCertificateTolerance);

/// phi_eps = -log sqrt(1 + eps |z|^2) and F_eps = e^{phi_eps} (sqrt(1 + eps) z, w) on the round sphere.
class ExampleFamily {
public:
    explicit ExampleFamily(double epsilon);

    double epsilon() const { return epsilon_; }
    double phi(const ModelPoint& x) const;
    ScalarJet phi_jet(const ModelPoint& x) const;
    std::array<cplx, 2> map(const ModelPoint& x) const;
    /// The undeformed components (sqrt(1 + eps) z, w) as a certificate problem.
    CertificateProblem certificate(const SasakianModel& model, const std::vector<ModelPoint>& samples) const;

private:
    double epsilon_;
};

ExampleFamily example_family(double epsilon);

/// The degree-1 base f = (z, w), beta = (1, 1).
ContinuationProblem degree_one_base(const std::vector<ModelPoint>& samples);

}  // namespace crlab

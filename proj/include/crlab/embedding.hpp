#pragma once

// The maps F_k = (e^{-k} G, H_k) on the cylinder X x R, the sphere condition
// |F_k(x, phi_k(x))|^2 = 1 and its solution phi_k with implicit derivatives.

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "crlab/cutoff.hpp"
#include "crlab/diagnostics.hpp"
#include "crlab/jets.hpp"
#include "crlab/spectrum.hpp"

namespace crlab {

struct EmbeddingOptions {
    /// Immersion and injectivity thresholds a reference window must pass.
    double window_threshold = 1e-3;
    /// Largest collar width considered.
    double collar_max = 1.0;
    /// s-grid points used on [-c, c] when testing a collar width.
    int collar_grid = 9;
};

class EmbeddingFailure : public std::runtime_error {
public:
    EmbeddingFailure(const std::string& what, std::size_t best_window, double best_singular_value,
                     double best_separation)
        : std::runtime_error(what),
          best_window(best_window),
          best_singular_value(best_singular_value),
          best_separation(best_separation) {}

    std::size_t best_window;
    double best_singular_value;
    double best_separation;
};

struct ReferenceEmbedding {
    std::vector<EigenMode> modes;  // the window, in spectrum order
    std::size_t m0 = 1;            // 1-based spectrum index of the first mode
    double collar_width = 0.0;
    double sigma0 = 0.0;           // min singular value of the extended differential at s = 0
    MapDiagnostics diagnostics;    // of x -> G(x, 0)
};

/// Smallest consecutive window starting at m0 whose map passes the immersion
/// and injectivity diagnostics on `samples`, with its verified collar width.
ReferenceEmbedding build_reference_embedding(const SasakianModel& model, const Spectrum& spectrum, std::size_t m0,
                                             const std::vector<ModelPoint>& samples,
                                             const EmbeddingOptions& options = {});

/// Smallest singular value of the real 2N x 4 differential of
/// (x, s) -> (e^{lambda_j s} f_j(x))_j at (x, s).
double extended_singular_value(const std::vector<EigenMode>& modes, const ModelPoint& x, double s);

/// One component of F_k. Its squared modulus on the cylinder is
/// exp(log_weight) |f(x)|^2 e^{2 lambda s}.
struct FamilyComponent {
    EigenMode mode;
    double log_weight = 0.0;
    bool reference = false;  // G-block member
};

/// Terms with exp(log_weight) |f|^2 below this are dropped.
inline constexpr double kUnderflowFloor = 1e-300;

class EmbeddingFamily {
public:
    EmbeddingFamily(double k, std::vector<FamilyComponent> components, double collar_width, std::size_t m0 = 1);

    double k() const { return k_; }
    const std::vector<FamilyComponent>& components() const { return components_; }
    std::size_t reference_count() const { return reference_count_; }
    std::size_t cutoff_count() const { return components_.size() - reference_count_; }
    double collar_width() const { return collar_width_; }
    std::size_t m0() const { return m0_; }
    /// Eigenvalues of the components in component order.
    std::vector<double> beta() const;
    /// True when every G-block eigenvalue lies below every H-block eigenvalue.
    bool blocks_separated() const;

private:
    double k_;
    std::vector<FamilyComponent> components_;
    std::size_t reference_count_ = 0;
    double collar_width_;
    std::size_t m0_;
};

/// G-block weight e^{-k} (in log form) followed by the H-block modes with
/// delta1 k < lambda < delta2 k and weight C_chi k^{-(n+1)/2} chi(lambda/k).
EmbeddingFamily build_Fk(const SasakianModel& model, const Spectrum& spectrum, const CutoffSpec& spec, double k,
                         const ReferenceEmbedding& reference);

/// |F_k(x, s)|^2 grouped by eigenvalue: sum over levels of w_lambda e^{2 lambda s}.
class PointProfile {
public:
    struct Level {
        double lambda;
        double weight;
        InvariantJet jet;  // filled only when requested
    };

    PointProfile(const EmbeddingFamily& family, const ModelPoint& x, bool with_jets = false);

    /// d^l/ds^l |F_k(x, s)|^2.
    double norm_sq(double s, int l = 0) const;
    const ModelPoint& point() const { return point_; }
    const std::vector<Level>& levels() const { return levels_; }
    bool has_jets() const { return with_jets_; }
    bool underflow_dropped() const { return dropped_; }

private:
    ModelPoint point_;
    bool with_jets_;
    std::vector<Level> levels_;
    bool dropped_ = false;
};

double norm_sq(const EmbeddingFamily& family, const ModelPoint& x, double s, int l = 0);

struct PhiSolve {
    double phi = 0.0;
    double residual = 0.0;  // |F_k(x, phi)|^2 - 1
    double slope = 0.0;     // d/ds |F_k|^2 at phi
    int iterations = 0;
    double bracket_half_width = 0.0;
    bool underflow_dropped = false;
};

/// Root of |F_k(x, s)|^2 = 1: symmetric bracket from 1/k expanded up to the
/// collar width, then safeguarded Newton. Throws numerics::BracketError.
PhiSolve solve_phi(const EmbeddingFamily& family, const ModelPoint& x);
PhiSolve solve_phi(const PointProfile& profile, double k, double collar_width, double initial_half_width = 0.0);
/// The same root by plain bisection, used as an oracle.
double solve_phi_bisection(const EmbeddingFamily& family, const ModelPoint& x, double x_tol = 1e-14);

/// Ambient second-order jet of the degree-0 homogeneous extension of phi_k at
/// x, from the implicit function theorem applied to the sphere condition.
ScalarJet implicit_derivatives(const EmbeddingFamily& family, const ModelPoint& x, double phi);
ScalarJet implicit_derivatives(const PointProfile& profile, double phi);

struct GraphSample {
    ModelPoint point;
    double phi = 0.0;
    double residual = 0.0;
    int iterations = 0;
    ScalarJet jet;
};

class GraphSolution {
public:
    GraphSolution(std::shared_ptr<const EmbeddingFamily> family, std::vector<GraphSample> samples);

    double k() const { return family_->k(); }
    const EmbeddingFamily& family() const { return *family_; }
    const std::vector<GraphSample>& samples() const { return samples_; }
    std::vector<double> beta() const { return family_->beta(); }

    /// Off-sample evaluation through a fresh solve.
    double value(const ModelPoint& x) const;
    ScalarJet jet(const ModelPoint& x) const;

    double sup_phi() const;
    double sup_dphi() const;
    double max_residual() const;

private:
    std::shared_ptr<const EmbeddingFamily> family_;
    std::vector<GraphSample> samples_;
};

GraphSolution solve_graph(std::shared_ptr<const EmbeddingFamily> family, const std::vector<ModelPoint>& points);

struct SphereImage {
    std::vector<cplx> components;
    std::vector<double> beta;
};

/// G_k(x) = F_k(x, phi) with phi = phi_k(x).
SphereImage sphere_map(const EmbeddingFamily& family, const ModelPoint& x, double phi);
/// x -> F_k(x, phi_k(x)) with phi_k solved pointwise.
SphereMap sphere_map_function(std::shared_ptr<const EmbeddingFamily> family);

}  // namespace crlab

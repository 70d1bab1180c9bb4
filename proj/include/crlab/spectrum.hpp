#pragma once

// Eigenfunctions of -i T_beta on CR functions of the weighted 3-sphere. They
// are the monomials z^a w^b with eigenvalue p a + q b, normalized in L^2(dV).

#include <cstddef>
#include <vector>

#include "crlab/jets.hpp"
#include "crlab/models.hpp"

namespace crlab {

struct EigenMode {
    int a = 0;
    int b = 0;
    double lambda = 0.0;
    double norm_sq = 1.0;  // integral of |z^a w^b|^2 dV
    std::size_t index = 0; // position in the spectrum ordering

    int degree() const { return a + b; }
};

class Spectrum {
public:
    Spectrum(std::vector<EigenMode> modes, WeightVector beta, double cap);

    const std::vector<EigenMode>& modes() const { return modes_; }
    const WeightVector& beta() const { return beta_; }
    double cap() const { return cap_; }
    std::size_t size() const { return modes_.size(); }
    const EigenMode& operator[](std::size_t j) const { return modes_[j]; }

    /// #{j : lambda_j <= x}.
    std::size_t count_at_most(double x) const;
    /// Index range [first, last) of modes with lo < lambda < hi.
    std::pair<std::size_t, std::size_t> open_range(double lo, double hi) const;

private:
    std::vector<EigenMode> modes_;
    WeightVector beta_;
    double cap_;
};

/// Every (a, b) != (0, 0) with p a + q b <= cap, sorted by eigenvalue with
/// ties broken lexicographically in (a, b). Norms come from the model's
/// invariant quadrature; for beta = (1, 1) they are checked against
/// a! b! / (a + b + 1)!.
Spectrum enumerate_modes(const SasakianModel& model, double cap);

/// The quadrature node count used for the norm of a mode of this degree.
int norm_quadrature_nodes(const SasakianModel& model, int degree);

/// Normalized eigenfunction, extended to the cylinder by e^{lambda s}.
cplx eval_mode(const EigenMode& mode, const ModelPoint& x, double s = 0.0);
/// |f(x)|^2 for the normalized eigenfunction.
double mode_abs_sq(const EigenMode& mode, const ModelPoint& x);

struct HolomorphicGradient {
    cplx dz;
    cplx dw;
    // The d/dzbar and d/dwbar derivatives vanish identically.
};

HolomorphicGradient eval_mode_gradient(const EigenMode& mode, const ModelPoint& x);

/// Jet of |f|^2 through its degree-0 homogeneous extension
/// U^a V^b (U + V)^{-(a+b)} / normSq.
InvariantJet abs_sq_jet(const EigenMode& mode, const ModelPoint& x);

}  // namespace crlab

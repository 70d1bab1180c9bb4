#pragma once

// Smooth compactly supported cutoffs chi on (delta1, delta2) and the moments
// M_p = int_0^1 chi(t)^2 t^p dt that feed every k-dependent construction.

#include <vector>

namespace crlab {

class CutoffSpec {
public:
    CutoffSpec(double delta1, double delta2, std::vector<double> moments, int cr_dimension = 1);

    double delta1() const { return delta1_; }
    double delta2() const { return delta2_; }
    int cr_dimension() const { return n_; }
    const std::vector<double>& moments() const { return moments_; }
    double moment(int p) const;

    /// chi(t) = exp(-1 / ((t - delta1)(delta2 - t))) inside the support, 0 outside.
    double chi(double t) const;
    /// a0 = M_n.
    double a0() const { return moment(n_); }
    /// C_chi = M_n^{-1/2}.
    double c_chi() const;
    /// b_l = M_{n+l} / M_n.
    double b(int l) const { return moment(n_ + l) / moment(n_); }

private:
    double delta1_;
    double delta2_;
    int n_;
    std::vector<double> moments_;
};

inline constexpr double kMomentRelTolerance = 1e-13;

/// The standard bump with moments M_0 .. M_{moment_order}.
CutoffSpec make_bump(double delta1, double delta2, int moment_order, int cr_dimension = 1);

/// M_p of the standard bump by adaptive Gauss-Legendre split at the support
/// midpoint, with relative tolerance rel_tol and panel order `order`.
double bump_moment(double delta1, double delta2, int p, double rel_tol = kMomentRelTolerance, int order = 20);

/// chi(lambda / k).
double eval_chi_k(const CutoffSpec& spec, double lambda, double k);

}  // namespace crlab

#include "crlab/cutoff.hpp"

#include <cmath>
#include <string>

#include "crlab/models.hpp"
#include "crlab/numerics.hpp"

namespace crlab {

namespace {

double bump(double d1, double d2, double t) {
    if (t <= d1 || t >= d2) return 0.0;
    return std::exp(-1.0 / ((t - d1) * (d2 - t)));
}

void validate_interval(double d1, double d2) {
    if (!(d1 > 0.0 && d1 < d2 && d2 < 1.0)) {
        throw InvalidInput("cutoff support must satisfy 0 < delta1 < delta2 < 1, got (" + std::to_string(d1) + ", " +
                           std::to_string(d2) + ")");
    }
}

}  // namespace

CutoffSpec::CutoffSpec(double delta1, double delta2, std::vector<double> moments, int cr_dimension)
    : delta1_(delta1), delta2_(delta2), n_(cr_dimension), moments_(std::move(moments)) {
    validate_interval(delta1_, delta2_);
}

double CutoffSpec::moment(int p) const {
    if (p < 0 || p >= static_cast<int>(moments_.size())) {
        throw std::out_of_range("moment M_" + std::to_string(p) + " was not precomputed");
    }
    return moments_[static_cast<std::size_t>(p)];
}

double CutoffSpec::chi(double t) const { return bump(delta1_, delta2_, t); }

double CutoffSpec::c_chi() const { return 1.0 / std::sqrt(a0()); }

double bump_moment(double delta1, double delta2, int p, double rel_tol, int order) {
    validate_interval(delta1, delta2);
    const auto integrand = [&](double t) {
        const double c = bump(delta1, delta2, t);
        return c * c * std::pow(t, p);
    };
    const double mid = 0.5 * (delta1 + delta2);
    const auto o = static_cast<std::size_t>(order);
    return numerics::adaptive_gauss_legendre(integrand, delta1, mid, rel_tol, o).value +
           numerics::adaptive_gauss_legendre(integrand, mid, delta2, rel_tol, o).value;
}

CutoffSpec make_bump(double delta1, double delta2, int moment_order, int cr_dimension) {
    validate_interval(delta1, delta2);
    if (moment_order < cr_dimension + 4) {
        throw InvalidInput("moment order must be at least n + 4");
    }
    std::vector<double> m;
    m.reserve(static_cast<std::size_t>(moment_order) + 1);
    for (int p = 0; p <= moment_order; ++p) m.push_back(bump_moment(delta1, delta2, p));
    return CutoffSpec(delta1, delta2, std::move(m), cr_dimension);
}

double eval_chi_k(const CutoffSpec& spec, double lambda, double k) { return spec.chi(lambda / k); }

}  // namespace crlab

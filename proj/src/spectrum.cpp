#include "crlab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace crlab {

Spectrum::Spectrum(std::vector<EigenMode> modes, WeightVector beta, double cap)
    : modes_(std::move(modes)), beta_(std::move(beta)), cap_(cap) {}

std::size_t Spectrum::count_at_most(double x) const {
    const auto it = std::upper_bound(modes_.begin(), modes_.end(), x,
                                     [](double v, const EigenMode& m) { return v < m.lambda; });
    return static_cast<std::size_t>(it - modes_.begin());
}

std::pair<std::size_t, std::size_t> Spectrum::open_range(double lo, double hi) const {
    const auto first = std::upper_bound(modes_.begin(), modes_.end(), lo,
                                        [](double v, const EigenMode& m) { return v < m.lambda; });
    const auto last = std::lower_bound(modes_.begin(), modes_.end(), hi,
                                       [](const EigenMode& m, double v) { return m.lambda < v; });
    const auto f = static_cast<std::size_t>(first - modes_.begin());
    const auto l = static_cast<std::size_t>(last - modes_.begin());
    return {f, std::max(f, l)};
}

int norm_quadrature_nodes(const SasakianModel& model, int degree) {
    // Exact in x for the polynomial part; the extra nodes resolve the analytic
    // weight 1/(p|z|^2 + q|w|^2)^2 when p != q.
    return std::max(model.resolution(), degree / 2 + 17);
}

Spectrum enumerate_modes(const SasakianModel& model, double cap) {
    const double p = model.p();
    const double q = model.q();
    std::vector<EigenMode> modes;
    int max_degree = 0;
    for (int a = 0; p * a <= cap; ++a) {
        for (int b = 0; p * a + q * b <= cap; ++b) {
            if (a == 0 && b == 0) continue;
            modes.push_back({a, b, p * a + q * b, 1.0, 0});
            max_degree = std::max(max_degree, a + b);
        }
    }
    std::sort(modes.begin(), modes.end(), [](const EigenMode& l, const EigenMode& r) {
        if (l.lambda != r.lambda) return l.lambda < r.lambda;
        if (l.a != r.a) return l.a < r.a;
        return l.b < r.b;
    });

    const InvariantRule rule = model.invariant_rule(norm_quadrature_nodes(model, max_degree));
    const bool round = p == 1.0 && q == 1.0;
    for (std::size_t j = 0; j < modes.size(); ++j) {
        EigenMode& m = modes[j];
        m.index = j;
        double acc = 0.0;
        double comp = 0.0;
        for (std::size_t i = 0; i < rule.u.size(); ++i) {
            const double term = rule.weight[i] * std::pow(rule.u[i], m.a) * std::pow(rule.v[i], m.b);
            const double t = acc + term;
            comp += std::abs(acc) >= std::abs(term) ? (acc - t) + term : (term - t) + acc;
            acc = t;
        }
        m.norm_sq = acc + comp;
        if (round) {
            const double oracle = std::exp(std::lgamma(m.a + 1.0) + std::lgamma(m.b + 1.0) - std::lgamma(m.a + m.b + 2.0));
            if (std::abs(m.norm_sq - oracle) > 1e-9 * oracle) {
                throw std::logic_error("norm of mode (" + std::to_string(m.a) + "," + std::to_string(m.b) +
                                       ") disagrees with the Beta-integral value");
            }
        }
    }
    return Spectrum(std::move(modes), model.beta(), cap);
}

namespace {

/// Magnitude-phase power, exact at zero for exponent 0.
cplx monomial(cplx base, double modulus, double phase, int n) {
    if (n == 0) return 1.0;
    (void)base;
    return std::polar(std::pow(modulus, n), phase * n);
}

/// k-th derivative of t^n at t.
double power_derivative(double t, int n, int k) {
    if (k > n) return 0.0;
    double c = 1.0;
    for (int i = 0; i < k; ++i) c *= static_cast<double>(n - i);
    return c * std::pow(t, n - k);
}

}  // namespace

cplx eval_mode(const EigenMode& mode, const ModelPoint& x, double s) {
    const auto& h = x.hopf();
    const cplx v = monomial(x.z(), std::abs(x.z()), h.phi1, mode.a) * monomial(x.w(), std::abs(x.w()), h.phi2, mode.b);
    return v * (std::exp(mode.lambda * s) / std::sqrt(mode.norm_sq));
}

double mode_abs_sq(const EigenMode& mode, const ModelPoint& x) {
    return std::pow(std::norm(x.z()), mode.a) * std::pow(std::norm(x.w()), mode.b) / mode.norm_sq;
}

HolomorphicGradient eval_mode_gradient(const EigenMode& mode, const ModelPoint& x) {
    const auto& h = x.hopf();
    const double scale = 1.0 / std::sqrt(mode.norm_sq);
    const double rz = std::abs(x.z());
    const double rw = std::abs(x.w());
    HolomorphicGradient g{0.0, 0.0};
    if (mode.a > 0) {
        g.dz = static_cast<double>(mode.a) * monomial(x.z(), rz, h.phi1, mode.a - 1) *
               monomial(x.w(), rw, h.phi2, mode.b) * scale;
    }
    if (mode.b > 0) {
        g.dw = static_cast<double>(mode.b) * monomial(x.z(), rz, h.phi1, mode.a) *
               monomial(x.w(), rw, h.phi2, mode.b - 1) * scale;
    }
    return g;
}

InvariantJet abs_sq_jet(const EigenMode& mode, const ModelPoint& x) {
    const double U = std::norm(x.z());
    const double V = std::norm(x.w());
    const int m = mode.a + mode.b;
    const double A0 = power_derivative(U, mode.a, 0);
    const double A1 = power_derivative(U, mode.a, 1);
    const double A2 = power_derivative(U, mode.a, 2);
    const double B0 = power_derivative(V, mode.b, 0);
    const double B1 = power_derivative(V, mode.b, 1);
    const double B2 = power_derivative(V, mode.b, 2);
    // S(r) = r^{-m} and its derivatives at r = U + V = 1.
    const double S0 = 1.0;
    const double S1 = -static_cast<double>(m);
    const double S2 = static_cast<double>(m) * (m + 1.0);
    const double inv = 1.0 / mode.norm_sq;
    InvariantJet j;
    j.value = A0 * B0 * S0 * inv;
    j.dU = (A1 * B0 * S0 + A0 * B0 * S1) * inv;
    j.dV = (A0 * B1 * S0 + A0 * B0 * S1) * inv;
    j.dUU = (A2 * B0 * S0 + 2.0 * A1 * B0 * S1 + A0 * B0 * S2) * inv;
    j.dVV = (A0 * B2 * S0 + 2.0 * A0 * B1 * S1 + A0 * B0 * S2) * inv;
    j.dUV = (A1 * B1 * S0 + A1 * B0 * S1 + A0 * B1 * S1 + A0 * B0 * S2) * inv;
    return j;
}

}  // namespace crlab

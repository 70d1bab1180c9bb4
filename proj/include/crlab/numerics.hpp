#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace crlab::numerics {

/// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) {
        add(x);
        return *this;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double compensated_sum(std::span<const double> values);

struct GaussLegendreRule {
    std::vector<double> nodes;    // on [-1, 1], ascending
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree <= 2n-1.
GaussLegendreRule gauss_legendre(std::size_t n);

struct AdaptiveResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int panels = 0;
};

/// Adaptive panel Gauss-Legendre on [a, b]. A panel is accepted when its
/// `order`-point estimate agrees with the sum over its two halves within
/// rel_tol * |running estimate|. Panels are bisected at their midpoint.
AdaptiveResult adaptive_gauss_legendre(const std::function<double(double)>& f, double a, double b,
                                       double rel_tol, std::size_t order = 20, int max_depth = 40);

// ---------------------------------------------------------------------------
// Scalar root finding

class BracketError : public std::runtime_error {
public:
    explicit BracketError(const std::string& what) : std::runtime_error(what) {}
};

struct RootResult {
    double root = 0.0;
    double residual = 0.0;
    int iterations = 0;
    int newton_steps = 0;
    int bisection_steps = 0;
};

/// f(x) and f'(x) at x.
using ValueAndSlope = std::function<void(double, double&, double&)>;

/// Safeguarded Newton iteration for a sign change on [lo, hi]. Falls back to
/// bisection whenever the Newton iterate leaves the current bracket or the
/// bracket fails to halve. Stops when |f| <= f_tol or the bracket collapses.
RootResult safeguarded_newton(const ValueAndSlope& f, double lo, double hi, double f_tol = 1e-15,
                              double x_tol = 0.0, int max_iter = 200);

/// Plain bisection to |hi - lo| <= x_tol.
RootResult bisection(const std::function<double(double)>& f, double lo, double hi, double x_tol,
                     int max_iter = 400);

struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
};

/// Expands the symmetric interval [-h, h] geometrically (factor 2) starting at
/// `initial_half_width` until f changes sign, never beyond `max_half_width`.
/// Throws BracketError if no sign change is found.
Bracket expand_symmetric_bracket(const std::function<double(double)>& f, double initial_half_width,
                                 double max_half_width);

}  // namespace crlab::numerics

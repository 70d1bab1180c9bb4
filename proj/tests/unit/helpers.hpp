#pragma once

#include <cmath>
#include <functional>

#include "crlab/models.hpp"

namespace testing {

using crlab::cplx;
using crlab::ModelPoint;
using crlab::Vec4;

/// Central difference of an ambient function along a straight real direction.
inline cplx ambient_difference(const std::function<cplx(const Vec4&)>& f, const Vec4& x, const Vec4& v, double h) {
    return (f(x + h * v) - f(x - h * v)) / (2.0 * h);
}

/// Derivative along a complex direction c = a + i b: D_a f + i D_b f.
inline cplx complex_difference(const std::function<cplx(const Vec4&)>& f, const Vec4& x, const crlab::CVec4& c,
                               double h) {
    return ambient_difference(f, x, c.real(), h) + cplx{0.0, 1.0} * ambient_difference(f, x, c.imag(), h);
}

/// Central difference along the great circle through x with unit tangent v.
inline double geodesic_difference(const std::function<double(const ModelPoint&)>& f, const ModelPoint& x,
                                  const Vec4& v, double h) {
    const Vec4 r = x.real();
    const double fp = f(ModelPoint::from_real(std::cos(h) * r + std::sin(h) * v));
    const double fm = f(ModelPoint::from_real(std::cos(h) * r - std::sin(h) * v));
    return (fp - fm) / (2.0 * h);
}

inline double factorial_ratio(int a, int b) {
    return std::exp(std::lgamma(a + 1.0) + std::lgamma(b + 1.0) - std::lgamma(a + b + 2.0));
}

}  // namespace testing

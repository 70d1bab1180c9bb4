#pragma once

// Second-order jets of real functions on S^3, expressed through an ambient
// extension to R^4 = C^2. Tangential quantities (derivatives along vectors
// tangent to the sphere) do not depend on which extension is used.

#include "crlab/models.hpp"

namespace crlab {

struct ScalarJet {
    double value = 0.0;
    Vec4 grad = Vec4::Zero();
    Mat4 hess = Mat4::Zero();

    /// Derivative along a (possibly complex) tangent vector.
    cplx derivative(const TangentVector& v) const;
    /// Symmetric second derivative D^2 f(u, v).
    cplx second_derivative(const TangentVector& u, const TangentVector& v) const;
    /// Norm of the gradient projected to the tangent space of the sphere.
    double tangential_gradient_norm(const ModelPoint& x) const;
};

/// Partial derivatives of a function H(U, V) of U = |z|^2 and V = |w|^2,
/// evaluated on U + V = 1.
struct InvariantJet {
    double value = 0.0;
    double dU = 0.0;
    double dV = 0.0;
    double dUU = 0.0;
    double dUV = 0.0;
    double dVV = 0.0;

    InvariantJet& operator+=(const InvariantJet& o);
    InvariantJet operator*(double c) const;
};

/// Chain rule from (U, V) to real ambient coordinates at x.
ScalarJet to_ambient(const InvariantJet& jet, const ModelPoint& x);

}  // namespace crlab

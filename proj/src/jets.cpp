#include "crlab/jets.hpp"

namespace crlab {

cplx ScalarJet::derivative(const TangentVector& v) const {
    const CVec4 r = v.real_components();
    return r[0] * grad[0] + r[1] * grad[1] + r[2] * grad[2] + r[3] * grad[3];
}

cplx ScalarJet::second_derivative(const TangentVector& u, const TangentVector& v) const {
    const CVec4 a = u.real_components();
    const CVec4 b = v.real_components();
    cplx acc = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) acc += a[i] * hess(i, j) * b[j];
    }
    return acc;
}

double ScalarJet::tangential_gradient_norm(const ModelPoint& x) const {
    const Vec4 n = x.real();
    return (grad - grad.dot(n) * n).norm();
}

InvariantJet& InvariantJet::operator+=(const InvariantJet& o) {
    value += o.value;
    dU += o.dU;
    dV += o.dV;
    dUU += o.dUU;
    dUV += o.dUV;
    dVV += o.dVV;
    return *this;
}

InvariantJet InvariantJet::operator*(double c) const {
    return {value * c, dU * c, dV * c, dUU * c, dUV * c, dVV * c};
}

ScalarJet to_ambient(const InvariantJet& jet, const ModelPoint& x) {
    const Vec4 r = x.real();
    const Vec4 gU{2.0 * r[0], 2.0 * r[1], 0.0, 0.0};
    const Vec4 gV{0.0, 0.0, 2.0 * r[2], 2.0 * r[3]};
    ScalarJet out;
    out.value = jet.value;
    out.grad = jet.dU * gU + jet.dV * gV;
    out.hess = jet.dUU * gU * gU.transpose() + jet.dUV * (gU * gV.transpose() + gV * gU.transpose()) +
               jet.dVV * gV * gV.transpose();
    out.hess.diagonal() += Vec4{2.0 * jet.dU, 2.0 * jet.dU, 2.0 * jet.dV, 2.0 * jet.dV};
    return out;
}

}  // namespace crlab

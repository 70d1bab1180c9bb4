#include "crlab/deformation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crlab/numerics.hpp"

namespace crlab {

namespace {

constexpr cplx kI{0.0, 1.0};

using CMat4 = Eigen::Matrix4cd;

// Coefficient matrices on (z, w, zbar, wbar) of Z and Zbar.
CMat4 frame_matrix() {
    CMat4 m = CMat4::Zero();
    m(0, 3) = 1.0;
    m(1, 2) = -1.0;
    return m;
}

CMat4 conj_frame_matrix() {
    CMat4 m = CMat4::Zero();
    m(2, 1) = 1.0;
    m(3, 0) = -1.0;
    return m;
}

Eigen::Vector4cd coordinates(const ModelPoint& x) {
    return {x.z(), x.w(), std::conj(x.z()), std::conj(x.w())};
}

TangentVector frame_vector(const ModelPoint& x) { return {x, {std::conj(x.w()), -std::conj(x.z()), 0.0, 0.0}}; }

TangentVector conj_frame_vector(const ModelPoint& x) { return {x, {0.0, 0.0, x.w(), -x.z()}}; }

double level_sum(const std::vector<double>& c, const std::vector<double>& beta, double phi, int l) {
    numerics::CompensatedSum acc;
    for (std::size_t j = 0; j < c.size(); ++j) {
        acc.add(std::pow(2.0 * beta[j], l) * c[j] * std::exp(2.0 * beta[j] * phi));
    }
    return acc.value();
}

std::vector<double> sample_weights(const ContinuationProblem& problem, const std::vector<double>& r,
                                   const ModelPoint& x) {
    std::vector<double> c(problem.f.size());
    for (std::size_t j = 0; j < c.size(); ++j) c[j] = r[j] * r[j] * std::norm(problem.f[j](x));
    return c;
}

void validate(const ContinuationProblem& problem, const std::vector<double>& r) {
    if (problem.f.size() != problem.beta.size()) throw InvalidInput("continuation base and weights differ in length");
    if (r.size() != problem.f.size()) throw InvalidInput("parameter r has the wrong length");
    for (double b : problem.beta) {
        if (!(b > 0.0)) throw InvalidInput("continuation weights must be positive");
    }
}

// [-ln S / (2 beta_min), -ln S / (2 beta_max)] contains the root.
numerics::Bracket exact_bracket(const std::vector<double>& c, const std::vector<double>& beta) {
    double s = 0.0;
    for (double v : c) s += v;
    const auto [bmin, bmax] = std::minmax_element(beta.begin(), beta.end());
    const double a = -std::log(s) / (2.0 * *bmin);
    const double b = -std::log(s) / (2.0 * *bmax);
    return {std::min(a, b), std::max(a, b)};
}

double total_weight(const std::vector<double>& c, std::size_t sample) {
    double s = 0.0;
    for (double v : c) s += v;
    if (!(s > 0.0)) {
        throw ContinuationFailure("all components vanish at sample " + std::to_string(sample), sample);
    }
    return s;
}

}  // namespace

FrameDecomposition decompose(const SasakianModel& model, const TangentVector& v) {
    const ModelPoint& x = v.base;
    const cplx c = model.alpha(v);
    const TangentVector rest = v - model.reeb_vector(x) * c;
    const cplx z = x.z();
    const cplx w = x.w();
    return {w * rest.coeff[0] - z * rest.coeff[1], std::conj(w) * rest.coeff[2] - std::conj(z) * rest.coeff[3], c};
}

TangentVector frame_bracket(const ModelPoint& x) {
    const CMat4 mz = frame_matrix();
    const CMat4 mzb = conj_frame_matrix();
    const Eigen::Vector4cd v = (mzb * mz - mz * mzb) * coordinates(x);
    return {x, {v[0], v[1], v[2], v[3]}};
}

cplx frame_second_derivative(const ScalarJet& jet, const ModelPoint& x) {
    const TangentVector zf = frame_vector(x);
    const TangentVector zb = conj_frame_vector(x);
    // Z applied to the coefficients of Zbar.
    const TangentVector dz_zb{x, {0.0, 0.0, -std::conj(x.z()), -std::conj(x.w())}};
    return jet.second_derivative(zf, zb) + jet.derivative(dz_zb);
}

cplx gamma(const SasakianModel& model, const ScalarJet& jet, const TangentVector& v) {
    const FrameDecomposition d = decompose(model, v);
    const cplx dz = jet.derivative(frame_vector(v.base));
    const cplx dzb = jet.derivative(conj_frame_vector(v.base));
    return d.a * kI * dz - d.b * kI * dzb;
}

cplx gamma(const DeformedStructure& structure, const TangentVector& v) {
    return gamma(*structure.model, structure.phi(v.base), v);
}

double levi_undeformed(const SasakianModel& model, const ModelPoint& x) {
    return (model.dalpha(frame_vector(x), conj_frame_vector(x)) / (2.0 * kI)).real();
}

double levi_deformed(const SasakianModel& model, const ScalarJet& jet, const ModelPoint& x) {
    const cplx base = model.dalpha(frame_vector(x), conj_frame_vector(x)) / (2.0 * kI);
    const cplx corr = gamma(model, jet, frame_bracket(x)) / (2.0 * kI);
    return (base - corr).real() - frame_second_derivative(jet, x).real();
}

double levi_deformed(const DeformedStructure& structure, const ModelPoint& x) {
    if (!structure.model || !structure.phi) throw InvalidInput("deformed structure needs a model and a phi jet");
    return levi_deformed(*structure.model, structure.phi(x), x);
}

CertificateReport certificate_PN(const CertificateProblem& problem, double threshold) {
    CertificateReport rep;
    rep.threshold = threshold;
    numerics::CompensatedSum mean;
    for (const auto& x : problem.samples) {
        const double phi = problem.phi(x);
        numerics::CompensatedSum acc;
        for (const auto& c : problem.components) {
            acc.add(std::norm(c.coefficient) * mode_abs_sq(c.mode, x) * std::exp(2.0 * c.beta * phi));
        }
        const double r = acc.value() - 1.0;
        rep.residuals.push_back(r);
        rep.max_abs = std::max(rep.max_abs, std::abs(r));
        mean.add(std::abs(r));
    }
    if (!problem.samples.empty()) rep.mean_abs = mean.value() / static_cast<double>(problem.samples.size());
    rep.pass = rep.max_abs <= threshold;
    return rep;
}

ContinuationSolution continuation_solve(const ContinuationProblem& problem, const std::vector<double>& r) {
    validate(problem, r);
    const bool equal = std::all_of(problem.beta.begin(), problem.beta.end(),
                                   [&](double b) { return b == problem.beta.front(); });
    ContinuationSolution sol;
    for (std::size_t i = 0; i < problem.samples.size(); ++i) {
        const auto c = sample_weights(problem, r, problem.samples[i]);
        const double s = total_weight(c, i);
        double phi = 0.0;
        if (equal) {
            phi = -std::log(s) / (2.0 * problem.beta.front());
        } else {
            const numerics::Bracket br = exact_bracket(c, problem.beta);
            if (br.lo == br.hi) {
                phi = br.lo;
            } else {
                const auto f = [&](double t, double& v, double& d) {
                    v = level_sum(c, problem.beta, t, 0) - 1.0;
                    d = level_sum(c, problem.beta, t, 1);
                };
                phi = numerics::safeguarded_newton(f, br.lo, br.hi).root;
            }
        }
        const double res = level_sum(c, problem.beta, phi, 0) - 1.0;
        sol.values.push_back(phi);
        sol.residuals.push_back(res);
        sol.max_residual = std::max(sol.max_residual, std::abs(res));
    }
    return sol;
}

std::vector<double> continuation_solve_bisection(const ContinuationProblem& problem, const std::vector<double>& r,
                                                 double x_tol) {
    validate(problem, r);
    std::vector<double> out;
    for (std::size_t i = 0; i < problem.samples.size(); ++i) {
        const auto c = sample_weights(problem, r, problem.samples[i]);
        total_weight(c, i);
        numerics::Bracket br = exact_bracket(c, problem.beta);
        if (br.lo == br.hi) {
            out.push_back(br.lo);
            continue;
        }
        // Widen slightly so rounding at the closed-form endpoints cannot hide the sign change.
        const double pad = 1e-12 * (1.0 + std::abs(br.lo) + std::abs(br.hi));
        const auto f = [&](double t) { return level_sum(c, problem.beta, t, 0) - 1.0; };
        out.push_back(numerics::bisection(f, br.lo - pad, br.hi + pad, x_tol).root);
    }
    return out;
}

std::vector<double> continuation_derivative(const ContinuationProblem& problem, const std::vector<double>& r0,
                                            const std::vector<double>& phi0, const std::vector<double>& v,
                                            double membership_tolerance) {
    validate(problem, r0);
    if (v.size() != r0.size()) throw InvalidInput("direction v has the wrong length");
    if (phi0.size() != problem.samples.size()) throw InvalidInput("phi0 must have one value per sample");
    std::vector<double> out;
    for (std::size_t i = 0; i < problem.samples.size(); ++i) {
        const ModelPoint& x = problem.samples[i];
        numerics::CompensatedSum g, den, num;
        for (std::size_t j = 0; j < problem.f.size(); ++j) {
            const double f2 = std::norm(problem.f[j](x));
            const double e = std::exp(2.0 * problem.beta[j] * phi0[i]);
            g.add(r0[j] * r0[j] * f2 * e);
            den.add(2.0 * problem.beta[j] * r0[j] * r0[j] * f2 * e);
            num.add(2.0 * r0[j] * v[j] * f2 * e);
        }
        if (std::abs(g.value() - 1.0) > membership_tolerance) {
            throw InvalidInput("G(r0, phi0) differs from 1 by " + std::to_string(g.value() - 1.0) + " at sample " +
                               std::to_string(i));
        }
        if (den.value() == 0.0) {
            throw ContinuationFailure("zero denominator in A(v) at sample " + std::to_string(i), i);
        }
        out.push_back(-num.value() / den.value());
    }
    return out;
}

ExampleFamily::ExampleFamily(double epsilon) : epsilon_(epsilon) {
    if (!(epsilon > -1.0)) throw InvalidInput("example family needs epsilon > -1");
}

double ExampleFamily::phi(const ModelPoint& x) const { return -0.5 * std::log1p(epsilon_ * x.u()); }

ScalarJet ExampleFamily::phi_jet(const ModelPoint& x) const {
    // Degree-0 extension -1/2 log((1 + eps) U + V) + 1/2 log(U + V) on U + V = 1.
    const double e1 = 1.0 + epsilon_;
    const double P = 1.0 + epsilon_ * x.u();
    InvariantJet j;
    j.value = phi(x);
    j.dU = -0.5 * e1 / P + 0.5;
    j.dV = -0.5 / P + 0.5;
    j.dUU = 0.5 * e1 * e1 / (P * P) - 0.5;
    j.dUV = 0.5 * e1 / (P * P) - 0.5;
    j.dVV = 0.5 / (P * P) - 0.5;
    return to_ambient(j, x);
}

std::array<cplx, 2> ExampleFamily::map(const ModelPoint& x) const {
    const double e = std::exp(phi(x));
    return {e * std::sqrt(1.0 + epsilon_) * x.z(), e * x.w()};
}

CertificateProblem ExampleFamily::certificate(const SasakianModel& model, const std::vector<ModelPoint>& samples) const {
    const Spectrum spec = enumerate_modes(model, std::max(model.p(), model.q()));
    CertificateProblem prob;
    for (const auto& m : spec.modes()) {
        if (m.degree() != 1) continue;
        const double scale = m.a == 1 ? 1.0 + epsilon_ : 1.0;
        prob.components.push_back({std::sqrt(scale * m.norm_sq), m, m.lambda});
    }
    const double eps = epsilon_;
    prob.phi = [eps](const ModelPoint& x) { return -0.5 * std::log1p(eps * x.u()); };
    prob.samples = samples;
    return prob;
}

ExampleFamily example_family(double epsilon) { return ExampleFamily(epsilon); }

ContinuationProblem degree_one_base(const std::vector<ModelPoint>& samples) {
    ContinuationProblem p;
    p.f = {[](const ModelPoint& x) { return x.z(); }, [](const ModelPoint& x) { return x.w(); }};
    p.beta = {1.0, 1.0};
    p.samples = samples;
    return p;
}

}  // namespace crlab

#include "crlab/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "crlab/calculus.hpp"
#include "crlab/numerics.hpp"

namespace crlab {

namespace {

cplx holomorphic_derivative(const HolomorphicGradient& g, const Vec4& v) {
    return g.dz * cplx(v[0], v[1]) + g.dw * cplx(v[2], v[3]);
}

std::vector<cplx> window_map(const std::vector<EigenMode>& modes, const ModelPoint& x) {
    std::vector<cplx> out;
    out.reserve(modes.size());
    for (const auto& m : modes) out.push_back(eval_mode(m, x));
    return out;
}

std::vector<cplx> window_differential(const std::vector<EigenMode>& modes, const ModelPoint& x, const Vec4& v) {
    std::vector<cplx> out;
    out.reserve(modes.size());
    for (const auto& m : modes) out.push_back(holomorphic_derivative(eval_mode_gradient(m, x), v));
    return out;
}

double min_extended_singular_value(const std::vector<EigenMode>& modes, const std::vector<ModelPoint>& samples,
                                   double s) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& x : samples) best = std::min(best, extended_singular_value(modes, x, s));
    return best;
}

bool collar_holds(const std::vector<EigenMode>& modes, const std::vector<ModelPoint>& samples, double sigma0,
                  double c, int grid) {
    for (int i = 0; i < grid; ++i) {
        const double s = -c + 2.0 * c * i / (grid - 1);
        if (min_extended_singular_value(modes, samples, s) < 0.5 * sigma0) return false;
    }
    return true;
}

}  // namespace

double extended_singular_value(const std::vector<EigenMode>& modes, const ModelPoint& x, double s) {
    const auto frame = tangent_orthonormal_frame(x);
    std::vector<std::vector<cplx>> cols(4, std::vector<cplx>(modes.size()));
    for (std::size_t j = 0; j < modes.size(); ++j) {
        const EigenMode& m = modes[j];
        const double grow = std::exp(m.lambda * s);
        const auto g = eval_mode_gradient(m, x);
        for (int c = 0; c < 3; ++c) cols[c][j] = grow * holomorphic_derivative(g, frame[c]);
        cols[3][j] = m.lambda * grow * eval_mode(m, x);
    }
    return smallest_singular_value(cols);
}

ReferenceEmbedding build_reference_embedding(const SasakianModel& /*model*/, const Spectrum& spectrum,
                                             std::size_t m0, const std::vector<ModelPoint>& samples,
                                             const EmbeddingOptions& options) {
    if (m0 < 1 || m0 > spectrum.size()) {
        throw InvalidInput("m0 = " + std::to_string(m0) + " is outside the enumerated spectrum");
    }
    if (samples.size() < 2) throw InvalidInput("reference embedding needs at least two samples");
    const std::size_t start = m0 - 1;
    std::size_t best_len = 0;
    double best_sv = 0.0;
    double best_sep = 0.0;
    double best_score = -1.0;
    for (std::size_t len = 1; start + len <= spectrum.size(); ++len) {
        std::vector<EigenMode> window(spectrum.modes().begin() + static_cast<std::ptrdiff_t>(start),
                                      spectrum.modes().begin() + static_cast<std::ptrdiff_t>(start + len));
        const auto diag = map_diagnostics([&](const ModelPoint& x) { return window_map(window, x); }, samples,
                                          samples,
                                          [&](const ModelPoint& x, const Vec4& v) {
                                              return window_differential(window, x, v);
                                          });
        const double score = std::min(diag.min_singular_value, diag.min_separation_ratio);
        if (score > best_score) {
            best_score = score;
            best_len = len;
            best_sv = diag.min_singular_value;
            best_sep = diag.min_separation_ratio;
        }
        if (diag.min_singular_value < options.window_threshold || diag.min_separation_ratio < options.window_threshold) {
            continue;
        }

        ReferenceEmbedding ref;
        ref.modes = std::move(window);
        ref.m0 = m0;
        ref.diagnostics = diag;
        ref.sigma0 = min_extended_singular_value(ref.modes, samples, 0.0);
        double c = options.collar_max;
        while (!collar_holds(ref.modes, samples, ref.sigma0, c, options.collar_grid)) {
            c *= 0.5;
            if (c < 1e-12) throw EmbeddingFailure("no positive collar width found", len, best_sv, best_sep);
        }
        if (c < options.collar_max) {
            double lo = c;
            double hi = std::min(2.0 * c, options.collar_max);
            for (int it = 0; it < 40; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (collar_holds(ref.modes, samples, ref.sigma0, mid, options.collar_grid)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            c = lo;
        }
        ref.collar_width = c;
        return ref;
    }
    throw EmbeddingFailure("no mode window up to the spectrum cap passes the embedding diagnostics", best_len,
                           best_sv, best_sep);
}

EmbeddingFamily::EmbeddingFamily(double k, std::vector<FamilyComponent> components, double collar_width,
                                 std::size_t m0)
    : k_(k), components_(std::move(components)), collar_width_(collar_width), m0_(m0) {
    if (!(k_ > 0.0)) throw InvalidInput("k must be positive");
    if (!(collar_width_ > 0.0)) throw InvalidInput("collar width must be positive");
    std::stable_partition(components_.begin(), components_.end(), [](const auto& c) { return c.reference; });
    reference_count_ = static_cast<std::size_t>(
        std::count_if(components_.begin(), components_.end(), [](const auto& c) { return c.reference; }));
}

std::vector<double> EmbeddingFamily::beta() const {
    std::vector<double> out;
    out.reserve(components_.size());
    for (const auto& c : components_) out.push_back(c.mode.lambda);
    return out;
}

bool EmbeddingFamily::blocks_separated() const {
    double g_max = -std::numeric_limits<double>::infinity();
    double h_min = std::numeric_limits<double>::infinity();
    for (const auto& c : components_) {
        if (c.reference) {
            g_max = std::max(g_max, c.mode.lambda);
        } else {
            h_min = std::min(h_min, c.mode.lambda);
        }
    }
    return g_max < h_min;
}

EmbeddingFamily build_Fk(const SasakianModel& model, const Spectrum& spectrum, const CutoffSpec& spec, double k,
                         const ReferenceEmbedding& reference) {
    if (spec.delta2() * k > spectrum.cap()) {
        throw TruncationError("k = " + std::to_string(k) + " needs eigenvalues up to " +
                              std::to_string(spec.delta2() * k) + " but the spectrum cap is " +
                              std::to_string(spectrum.cap()));
    }
    const int n = model.cr_dimension();
    std::vector<FamilyComponent> comps;
    for (const auto& m : reference.modes) comps.push_back({m, -2.0 * k, true});
    const double log_scale = 2.0 * std::log(spec.c_chi()) - (n + 1) * std::log(k);
    const auto [first, last] = spectrum.open_range(spec.delta1() * k, spec.delta2() * k);
    for (std::size_t j = first; j < last; ++j) {
        const EigenMode& m = spectrum[j];
        const double t = m.lambda / k;
        const double log_chi = -1.0 / ((t - spec.delta1()) * (spec.delta2() - t));
        comps.push_back({m, log_scale + 2.0 * log_chi, false});
    }
    return EmbeddingFamily(k, std::move(comps), reference.collar_width, reference.m0);
}

PointProfile::PointProfile(const EmbeddingFamily& family, const ModelPoint& x, bool with_jets)
    : point_(x), with_jets_(with_jets) {
    const double floor_log = std::log(kUnderflowFloor);
    std::vector<Level> terms;
    terms.reserve(family.components().size());
    for (const auto& c : family.components()) {
        const double f2 = mode_abs_sq(c.mode, x);
        if (f2 == 0.0) continue;
        const double log_term = c.log_weight + std::log(f2);
        const double scale = std::exp(c.log_weight);
        if (log_term < floor_log || scale == 0.0) {
            dropped_ = true;
            continue;
        }
        Level lvl{c.mode.lambda, std::exp(log_term), {}};
        if (with_jets) lvl.jet = abs_sq_jet(c.mode, x) * scale;
        terms.push_back(lvl);
    }
    std::stable_sort(terms.begin(), terms.end(), [](const Level& a, const Level& b) { return a.lambda < b.lambda; });
    for (const auto& t : terms) {
        if (!levels_.empty() && levels_.back().lambda == t.lambda) {
            levels_.back().weight += t.weight;
            levels_.back().jet += t.jet;
        } else {
            levels_.push_back(t);
        }
    }
}

double PointProfile::norm_sq(double s, int l) const {
    numerics::CompensatedSum acc;
    for (const auto& lv : levels_) acc.add(std::pow(2.0 * lv.lambda, l) * lv.weight * std::exp(2.0 * lv.lambda * s));
    return acc.value();
}

double norm_sq(const EmbeddingFamily& family, const ModelPoint& x, double s, int l) {
    return PointProfile(family, x).norm_sq(s, l);
}

PhiSolve solve_phi(const PointProfile& profile, double k, double collar_width, double initial_half_width) {
    if (profile.levels().empty()) {
        throw numerics::BracketError("bracket not found: every component vanishes at the point");
    }
    const double h0 = std::min(initial_half_width > 0.0 ? initial_half_width : 1.0 / k, collar_width);
    const auto f = [&](double s) { return profile.norm_sq(s) - 1.0; };
    const numerics::Bracket br = numerics::expand_symmetric_bracket(f, h0, collar_width);
    const auto fs = [&](double s, double& v, double& d) {
        v = profile.norm_sq(s) - 1.0;
        d = profile.norm_sq(s, 1);
    };
    const numerics::RootResult r = numerics::safeguarded_newton(fs, br.lo, br.hi);
    PhiSolve out;
    out.phi = r.root;
    out.residual = profile.norm_sq(r.root) - 1.0;
    out.slope = profile.norm_sq(r.root, 1);
    out.iterations = r.iterations;
    out.bracket_half_width = std::max(std::abs(br.lo), std::abs(br.hi));
    out.underflow_dropped = profile.underflow_dropped();
    return out;
}

PhiSolve solve_phi(const EmbeddingFamily& family, const ModelPoint& x) {
    return solve_phi(PointProfile(family, x), family.k(), family.collar_width());
}

double solve_phi_bisection(const EmbeddingFamily& family, const ModelPoint& x, double x_tol) {
    const PointProfile profile(family, x);
    const auto f = [&](double s) { return profile.norm_sq(s) - 1.0; };
    const numerics::Bracket br = numerics::expand_symmetric_bracket(f, std::min(1.0 / family.k(), family.collar_width()),
                                                                    family.collar_width());
    return numerics::bisection(f, br.lo, br.hi, x_tol).root;
}

ScalarJet implicit_derivatives(const PointProfile& profile, double phi) {
    if (!profile.has_jets()) throw InvalidInput("implicit derivatives need a profile built with jets");
    InvariantJet j0;
    InvariantJet j1;
    double g_ss = 0.0;
    for (const auto& lv : profile.levels()) {
        const double e = std::exp(2.0 * lv.lambda * phi);
        j0 += lv.jet * e;
        j1 += lv.jet * (2.0 * lv.lambda * e);
        g_ss += 4.0 * lv.lambda * lv.lambda * e * lv.jet.value;
    }
    const double g_s = j1.value;
    if (!(g_s > 0.0) || !std::isfinite(g_s)) {
        throw std::runtime_error("degenerate implicit-derivative denominator d/ds |F_k|^2 = " + std::to_string(g_s));
    }
    const ScalarJet a0 = to_ambient(j0, profile.point());
    const ScalarJet a1 = to_ambient(j1, profile.point());
    ScalarJet out;
    out.value = phi;
    out.grad = -a0.grad / g_s;
    out.hess = -(a0.hess + a1.grad * out.grad.transpose() + out.grad * a1.grad.transpose() +
                 g_ss * out.grad * out.grad.transpose()) /
               g_s;
    return out;
}

ScalarJet implicit_derivatives(const EmbeddingFamily& family, const ModelPoint& x, double phi) {
    return implicit_derivatives(PointProfile(family, x, true), phi);
}

GraphSolution::GraphSolution(std::shared_ptr<const EmbeddingFamily> family, std::vector<GraphSample> samples)
    : family_(std::move(family)), samples_(std::move(samples)) {}

double GraphSolution::value(const ModelPoint& x) const { return solve_phi(*family_, x).phi; }

ScalarJet GraphSolution::jet(const ModelPoint& x) const {
    const PointProfile profile(*family_, x, true);
    const PhiSolve s = solve_phi(profile, family_->k(), family_->collar_width());
    return implicit_derivatives(profile, s.phi);
}

double GraphSolution::sup_phi() const {
    double m = 0.0;
    for (const auto& s : samples_) m = std::max(m, std::abs(s.phi));
    return m;
}

double GraphSolution::sup_dphi() const {
    double m = 0.0;
    for (const auto& s : samples_) m = std::max(m, s.jet.tangential_gradient_norm(s.point));
    return m;
}

double GraphSolution::max_residual() const {
    double m = 0.0;
    for (const auto& s : samples_) m = std::max(m, std::abs(s.residual));
    return m;
}

GraphSolution solve_graph(std::shared_ptr<const EmbeddingFamily> family, const std::vector<ModelPoint>& points) {
    std::vector<GraphSample> samples;
    samples.reserve(points.size());
    for (const auto& x : points) {
        const PointProfile profile(*family, x, true);
        const PhiSolve s = solve_phi(profile, family->k(), family->collar_width());
        samples.push_back({x, s.phi, s.residual, s.iterations, implicit_derivatives(profile, s.phi)});
    }
    return GraphSolution(std::move(family), std::move(samples));
}

SphereImage sphere_map(const EmbeddingFamily& family, const ModelPoint& x, double phi) {
    SphereImage img;
    img.components.reserve(family.components().size());
    img.beta = family.beta();
    for (const auto& c : family.components()) {
        const double amp = std::exp(0.5 * c.log_weight + c.mode.lambda * phi);
        img.components.push_back(amp == 0.0 ? cplx{0.0, 0.0} : amp * eval_mode(c.mode, x));
    }
    return img;
}

SphereMap sphere_map_function(std::shared_ptr<const EmbeddingFamily> family) {
    return [family](const ModelPoint& x) { return sphere_map(*family, x, solve_phi(*family, x).phi).components; };
}

}  // namespace crlab

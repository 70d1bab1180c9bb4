#include "crlab/numerics.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace crlab::numerics {

double compensated_sum(std::span<const double> values) {
    CompensatedSum acc;
    for (double v : values) acc.add(v);
    return acc.value();
}

GaussLegendreRule gauss_legendre(std::size_t n) {
    if (n == 0) throw std::invalid_argument("gauss_legendre: n must be positive");
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute derivative at the converged node for the weight.
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
            p0 = p1;
            p1 = pk;
        }
        dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

namespace {

double panel_estimate(const std::function<double(double)>& f, const GaussLegendreRule& rule, double a,
                      double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    CompensatedSum acc;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        acc.add(rule.weights[i] * f(mid + half * rule.nodes[i]));
    }
    return half * acc.value();
}

struct Panel {
    double a;
    double b;
    double estimate;
    int depth;
};

}  // namespace

AdaptiveResult adaptive_gauss_legendre(const std::function<double(double)>& f, double a, double b,
                                       double rel_tol, std::size_t order, int max_depth) {
    const GaussLegendreRule rule = gauss_legendre(order);
    // Seed with the two halves so that endpoint-flat integrands are never
    // judged on a single panel.
    const double mid = 0.5 * (a + b);
    std::vector<Panel> stack{{a, mid, panel_estimate(f, rule, a, mid), 1},
                             {mid, b, panel_estimate(f, rule, mid, b), 1}};
    const double scale = std::abs(stack[0].estimate + stack[1].estimate);

    AdaptiveResult result;
    CompensatedSum total;
    CompensatedSum error;
    while (!stack.empty()) {
        const Panel p = stack.back();
        stack.pop_back();
        const double m = 0.5 * (p.a + p.b);
        const double left = panel_estimate(f, rule, p.a, m);
        const double right = panel_estimate(f, rule, m, p.b);
        const double diff = std::abs(left + right - p.estimate);
        const double width_share = (p.b - p.a) / (b - a);
        if (diff <= rel_tol * scale * width_share || p.depth >= max_depth || scale == 0.0) {
            total.add(left + right);
            error.add(diff);
            ++result.panels;
        } else {
            stack.push_back({p.a, m, left, p.depth + 1});
            stack.push_back({m, p.b, right, p.depth + 1});
        }
    }
    result.value = total.value();
    result.error_estimate = error.value();
    return result;
}

RootResult safeguarded_newton(const ValueAndSlope& f, double lo, double hi, double f_tol, double x_tol,
                              int max_iter) {
    double flo = 0.0;
    double fhi = 0.0;
    double dummy = 0.0;
    f(lo, flo, dummy);
    f(hi, fhi, dummy);
    if (flo == 0.0) return {lo, 0.0, 0, 0, 0};
    if (fhi == 0.0) return {hi, 0.0, 0, 0, 0};
    if ((flo > 0.0) == (fhi > 0.0)) {
        throw BracketError("safeguarded_newton: root not bracketed");
    }
    // Orient so that f(lo) < 0 < f(hi).
    if (flo > 0.0) std::swap(lo, hi);

    RootResult res;
    double x = 0.5 * (lo + hi);
    double fx = 0.0;
    double dfx = 0.0;
    f(x, fx, dfx);
    double prev_step = std::abs(hi - lo);
    double step = prev_step;
    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it + 1;
        if (std::abs(fx) <= f_tol) break;
        if (fx < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        const double a = std::min(lo, hi);
        const double b = std::max(lo, hi);
        if (b - a <= x_tol || b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) break;

        double next = 0.5 * (a + b);
        bool newton_ok = dfx != 0.0 && std::isfinite(dfx);
        if (newton_ok) {
            const double candidate = x - fx / dfx;
            // Accept only steps that stay strictly inside the bracket and
            // shrink at least as fast as bisection would over two steps.
            newton_ok = candidate > a && candidate < b && std::abs(fx / dfx) <= 0.5 * prev_step;
            if (newton_ok) next = candidate;
        }
        if (newton_ok) {
            ++res.newton_steps;
        } else {
            ++res.bisection_steps;
        }
        prev_step = step;
        step = std::abs(next - x);
        if (next == x) break;
        x = next;
        f(x, fx, dfx);
    }
    res.root = x;
    res.residual = fx;
    return res;
}

RootResult bisection(const std::function<double(double)>& f, double lo, double hi, double x_tol,
                     int max_iter) {
    double flo = f(lo);
    const double fhi = f(hi);
    if ((flo > 0.0) == (fhi > 0.0) && flo != 0.0 && fhi != 0.0) {
        throw BracketError("bisection: root not bracketed");
    }
    RootResult res;
    for (int it = 0; it < max_iter && std::abs(hi - lo) > x_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fm = f(mid);
        res.iterations = it + 1;
        ++res.bisection_steps;
        if (fm == 0.0) {
            lo = hi = mid;
            break;
        }
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    res.root = 0.5 * (lo + hi);
    res.residual = f(res.root);
    return res;
}

Bracket expand_symmetric_bracket(const std::function<double(double)>& f, double initial_half_width,
                                 double max_half_width) {
    double h = std::min(initial_half_width, max_half_width);
    while (true) {
        const double fl = f(-h);
        const double fh = f(h);
        if ((fl <= 0.0) != (fh <= 0.0) || fl == 0.0 || fh == 0.0) return {-h, h};
        if (h >= max_half_width) break;
        h = std::min(2.0 * h, max_half_width);
    }
    throw BracketError("bracket not found within |s| <= " + std::to_string(max_half_width));
}

}  // namespace crlab::numerics

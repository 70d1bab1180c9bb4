#include "crlab/calculus.hpp"

#include <algorithm>
#include <cmath>

#include "crlab/diagnostics.hpp"
#include "crlab/numerics.hpp"

namespace crlab {

Symbol cutoff_symbol(const CutoffSpec& spec, double k) {
    return {[spec, k](double lambda) {
                const double c = eval_chi_k(spec, lambda, k);
                return c * c;
            },
            spec.delta2() * k};
}

double diagonal_sum(const Spectrum& spectrum, const Symbol& symbol, const ModelPoint& x) {
    if (symbol.support_max > spectrum.cap()) {
        throw TruncationError("symbol support reaches " + std::to_string(symbol.support_max) +
                              " beyond the spectrum cap " + std::to_string(spectrum.cap()));
    }
    numerics::CompensatedSum acc;
    for (const EigenMode& m : spectrum.modes()) {
        const double t = symbol.tau(m.lambda);
        if (t != 0.0) acc.add(t * mode_abs_sq(m, x));
    }
    return acc.value();
}

double taylor_family_sum(const Spectrum& spectrum, const CutoffSpec& spec, double s, double k, int l,
                         const ModelPoint& x) {
    if (spec.delta2() * k > spectrum.cap()) {
        throw TruncationError("cutoff support " + std::to_string(spec.delta2() * k) + " exceeds the spectrum cap " +
                              std::to_string(spectrum.cap()));
    }
    const auto [first, last] = spectrum.open_range(spec.delta1() * k, spec.delta2() * k);
    numerics::CompensatedSum acc;
    for (std::size_t j = first; j < last; ++j) {
        const EigenMode& m = spectrum[j];
        const double c = eval_chi_k(spec, m.lambda, k);
        if (c == 0.0) continue;
        acc.add(std::pow(m.lambda, l) * std::exp(2.0 * m.lambda * s) * c * c * mode_abs_sq(m, x));
    }
    return acc.value();
}

double cutoff_diagonal_sum(const Spectrum& spectrum, const CutoffSpec& spec, double k, const ModelPoint& x) {
    return taylor_family_sum(spectrum, spec, 0.0, k, 0, x);
}

LeadingCoefficientReport verify_leading_coefficient(const SasakianModel& model, const Spectrum& spectrum,
                                                    const CutoffSpec& spec, const std::vector<double>& k_list,
                                                    const std::vector<ModelPoint>& points) {
    if (k_list.size() < 4) throw InvalidInput("need at least four k values");
    if (!std::is_sorted(k_list.begin(), k_list.end())) throw InvalidInput("k values must be increasing");
    const int n = model.cr_dimension();
    LeadingCoefficientReport report;
    report.a0 = spec.a0();
    std::vector<std::pair<double, double>> remainder;
    for (double k : k_list) {
        LeadingCoefficientRow row;
        row.k = k;
        const double scale = std::pow(k, -(n + 1));
        for (const ModelPoint& x : points) row.scaled.push_back(scale * cutoff_diagonal_sum(spectrum, spec, k, x));
        const auto [lo, hi] = std::minmax_element(row.scaled.begin(), row.scaled.end());
        row.spread = *hi - *lo;
        for (double v : row.scaled) row.max_deviation = std::max(row.max_deviation, std::abs(v - report.a0));
        remainder.emplace_back(k, row.max_deviation);
        report.rows.push_back(std::move(row));
    }
    const RateFit fit = fit_rate(remainder);
    report.remainder_slope = fit.slope;
    report.remainder_intercept = fit.intercept;
    report.remainder_r2 = fit.r_squared;
    return report;
}

}  // namespace crlab

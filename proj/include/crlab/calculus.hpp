#pragma once

// Diagonal functional-calculus sums R^tau(x) = sum_j tau(lambda_j) |f_j(x)|^2
// over a finite spectrum, and the semiclassical checks built from them.

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crlab/cutoff.hpp"
#include "crlab/spectrum.hpp"

namespace crlab {

class TruncationError : public std::runtime_error {
public:
    explicit TruncationError(const std::string& what) : std::runtime_error(what) {}
};

/// A symbol tau together with an upper bound of its support.
struct Symbol {
    std::function<double(double)> tau;
    double support_max = 0.0;
};

/// tau(lambda) = chi(lambda / k)^2.
Symbol cutoff_symbol(const CutoffSpec& spec, double k);

/// Exact finite sum. Throws TruncationError if the symbol's support reaches
/// past the spectrum cap.
double diagonal_sum(const Spectrum& spectrum, const Symbol& symbol, const ModelPoint& x);

/// The same sum with tau = chi_k^2, restricted to modes inside the support.
double cutoff_diagonal_sum(const Spectrum& spectrum, const CutoffSpec& spec, double k, const ModelPoint& x);

/// sum_j lambda_j^l e^{2 lambda_j s} chi_k(lambda_j)^2 |f_j(x)|^2.
double taylor_family_sum(const Spectrum& spectrum, const CutoffSpec& spec, double s, double k, int l,
                         const ModelPoint& x);

struct LeadingCoefficientRow {
    double k = 0.0;
    std::vector<double> scaled;  // k^{-(n+1)} R(x) per point
    double max_deviation = 0.0;  // max |scaled - a0|
    double spread = 0.0;         // max - min over points
};

struct LeadingCoefficientReport {
    double a0 = 0.0;
    std::vector<LeadingCoefficientRow> rows;
    double remainder_slope = 0.0;
    double remainder_intercept = 0.0;
    double remainder_r2 = 0.0;
};

LeadingCoefficientReport verify_leading_coefficient(const SasakianModel& model, const Spectrum& spectrum,
                                                    const CutoffSpec& spec, const std::vector<double>& k_list,
                                                    const std::vector<ModelPoint>& points);

}  // namespace crlab

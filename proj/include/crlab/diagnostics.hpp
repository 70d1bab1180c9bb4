#pragma once

// Log-log rate fits and finite-sample embedding diagnostics (immersion and
// injectivity proxies).

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "crlab/models.hpp"

namespace crlab {

struct RateFit {
    std::vector<std::pair<double, double>> pairs;
    double slope = 0.0;
    double intercept = 0.0;  // ln v = intercept + slope ln k
    double r_squared = 0.0;
};

/// Least squares on (ln k, ln v). Needs at least three pairs with k, v > 0.
RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs);

using SphereMap = std::function<std::vector<cplx>(const ModelPoint&)>;
/// Derivative of the map along a real tangent vector at x.
using SphereMapDifferential = std::function<std::vector<cplx>(const ModelPoint&, const Vec4&)>;

struct MapDiagnostics {
    double min_singular_value = 0.0;
    std::size_t singular_witness = 0;  // sample index
    double min_separation_ratio = 0.0;
    std::size_t separation_witness_a = 0;
    std::size_t separation_witness_b = 0;
    std::size_t sample_count = 0;
    std::size_t pair_sample_count = 0;
    std::uint64_t seed = 0;
};

/// Step used for geodesic central differences when no differential is given.
inline constexpr double kMapDifferenceStep = 1e-5;

/// Smallest singular value of the real (2 dim) x 3 differential over
/// `samples`, and the smallest |F(x) - F(y)| / d(x, y) over pairs drawn from
/// `pair_samples`. With no analytic differential, central differences along
/// great circles are used.
MapDiagnostics map_diagnostics(const SphereMap& map, const std::vector<ModelPoint>& samples,
                               const std::vector<ModelPoint>& pair_samples,
                               const SphereMapDifferential& differential = nullptr, std::uint64_t seed = 0);

/// Real differential columns -> smallest singular value.
double smallest_singular_value(const std::vector<std::vector<cplx>>& columns);

/// Directional derivative of a map along the great circle through x with unit
/// tangent v, by central differences.
std::vector<cplx> geodesic_difference(const SphereMap& map, const ModelPoint& x, const Vec4& v, double h);

}  // namespace crlab

#include "crlab/diagnostics.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace crlab {

RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 3) throw InvalidInput("rate fit needs at least three pairs");
    RateFit fit;
    fit.pairs = pairs;
    const double n = static_cast<double>(pairs.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& [k, v] : pairs) {
        if (!(k > 0.0) || !(v > 0.0)) throw InvalidInput("rate fit needs positive k and values");
        sx += std::log(k);
        sy += std::log(v);
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [k, v] : pairs) {
        const double dx = std::log(k) - mx;
        const double dy = std::log(v) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw InvalidInput("rate fit needs at least two distinct k");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

double smallest_singular_value(const std::vector<std::vector<cplx>>& columns) {
    const auto cols = static_cast<Eigen::Index>(columns.size());
    const auto rows = static_cast<Eigen::Index>(2 * columns.front().size());
    Eigen::MatrixXd J(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        const auto& col = columns[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < col.size(); ++i) {
            J(static_cast<Eigen::Index>(2 * i), c) = col[i].real();
            J(static_cast<Eigen::Index>(2 * i + 1), c) = col[i].imag();
        }
    }
    const Eigen::MatrixXd gram = J.transpose() * J;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues()(0)));
}

std::vector<cplx> geodesic_difference(const SphereMap& map, const ModelPoint& x, const Vec4& v, double h) {
    const Vec4 r = x.real();
    const auto plus = map(ModelPoint::from_real(std::cos(h) * r + std::sin(h) * v));
    const auto minus = map(ModelPoint::from_real(std::cos(h) * r - std::sin(h) * v));
    std::vector<cplx> d(plus.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (plus[i] - minus[i]) / (2.0 * h);
    return d;
}

MapDiagnostics map_diagnostics(const SphereMap& map, const std::vector<ModelPoint>& samples,
                               const std::vector<ModelPoint>& pair_samples,
                               const SphereMapDifferential& differential, std::uint64_t seed) {
    MapDiagnostics out;
    out.sample_count = samples.size();
    out.pair_sample_count = pair_samples.size();
    out.seed = seed;
    out.min_singular_value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto frame = tangent_orthonormal_frame(samples[i]);
        std::vector<std::vector<cplx>> cols;
        for (const Vec4& e : frame) {
            cols.push_back(differential ? differential(samples[i], e)
                                        : geodesic_difference(map, samples[i], e, kMapDifferenceStep));
        }
        const double s = smallest_singular_value(cols);
        if (s < out.min_singular_value) {
            out.min_singular_value = s;
            out.singular_witness = i;
        }
    }
    std::vector<std::vector<cplx>> images;
    images.reserve(pair_samples.size());
    for (const auto& x : pair_samples) images.push_back(map(x));
    out.min_separation_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < pair_samples.size(); ++a) {
        for (std::size_t b = a + 1; b < pair_samples.size(); ++b) {
            const double d = geodesic_distance(pair_samples[a], pair_samples[b]);
            if (d <= 0.0) continue;
            double img = 0.0;
            for (std::size_t i = 0; i < images[a].size(); ++i) img += std::norm(images[a][i] - images[b][i]);
            const double ratio = std::sqrt(img) / d;
            if (ratio < out.min_separation_ratio) {
                out.min_separation_ratio = ratio;
                out.separation_witness_a = a;
                out.separation_witness_b = b;
            }
        }
    }
    return out;
}

}  // namespace crlab

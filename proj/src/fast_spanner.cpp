#include "volspan/fast_spanner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "volspan/errors.hpp"
#include "volspan/rng.hpp"

namespace volspan {

namespace {

int derived_threshold(const FastSpannerConfig& cfg, int d) {
    if (cfg.base_threshold > 0) return cfg.base_threshold;
    return static_cast<int>(std::ceil(10.0 * d * std::log2(std::max(d, 2))));
}

int sample_count(const FastSpannerConfig& cfg, int d) {
    return static_cast<int>(std::ceil(cfg.c_sample * d * std::log2(std::max(d, 2))));
}

// Uncovered means strictly ||x||_E(S) > 1 + 1e-12, keeping boundary points
// from churning between levels.
constexpr double kCoverSlack = 1e-12;

}  // namespace

LevelOutcome level_sample(const PointSet& K_active, const FastSpannerConfig& cfg, int level) {
    const int n = K_active.size();
    const int d = K_active.dim();

    // Leverage scores on the span: u_i = Sigma^{+1/2} x_i.
    const Eigen::MatrixXd sigma = K_active.matrix() * K_active.matrix().transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    const double cutoff = kPinvRankCutoff * std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 0.0);
    Eigen::VectorXd inv_sqrt = Eigen::VectorXd::Zero(d);
    int rank = 0;
    for (int i = 0; i < d; ++i) {
        if (es.eigenvalues()[i] > cutoff && es.eigenvalues()[i] > 0.0) {
            inv_sqrt[i] = 1.0 / std::sqrt(es.eigenvalues()[i]);
            ++rank;
        }
    }
    LevelOutcome out;
    if (rank == 0) {
        // All points are zero; a single zero vector covers them.
        out.sampled = {0};
        out.probs = Eigen::VectorXd::Constant(n, 1.0 / n);
        return out;
    }
    const Eigen::MatrixXd half =
        inv_sqrt.asDiagonal() * es.eigenvectors().transpose();  // Sigma^{+1/2} up to rotation
    const Eigen::VectorXd leverages =
        (half * K_active.matrix()).array().square().colwise().sum();

    out.probs.resize(n);
    for (int i = 0; i < n; ++i) {
        out.probs[i] = 0.5 / n + leverages[i] / (2.0 * rank);
    }

    // Cumulative table for inverse-CDF draws.
    Eigen::VectorXd cdf(n);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += out.probs[i];
        cdf[i] = acc;
    }
    cdf[n - 1] = std::max(cdf[n - 1], 1.0);

    const int m_draws = sample_count(cfg, d);
    const RngStream level_stream = RngStream::from(cfg.rng_seed, "fast_spanner:level").split(level);

    for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
        RngStream draw = level_stream.split(attempt);
        std::vector<int> sampled(static_cast<std::size_t>(m_draws));
        for (int k = 0; k < m_draws; ++k) {
            const double r = draw.uniform01();
            const auto it = std::lower_bound(cdf.data(), cdf.data() + n, r);
            sampled[static_cast<std::size_t>(k)] =
                static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.data(), n - 1));
        }

        const SpannerSet S = make_spanner(K_active, sampled);
        std::vector<int> uncovered;
        for (int i = 0; i < n; ++i) {
            if (ellipsoid_norm(S, K_active.point(i)) > 1.0 + kCoverSlack) uncovered.push_back(i);
        }
        if (static_cast<int>(uncovered.size()) <= n - (n + 1) / 2) {
            out.sampled = std::move(sampled);
            out.uncovered = std::move(uncovered);
            out.retries = attempt;
            return out;
        }
    }
    fail("coverage_failed",
         "level " + std::to_string(level) + " failed to cover half its " +
             std::to_string(n) + " points after " + std::to_string(cfg.max_retries) + " attempts");
}

FastSpannerResult fast_spanner(const PointSet& K, const FastSpannerConfig& cfg) {
    const int d = K.dim();
    const int threshold = derived_threshold(cfg, d);

    std::vector<int> active(static_cast<std::size_t>(K.size()));
    for (int i = 0; i < K.size(); ++i) active[static_cast<std::size_t>(i)] = i;

    FastSpannerResult result;
    std::vector<int> union_indices;
    int level = 0;
    while (!active.empty()) {
        const int n = static_cast<int>(active.size());
        if (n < threshold) {
            union_indices.insert(union_indices.end(), active.begin(), active.end());
            result.stats.push_back({level, n, 0, n});
            break;
        }
        Eigen::MatrixXd pts(d, n);
        for (int i = 0; i < n; ++i) pts.col(i) = K.point(active[static_cast<std::size_t>(i)]);
        const LevelOutcome lvl = level_sample(PointSet(std::move(pts)), cfg, level);

        for (int local : lvl.sampled) union_indices.push_back(active[static_cast<std::size_t>(local)]);
        result.stats.push_back({level, n, lvl.retries, static_cast<int>(lvl.sampled.size())});

        std::vector<int> next;
        next.reserve(lvl.uncovered.size());
        for (int local : lvl.uncovered) next.push_back(active[static_cast<std::size_t>(local)]);
        active = std::move(next);
        ++level;
    }

    result.spanner = make_spanner(K, std::move(union_indices));
    return result;
}

}  // namespace volspan

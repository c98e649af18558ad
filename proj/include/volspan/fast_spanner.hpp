#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "volspan/geometry.hpp"

namespace volspan {

struct FastSpannerConfig {
    double c_sample = 10.0;  // M = ceil(c_sample * d * log2(max(d, 2))) per level
    int base_threshold = 0;  // 0 = derive as ceil(10 d log2 max(d,2))
    int max_retries = 64;
    std::uint64_t rng_seed = 0;
};

struct LevelStats {
    int level = 0;
    int active = 0;
    int retries = 0;
    int sample_size = 0;
};

struct FastSpannerResult {
    SpannerSet spanner;
    std::vector<LevelStats> stats;
};

/// One sampling level: leverage-mixed probabilities p_i = 1/2n + |u_i|^2/2d',
/// M draws with replacement, resampled until at least half of the active set
/// is covered. Exposed separately for the per-level contracts.
struct LevelOutcome {
    std::vector<int> sampled;    // indices into K_active (multiset)
    std::vector<int> uncovered;  // indices into K_active
    Eigen::VectorXd probs;
    int retries = 0;
};
LevelOutcome level_sample(const PointSet& K_active, const FastSpannerConfig& cfg, int level);

/// Randomized recursive construction: a volumetric spanner of size
/// O((d log d)(log n)) in expected time O(n d^2). Throws "coverage_failed"
/// if a level exhausts its retries.
FastSpannerResult fast_spanner(const PointSet& K, const FastSpannerConfig& cfg);

}  // namespace volspan

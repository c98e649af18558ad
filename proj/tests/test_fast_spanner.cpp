#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "support.hpp"
#include "volspan/errors.hpp"
#include "volspan/fast_spanner.hpp"

using namespace volspan;
using test::points_from;

TEST_CASE("small sets are returned whole") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(5, 5);
    const PointSet k(m);
    FastSpannerConfig cfg;
    cfg.rng_seed = 1;
    const FastSpannerResult res = fast_spanner(k, cfg);
    CHECK(res.spanner.multiset_size() == 5);
    CHECK(res.stats.size() == 1);
    std::set<int> distinct(res.spanner.indices.begin(), res.spanner.indices.end());
    CHECK(distinct.size() == 5);
}

TEST_CASE("identical points are covered by the first level") {
    Eigen::MatrixXd m(3, 500);
    Eigen::VectorXd x(3);
    x << 0.3, -0.7, 0.1;
    for (int i = 0; i < 500; ++i) m.col(i) = x;
    const PointSet k(m);
    FastSpannerConfig cfg;
    cfg.rng_seed = 2;
    const FastSpannerResult res = fast_spanner(k, cfg);
    CHECK(res.stats.size() == 1);
    CHECK(res.stats[0].active == 500);
    const EllipsoidNormReport rep = is_volumetric_spanner(res.spanner, k, 1e-8);
    CHECK(rep.violating_indices.empty());
}

TEST_CASE("level probabilities of the cross polytope are uniform") {
    const PointSet k = points_from({{1, 0}, {-1, 0}, {0, 1}, {0, -1}});
    FastSpannerConfig cfg;
    cfg.rng_seed = 3;
    const LevelOutcome lvl = level_sample(k, cfg, 0);
    REQUIRE(lvl.probs.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(lvl.probs[i] == doctest::Approx(0.25).epsilon(1e-12));
    }
}

TEST_CASE("level probabilities always sum to one") {
    RngStream rng = RngStream::from(101, "test:level_prob");
    for (int rep = 0; rep < 10; ++rep) {
        const int d = 2 + static_cast<int>(rng.uniform_index(6));
        const PointSet k = test::random_points(d, 50 + static_cast<int>(rng.uniform_index(100)), rng);
        FastSpannerConfig cfg;
        cfg.rng_seed = static_cast<std::uint64_t>(rep);
        const LevelOutcome lvl = level_sample(k, cfg, 0);
        CHECK(std::abs(lvl.probs.sum() - 1.0) <= 1e-10);

        // Leverage identity: the scores sum to the rank of the moment matrix.
        const Eigen::MatrixXd sigma = k.matrix() * k.matrix().transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
        int rank = 0;
        for (int i = 0; i < d; ++i) {
            if (es.eigenvalues()[i] > 1e-10 * es.eigenvalues().maxCoeff()) ++rank;
        }
        double leverage_sum = 0.0;
        for (int i = 0; i < k.size(); ++i) {
            leverage_sum += 2.0 * rank * (lvl.probs[i] - 0.5 / k.size());
        }
        CHECK(leverage_sum == doctest::Approx(static_cast<double>(rank)).epsilon(1e-8));
    }
}

TEST_CASE("accepted levels cover at least half the active set") {
    RngStream rng = RngStream::from(103, "test:level_cover");
    const PointSet k = test::random_points(8, 4096, rng);
    FastSpannerConfig cfg;
    cfg.rng_seed = 11;
    const LevelOutcome lvl = level_sample(k, cfg, 0);
    CHECK(static_cast<int>(lvl.uncovered.size()) <= 2048);
}

TEST_CASE("rank-deficient levels use the span rank in the probabilities") {
    // Points on a line in R^3: leverages live in a rank-1 space.
    Eigen::MatrixXd m(3, 40);
    RngStream rng = RngStream::from(107, "test:level_rank");
    Eigen::VectorXd dir(3);
    dir << 1.0, 2.0, -1.0;
    for (int i = 0; i < 40; ++i) m.col(i) = rng.normal() * dir;
    const PointSet k(m);
    FastSpannerConfig cfg;
    cfg.rng_seed = 5;
    const LevelOutcome lvl = level_sample(k, cfg, 0);
    CHECK(std::abs(lvl.probs.sum() - 1.0) <= 1e-10);
}

TEST_CASE("twenty thousand gaussian points in dimension ten") {
    RngStream rng = RngStream::from(109, "test:fast_big");
    const int n = 20000;
    const int d = 10;
    const PointSet k = test::random_points(d, n, rng);
    FastSpannerConfig cfg;
    cfg.rng_seed = 7;
    const FastSpannerResult res = fast_spanner(k, cfg);

    const EllipsoidNormReport rep = is_volumetric_spanner(res.spanner, k, 1e-8);
    CHECK(rep.violating_indices.empty());

    const double log2d = std::log2(static_cast<double>(d));
    const int threshold = static_cast<int>(std::ceil(10.0 * d * log2d));
    const double bound =
        cfg.c_sample * d * log2d * (std::ceil(std::log2(static_cast<double>(n))) + 1.0) +
        threshold;
    CHECK(static_cast<double>(res.spanner.multiset_size()) <= bound);
    CHECK(res.stats.size() <= static_cast<std::size_t>(std::ceil(std::log2(n))));

    // Each accepted level halves what remains.
    for (std::size_t l = 0; l + 1 < res.stats.size(); ++l) {
        CHECK(res.stats[l + 1].active <= (res.stats[l].active + 1) / 2);
    }
}

TEST_CASE("runs are reproducible for a fixed seed") {
    RngStream rng = RngStream::from(113, "test:fast_repro");
    const PointSet k = test::random_points(6, 3000, rng);
    FastSpannerConfig cfg;
    cfg.rng_seed = 999;
    const FastSpannerResult a = fast_spanner(k, cfg);
    const FastSpannerResult b = fast_spanner(k, cfg);
    CHECK(a.spanner.indices == b.spanner.indices);
}

TEST_CASE("retries stay modest across one hundred seeded runs") {
    RngStream rng = RngStream::from(127, "test:fast_retries");
    const PointSet k = test::random_points(6, 2000, rng);
    long total_retries = 0;
    long total_levels = 0;
    for (int seed = 0; seed < 100; ++seed) {
        FastSpannerConfig cfg;
        cfg.rng_seed = static_cast<std::uint64_t>(seed);
        const FastSpannerResult res = fast_spanner(k, cfg);
        for (const LevelStats& s : res.stats) {
            total_retries += s.retries;
            ++total_levels;
        }
    }
    CHECK(static_cast<double>(total_retries) / total_levels <= 3.0);
}

TEST_CASE("exhausted retries raise coverage_failed") {
    RngStream rng = RngStream::from(131, "test:fast_fail");
    const PointSet k = test::random_points(8, 1000, rng);
    FastSpannerConfig cfg;
    cfg.rng_seed = 1;
    cfg.c_sample = 0.1;  // samples far too few vectors to span anything
    cfg.base_threshold = 4;
    cfg.max_retries = 2;
    CHECK_THROWS_WITH_AS((void)fast_spanner(k, cfg), doctest::Contains("cover"), Error);
}

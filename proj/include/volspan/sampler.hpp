#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "volspan/geometry.hpp"

namespace volspan {

/// Convex body given by a membership oracle, a strictly interior point and a
/// radius R with body inside R * ball.
struct ConvexBodyOracle {
    int dim = 0;
    std::function<bool(const Eigen::VectorXd&)> membership;
    Eigen::VectorXd interior_point;
    double bounding_radius = 0.0;
};

ConvexBodyOracle box_body(int dim, double half_width = 1.0);
ConvexBodyOracle ball_body(int dim, double radius = 1.0);
ConvexBodyOracle simplex_body(int dim);  // {x >= 0, sum x <= 1}
/// Intersection of halfspaces a_j . x <= b_j (rows of A, entries of b).
ConvexBodyOracle halfspace_body(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                Eigen::VectorXd interior_point, double bounding_radius);

/// Unnormalized log-density, finite on the body's interior and log-concave.
struct LogDensity {
    std::function<double(const Eigen::VectorXd&)> log_pdf;
};

LogDensity uniform_density();
LogDensity exponential_tilt(const Eigen::VectorXd& direction);  // p(x) ~ exp(direction . x)

/// Hit-and-run chain: burn_in steps first, then one sample kept every
/// `thinning` steps (thinning <= 0 derives the d^2 default; burn_in < 0
/// derives 100 d^2). Each returned point satisfies the membership oracle.
/// Throws "oracle_inconsistent" when the chord search contradicts the oracle.
std::vector<Eigen::VectorXd> hit_and_run_sample(const ConvexBodyOracle& body,
                                                const LogDensity& density, long n,
                                                long burn_in, std::uint64_t seed,
                                                long thinning = 0);

/// True iff lambda_min(W) >= 1/beta - 1e-8, certifying
/// ||x||^2_E(S) <= beta ||x||^2 for every x.
bool relative_spanner_certificate(const SpannerSet& S, double beta);

struct ExpSpannerParams {
    double eps = 1e-2;       // target epsilon in (0, 1)
    double c_sample = 8.0;   // multiplier on d + log^2(1/eps)
    long sample_count(int dim) const;
};

/// Spanner of T i.i.d. draws from the density; the tail of ||x||_E(S) under
/// fresh draws decays like eps^theta.
SpannerSet exp_volumetric_spanner(const ConvexBodyOracle& body, const LogDensity& density,
                                  const ExpSpannerParams& params, std::uint64_t seed);

}  // namespace volspan

#pragma once

#include <Eigen/Dense>

#include "volspan/geometry.hpp"

namespace volspan {

/// Origin-centered ellipsoid {y : y^T A^{-1} y <= 1} with A = `shape`.
struct Ellipsoid {
    Eigen::MatrixXd shape;    // symmetric positive definite
    double log_volume = 0.0;  // log(vol / vol(unit ball)) = 0.5 * log det shape
};

/// Decomposition certificate: weights c_i >= 0 on the (transformed) points
/// with sum c_i x_i x_i^T close to the identity, plus the map that took the
/// input into that position.
struct JohnCertificate {
    Eigen::MatrixXd transform;  // d x d, maps original coordinates to John position
    Eigen::VectorXd weights;    // length n, c_i >= 0
    double residual = 0.0;      // ||sum c_i x_i x_i^T - I||_op, recomputed at the end
    double weight_sum = 0.0;    // sum c_i (<= d + tol for valid certificates)
};

/// eps-approximate minimum-volume origin-centered enclosing ellipsoid of K.
/// Every point gets norm <= 1 in the result and the volume is within a
/// (1+eps) factor of optimal. Throws "degenerate_span" when K does not span
/// R^d and "mvee_no_convergence" past the iteration cap.
Ellipsoid mvee_approx(const PointSet& K, double eps);

/// K mapped so its enclosing ellipsoid becomes the unit ball (John position).
/// Returns the transformed set and the applied map A^{-1/2}.
std::pair<PointSet, Eigen::MatrixXd> to_john_position(const PointSet& K, double eps);

/// Decomposition weights for a symmetric set already in John position:
/// c >= 0, sum c_i x_i x_i^T = I within tol, sum c_i <= d + tol, and
/// sum c_i x_i = 0 (weights equalized across +-x pairs). The returned
/// transform is the identity. Throws "decomposition_failed" carrying the
/// best residual when tol is unreachable.
JohnCertificate john_weights(const PointSet& K_john, double tol);

/// Convenience pipeline: symmetrize K, move it to John position, compute
/// weights there. Weights are indexed against the returned point set.
struct JohnPipelineResult {
    PointSet symmetrized;       // sym(K), original coordinates
    PointSet positioned;        // transform * sym(K)
    JohnCertificate certificate;  // transform set to the John map
};
JohnPipelineResult john_pipeline(const PointSet& K, double eps, double tol);

}  // namespace volspan

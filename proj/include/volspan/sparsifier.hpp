#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "volspan/geometry.hpp"

namespace volspan {

/// Oversampling constant for the deterministic sparsifier. Minimizes
/// c + (sqrt(c)+1)^2/(sqrt(c)-1)^2 over c in (1, 20] (scanned at step 1e-3),
/// giving a selection budget of about 11.66 d <= 12 d.
inline constexpr double kBssDefaultC = 5.76;

/// Spectral spread kappa(c) = (c + 1 + 2 sqrt(c)) / (c + 1 - 2 sqrt(c)).
inline double bss_kappa(double c) {
    const double r = std::sqrt(c);
    return (c + 1.0 + 2.0 * r) / (c + 1.0 - 2.0 * r);
}

/// Contact-point decomposition: unit vectors u_i and a distribution p with
/// d * sum p_i u_i u_i^T = I (within the stated tolerance).
struct WeightedDecomposition {
    Eigen::MatrixXd vectors;  // d x m, near-unit columns
    Eigen::VectorXd probs;    // length m, non-negative, sums to 1
};

/// Result of pruning a decomposition down to <= 12 d selected vectors.
struct SparsifierOutput {
    std::vector<int> selected;        // distinct indices into the decomposition
    std::vector<int> multiplicities;  // ceil(d * s_i * p_i), parallel to selected
    Eigen::VectorXd scalars;          // s_i for every input index
    long size = 0;                    // total multiplicity
    double min_eig = 0.0;             // lambda_min of sum over the multiset of v v^T
};

/// Deterministic two-barrier selection: given columns with
/// sum v_i v_i^T = I (residual <= 1e-6) and c > 1, returns scalars s >= 0
/// with at most ceil(c d) nonzero entries and
/// I <= sum s_i v_i v_i^T <= kappa(c) I.
/// Throws "not_isotropic" / "barrier_stuck".
Eigen::VectorXd bss_sparsify(const Eigen::MatrixXd& vectors, double c);

/// Rounds the sparsifier scalars into vector multiplicities, keeping the
/// selected multiset spectrally above the identity with at most 12 d elements.
SparsifierOutput prune_contact_points(const WeightedDecomposition& decomp);

/// Full pipeline: symmetrize, move to John position, decompose, prune, map
/// the selection back into K. The result is a volumetric spanner of K with
/// at most 12 d elements.
SpannerSet exact_volumetric_spanner(const PointSet& K);

}  // namespace volspan

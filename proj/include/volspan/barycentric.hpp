#pragma once

#include <vector>

#include <Eigen/Dense>

#include "volspan/geometry.hpp"

namespace volspan {

/// Linear-optimization oracle over a finite set: exhaustive argmax with
/// deterministic lowest-index tie-breaking. Counts its calls.
class LinearOptOracle {
public:
    explicit LinearOptOracle(const PointSet& domain) : domain_(&domain) {}

    /// Index of the point maximizing direction . x.
    int argmax(const Eigen::VectorXd& direction);

    long call_count() const { return calls_; }
    const PointSet& domain() const { return *domain_; }

private:
    const PointSet* domain_;
    long calls_ = 0;
};

struct BarycentricBasis {
    std::vector<int> indices;  // exactly d points of K
    Eigen::MatrixXd basis;     // d x d, columns are the basis points
    double approx_C = 0.0;
    double det_value = 0.0;    // |det(basis)|
    long oracle_calls = 0;
};

/// C-approximate barycentric spanner: d points of K such that every point of
/// K has coordinates in [-C, C] in this basis. Greedy initialization against
/// identity placeholders, then determinant-improving swaps until no exchange
/// gains a factor of C. Throws "subspace_degenerate" when K spans a proper
/// subspace.
BarycentricBasis barycentric_spanner(LinearOptOracle& oracle, int d, double C);

/// The barycentric basis viewed as a spanner; guarantees
/// ||x||_E(S) <= C sqrt(d) for all x in K.
SpannerSet ratio_spanner(LinearOptOracle& oracle, int d, double C);

}  // namespace volspan

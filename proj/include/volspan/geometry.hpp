#pragma once

#include <vector>

#include <Eigen/Dense>

namespace volspan {

/// Relative singular-value cutoff below which directions count as outside
/// the span of a Gram matrix.
inline constexpr double kPinvRankCutoff = 1e-10;

/// Coordinate tolerance for duplicate / negation matching in point sets.
inline constexpr double kDuplicateTol = 1e-12;

/// A finite point set in R^d. Columns of `points` are the points.
/// Immutable after construction; operations return new sets.
class PointSet {
public:
    PointSet() = default;

    /// `points` is d x n. Throws "empty_set" / "bad_dimension" on violations;
    /// with `symmetric` set, verifies closure under negation (tol 1e-12).
    explicit PointSet(Eigen::MatrixXd points, bool symmetric = false);

    static PointSet from_rows(const std::vector<Eigen::VectorXd>& rows, bool symmetric = false);

    int dim() const { return static_cast<int>(points_.rows()); }
    int size() const { return static_cast<int>(points_.cols()); }
    Eigen::VectorXd point(int i) const { return points_.col(i); }
    const Eigen::MatrixXd& matrix() const { return points_; }
    bool symmetric() const { return symmetric_; }

private:
    Eigen::MatrixXd points_;
    bool symmetric_ = false;
};

/// Multiset of spanner elements realizing the ellipsoid E(S).
/// `indices` point into whatever set the spanner was drawn from;
/// `vectors` are the realized elements so the norm is self-contained.
struct SpannerSet {
    std::vector<int> indices;
    Eigen::MatrixXd vectors;    // d x |S|
    Eigen::MatrixXd gram;       // W = sum v v^T
    Eigen::MatrixXd gram_pinv;  // Moore-Penrose pseudoinverse of W
    int rank = 0;

    int dim() const { return static_cast<int>(gram.rows()); }
    int multiset_size() const { return static_cast<int>(indices.size()); }
};

struct EllipsoidNormReport {
    std::vector<double> norms;
    double max_norm = 0.0;
    std::vector<int> violating_indices;  // norms[i] > 1 + tol
};

/// Build a spanner from indices into K (repetition allowed).
SpannerSet make_spanner(const PointSet& base, std::vector<int> indices);

/// Build a self-indexed spanner directly from vectors (columns).
SpannerSet make_spanner(Eigen::MatrixXd vectors);

/// Symmetric-PSD pseudoinverse with the relative eigenvalue cutoff
/// kPinvRankCutoff. Returns the pinv and the numerical rank.
std::pair<Eigen::MatrixXd, int> psd_pinv(const Eigen::MatrixXd& gram);

/// ||x||_E(S) = sqrt(x^T W^+ x). Out-of-span queries return +infinity.
double ellipsoid_norm(const SpannerSet& S, const Eigen::VectorXd& x);

/// Norm report for every point of K; violating_indices lists norms > 1 + tol.
EllipsoidNormReport is_volumetric_spanner(const SpannerSet& S, const PointSet& K, double tol);

/// {T x : x in K}, same order. Throws "singular_map" if T is rank-deficient.
PointSet apply_linear_map(const PointSet& K, const Eigen::MatrixXd& T);

/// K together with -K, duplicates (within 1e-12 coordinatewise) removed.
PointSet symmetrize(const PointSet& K);

}  // namespace volspan

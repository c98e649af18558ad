#include "volspan/geometry.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "volspan/errors.hpp"

namespace volspan {

PointSet::PointSet(Eigen::MatrixXd points, bool symmetric)
    : points_(std::move(points)), symmetric_(symmetric) {
    if (points_.cols() < 1 || points_.rows() < 1) {
        fail("empty_set", "point set needs n >= 1 points of dimension d >= 1");
    }
    if (symmetric_) {
        const int n = size();
        for (int i = 0; i < n; ++i) {
            bool found = false;
            for (int j = 0; j < n && !found; ++j) {
                found = ((points_.col(i) + points_.col(j)).cwiseAbs().maxCoeff() <= kDuplicateTol);
            }
            if (!found) {
                fail("not_symmetric", "symmetric_flag set but -x missing for a point");
            }
        }
    }
}

PointSet PointSet::from_rows(const std::vector<Eigen::VectorXd>& rows, bool symmetric) {
    if (rows.empty()) fail("empty_set", "point set needs n >= 1 points");
    const auto d = rows.front().size();
    Eigen::MatrixXd m(d, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != d) fail("dim_mismatch", "points have inconsistent dimensions");
        m.col(static_cast<Eigen::Index>(i)) = rows[i];
    }
    return PointSet(std::move(m), symmetric);
}

std::pair<Eigen::MatrixXd, int> psd_pinv(const Eigen::MatrixXd& gram) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const Eigen::VectorXd& evals = es.eigenvalues();
    const Eigen::MatrixXd& evecs = es.eigenvectors();
    const double cutoff = kPinvRankCutoff * std::max(evals.cwiseAbs().maxCoeff(), 0.0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(evals.size());
    int rank = 0;
    for (Eigen::Index i = 0; i < evals.size(); ++i) {
        if (evals[i] > cutoff && evals[i] > 0.0) {
            inv[i] = 1.0 / evals[i];
            ++rank;
        }
    }
    return {evecs * inv.asDiagonal() * evecs.transpose(), rank};
}

namespace {

SpannerSet finish_spanner(std::vector<int> indices, Eigen::MatrixXd vectors) {
    SpannerSet s;
    s.indices = std::move(indices);
    s.gram = vectors * vectors.transpose();
    s.gram = 0.5 * (s.gram + s.gram.transpose().eval());
    auto [pinv, rank] = psd_pinv(s.gram);
    s.gram_pinv = std::move(pinv);
    s.rank = rank;
    s.vectors = std::move(vectors);
    return s;
}

}  // namespace

SpannerSet make_spanner(const PointSet& base, std::vector<int> indices) {
    if (indices.empty()) fail("empty_spanner", "spanner needs at least one element");
    Eigen::MatrixXd v(base.dim(), static_cast<Eigen::Index>(indices.size()));
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const int i = indices[k];
        if (i < 0 || i >= base.size()) fail("bad_index", "spanner index out of range");
        v.col(static_cast<Eigen::Index>(k)) = base.point(i);
    }
    return finish_spanner(std::move(indices), std::move(v));
}

SpannerSet make_spanner(Eigen::MatrixXd vectors) {
    if (vectors.cols() < 1) fail("empty_spanner", "spanner needs at least one element");
    std::vector<int> idx(static_cast<std::size_t>(vectors.cols()));
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<int>(k);
    return finish_spanner(std::move(idx), std::move(vectors));
}

double ellipsoid_norm(const SpannerSet& S, const Eigen::VectorXd& x) {
    if (x.size() != S.gram.rows()) fail("dim_mismatch", "query dimension differs from spanner dimension");
    const double xnorm = x.norm();
    if (xnorm == 0.0) return 0.0;
    // Span test: the residual of x under the projector W^+ W.
    const Eigen::VectorXd px = S.gram * (S.gram_pinv * x);
    if ((x - px).norm() > 1e-7 * xnorm) {
        return std::numeric_limits<double>::infinity();
    }
    const double q = x.dot(S.gram_pinv * x);
    return std::sqrt(std::max(q, 0.0));
}

EllipsoidNormReport is_volumetric_spanner(const SpannerSet& S, const PointSet& K, double tol) {
    for (int i : S.indices) {
        if (i < 0 || i >= K.size()) fail("bad_index", "spanner index outside the point set");
    }
    EllipsoidNormReport report;
    report.norms.resize(static_cast<std::size_t>(K.size()));
    for (int i = 0; i < K.size(); ++i) {
        const double nrm = ellipsoid_norm(S, K.point(i));
        report.norms[static_cast<std::size_t>(i)] = nrm;
        report.max_norm = std::max(report.max_norm, nrm);
        if (nrm > 1.0 + tol) report.violating_indices.push_back(i);
    }
    return report;
}

PointSet apply_linear_map(const PointSet& K, const Eigen::MatrixXd& T) {
    if (T.rows() != K.dim() || T.cols() != K.dim()) {
        fail("dim_mismatch", "linear map shape differs from point dimension");
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(T);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv.size() == 0 || sv[sv.size() - 1] <= kPinvRankCutoff * sv[0]) {
        fail("singular_map", "linear map is singular at the rank cutoff");
    }
    return PointSet(T * K.matrix(), K.symmetric());
}

PointSet symmetrize(const PointSet& K) {
    std::vector<Eigen::VectorXd> kept;
    kept.reserve(static_cast<std::size_t>(2 * K.size()));
    auto contains = [&kept](const Eigen::VectorXd& v) {
        for (const auto& w : kept) {
            if ((w - v).cwiseAbs().maxCoeff() <= kDuplicateTol) return true;
        }
        return false;
    };
    for (int i = 0; i < K.size(); ++i) {
        const Eigen::VectorXd x = K.point(i);
        if (!contains(x)) kept.push_back(x);
        if (!contains(-x)) kept.push_back(-x);
    }
    Eigen::MatrixXd m(K.dim(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = kept[i];
    return PointSet(std::move(m), true);
}

}  // namespace volspan

#include "volspan/sparsifier.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "volspan/errors.hpp"
#include "volspan/mvee.hpp"

namespace volspan {

namespace {

double sym_operator_norm(const Eigen::MatrixXd& A) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose().eval()));
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd sym_inverse_sqrt(const Eigen::MatrixXd& A) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    Eigen::VectorXd w = es.eigenvalues();
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w[i] <= 0.0) fail("not_isotropic", "decomposition moment matrix is singular");
        w[i] = 1.0 / std::sqrt(w[i]);
    }
    return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

Eigen::VectorXd bss_sparsify(const Eigen::MatrixXd& vectors, double c) {
    const int d = static_cast<int>(vectors.rows());
    const int m = static_cast<int>(vectors.cols());
    if (!(c > 1.0)) fail("bad_oversampling", "c must exceed 1");

    const Eigen::MatrixXd gram = vectors * vectors.transpose();
    if (sym_operator_norm(gram - Eigen::MatrixXd::Identity(d, d)) > 1e-6) {
        fail("not_isotropic", "input vectors are not isotropic within 1e-6");
    }

    // Two-barrier potential schedule; with these constants the mean upper
    // bound on U equals the mean lower bound on L, so a usable vector exists
    // at every step.
    const double rc = std::sqrt(c);
    const double delta_lower = 1.0;
    const double delta_upper = (rc + 1.0) / (rc - 1.0);
    const double eps_lower = 1.0 / rc;
    const double eps_upper = (rc - 1.0) / (c + rc);
    double lower = -d / eps_lower;
    double upper = d / eps_upper;

    const long steps = static_cast<long>(std::ceil(c * d));
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd weights = Eigen::VectorXd::Zero(m);

    for (long step = 0; step < steps; ++step) {
        const double lower_next = lower + delta_lower;
        const double upper_next = upper + delta_upper;

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
        const Eigen::VectorXd& lam = es.eigenvalues();
        const Eigen::MatrixXd& V = es.eigenvectors();

        double phi_upper = 0.0, phi_upper_next = 0.0;
        double phi_lower = 0.0, phi_lower_next = 0.0;
        for (Eigen::Index i = 0; i < lam.size(); ++i) {
            phi_upper += 1.0 / (upper - lam[i]);
            phi_upper_next += 1.0 / (upper_next - lam[i]);
            phi_lower += 1.0 / (lam[i] - lower);
            phi_lower_next += 1.0 / (lam[i] - lower_next);
        }
        const double du_gap = phi_upper - phi_upper_next;      // > 0
        const double dl_gap = phi_lower_next - phi_lower;      // > 0

        // Quadratic forms against (u'I - A)^{-1,-2} and (A - l'I)^{-1,-2}
        // for every candidate, via the shared eigenbasis.
        Eigen::VectorXd inv_u(lam.size()), inv_u2(lam.size());
        Eigen::VectorXd inv_l(lam.size()), inv_l2(lam.size());
        for (Eigen::Index i = 0; i < lam.size(); ++i) {
            const double gu = upper_next - lam[i];
            const double gl = lam[i] - lower_next;
            inv_u[i] = 1.0 / gu;
            inv_u2[i] = 1.0 / (gu * gu);
            inv_l[i] = 1.0 / gl;
            inv_l2[i] = 1.0 / (gl * gl);
        }
        const Eigen::MatrixXd B = V.transpose() * vectors;  // coordinates in eigenbasis
        const Eigen::ArrayXXd B2 = B.array().square();
        const Eigen::VectorXd qu1 = (B2.colwise() * inv_u.array()).colwise().sum();
        const Eigen::VectorXd qu2 = (B2.colwise() * inv_u2.array()).colwise().sum();
        const Eigen::VectorXd ql1 = (B2.colwise() * inv_l.array()).colwise().sum();
        const Eigen::VectorXd ql2 = (B2.colwise() * inv_l2.array()).colwise().sum();

        int best = -1;
        double best_room = -std::numeric_limits<double>::infinity();
        double best_u = 0.0, best_l = 0.0;
        for (int i = 0; i < m; ++i) {
            const double u_bound = qu2[i] / du_gap + qu1[i];
            const double l_bound = ql2[i] / dl_gap - ql1[i];
            const double room = l_bound - u_bound;
            if (room > best_room) {
                best_room = room;
                best = i;
                best_u = u_bound;
                best_l = l_bound;
            }
        }
        if (best < 0 || best_l <= 0.0 || best_room < -1e-9 * std::max(1.0, std::abs(best_l))) {
            fail("barrier_stuck",
                 "no admissible vector at step " + std::to_string(step));
        }
        const double t = 2.0 / (best_u + best_l);

        A += t * (vectors.col(best) * vectors.col(best).transpose());
        A = 0.5 * (A + A.transpose().eval());
        weights[best] += t;
        lower = lower_next;
        upper = upper_next;
    }

    // The lower barrier certifies lambda_min(A) > lower; rescaling by it puts
    // the spectrum inside [1, kappa(c)].
    return weights / lower;
}

SparsifierOutput prune_contact_points(const WeightedDecomposition& decomp) {
    const int d = static_cast<int>(decomp.vectors.rows());
    const int m = static_cast<int>(decomp.vectors.cols());
    if (decomp.probs.size() != m) fail("dim_mismatch", "probs length differs from vector count");
    if (decomp.probs.minCoeff() < 0.0) fail("bad_distribution", "negative probability");
    if (std::abs(decomp.probs.sum() - 1.0) > 1e-10) fail("bad_distribution", "probabilities do not sum to 1");
    for (int i = 0; i < m; ++i) {
        const double nrm = decomp.vectors.col(i).norm();
        if (decomp.probs[i] > 0.0 && std::abs(nrm - 1.0) > 1e-6) {
            fail("bad_decomposition", "weighted vector is not unit norm");
        }
    }

    // w_i = sqrt(d p_i) u_i should reproduce the identity; whiten away the
    // residual before the barrier selection.
    Eigen::MatrixXd W(d, m);
    for (int i = 0; i < m; ++i) {
        W.col(i) = std::sqrt(d * decomp.probs[i]) * decomp.vectors.col(i);
    }
    const Eigen::MatrixXd moment = W * W.transpose();
    if (sym_operator_norm(moment - Eigen::MatrixXd::Identity(d, d)) > 1e-6) {
        fail("not_isotropic", "decomposition moment deviates from the identity beyond 1e-6");
    }
    const Eigen::MatrixXd whitener = sym_inverse_sqrt(moment);
    const Eigen::MatrixXd W_white = whitener * W;

    const Eigen::VectorXd scalars = bss_sparsify(W_white, kBssDefaultC);

    SparsifierOutput out;
    out.scalars = scalars;
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < m; ++i) {
        if (scalars[i] > 0.0) {
            const int mult = static_cast<int>(std::ceil(d * scalars[i] * decomp.probs[i] - 1e-12));
            if (mult < 1) continue;
            out.selected.push_back(i);
            out.multiplicities.push_back(mult);
            out.size += mult;
            gram += mult * (decomp.vectors.col(i) * decomp.vectors.col(i).transpose());
        }
    }
    if (out.size > 12L * d) {
        fail("size_bound_exceeded",
             "selected multiset of size " + std::to_string(out.size) + " exceeds 12 d");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    out.min_eig = es.eigenvalues().minCoeff();
    return out;
}

namespace {

// Index of +-x in K, matched coordinatewise at 1e-12; -1 when absent.
int match_up_to_sign(const PointSet& K, const Eigen::VectorXd& x) {
    for (int i = 0; i < K.size(); ++i) {
        if ((K.point(i) - x).cwiseAbs().maxCoeff() <= kDuplicateTol) return i;
        if ((K.point(i) + x).cwiseAbs().maxCoeff() <= kDuplicateTol) return i;
    }
    return -1;
}

}  // namespace

SpannerSet exact_volumetric_spanner(const PointSet& K) {
    const int d = K.dim();
    const PointSet sym = symmetrize(K);

    // Work inside the linear span when the set is rank deficient.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sym.matrix(), Eigen::ComputeThinU);
    const Eigen::VectorXd& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] > kPinvRankCutoff * sv[0]) ++rank;
    }
    if (rank == 0) fail("degenerate_span", "all points are zero");
    const Eigen::MatrixXd basis = svd.matrixU().leftCols(rank);
    const PointSet reduced(basis.transpose() * sym.matrix(), true);

    auto [positioned, transform] = to_john_position(reduced, 1e-9);
    const JohnCertificate cert = john_weights(positioned, 1e-7);

    // Contact points with their design mass become the decomposition.
    std::vector<int> support;
    for (int i = 0; i < positioned.size(); ++i) {
        if (cert.weights[i] > 1e-12) support.push_back(i);
    }
    const int msup = static_cast<int>(support.size());
    Eigen::MatrixXd units(rank, msup);
    Eigen::VectorXd probs(msup);
    for (int k = 0; k < msup; ++k) {
        const Eigen::VectorXd x = positioned.point(support[k]);
        const double nrm = x.norm();
        units.col(k) = x / nrm;
        probs[k] = cert.weights[support[k]] * nrm * nrm / rank;
    }
    probs /= probs.sum();

    const SparsifierOutput pruned = prune_contact_points({units, probs});

    std::vector<int> indices;
    for (std::size_t k = 0; k < pruned.selected.size(); ++k) {
        const int sym_idx = support[pruned.selected[k]];
        const int orig = match_up_to_sign(K, sym.point(sym_idx));
        if (orig < 0) fail("bad_index", "selected point not found in the input set");
        for (int rep = 0; rep < pruned.multiplicities[k]; ++rep) indices.push_back(orig);
    }

    SpannerSet spanner = make_spanner(K, indices);
    const EllipsoidNormReport report = is_volumetric_spanner(spanner, K, 1e-6);
    if (!report.violating_indices.empty()) {
        fail("spanner_invalid",
             "pipeline produced max norm " + std::to_string(report.max_norm));
    }
    return spanner;
}

}  // namespace volspan

#include "volspan/mvee.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "volspan/errors.hpp"

namespace volspan {

namespace {

constexpr long kMveeIterationCap = 1000000;

int numerical_rank(const Eigen::MatrixXd& X) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv.size() == 0 || sv[0] <= 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] > kPinvRankCutoff * sv[0]) ++r;
    }
    return r;
}

struct DesignSolution {
    Eigen::VectorXd u;       // simplex weights, one per point
    Eigen::MatrixXd moment;  // M(u) = sum u_i x_i x_i^T
    long iterations = 0;
};

// D-optimal design ascent for the origin-centered MVEE: maximize
// log det M(u) over the simplex. Frank-Wolfe exchange steps with away
// steps (Wolfe-Atwood), stopping once all leverages g_i = x_i^T M^-1 x_i
// satisfy d(1 - eps_inner) <= g_i (on the support) and g_i <= d(1 + eps_inner).
DesignSolution solve_design(const Eigen::MatrixXd& X, double eps_inner, long cap) {
    const int d = static_cast<int>(X.rows());
    const int n = static_cast<int>(X.cols());

    DesignSolution sol;
    sol.u = Eigen::VectorXd::Constant(n, 1.0 / n);

    Eigen::MatrixXd M = X * sol.u.asDiagonal() * X.transpose();
    M = 0.5 * (M + M.transpose().eval());

    for (long iter = 0; iter < cap; ++iter) {
        Eigen::LLT<Eigen::MatrixXd> llt(M);
        if (llt.info() != Eigen::Success) {
            fail("mvee_singular_moment", "design moment matrix lost positive definiteness");
        }
        const Eigen::MatrixXd G = llt.solve(X);          // M^-1 X
        const Eigen::VectorXd g = (X.array() * G.array()).colwise().sum();

        int j_add = 0;
        double g_max = g[0];
        for (int i = 1; i < n; ++i) {
            if (g[i] > g_max) { g_max = g[i]; j_add = i; }
        }
        int j_away = -1;
        double g_min = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            if (sol.u[i] > 0.0 && g[i] < g_min) { g_min = g[i]; j_away = i; }
        }

        const double eps_plus = g_max / d - 1.0;
        const double eps_minus = 1.0 - g_min / d;
        if (eps_plus <= eps_inner && eps_minus <= eps_inner) {
            sol.iterations = iter;
            sol.moment = M;
            return sol;
        }

        int j;
        double lambda;
        if (eps_plus >= eps_minus) {
            j = j_add;
            lambda = (g_max - d) / (d * (g_max - 1.0));
        } else {
            j = j_away;
            const double floor_step = -sol.u[j] / (1.0 - sol.u[j] + 1e-300);
            lambda = (g_min > 1.0 + 1e-12)
                         ? std::max((g_min - d) / (d * (g_min - 1.0)), floor_step)
                         : floor_step;
            // Keep M positive definite: back off if the step would collapse it.
            while ((1.0 - lambda) + lambda * g[j] <= 1e-12 && std::abs(lambda) > 1e-18) {
                lambda *= 0.5;
            }
        }

        M = (1.0 - lambda) * M + lambda * (X.col(j) * X.col(j).transpose());
        M = 0.5 * (M + M.transpose().eval());
        sol.u *= (1.0 - lambda);
        sol.u[j] += lambda;
        sol.u = sol.u.cwiseMax(0.0);
    }
    fail("mvee_no_convergence", "design solver exceeded the iteration cap");
}

// Symmetric vectorization with sqrt(2)-scaled off-diagonals, so the Euclidean
// norm of svec matches the Frobenius norm of the matrix.
Eigen::VectorXd svec(const Eigen::MatrixXd& A) {
    const int d = static_cast<int>(A.rows());
    Eigen::VectorXd v(d * (d + 1) / 2);
    int k = 0;
    const double root2 = std::sqrt(2.0);
    for (int i = 0; i < d; ++i) {
        v[k++] = A(i, i);
        for (int j = i + 1; j < d; ++j) v[k++] = root2 * A(i, j);
    }
    return v;
}

// Lawson-Hanson non-negative least squares: min ||A c - b||, c >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, long max_iter) {
    const int n = static_cast<int>(A.cols());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(n, false);
    const double w_tol = 1e-13 * std::max(1.0, (A.transpose() * b).cwiseAbs().maxCoeff());

    auto solve_passive = [&](const std::vector<int>& idx) {
        Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
        return Ap.colPivHouseholderQr().solve(b).eval();
    };

    for (long outer = 0; outer < max_iter; ++outer) {
        const Eigen::VectorXd w = A.transpose() * (b - A * x);
        int j = -1;
        double w_best = w_tol;
        for (int i = 0; i < n; ++i) {
            if (!passive[i] && w[i] > w_best) { w_best = w[i]; j = i; }
        }
        if (j < 0) break;
        passive[j] = true;

        for (long inner = 0; inner < max_iter; ++inner) {
            std::vector<int> idx;
            for (int i = 0; i < n; ++i) {
                if (passive[i]) idx.push_back(i);
            }
            const Eigen::VectorXd z = solve_passive(idx);
            bool all_positive = true;
            for (Eigen::Index k = 0; k < z.size(); ++k) {
                if (z[k] <= 0.0) { all_positive = false; break; }
            }
            if (all_positive) {
                x.setZero();
                for (std::size_t k = 0; k < idx.size(); ++k) x[idx[k]] = z[static_cast<Eigen::Index>(k)];
                break;
            }
            double alpha = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < idx.size(); ++k) {
                const double zk = z[static_cast<Eigen::Index>(k)];
                if (zk <= 0.0) {
                    const double xk = x[idx[k]];
                    alpha = std::min(alpha, xk / (xk - zk));
                }
            }
            for (std::size_t k = 0; k < idx.size(); ++k) {
                const int i = idx[k];
                x[i] += alpha * (z[static_cast<Eigen::Index>(k)] - x[i]);
                if (x[i] <= 1e-300) { x[i] = 0.0; passive[i] = false; }
            }
        }
    }
    return x;
}

double operator_norm(const Eigen::MatrixXd& A) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose().eval()));
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& A) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    Eigen::VectorXd inv = es.eigenvalues();
    for (Eigen::Index i = 0; i < inv.size(); ++i) {
        if (inv[i] <= 0.0) fail("mvee_singular_moment", "shape matrix not positive definite");
        inv[i] = 1.0 / std::sqrt(inv[i]);
    }
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

Ellipsoid mvee_approx(const PointSet& K, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) fail("bad_eps", "eps must lie in (0, 1)");
    const int d = K.dim();
    const int r = numerical_rank(K.matrix());
    if (r < d) {
        fail("degenerate_span", "points span a subspace of rank " + std::to_string(r) +
                                    " < " + std::to_string(d));
    }
    // Stopping at leverages inside d(1 +- eps_inner) bounds the log-det
    // optimality gap by d * eps_inner, so the volume defect and the point
    // norms both stay within a (1 + eps) factor.
    const double eps_inner = std::expm1(2.0 * std::log1p(eps) / d);
    const DesignSolution sol = solve_design(K.matrix(), eps_inner, kMveeIterationCap);

    Ellipsoid e;
    e.shape = d * sol.moment;
    e.shape = 0.5 * (e.shape + e.shape.transpose().eval());
    Eigen::LLT<Eigen::MatrixXd> llt(e.shape);
    if (llt.info() != Eigen::Success) fail("mvee_singular_moment", "shape not positive definite");
    e.log_volume = Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
    return e;
}

std::pair<PointSet, Eigen::MatrixXd> to_john_position(const PointSet& K, double eps) {
    const Ellipsoid e = mvee_approx(K, eps);
    const Eigen::MatrixXd T = inverse_sqrt(e.shape);
    return {PointSet(T * K.matrix(), K.symmetric()), T};
}

namespace {

// Equalize +-x pairs so sum c_i x_i vanishes identically; the outer
// products are negation-invariant, so the residual does not move.
void average_pairs(const Eigen::MatrixXd& X, Eigen::VectorXd& weights) {
    const int n = static_cast<int>(X.cols());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if ((X.col(i) + X.col(j)).cwiseAbs().maxCoeff() <= 1e-9) {
                const double avg = 0.5 * (weights[i] + weights[j]);
                weights[i] = avg;
                weights[j] = avg;
                break;
            }
        }
    }
}

double decomposition_residual(const Eigen::MatrixXd& X, const Eigen::VectorXd& weights) {
    const int d = static_cast<int>(X.rows());
    Eigen::MatrixXd R = -Eigen::MatrixXd::Identity(d, d);
    for (int i = 0; i < X.cols(); ++i) {
        if (weights[i] > 0.0) R += weights[i] * (X.col(i) * X.col(i).transpose());
    }
    return operator_norm(R);
}

}  // namespace

JohnCertificate john_weights(const PointSet& K_john, double tol) {
    if (!(tol > 0.0)) fail("bad_tol", "tol must be positive");
    const int d = K_john.dim();
    const int n = K_john.size();
    const Eigen::MatrixXd& X = K_john.matrix();

    // Contact candidates: points on the unit sphere within tol.
    std::vector<int> support;
    for (int i = 0; i < n; ++i) {
        if (std::abs(X.col(i).norm() - 1.0) <= tol) support.push_back(i);
    }
    if (support.empty()) {
        fail("decomposition_failed", "no points on the unit sphere within tol");
    }

    // Feasible start: converged design weights rescaled by d, restricted to
    // the contact band.
    const DesignSolution design = solve_design(X, std::min(1e-9, 0.1 * tol), kMveeIterationCap);
    Eigen::VectorXd c_design = Eigen::VectorXd::Zero(n);
    for (int i : support) c_design[i] = d * design.u[i];
    average_pairs(X, c_design);

    // Refinement: non-negative least squares against svec(I) over the band.
    const int m = static_cast<int>(support.size());
    Eigen::MatrixXd A(d * (d + 1) / 2, m);
    for (int k = 0; k < m; ++k) {
        const Eigen::VectorXd x = X.col(support[k]);
        A.col(k) = svec(x * x.transpose());
    }
    const Eigen::VectorXd b = svec(Eigen::MatrixXd::Identity(d, d));
    const Eigen::VectorXd c_support = nnls(A, b, 4L * (m + d * d) + 200);
    Eigen::VectorXd c_refined = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < m; ++k) c_refined[support[k]] = c_support[k];
    average_pairs(X, c_refined);

    const double r_design = decomposition_residual(X, c_design);
    const double r_refined = decomposition_residual(X, c_refined);
    const bool use_refined = r_refined <= r_design;
    const Eigen::VectorXd& weights = use_refined ? c_refined : c_design;
    const double residual = use_refined ? r_refined : r_design;

    if (residual > tol) {
        fail("decomposition_failed",
             "best residual " + std::to_string(residual) + " exceeds tol");
    }

    JohnCertificate cert;
    cert.transform = Eigen::MatrixXd::Identity(d, d);
    cert.weights = weights;
    cert.residual = residual;
    cert.weight_sum = weights.sum();
    return cert;
}

JohnPipelineResult john_pipeline(const PointSet& K, double eps, double tol) {
    JohnPipelineResult out;
    out.symmetrized = symmetrize(K);
    auto [positioned, transform] = to_john_position(out.symmetrized, eps);
    out.positioned = positioned;
    out.certificate = john_weights(out.positioned, tol);
    out.certificate.transform = transform;
    return out;
}

}  // namespace volspan

#include "volspan/barycentric.hpp"

#include <cmath>
#include <string>

#include "volspan/errors.hpp"

namespace volspan {

int LinearOptOracle::argmax(const Eigen::VectorXd& direction) {
    ++calls_;
    const Eigen::VectorXd values = domain_->matrix().transpose() * direction;
    int best = 0;
    for (int i = 1; i < domain_->size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

namespace {

// Oracle maximization of |det(B with column slot replaced by x)| over x in K.
// The replaced determinant is linear in x with the cofactor vector as its
// gradient, so two oracle calls (one per sign) suffice.
struct SlotBest {
    int index;
    double abs_det;
};

SlotBest best_for_slot(LinearOptOracle& oracle, const Eigen::MatrixXd& B, int slot) {
    const int d = static_cast<int>(B.rows());
    Eigen::VectorXd cof(d);
    Eigen::MatrixXd minor(d - 1, d - 1);
    for (int r = 0; r < d; ++r) {
        int mi = 0;
        for (int i = 0; i < d; ++i) {
            if (i == r) continue;
            int mj = 0;
            for (int j = 0; j < d; ++j) {
                if (j == slot) continue;
                minor(mi, mj) = B(i, j);
                ++mj;
            }
            ++mi;
        }
        const double sign = ((r + slot) % 2 == 0) ? 1.0 : -1.0;
        cof[r] = (d == 1) ? 1.0 : sign * minor.determinant();
    }
    const int plus = oracle.argmax(cof);
    const int minus = oracle.argmax(-cof);
    const double v_plus = std::abs(cof.dot(oracle.domain().point(plus)));
    const double v_minus = std::abs(cof.dot(oracle.domain().point(minus)));
    return (v_plus >= v_minus) ? SlotBest{plus, v_plus} : SlotBest{minus, v_minus};
}

}  // namespace

BarycentricBasis barycentric_spanner(LinearOptOracle& oracle, int d, double C) {
    if (!(C > 1.0)) fail("bad_approximation", "C must exceed 1");
    if (oracle.domain().dim() != d) fail("dim_mismatch", "oracle domain dimension differs from d");
    const long calls_before = oracle.call_count();

    Eigen::MatrixXd B = Eigen::MatrixXd::Identity(d, d);
    std::vector<int> indices(static_cast<std::size_t>(d), -1);

    // Greedy build-up: replace the identity placeholders one slot at a time
    // by the |det|-maximizing point.
    for (int slot = 0; slot < d; ++slot) {
        const SlotBest best = best_for_slot(oracle, B, slot);
        double scale = 1.0;
        for (int j = 0; j < d; ++j) {
            const double cn = B.col(j).norm();
            if (cn > 0.0) scale *= (j == slot) ? oracle.domain().point(best.index).norm() : cn;
        }
        if (best.abs_det <= 1e-12 * std::max(scale, 1e-300)) {
            fail("subspace_degenerate",
                 "points span a subspace: stuck extending at rank " + std::to_string(slot));
        }
        B.col(slot) = oracle.domain().point(best.index);
        indices[static_cast<std::size_t>(slot)] = best.index;
    }

    // Exchange phase: any swap that multiplies |det| by more than C is taken;
    // termination gives |coefficient| <= C for every point by Cramer's rule.
    double det_abs = std::abs(B.determinant());
    bool improved = true;
    while (improved) {
        improved = false;
        for (int slot = 0; slot < d; ++slot) {
            const SlotBest best = best_for_slot(oracle, B, slot);
            if (best.abs_det > C * det_abs) {
                B.col(slot) = oracle.domain().point(best.index);
                indices[static_cast<std::size_t>(slot)] = best.index;
                det_abs = best.abs_det;
                improved = true;
            }
        }
    }

    BarycentricBasis out;
    out.indices = std::move(indices);
    out.basis = std::move(B);
    out.approx_C = C;
    out.det_value = det_abs;
    out.oracle_calls = oracle.call_count() - calls_before;
    return out;
}

SpannerSet ratio_spanner(LinearOptOracle& oracle, int d, double C) {
    const BarycentricBasis basis = barycentric_spanner(oracle, d, C);
    SpannerSet spanner = make_spanner(oracle.domain(), basis.indices);

    const double bound = C * std::sqrt(static_cast<double>(d)) * (1.0 + 1e-6);
    for (int i = 0; i < oracle.domain().size(); ++i) {
        const double nrm = ellipsoid_norm(spanner, oracle.domain().point(i));
        if (nrm > bound) {
            fail("ratio_bound_violated",
                 "point " + std::to_string(i) + " has ellipsoid norm " + std::to_string(nrm));
        }
    }
    return spanner;
}

}  // namespace volspan

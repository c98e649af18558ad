#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "volspan/errors.hpp"
#include "volspan/mvee.hpp"

using namespace volspan;
using test::points_from;

namespace {

double op_norm(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose().eval()));
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

PointSet cross_polytope(int d) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, 2 * d);
    for (int i = 0; i < d; ++i) {
        m(i, 2 * i) = 1.0;
        m(i, 2 * i + 1) = -1.0;
    }
    return PointSet(std::move(m), true);
}

}  // namespace

TEST_CASE("mvee of the cross polytope is the unit ball") {
    for (int d : {1, 2, 3, 6}) {
        const Ellipsoid e = mvee_approx(cross_polytope(d), 1e-6);
        CHECK(op_norm(e.shape - Eigen::MatrixXd::Identity(d, d)) < 1e-6);
        CHECK(e.log_volume == doctest::Approx(0.0).epsilon(1e-6));
    }
}

TEST_CASE("mvee of scaled axes recovers diag(4, 1)") {
    const PointSet k = points_from({{2, 0}, {-2, 0}, {0, 1}, {0, -1}});
    const Ellipsoid e = mvee_approx(k, 1e-6);
    Eigen::MatrixXd expected(2, 2);
    expected << 4, 0, 0, 1;
    CHECK(op_norm(e.shape - expected) < 4e-6);
}

TEST_CASE("mvee contains every input point") {
    RngStream rng = RngStream::from(23, "test:mvee_contain");
    for (int rep = 0; rep < 10; ++rep) {
        const int d = 2 + static_cast<int>(rng.uniform_index(5));
        const PointSet k = test::random_symmetric_points(d, 5 + d, rng);
        const Ellipsoid e = mvee_approx(k, 1e-6);
        const Eigen::MatrixXd inv = e.shape.inverse();
        for (int i = 0; i < k.size(); ++i) {
            CHECK(std::sqrt(k.point(i).dot(inv * k.point(i))) <= 1.0 + 1e-6);
        }
    }
}

TEST_CASE("coarse run matches a high-accuracy self-oracle in volume") {
    RngStream rng = RngStream::from(29, "test:mvee_volume");
    const PointSet k = test::random_symmetric_points(3, 25, rng);
    const Ellipsoid coarse = mvee_approx(k, 1e-3);
    const Ellipsoid fine = mvee_approx(k, 1e-9);
    CHECK(std::abs(coarse.log_volume - fine.log_volume) <= std::log(1.0 + 1e-3));
    // Both runs under-approximate the same optimum.
    CHECK(coarse.log_volume <= fine.log_volume + std::log(1.0 + 1e-9) + 1e-12);
}

TEST_CASE("degenerate span is reported with its rank") {
    const PointSet flat = points_from({{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}});
    CHECK_THROWS_WITH_AS((void)mvee_approx(flat, 1e-6), doctest::Contains("rank 2"), Error);
    CHECK_THROWS_AS((void)mvee_approx(flat, 2.0), Error);  // bad eps
}

TEST_CASE("john position of the scaled axes is the cross polytope") {
    const PointSet k = points_from({{2, 0}, {-2, 0}, {0, 1}, {0, -1}});
    auto [positioned, transform] = to_john_position(k, 1e-8);
    Eigen::MatrixXd expected(2, 2);
    expected << 0.5, 0, 0, 1;
    CHECK(op_norm(transform - expected) < 1e-6);
    for (int i = 0; i < positioned.size(); ++i) {
        CHECK(positioned.point(i).norm() == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("already-positioned sets get a near-identity transform") {
    auto [positioned, transform] = to_john_position(cross_polytope(3), 1e-8);
    CHECK(op_norm(transform - Eigen::MatrixXd::Identity(3, 3)) < 1e-6);
}

TEST_CASE("john position norms sit inside [1 - 2eps, 1 + 2eps] at the top") {
    RngStream rng = RngStream::from(31, "test:john_norms");
    const double eps = 1e-6;
    for (int rep = 0; rep < 6; ++rep) {
        const int d = 2 + static_cast<int>(rng.uniform_index(4));
        const PointSet k = test::random_symmetric_points(d, 4 + 2 * d, rng);
        auto [positioned, transform] = to_john_position(k, eps);
        double max_norm = 0.0;
        for (int i = 0; i < positioned.size(); ++i) {
            max_norm = std::max(max_norm, positioned.point(i).norm());
        }
        CHECK(max_norm <= 1.0 + 2 * eps + 1e-12);
        CHECK(max_norm >= 1.0 - 2 * eps - 1e-12);
        // Recheck: the repositioned set's own enclosing ellipsoid is the ball.
        const Ellipsoid e = mvee_approx(positioned, eps);
        CHECK(op_norm(e.shape - Eigen::MatrixXd::Identity(d, d)) < 10 * eps);
    }
}

TEST_CASE("john weights of the cross polytope are 1/2 each") {
    const JohnCertificate cert = john_weights(cross_polytope(2), 1e-6);
    CHECK(cert.residual <= 1e-10);
    CHECK(cert.weight_sum == doctest::Approx(2.0).epsilon(1e-9));
    for (int i = 0; i < 4; ++i) {
        CHECK(cert.weights[i] == doctest::Approx(0.5).epsilon(1e-8));
    }
}

TEST_CASE("john weights of six equiangular unit vectors are 1/3 each") {
    Eigen::MatrixXd m(2, 6);
    for (int k = 0; k < 6; ++k) {
        const double a = k * M_PI / 3.0;
        m(0, k) = std::cos(a);
        m(1, k) = std::sin(a);
    }
    const JohnCertificate cert = john_weights(PointSet(m), 1e-6);
    CHECK(cert.residual <= 1e-9);
    for (int k = 0; k < 6; ++k) {
        CHECK(cert.weights[k] == doctest::Approx(1.0 / 3.0).epsilon(1e-7));
    }
    // Direct check of the decomposition identity.
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(2, 2);
    for (int k = 0; k < 6; ++k) sum += cert.weights[k] * (m.col(k) * m.col(k).transpose());
    CHECK(op_norm(sum - Eigen::MatrixXd::Identity(2, 2)) <= 1e-9);
}

TEST_CASE("john weights on random positioned sets") {
    RngStream rng = RngStream::from(37, "test:john_random");
    const double tol = 1e-6;
    for (int rep = 0; rep < 6; ++rep) {
        const int d = 2 + static_cast<int>(rng.uniform_index(4));
        const PointSet k = test::random_symmetric_points(d, 4 + 2 * d, rng);
        auto [positioned, transform] = to_john_position(k, 1e-9);
        const JohnCertificate cert = john_weights(positioned, tol);

        // Residual recomputed independently of the solver's bookkeeping.
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
        Eigen::VectorXd balance = Eigen::VectorXd::Zero(d);
        for (int i = 0; i < positioned.size(); ++i) {
            sum += cert.weights[i] * (positioned.point(i) * positioned.point(i).transpose());
            balance += cert.weights[i] * positioned.point(i);
        }
        CHECK(op_norm(sum - Eigen::MatrixXd::Identity(d, d)) <= tol);
        CHECK(balance.norm() <= 1e-10);
        CHECK(cert.weights.minCoeff() >= 0.0);
        CHECK(cert.weight_sum >= d - tol);
        CHECK(cert.weight_sum <= d + tol);

        // Contact points carry the weight: anything heavy sits on the sphere.
        for (int i = 0; i < positioned.size(); ++i) {
            if (cert.weights[i] > tol) {
                CHECK(std::abs(positioned.point(i).norm() - 1.0) <= tol);
            }
        }
    }
}

TEST_CASE("trace identity: weight sum tracks the dimension") {
    RngStream rng = RngStream::from(41, "test:john_trace");
    const double tol = 1e-6;
    const PointSet k = test::random_symmetric_points(4, 12, rng);
    auto [positioned, transform] = to_john_position(k, 1e-9);
    const JohnCertificate cert = john_weights(positioned, tol);
    CHECK(std::abs(cert.weight_sum - 4.0) <= 4.0 * tol);
}

TEST_CASE("volume sandwich: support function at least 1/sqrt(d) in John position") {
    RngStream rng = RngStream::from(43, "test:john_sandwich");
    const int d = 3;
    const PointSet k = test::random_symmetric_points(d, 20, rng);
    auto [positioned, transform] = to_john_position(k, 1e-8);
    for (int rep = 0; rep < 200; ++rep) {
        const Eigen::VectorXd dir = rng.unit_direction(d);
        double support = 0.0;
        for (int i = 0; i < positioned.size(); ++i) {
            support = std::max(support, dir.dot(positioned.point(i)));
        }
        CHECK(support >= 1.0 / std::sqrt(static_cast<double>(d)) - 1e-6);
    }
}

TEST_CASE("john pipeline composes symmetrize, position and weights") {
    const double r3 = std::sqrt(3.0);
    const PointSet tri = points_from({{0, 1}, {-r3 / 2, -0.5}, {r3 / 2, -0.5}});
    const JohnPipelineResult res = john_pipeline(tri, 1e-9, 1e-6);
    CHECK(res.symmetrized.size() == 6);
    CHECK(res.certificate.residual <= 1e-6);
    CHECK(res.certificate.weight_sum == doctest::Approx(2.0).epsilon(1e-6));
    // The certificate transform reproduces the positioned set.
    const Eigen::MatrixXd mapped = res.certificate.transform * res.symmetrized.matrix();
    CHECK((mapped - res.positioned.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

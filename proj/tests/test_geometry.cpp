#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "support.hpp"
#include "volspan/errors.hpp"
#include "volspan/geometry.hpp"

using namespace volspan;
using test::points_from;
using test::vec;

TEST_CASE("ellipsoid norm on axis spanners is Euclidean") {
    const PointSet base = points_from({{1, 0}, {0, 1}});
    const SpannerSet s = make_spanner(base, {0, 1});
    CHECK(ellipsoid_norm(s, vec({0.6, 0.8})) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ellipsoid norm of the triangle's top vertex against the bottom edge") {
    const double r3 = std::sqrt(3.0);
    const PointSet base = points_from({{-r3 / 2, -0.5}, {r3 / 2, -0.5}, {0, 1}});
    const SpannerSet s = make_spanner(base, {0, 1});
    // Gram = diag(3/2, 1/2), so the top vertex norm is sqrt(2).
    CHECK(ellipsoid_norm(s, vec({0, 1})) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("ellipsoid norm agrees with the SVD oracle on random data") {
    RngStream rng = RngStream::from(42, "test:geometry");
    for (int rep = 0; rep < 20; ++rep) {
        const PointSet base = test::random_points(3, 5, rng);
        const SpannerSet s = make_spanner(base, {0, 1, 2, 3, 4});
        const Eigen::VectorXd x = rng.gaussian_vector(3);
        const double expected = test::oracle_norm(base.matrix(), x);
        CHECK(ellipsoid_norm(s, x) == doctest::Approx(expected).epsilon(1e-8));
    }
}

TEST_CASE("out-of-span queries report infinity") {
    const PointSet base = points_from({{1, 0, 0}, {0, 1, 0}});
    const SpannerSet s = make_spanner(base, {0, 1});
    CHECK(std::isinf(ellipsoid_norm(s, vec({0, 0, 1}))));
    CHECK(ellipsoid_norm(s, vec({1, 1, 0})) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("dimension mismatch throws dim_mismatch") {
    const PointSet base = points_from({{1, 0}, {0, 1}});
    const SpannerSet s = make_spanner(base, {0, 1});
    CHECK_THROWS_WITH_AS(ellipsoid_norm(s, vec({1, 0, 0})), doctest::Contains("dimension"),
                         Error);
}

TEST_CASE("is_volumetric_spanner on the cross polytope") {
    const PointSet k = points_from({{1, 0}, {-1, 0}, {0, 1}, {0, -1}});
    const SpannerSet s = make_spanner(k, {0, 2});
    const EllipsoidNormReport rep = is_volumetric_spanner(s, k, 1e-9);
    CHECK(rep.violating_indices.empty());
    CHECK(rep.max_norm == doctest::Approx(1.0));
}

TEST_CASE("triangle bottom edge misses the top vertex") {
    const double r3 = std::sqrt(3.0);
    const PointSet k = points_from({{0, 1}, {-r3 / 2, -0.5}, {r3 / 2, -0.5}});
    const SpannerSet s = make_spanner(k, {1, 2});
    const EllipsoidNormReport rep = is_volumetric_spanner(s, k, 1e-9);
    REQUIRE(rep.violating_indices.size() == 1);
    CHECK(rep.violating_indices[0] == 0);
    CHECK(rep.max_norm == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("spanner index out of range is rejected") {
    const PointSet k = points_from({{1, 0}, {0, 1}});
    CHECK_THROWS_AS((void)make_spanner(k, {0, 7}), Error);
}

TEST_CASE("apply_linear_map identity, scaling, round trip") {
    RngStream rng = RngStream::from(7, "test:maps");
    const PointSet k = test::random_points(4, 9, rng);

    const PointSet same = apply_linear_map(k, Eigen::MatrixXd::Identity(4, 4));
    CHECK((same.matrix() - k.matrix()).cwiseAbs().maxCoeff() == 0.0);

    const PointSet e1 = points_from({{1, 0, 0}});
    const PointSet doubled = apply_linear_map(e1, 2.0 * Eigen::MatrixXd::Identity(3, 3));
    CHECK(doubled.point(0)[0] == doctest::Approx(2.0));

    Eigen::MatrixXd t = Eigen::MatrixXd::Random(4, 4) + 3.0 * Eigen::MatrixXd::Identity(4, 4);
    const PointSet back = apply_linear_map(apply_linear_map(k, t), t.inverse());
    CHECK((back.matrix() - k.matrix()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("singular maps are rejected") {
    const PointSet k = points_from({{1, 0}, {0, 1}});
    Eigen::MatrixXd t(2, 2);
    t << 1, 1, 1, 1;
    CHECK_THROWS_AS((void)apply_linear_map(k, t), Error);
}

TEST_CASE("symmetrize basics") {
    const PointSet single = points_from({{1, 0}});
    const PointSet sym = symmetrize(single);
    REQUIRE(sym.size() == 2);
    CHECK(sym.symmetric());
    CHECK((sym.point(0) + sym.point(1)).norm() == doctest::Approx(0.0));

    // Already symmetric stays the same size.
    const PointSet again = symmetrize(sym);
    CHECK(again.size() == 2);

    const double r3 = std::sqrt(3.0);
    const PointSet tri = points_from({{0, 1}, {-r3 / 2, -0.5}, {r3 / 2, -0.5}});
    const PointSet tri_sym = symmetrize(tri);
    CHECK(tri_sym.size() == 6);
    CHECK(tri_sym.symmetric());
}

TEST_CASE("norm is invariant under invertible maps of spanner and query") {
    RngStream rng = RngStream::from(11, "test:invariance");
    for (int rep = 0; rep < 30; ++rep) {
        const int d = 2 + static_cast<int>(rng.uniform_index(7));  // d <= 8
        const PointSet base = test::random_points(d, d + 3, rng);
        std::vector<int> idx;
        for (int i = 0; i < base.size(); ++i) idx.push_back(i);
        const SpannerSet s = make_spanner(base, idx);

        Eigen::MatrixXd t(d, d);
        do {
            for (int i = 0; i < d; ++i) t.col(i) = rng.gaussian_vector(d);
        } while (std::abs(t.determinant()) < 1e-3);

        const PointSet mapped = apply_linear_map(base, t);
        const SpannerSet s_mapped = make_spanner(mapped, idx);

        const Eigen::VectorXd x = rng.gaussian_vector(d);
        const double lhs = ellipsoid_norm(s, x);
        const double rhs = ellipsoid_norm(s_mapped, t * x);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
    }
}

TEST_CASE("adding an element never increases the norm") {
    RngStream rng = RngStream::from(13, "test:monotone");
    for (int rep = 0; rep < 30; ++rep) {
        const int d = 2 + static_cast<int>(rng.uniform_index(5));
        const PointSet base = test::random_points(d, d + 4, rng);
        std::vector<int> idx;
        for (int i = 0; i < base.size() - 1; ++i) idx.push_back(i);
        const SpannerSet small = make_spanner(base, idx);
        idx.push_back(base.size() - 1);
        const SpannerSet big = make_spanner(base, idx);

        const Eigen::VectorXd x = rng.gaussian_vector(d);
        const double before = ellipsoid_norm(small, x);
        const double after = ellipsoid_norm(big, x);
        if (std::isinf(before)) continue;  // off-span points may become reachable
        CHECK(after <= before * (1.0 + 1e-9) + 1e-12);
    }
}

TEST_CASE("norm scales linearly in the query") {
    RngStream rng = RngStream::from(17, "test:scaling");
    const PointSet base = test::random_points(4, 7, rng);
    std::vector<int> idx = {0, 1, 2, 3, 4, 5, 6};
    const SpannerSet s = make_spanner(base, idx);
    const Eigen::VectorXd x = rng.gaussian_vector(4);
    const double one = ellipsoid_norm(s, x);
    for (double alpha : {-3.0, -0.5, 0.25, 2.0}) {
        CHECK(ellipsoid_norm(s, alpha * x) ==
              doctest::Approx(std::abs(alpha) * one).epsilon(1e-12));
    }
}

TEST_CASE("norm <= 1 exactly when a coefficient vector of norm <= 1 exists") {
    RngStream rng = RngStream::from(19, "test:membership");
    for (int rep = 0; rep < 40; ++rep) {
        const int d = 1 + static_cast<int>(rng.uniform_index(3));
        const int k = d + 1 + static_cast<int>(rng.uniform_index(3));
        const PointSet base = test::random_points(d, k, rng);
        std::vector<int> idx;
        for (int i = 0; i < k; ++i) idx.push_back(i);
        const SpannerSet s = make_spanner(base, idx);
        const Eigen::VectorXd x = rng.gaussian_vector(d);

        // Least-norm coefficients via SVD of the element matrix itself.
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(base.matrix(),
                                              Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd alpha = svd.solve(x);
        const double nrm = ellipsoid_norm(s, x);
        CHECK(nrm == doctest::Approx(alpha.norm()).epsilon(1e-8));
        CHECK((nrm <= 1.0) == (alpha.norm() <= 1.0 + 1e-12));
    }
}

TEST_CASE("point set invariants are enforced") {
    CHECK_THROWS_AS(PointSet(Eigen::MatrixXd(2, 0)), Error);
    Eigen::MatrixXd asym(2, 1);
    asym << 1, 0;
    CHECK_THROWS_AS(PointSet(asym, true), Error);
}

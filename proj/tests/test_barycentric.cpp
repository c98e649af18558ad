#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "support.hpp"
#include "volspan/barycentric.hpp"
#include "volspan/errors.hpp"

using namespace volspan;
using test::points_from;

namespace {

PointSet cross_polytope(int d) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, 2 * d);
    for (int i = 0; i < d; ++i) {
        m(i, 2 * i) = 1.0;
        m(i, 2 * i + 1) = -1.0;
    }
    return PointSet(std::move(m), true);
}

PointSet hypercube_vertices(int d) {
    const int n = 1 << d;
    Eigen::MatrixXd m(d, n);
    for (int v = 0; v < n; ++v) {
        for (int i = 0; i < d; ++i) m(i, v) = (v >> i) & 1 ? 1.0 : -1.0;
    }
    return PointSet(std::move(m), true);
}

Eigen::VectorXd coefficients(const BarycentricBasis& basis, const Eigen::VectorXd& x) {
    return basis.basis.colPivHouseholderQr().solve(x);
}

}  // namespace

TEST_CASE("cross polytope basis picks one point per axis") {
    const PointSet k = cross_polytope(4);
    LinearOptOracle oracle(k);
    const BarycentricBasis basis = barycentric_spanner(oracle, 4, 2.0);
    std::set<int> axes;
    for (int idx : basis.indices) axes.insert(idx / 2);
    CHECK(axes.size() == 4);
    for (int i = 0; i < k.size(); ++i) {
        CHECK(coefficients(basis, k.point(i)).cwiseAbs().maxCoeff() <= 1.0 + 1e-10);
    }
    CHECK(basis.det_value == doctest::Approx(1.0));
}

TEST_CASE("hypercube coefficients stay in [-C, C]") {
    const PointSet k = hypercube_vertices(3);
    LinearOptOracle oracle(k);
    const BarycentricBasis basis = barycentric_spanner(oracle, 3, 2.0);
    for (int i = 0; i < k.size(); ++i) {
        CHECK(coefficients(basis, k.point(i)).cwiseAbs().maxCoeff() <= 2.0 + 1e-8);
    }
}

TEST_CASE("coefficients of every point respect the C bound on random sets") {
    RngStream rng = RngStream::from(79, "test:bary_random");
    for (int rep = 0; rep < 10; ++rep) {
        const int d = 2 + static_cast<int>(rng.uniform_index(5));
        const double C = (rep % 2 == 0) ? 2.0 : 1.5;
        const PointSet k = test::random_points(d, 40, rng);
        LinearOptOracle oracle(k);
        const BarycentricBasis basis = barycentric_spanner(oracle, d, C);
        CHECK(basis.det_value > 0.0);
        for (int i = 0; i < k.size(); ++i) {
            CHECK(coefficients(basis, k.point(i)).cwiseAbs().maxCoeff() <= C + 1e-8);
        }
        // Every basis element is a point of K.
        for (int b = 0; b < d; ++b) {
            CHECK((basis.basis.col(b) - k.point(basis.indices[static_cast<std::size_t>(b)]))
                      .norm() == 0.0);
        }
    }
}

TEST_CASE("oracle call count stays inside the kappa d^2 log_C d envelope") {
    const double kappa = 4.0;
    RngStream rng = RngStream::from(83, "test:bary_calls");
    const int d = 5;
    const double C = 2.0;
    const double envelope = kappa * d * d * (std::log(d) / std::log(C));
    for (int rep = 0; rep < 30; ++rep) {
        const PointSet k = test::random_points(d, 100, rng);
        LinearOptOracle oracle(k);
        const BarycentricBasis basis = barycentric_spanner(oracle, d, C);
        CHECK(static_cast<double>(basis.oracle_calls) <= envelope);
    }
}

TEST_CASE("coefficient bound implies the ratio bound pointwise") {
    RngStream rng = RngStream::from(89, "test:bary_ratio");
    const int d = 4;
    const double C = 2.0;
    const PointSet k = test::random_points(d, 60, rng);
    LinearOptOracle oracle(k);
    const BarycentricBasis basis = barycentric_spanner(oracle, d, C);
    const SpannerSet spanner = make_spanner(k, basis.indices);
    for (int i = 0; i < k.size(); ++i) {
        const double coeff_norm = coefficients(basis, k.point(i)).norm();
        const double e_norm = ellipsoid_norm(spanner, k.point(i));
        // The basis is square, so both routes compute the same quantity.
        CHECK(e_norm == doctest::Approx(coeff_norm).epsilon(1e-8));
        CHECK(e_norm <= C * std::sqrt(static_cast<double>(d)) + 1e-6);
    }
}

TEST_CASE("ratio spanner of the cross polytope") {
    const PointSet k = cross_polytope(2);
    LinearOptOracle oracle(k);
    const SpannerSet s = ratio_spanner(oracle, 2, 2.0);
    for (int i = 0; i < k.size(); ++i) {
        CHECK(ellipsoid_norm(s, k.point(i)) == doctest::Approx(1.0));
    }
}

TEST_CASE("ratio spanner of the symmetrized triangle") {
    const double r3 = std::sqrt(3.0);
    const PointSet tri =
        symmetrize(points_from({{0, 1}, {-r3 / 2, -0.5}, {r3 / 2, -0.5}}));
    LinearOptOracle oracle(tri);
    const SpannerSet s = ratio_spanner(oracle, 2, 2.0);
    double max_norm = 0.0;
    for (int i = 0; i < tri.size(); ++i) {
        max_norm = std::max(max_norm, ellipsoid_norm(s, tri.point(i)));
    }
    CHECK(max_norm <= 2.0 * std::sqrt(2.0) + 1e-9);
}

TEST_CASE("ratio spanner on five hundred random points") {
    RngStream rng = RngStream::from(97, "test:bary_500");
    const PointSet k = test::random_points(6, 500, rng);
    LinearOptOracle oracle(k);
    const SpannerSet s = ratio_spanner(oracle, 6, 1.5);
    double max_norm = 0.0;
    for (int i = 0; i < k.size(); ++i) {
        max_norm = std::max(max_norm, ellipsoid_norm(s, k.point(i)));
    }
    CHECK(max_norm <= 1.5 * std::sqrt(6.0) + 1e-9);
}

TEST_CASE("degenerate sets are rejected with the achieved rank") {
    const PointSet flat = points_from({{1, 0, 0}, {-1, 0, 0}, {0.5, 0, 0}});
    LinearOptOracle oracle(flat);
    CHECK_THROWS_WITH_AS((void)barycentric_spanner(oracle, 3, 2.0), doctest::Contains("rank"),
                         Error);
    LinearOptOracle oracle2(flat);
    CHECK_THROWS_AS((void)barycentric_spanner(oracle2, 3, 1.0), Error);  // C must exceed 1
}

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "volspan/geometry.hpp"
#include "volspan/rng.hpp"

namespace volspan::test {

inline PointSet random_points(int d, int n, RngStream& rng) {
    Eigen::MatrixXd m(d, n);
    for (int j = 0; j < n; ++j) m.col(j) = rng.gaussian_vector(d);
    return PointSet(std::move(m));
}

/// n_half gaussian points together with their negations.
inline PointSet random_symmetric_points(int d, int n_half, RngStream& rng) {
    Eigen::MatrixXd m(d, 2 * n_half);
    for (int j = 0; j < n_half; ++j) {
        m.col(2 * j) = rng.gaussian_vector(d);
        m.col(2 * j + 1) = -m.col(2 * j);
    }
    return PointSet(std::move(m), true);
}

/// Independent pseudoinverse route for oracles: full Jacobi SVD of the Gram.
inline Eigen::MatrixXd svd_pinv(const Eigen::MatrixXd& a, double rel_cutoff = 1e-10) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cutoff = rel_cutoff * (sv.size() > 0 ? sv[0] : 0.0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] > cutoff) inv[i] = 1.0 / sv[i];
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// Oracle ellipsoid norm straight from the definition, using the SVD route.
inline double oracle_norm(const Eigen::MatrixXd& spanner_vectors, const Eigen::VectorXd& x) {
    const Eigen::MatrixXd gram = spanner_vectors * spanner_vectors.transpose();
    const Eigen::MatrixXd pinv = svd_pinv(gram);
    return std::sqrt(std::max(x.dot(pinv * x), 0.0));
}

inline Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double value : values) v[i++] = value;
    return v;
}

inline PointSet points_from(std::initializer_list<std::initializer_list<double>> rows) {
    std::vector<Eigen::VectorXd> pts;
    for (const auto& row : rows) pts.push_back(vec(row));
    return PointSet::from_rows(pts);
}

}  // namespace volspan::test

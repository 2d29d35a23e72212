#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace dml::test {

inline Eigen::MatrixXd random_normal(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = normal(rng);
    return m;
}

inline Eigen::VectorXd random_vector(int n, std::uint64_t seed) { return random_normal(n, 1, seed).col(0); }

// Standardizes columns with population sd, as the learners do.
inline Eigen::MatrixXd standardize(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd out = x;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double mu = x.col(j).mean();
        const double sd = std::sqrt((x.col(j).array() - mu).square().mean());
        out.col(j) = (x.col(j).array() - mu) / sd;
    }
    return out;
}

// Least squares with an intercept by complete orthogonal decomposition.
inline Eigen::VectorXd ols_fitted(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    Eigen::MatrixXd a(x.rows(), x.cols() + 1);
    a.col(0).setOnes();
    a.rightCols(x.cols()) = x;
    const Eigen::VectorXd b = a.completeOrthogonalDecomposition().solve(y);
    return a * b;
}

}  // namespace dml::test

#include <doctest.h>

#include <cmath>

#include "dml/common/error.hpp"
#include "dml/learners/linear.hpp"
#include "test_util.hpp"

using namespace dml;
using dml::test::random_normal;
using dml::test::random_vector;

TEST_CASE("ridge matches a dense inverse on the standardized design") {
    const Eigen::MatrixXd x = random_normal(10, 2, 11);
    const Eigen::VectorXd y = random_vector(10, 12);
    const double lambda = 0.5;
    const LinearModel m = fit_ridge(DesignMatrix(x), y, lambda);

    const Eigen::MatrixXd xs = test::standardize(x);
    const Eigen::VectorXd yc = y.array() - y.mean();
    const Eigen::MatrixXd a = xs.transpose() * xs / 10.0 + lambda * Eigen::MatrixXd::Identity(2, 2);
    const Eigen::VectorXd b = a.inverse() * xs.transpose() * yc / 10.0;
    CHECK((m.coefficients - b).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(m.intercept == doctest::Approx(y.mean()));
}

TEST_CASE("zero-penalty ridge and lasso reproduce least squares") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Eigen::MatrixXd x = random_normal(40, 6, 100 + s);
        const Eigen::VectorXd y = x * random_vector(6, 200 + s) + random_vector(40, 300 + s);
        const Eigen::VectorXd ols = test::ols_fitted(x, y);
        const DesignMatrix dm(x);
        CHECK((fit_ridge(dm, y, 0.0).predict(x) - ols).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((fit_lasso(dm, y, 0.0).predict(x) - ols).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("rank-deficient ridge without penalty is rejected") {
    Eigen::MatrixXd x = random_normal(20, 3, 5);
    x.col(2) = x.col(0) + 2.0 * x.col(1);
    const Eigen::VectorXd y = random_vector(20, 6);
    CHECK_THROWS_WITH_AS(fit_ridge(DesignMatrix(x), y, 0.0), doctest::Contains("rank deficiency"), NumericalError);
    CHECK_NOTHROW(fit_ridge(DesignMatrix(x), y, 0.1));
}

TEST_CASE("heavy ridge shrinks toward the mean") {
    const Eigen::MatrixXd x = random_normal(30, 4, 8);
    const Eigen::VectorXd y = random_vector(30, 9);
    const LinearModel m = fit_ridge(DesignMatrix(x), y, 1e12);
    CHECK(m.coefficients.cwiseAbs().maxCoeff() < 1e-10);
    CHECK((m.predict(x).array() - y.mean()).abs().maxCoeff() < 1e-9);
}

TEST_CASE("lasso on an orthonormal design soft-thresholds") {
    // Columns of +-1 Hadamard patterns are orthogonal, mean zero, sd one.
    const int n = 8;
    Eigen::MatrixXd x(n, 3);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = (i & 1) ? 1.0 : -1.0;
        x(i, 1) = (i & 2) ? 1.0 : -1.0;
        x(i, 2) = (i & 4) ? 1.0 : -1.0;
    }
    const Eigen::Vector3d beta(1.0, -0.2, 0.5);
    const Eigen::VectorXd y = x * beta;
    const LinearModel m = fit_lasso(DesignMatrix(x), y, 0.3);
    for (int j = 0; j < 3; ++j) {
        const double b = beta(j);
        const double expect = std::copysign(std::max(0.0, std::abs(b) - 0.3), b);
        CHECK(m.coefficients(j) == doctest::Approx(expect).epsilon(1e-10).scale(1.0));
    }
    CHECK(soft_threshold(1.0, 0.3) == doctest::Approx(0.7));
}

TEST_CASE("lasso KKT holds on random problems") {
    for (std::uint64_t s = 0; s < 100; ++s) {
        const int n = 20 + static_cast<int>(s % 7) * 25;
        const int p = 2 + static_cast<int>(s * 7 % 49);
        const Eigen::MatrixXd x = random_normal(n, p, 1000 + s);
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
        for (int j = 0; j < std::min(p, 4); ++j) beta(j) = 1.0 / (j + 1);
        const Eigen::VectorXd y = x * beta + random_vector(n, 2000 + s);
        const DesignMatrix dm(x);
        const double lambda = lasso_lambda_max(dm, y) * (0.02 + 0.9 * (s % 10) / 10.0);
        const LinearModel m = fit_lasso(dm, y, lambda);
        REQUIRE(lasso_kkt_violation(dm, y, m) <= 1e-8);
    }
}

TEST_CASE("lambda_max zeroes every coefficient") {
    const Eigen::MatrixXd x = random_normal(50, 8, 21);
    const Eigen::VectorXd y = x.col(0) + random_vector(50, 22);
    const DesignMatrix dm(x);
    const double lmax = lasso_lambda_max(dm, y);
    CHECK(fit_lasso(dm, y, lmax).coefficients.cwiseAbs().maxCoeff() == 0.0);
    CHECK(fit_lasso(dm, y, 0.9 * lmax).coefficients.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("warm-started path agrees with cold fits") {
    const Eigen::MatrixXd x = random_normal(60, 10, 31);
    const Eigen::VectorXd y = x.leftCols(3).rowwise().sum() + random_vector(60, 32);
    const DesignMatrix dm(x);
    const auto grid = lasso_lambda_grid(lasso_lambda_max(dm, y), 10, 1e-3);
    CHECK(grid.front() > grid.back());
    const auto path = fit_lasso_path(dm, y, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK((path[i].coefficients - fit_lasso(dm, y, grid[i]).coefficients).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("constant columns get zero coefficients") {
    Eigen::MatrixXd x = random_normal(30, 3, 41);
    x.col(1).setConstant(4.0);
    const Eigen::VectorXd y = x.col(0) + 0.1 * random_vector(30, 42);
    const LinearModel m = fit_ridge(DesignMatrix(x), y, 0.0);
    CHECK(m.coefficients(1) == 0.0);
    const Eigen::VectorXd fitted = m.predict(x);
    Eigen::MatrixXd varying(30, 2);
    varying << x.col(0), x.col(2);
    CHECK((fitted - test::ols_fitted(varying, y)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("plug-in lambda follows the theoretical rate") {
    const Eigen::MatrixXd x = random_normal(400, 20, 51);
    const Eigen::VectorXd y = x.col(0) + random_vector(400, 52);
    const double lambda = lasso_plugin_lambda(DesignMatrix(x), y);
    const double rate = std::sqrt(2.0 * std::log(40.0) / 400.0);
    CHECK(lambda > 0.8 * 1.1 * rate);
    CHECK(lambda < 1.3 * 1.1 * rate);
}

TEST_CASE("non-finite inputs are rejected") {
    Eigen::MatrixXd x = random_normal(10, 2, 1);
    x(3, 1) = std::nan("");
    CHECK_THROWS_AS(DesignMatrix{x}, DataError);
}

#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "dml/learners/design_matrix.hpp"

namespace dml {

enum class PenaltyKind { ridge, lasso };

/// Penalized linear fit on standardized features. `coefficients` has one entry
/// per raw column (zero for dropped constant columns) on the standardized scale.
struct LinearModel {
    double intercept = 0.0;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd means;
    Eigen::VectorXd scales;
    double penalty = 0.0;
    PenaltyKind kind = PenaltyKind::ridge;
    int sweeps = 0;

    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
    /// Slopes on the raw feature scale.
    Eigen::VectorXd raw_coefficients() const;
    double raw_intercept() const;
};

/// Ridge via a direct solve of (Xs'Xs/N + lambda I) b = Xs'(y - ybar)/N.
/// Throws NumericalError for lambda = 0 on a rank-deficient design.
LinearModel fit_ridge(const DesignMatrix& x, const Eigen::VectorXd& y, double lambda);

struct LassoOptions {
    double tolerance = 1e-10;  // max absolute coefficient change per sweep
    int max_sweeps = 100000;
};

/// Lasso, minimizing (1/2N)||yc - Xs b||^2 + lambda ||b||_1 by cyclic
/// coordinate descent with soft-thresholding (covariance updates).
LinearModel fit_lasso(const DesignMatrix& x, const Eigen::VectorXd& y, double lambda, const LassoOptions& opts = {});

/// Lasso along a decreasing lambda sequence with warm starts.
std::vector<LinearModel> fit_lasso_path(const DesignMatrix& x, const Eigen::VectorXd& y,
                                        std::span<const double> lambdas, const LassoOptions& opts = {});

/// Smallest lambda for which every lasso coefficient is zero: max_j |(1/N) Xs_j'(y - ybar)|.
double lasso_lambda_max(const DesignMatrix& x, const Eigen::VectorXd& y);

/// Log-spaced grid from lambda_max down to ratio * lambda_max (decreasing).
std::vector<double> lasso_lambda_grid(double lambda_max, int n_points = 50, double ratio = 1e-4);

/// Plug-in rule lambda = c * sigma_hat * sqrt(2 log(2p) / N); sigma_hat is
/// refreshed from lasso residuals for a few iterations.
double lasso_plugin_lambda(const DesignMatrix& x, const Eigen::VectorXd& y, double c = 1.1);

/// Largest violation of the lasso stationarity conditions at the stored
/// coefficients (0 when KKT holds exactly).
double lasso_kkt_violation(const DesignMatrix& x, const Eigen::VectorXd& y, const LinearModel& model);

inline double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

}  // namespace dml

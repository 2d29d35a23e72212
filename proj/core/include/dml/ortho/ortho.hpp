#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dml/scores/dataset.hpp"
#include "dml/scores/nuisance.hpp"
#include "dml/scores/scores.hpp"

namespace dml {

/// Blocks of the Jacobian of the expected score map in (theta, beta).
struct JacobianBlocks {
    Eigen::MatrixXd J_tt;  // d_theta x d_theta
    Eigen::MatrixXd J_tb;  // d_theta x d_beta
    Eigen::MatrixXd J_bt;  // d_beta x d_theta
    Eigen::MatrixXd J_bb;  // d_beta x d_beta

    void validate() const;
};

/// Moment selection A (d_m x d_theta), weighting Omega (d_m x d_m, SPD) and
/// moment Jacobians G_theta (d_m x d_theta), G_beta (d_m x d_beta).
struct GmmBlocks {
    Eigen::MatrixXd A;
    Eigen::MatrixXd Omega;
    Eigen::MatrixXd G_theta;
    Eigen::MatrixXd G_beta;

    void validate() const;
};

/// mu solving mu J_bb = J_tb. Throws NumericalError when J_bb is singular or
/// its condition number exceeds 1e12; use mu_regularized in that case.
Eigen::MatrixXd mu_exact(const Eigen::MatrixXd& J_tb, const Eigen::MatrixXd& J_bb);

struct MuRegularizedOptions {
    double tolerance = 1e-10;
    int max_sweeps = 100000;
};

/// Row-wise minimizer of (1/2) mu J_bb mu' - mu J_tb' + r_N ||mu||_1 for
/// symmetric positive semi-definite J_bb. Its optimality conditions give
/// ||J_tb - mu J_bb||_inf <= r_N.
Eigen::MatrixXd mu_regularized(const Eigen::MatrixXd& J_tb, const Eigen::MatrixXd& J_bb, double r_n,
                               const MuRegularizedOptions& opts = {});

/// mu = A' W - A' W G_b (G_b' W G_b)^{-1} G_b' W with W = Omega^{-1}; satisfies mu G_beta = 0.
Eigen::MatrixXd gmm_mu(const GmmBlocks& blocks);

enum class NuisanceComponentKind { finite_vector, function_of_x };

struct NuisanceComponent {
    std::string name;
    NuisanceComponentKind kind = NuisanceComponentKind::function_of_x;
};

/// Per-observation score psi(W_i; theta, eta) for scalar theta. Function-valued
/// nuisance components are represented by their values at the sample points;
/// finite-vector components by the vector itself.
struct ScoreFunction {
    std::function<Eigen::VectorXd(const Dataset&, double, const NuisancePredictions&)> evaluate;
    int theta_dim = 1;
    std::vector<NuisanceComponent> eta;
};

/// Wraps one of the linear causal scores as a ScoreFunction.
ScoreFunction linear_score_function(ScoreKind kind, const ScoreOptions& opts = {});

/// d/d theta of the criterion, one value per observation: (data, theta, beta) -> N-vector.
using ThetaGradient = std::function<Eigen::VectorXd(const Dataset&, double, const Eigen::VectorXd&)>;
/// d/d beta of the criterion: (data, theta, beta) -> N x d_beta.
using BetaGradient = std::function<Eigen::MatrixXd(const Dataset&, double, const Eigen::VectorXd&)>;

/// psi = d_theta l - mu d_beta l with the finite-vector nuisance "beta".
/// Evaluation throws std::invalid_argument when mu is not 1 x d_beta.
ScoreFunction orthogonalize_mscore(ThetaGradient grad_theta, BetaGradient grad_beta, Eigen::MatrixXd mu);

/// Gaussian quasi-likelihood l = -(Y - D theta - X'beta)^2 / 2 of the
/// high-dimensional linear regression example.
ThetaGradient linear_regression_theta_gradient();
BetaGradient linear_regression_beta_gradient();
/// Sample Jacobian blocks of E[grad l] for that criterion (all negative semi-definite).
JacobianBlocks linear_regression_jacobian(const Dataset& sample);

struct OrthogonalityReport {
    std::vector<double> derivatives;       // one per direction
    std::vector<double> standard_errors;   // Monte Carlo s.e. of each derivative
    double max_abs_derivative = 0.0;
    double max_standard_error = 0.0;
    /// max over directions of |derivative| / s.e. (0 for exactly zero derivatives)
    double max_t_ratio = 0.0;
};

/// Central finite difference (E_n psi(theta0, eta0 + h D) - E_n psi(theta0, eta0 - h D)) / 2h
/// for each direction D. Components absent from a direction are not perturbed.
OrthogonalityReport check_orthogonality(const ScoreFunction& score, double theta0, const NuisancePredictions& eta0,
                                        const std::vector<NuisancePredictions>& directions, const Dataset& sample,
                                        double h = 1e-3);

/// Random smooth perturbations: combinations of the first 10 polynomial basis
/// functions of x (1, x_j, x_j^2, x_j x_k, ...) with N(0, 1) weights, scaled to
/// unit sample L2 norm.
std::vector<Eigen::VectorXd> polynomial_directions(const Eigen::MatrixXd& x, int count, std::uint64_t seed);

}  // namespace dml

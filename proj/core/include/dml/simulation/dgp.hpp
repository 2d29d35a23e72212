#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string_view>

#include "dml/scores/dataset.hpp"
#include "dml/scores/nuisance.hpp"

namespace dml::sim {

enum class PlrDesign { linear_sparse, nonlinear_smooth };

std::string_view to_string(PlrDesign design);
PlrDesign parse_plr_design(std::string_view name);

/// Y = D theta0 + g0(X) + U,  D = m0(X) + V, with U, V independent N(0, 1)
/// and X ~ N(0, S), S_ij = rho^|i-j|.
///
/// linear_sparse:    m0 = a'x, g0 = b'x, five leading coefficients (a_j ~ 1/j, b_j ~ 1/j^2).
/// nonlinear_smooth: m0 = a (logistic(x1) - 1/2 + (x2 x3 - rho) / 4),
///                   g0 = b (tanh(x1) + sin^2(x3)).
/// The scales a, b are set so that Var(m0) / Var(D) = R2_d and
/// Var(g0) / (Var(g0) + 1) = R2_y.
struct PlrDgpConfig {
    double theta0 = 0.5;
    int p = 20;
    PlrDesign design = PlrDesign::linear_sparse;
    double R2_d = 0.5;
    double R2_y = 0.5;
    double rho = 0.7;
    std::uint64_t seed = 0;

    void validate() const;
};

/// A generated sample together with its true parameter and the true nuisance
/// values at every row.
struct SimulatedData {
    Dataset data;
    double theta0 = 0.0;
    NuisancePredictions oracle;
};

/// PLR sample; oracle fields g, m and l = theta0 m + g.
SimulatedData generate_plr(const PlrDgpConfig& config, int n);

/// Coefficient vectors of the linear-sparse design (length p).
Eigen::VectorXd linear_sparse_m_coefficients(const PlrDgpConfig& config);
Eigen::VectorXd linear_sparse_g_coefficients(const PlrDgpConfig& config);

/// sigma^2 = E[V^2 U^2] / E[V^2]^2 of the orthogonal estimator; 1 for this design.
double plr_population_variance(const PlrDgpConfig& config);

/// Small smoke-test generators for the other models, all with a constant
/// effect theta0 and p Toeplitz(0.5) covariates.
///
/// PLIV: Z = mz(X) + zeta, D = 0.8 Z + h(X) + V, U = 0.6 V + 0.8 e.
/// Oracle fields g, m = E[Z|X], r = E[D|X], l = theta0 r + g.
SimulatedData generate_pliv(double theta0, int p, int n, std::uint64_t seed);
/// IRM: D ~ Bernoulli(m0(X)), m0 in [0.1, 0.9]; Y = theta0 D + g(X) + U.
/// Oracle fields g1, g0, m, and p = P(D = 1).
SimulatedData generate_irm(double theta0, int p, int n, std::uint64_t seed);
/// IIVM: Z ~ Bernoulli(p(X)); always-takers, never-takers and compliers with
/// complier share depending on x1; Y = theta0 D + g(X) + U where U is
/// correlated with the compliance type. Oracle fields mu1, mu0, m1, m0, p.
SimulatedData generate_iivm(double theta0, int p, int n, std::uint64_t seed);

/// theta = (sum D^2)^{-1} sum D (Y - ghat). Throws NumericalError when sum D^2 = 0.
double naive_estimate(const Dataset& data, const Eigen::VectorXd& ghat);

/// ghat_i = g0_i + (Y_i - g0_i) / N^{1/2 - epsilon} on `train_rows`, g0_i elsewhere.
/// Throws ConfigError unless epsilon lies in (0, 0.5].
Eigen::VectorXd overfit_nuisance(const Dataset& data, const Eigen::VectorXd& g0, double epsilon,
                                 std::span<const int> train_rows);

}  // namespace dml::sim

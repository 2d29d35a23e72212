#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

#include "dml/scores/dataset.hpp"
#include "dml/scores/nuisance.hpp"

namespace dml {

/// Linear score psi(W; theta, eta) = psi_a(W; eta) * theta + psi_b(W; eta).
struct ScoreValues {
    Eigen::VectorXd psi_a;
    Eigen::VectorXd psi_b;

    Eigen::Index size() const noexcept { return psi_a.size(); }
    Eigen::VectorXd at(double theta) const { return psi_a.array() * theta + psi_b.array(); }
};

enum class ScoreKind {
    plr_orthogonal,        // (Y - D theta - g)(D - m)
    plr_partialling_out,   // (Y - l - theta (D - m))(D - m)
    pliv_orthogonal,       // (Y - D theta - g)(Z - m)
    pliv_partialling_out,  // (Y - l - theta (D - r))(Z - m)
    ate,
    atte,
    late,
    naive_plr,             // (Y - D theta - g) D, not orthogonal
};

std::string_view to_string(ScoreKind kind);
ScoreKind parse_score_kind(std::string_view name);

/// Model a score belongs to.
ModelKind model_of(ScoreKind kind);
/// Nuisance fields the score reads.
std::vector<std::string> required_nuisances(ScoreKind kind);

struct ScoreOptions {
    double trim_eps = 0.01;
    /// LATE: use mu(0, X) in the (1 - Z) outcome term. False reproduces the
    /// variant with mu(1, X) in both terms, which is not unbiased at the truth.
    bool late_mu0_in_control_term = true;
};

ScoreValues plr_score(const Dataset& data, const NuisancePredictions& nuis);
ScoreValues plr_partial_score(const Dataset& data, const NuisancePredictions& nuis);
ScoreValues pliv_score(const Dataset& data, const NuisancePredictions& nuis);
ScoreValues pliv_partial_score(const Dataset& data, const NuisancePredictions& nuis);
ScoreValues ate_score(const Dataset& data, const NuisancePredictions& nuis, double trim_eps = 0.01);
ScoreValues atte_score(const Dataset& data, const NuisancePredictions& nuis, double trim_eps = 0.01);
ScoreValues late_score(const Dataset& data, const NuisancePredictions& nuis, const ScoreOptions& opts = {});
ScoreValues naive_plr_score(const Dataset& data, const NuisancePredictions& nuis);

ScoreValues evaluate_score(ScoreKind kind, const Dataset& data, const NuisancePredictions& nuis,
                           const ScoreOptions& opts = {});

/// Exact root of mean(psi_a) theta + mean(psi_b) = 0 over all rows.
/// Throws NumericalError when |mean(psi_a)| <= 1e-12.
double solve_linear_score(const ScoreValues& scores);

}  // namespace dml

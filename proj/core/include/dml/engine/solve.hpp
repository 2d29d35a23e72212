#pragma once

#include <utility>
#include <vector>

#include "dml/common/folds.hpp"
#include "dml/scores/scores.hpp"

namespace dml {

enum class DmlMethod { dml1, dml2 };

std::string_view to_string(DmlMethod method);
DmlMethod parse_dml_method(std::string_view name);

struct Dml1Solution {
    double theta = 0.0;
    std::vector<double> fold_thetas;
};

/// Per-fold roots theta_k = -mean_k(psi_a)^{-1} mean_k(psi_b), averaged over folds.
/// Throws NumericalError("weak identification in fold k") when |mean_k psi_a| <= 1e-12.
Dml1Solution solve_dml1(const ScoreValues& scores, const FoldPartition& partition);
Dml1Solution solve_dml1(const std::vector<ScoreValues>& scores_per_fold);

/// Root of the pooled moment (1/K) sum_k mean_k(psi_a theta + psi_b) = 0.
double solve_dml2(const ScoreValues& scores, const FoldPartition& partition);

/// J = (1/K) sum_k mean_k psi_a.
double pooled_jacobian(const ScoreValues& scores, const FoldPartition& partition);

/// sigma^2 = (1/K) sum_k mean_k[(psi_a theta + psi_b)^2] / J^2.
/// Throws NumericalError("degenerate score variance") when every score is zero.
double estimate_variance(const ScoreValues& scores, double theta, const FoldPartition& partition);

/// theta -/+ Phi^{-1}(1 - alpha/2) sqrt(sigma2 / n).
std::pair<double, double> confidence_interval(double theta, double sigma2, long n, double alpha);

}  // namespace dml

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dml/engine/crossfit.hpp"
#include "dml/engine/solve.hpp"
#include "dml/scores/scores.hpp"
#include "dml/simulation/dgp.hpp"

namespace dml::sim {

enum class NuisanceSource {
    learned,              // cross-fitted learners
    oracle,               // true eta0
    overfit_full_sample,  // overfit g, true m, one pass over the whole sample
    overfit_cross_fit,    // overfit g trained on each fold's complement, true m
};

std::string_view to_string(NuisanceSource source);

struct EstimatorConfig {
    std::string name;
    ScoreKind score = ScoreKind::plr_orthogonal;
    NuisanceSource source = NuisanceSource::learned;
    DmlMethod method = DmlMethod::dml2;
    double overfit_epsilon = 0.1;
};

/// Settings shared by all estimators of a study. Learned estimators of one rep
/// share a single partition and a single set of cross-fitted nuisances.
struct MonteCarloConfig {
    LearnerMap learners;
    int folds = 2;
    double alpha = 0.05;
    ScoreOptions score_options;
    unsigned threads = 1;
};

struct MonteCarloSummary {
    std::string name;
    int n_reps = 0;  // successful reps
    int failures = 0;
    double bias_mean = 0.0;
    double bias_median = 0.0;
    double sd = 0.0;
    double rmse = 0.0;
    double coverage = 0.0;
    double median_se = 0.0;
    std::vector<int> reps;  // rep index of each entry below
    std::vector<double> centered_estimates;     // theta_hat - theta0
    std::vector<double> studentized_estimates;  // (theta_hat - theta0) / se
    std::vector<double> standard_errors;

    /// Monte Carlo standard error of bias_mean: sd / sqrt(n_reps).
    double bias_standard_error() const;
};

/// One dataset per rep from derive_seed(seed, {rep}); every estimator is
/// evaluated on it. More than 10% failed reps for an estimator is an error.
std::vector<MonteCarloSummary> run_monte_carlo(const PlrDgpConfig& dgp, const std::vector<EstimatorConfig>& estimators,
                                               const MonteCarloConfig& config, int n, int n_reps, std::uint64_t seed);

MonteCarloSummary run_monte_carlo(const PlrDgpConfig& dgp, const EstimatorConfig& estimator,
                                  const MonteCarloConfig& config, int n, int n_reps, std::uint64_t seed);

struct NormalityDiagnostics {
    double ks_statistic = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

/// KS distance to N(0, 1) (no restandardization), sample skewness and excess
/// kurtosis. Throws std::invalid_argument for fewer than 50 values.
NormalityDiagnostics normality_diagnostics(const std::vector<double>& values);

/// CSV with columns rep,centered,studentized.
void write_histogram_csv(std::ostream& out, const MonteCarloSummary& summary);

}  // namespace dml::sim

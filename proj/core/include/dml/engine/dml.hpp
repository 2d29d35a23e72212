#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dml/common/folds.hpp"
#include "dml/engine/crossfit.hpp"
#include "dml/engine/solve.hpp"
#include "dml/scores/scores.hpp"

namespace dml {

struct DmlConfig {
    ScoreKind score = ScoreKind::plr_partialling_out;
    DmlMethod method = DmlMethod::dml2;
    int folds = 5;
    double alpha = 0.05;
    ScoreOptions score_options;
    unsigned threads = 1;
};

struct FoldRecord {
    double theta = 0.0;  // per-fold root (reported for both methods)
    double mean_psi_a = 0.0;
    double mean_psi_b = 0.0;
    int size = 0;
    FoldDiagnostics nuisance_mse;
};

struct DmlResult {
    double theta = 0.0;
    double sigma2 = 0.0;  // asymptotic variance of sqrt(N)(theta - theta0)
    double se = 0.0;      // sqrt(sigma2 / N)
    double ci_low = 0.0;
    double ci_high = 0.0;
    double alpha = 0.05;
    long n = 0;
    DmlMethod method = DmlMethod::dml2;
    ScoreKind score = ScoreKind::plr_partialling_out;
    std::vector<FoldRecord> per_fold;
};

/// Solve, variance and CI from already cross-fitted nuisance values.
DmlResult estimate_from_nuisances(const Dataset& data, const NuisancePredictions& nuis, const DmlConfig& config,
                                  const FoldPartition& partition,
                                  const std::vector<FoldDiagnostics>& diagnostics = {});

/// Full single-split pipeline: cross-fit, evaluate the score, solve.
DmlResult estimate(const Dataset& data, const LearnerMap& learners, const DmlConfig& config,
                   const FoldPartition& partition, std::uint64_t learner_seed);

struct SplitFailure {
    int split = 0;
    std::string message;
};

struct RepeatedSplitResult {
    std::vector<DmlResult> splits;  // successful splits, in split order
    std::vector<int> split_ids;     // split index of each entry in `splits`
    std::vector<SplitFailure> failures;
    double theta_mean = 0.0;
    double theta_median = 0.0;
    double sigma2_mean = 0.0;    // split-adjusted, sqrt(N) scale
    double sigma2_median = 0.0;
    double se_mean = 0.0;
    double se_median = 0.0;
    long n = 0;
};

struct SplitAggregate {
    double theta_mean = 0.0;
    double theta_median = 0.0;
    double sigma2_mean = 0.0;
    double sigma2_median = 0.0;
};

/// Mean and median aggregation across splits. Each split's variance is
/// adjusted by its deviation from the aggregate estimate on the estimator
/// scale: sigma2_s + n (theta_s - theta_agg)^2. Medians are lower medians.
SplitAggregate aggregate_splits(const std::vector<double>& thetas, const std::vector<double>& sigma2s, long n);

/// Seed of split s: derive_seed(seed, {s}).
std::uint64_t split_seed(std::uint64_t seed, int split);

/// Runs the pipeline on S independent partitions. Splits failing with a data or
/// numerical error are recorded; more than S/2 failures is an error.
RepeatedSplitResult repeat_splits(const Dataset& data, const LearnerMap& learners, const DmlConfig& config, int n_splits,
                                  std::uint64_t seed);

}  // namespace dml

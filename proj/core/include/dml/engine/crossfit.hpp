#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dml/common/folds.hpp"
#include "dml/learners/learner.hpp"
#include "dml/scores/dataset.hpp"
#include "dml/scores/nuisance.hpp"
#include "dml/scores/scores.hpp"

namespace dml {

/// Learner per nuisance regression. Keys:
///   l  Y ~ X            m  D ~ X (PLR, IRM propensity), Z ~ X (PLIV), D ~ X | Z = z (LATE)
///   r  D ~ X (PLIV)     g  Y - D theta_init ~ X (PLR/PLIV), Y ~ X | D = d (IRM)
///   mu Y ~ X | Z = z    p  Z ~ X (LATE)
/// A "default" entry is used for any key that is not listed.
using LearnerMap = std::map<std::string, LearnerSpec>;

/// Learner keys needed to produce the nuisance fields of `score`.
std::vector<std::string> required_learners(ScoreKind score);

/// Out-of-fold squared error of each learned nuisance, per fold.
using FoldDiagnostics = std::map<std::string, double>;

struct CrossFitOptions {
    double trim_eps = 0.01;
    std::uint64_t seed = 0;
};

struct CrossFitResult {
    NuisancePredictions predictions;
    std::vector<FoldDiagnostics> fold_mse;
    /// Preliminary partialling-out estimate used as the target offset for g
    /// (NaN when no g regression was needed).
    double theta_init = 0.0;
};

/// Cross-fitted nuisance predictions for every score in `scores`: for each fold k the
/// learners are trained on the complement of fold k only, and predictions are
/// written only for rows in fold k. Subgroup regressions (treated / control,
/// instrument arms) train on the matching subgroup of the complement.
/// Propensity-type outputs are clipped into [trim_eps, 1 - trim_eps].
/// Throws DataError naming the fold and subgroup when a subgroup is empty.
CrossFitResult fit_nuisance_crossfit(const Dataset& data, const LearnerMap& learners,
                                     const std::vector<ScoreKind>& scores, const FoldPartition& partition,
                                     const CrossFitOptions& opts = {});

}  // namespace dml

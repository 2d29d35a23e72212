#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dml/learners/boost.hpp"
#include "dml/learners/forest.hpp"
#include "dml/learners/linear.hpp"
#include "dml/learners/tree.hpp"

namespace dml {

enum class LearnerKind { constant_mean, ridge, lasso, tree, forest, boost, ensemble };

std::string_view to_string(LearnerKind kind);
LearnerKind parse_learner_kind(std::string_view name);

using Hyperparameters = std::map<std::string, double>;

/// What to fit for one nuisance function.
///
/// Hyperparameter keys by kind (defaults in parentheses):
///   ridge:    lambda (1.0)
///   lasso:    lambda (CV over a 50-point log grid when absent), plugin (0), plugin_c (1.1)
///   tree:     max_depth (-1, unlimited), min_leaf (5)
///   forest:   n_trees (500), features_per_split (0: max(1, p/3)), min_leaf (5), max_depth (-1), bootstrap (1)
///   boost:    n_rounds (100), learning_rate (0.1), max_depth (3), min_leaf (5)
///   ensemble: none; members listed in `members`
/// A nonempty `grid` is tuned by cross_validate with `cv_folds` folds; each grid
/// point overrides the matching keys of `hyper`.
struct LearnerSpec {
    LearnerKind kind = LearnerKind::constant_mean;
    Hyperparameters hyper;
    std::vector<Hyperparameters> grid;
    std::vector<LearnerSpec> members;
    int cv_folds = 5;

    /// Throws ConfigError on unknown keys or out-of-range values.
    void validate() const;

    static LearnerSpec constant_mean() { return {}; }
    static LearnerSpec ridge(double lambda) { return {LearnerKind::ridge, {{"lambda", lambda}}, {}, {}, 5}; }
    static LearnerSpec lasso(double lambda) { return {LearnerKind::lasso, {{"lambda", lambda}}, {}, {}, 5}; }
    /// Lasso with lambda chosen by CV along the default path.
    static LearnerSpec lasso_cv(int cv_folds = 5) { return {LearnerKind::lasso, {}, {}, {}, cv_folds}; }
    static LearnerSpec forest(int n_trees, int min_leaf = 5, int features_per_split = 0, int max_depth = -1);
    static LearnerSpec boost(int n_rounds, double learning_rate, int max_depth = 3, int min_leaf = 5);
    static LearnerSpec tree(int max_depth, int min_leaf = 5);
    static LearnerSpec ensemble(std::vector<LearnerSpec> members, int cv_folds = 5);
};

struct ConstantModel {
    double value = 0.0;
};

struct FittedModel;

/// Convex combination of fitted members; weights lie on the simplex.
struct EnsembleModel {
    std::vector<FittedModel> members;
    Eigen::VectorXd weights;
    /// Out-of-fold MSE of each member and of the weighted combination.
    std::vector<double> member_oof_mse;
    double ensemble_oof_mse = 0.0;

    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

struct FittedModel {
    std::variant<ConstantModel, LinearModel, TreeModel, ForestModel, BoostModel, EnsembleModel> model;
    Hyperparameters chosen;  // hyperparameters actually used (after tuning)
    int n_features = 0;

    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

/// Fits `spec` on (x, y); tunes first when the spec carries a grid (or is an
/// untuned lasso). Deterministic in (x, y, spec, seed).
FittedModel fit(const LearnerSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::uint64_t seed);

/// Throws DataError when the feature count does not match training.
Eigen::VectorXd predict(const FittedModel& model, const Eigen::MatrixXd& x_new);

struct CvEntry {
    Hyperparameters params;
    double mse = 0.0;
};

struct CvResult {
    Hyperparameters best;
    std::vector<CvEntry> table;
};

/// k-fold CV over spec.grid (or the default lasso path). Returns the grid point
/// with the smallest mean out-of-fold squared error; near-ties (relative 1e-12)
/// go to the more strongly regularized point.
CvResult cross_validate(const LearnerSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int cv_folds,
                        std::uint64_t seed);

/// Stacks member learners with simplex weights minimizing out-of-fold MSE,
/// then refits the members on the full data. Members that throw are dropped
/// (weight 0); if all fail, throws NumericalError.
EnsembleModel fit_ensemble(const std::vector<LearnerSpec>& specs, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           int cv_folds, std::uint64_t seed);

/// Out-of-fold predictions of `spec` over a deterministic k-fold split.
Eigen::VectorXd out_of_fold_predictions(const LearnerSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                        int cv_folds, std::uint64_t seed);

/// Euclidean projection onto the probability simplex.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

/// argmin over the simplex of (1/N)||y - P w||^2 by projected gradient, started
/// at uniform weights and stopped once the Frank-Wolfe gap falls below `tolerance`.
Eigen::VectorXd simplex_least_squares(const Eigen::MatrixXd& predictions, const Eigen::VectorXd& y,
                                      double tolerance = 1e-8);

/// Clamps each entry into [eps, 1 - eps]; eps must lie in (0, 0.5).
Eigen::VectorXd clip_probability(const Eigen::VectorXd& p, double eps);

}  // namespace dml

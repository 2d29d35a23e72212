#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dml/learners/design_matrix.hpp"
#include "dml/learners/tree.hpp"

namespace dml {

struct BoostStage {
    TreeModel tree;
    double learning_rate = 0.1;
};

struct BoostModel {
    double base_prediction = 0.0;
    std::vector<BoostStage> stages;

    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
    /// Predictions using only the first `n_stages` stages.
    Eigen::VectorXd predict_staged(const Eigen::MatrixXd& x, std::size_t n_stages) const;
};

/// Least-squares gradient boosting: base = mean(y), stage t is a depth-limited
/// tree fitted to the residuals of stages 1..t-1.
BoostModel fit_boost(const DesignMatrix& x, const Eigen::VectorXd& y, int n_rounds, double learning_rate,
                     int max_depth, int min_leaf);

}  // namespace dml

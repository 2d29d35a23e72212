#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "dml/learners/design_matrix.hpp"
#include "dml/learners/tree.hpp"

namespace dml {

struct ForestOptions {
    int n_trees = 500;
    int features_per_split = 0;  // 0: max(1, floor(p / 3))
    int min_leaf = 5;
    int max_depth = -1;
    bool bootstrap = true;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct ForestModel {
    std::vector<TreeModel> trees;
    int n_trees = 0;
    int features_per_split = 0;
    bool bootstrap = true;

    /// Arithmetic mean of the member trees.
    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

/// Random regression forest. Tree t draws from the stream derive_seed(seed, {t}),
/// so the result does not depend on the thread count.
ForestModel fit_forest(const DesignMatrix& x, const Eigen::VectorXd& y, const ForestOptions& opts);

}  // namespace dml

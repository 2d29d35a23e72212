#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "dml/common/rng.hpp"
#include "dml/learners/design_matrix.hpp"

namespace dml {

/// Flat binary-tree node. Leaves have feature == -1. Rows with
/// x[feature] <= threshold go left.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    int n_samples = 0;

    bool is_leaf() const noexcept { return feature < 0; }
};

struct TreeModel {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    int max_depth = -1;           // -1: unlimited
    int min_leaf = 1;
    int n_features = 0;

    int leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
    double predict_one(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
    int leaf_count() const;
    int depth() const;
};

struct TreeOptions {
    int max_depth = -1;
    int min_leaf = 1;
    int features_per_split = 0;  // 0: all features at every split
};

/// Greedy CART regression tree (variance reduction). A node stays a leaf when
/// the depth limit is reached, it holds fewer than 2*min_leaf rows, or the best
/// split reduces SSE by less than 1e-12. Equal reductions resolve to the lower
/// feature index, then the lower threshold.
TreeModel fit_tree(const DesignMatrix& x, const Eigen::VectorXd& y, int max_depth, int min_leaf);

/// Grows a tree on `rows` of x (duplicates allowed, e.g. a bootstrap sample).
/// `rng` is required when opts.features_per_split is in (0, p).
TreeModel grow_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const int> rows,
                    const TreeOptions& opts, Rng* rng = nullptr);

}  // namespace dml

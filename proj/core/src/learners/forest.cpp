#include "dml/learners/forest.hpp"

#include <numeric>
#include <string>

#include "dml/common/error.hpp"
#include "dml/common/parallel.hpp"
#include "dml/common/rng.hpp"

namespace dml {

Eigen::VectorXd ForestModel::predict(const Eigen::MatrixXd& x) const {
    if (trees.empty()) throw std::logic_error("forest has no trees");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
    for (const auto& tree : trees) out += tree.predict(x);
    return out / static_cast<double>(trees.size());
}

ForestModel fit_forest(const DesignMatrix& x, const Eigen::VectorXd& y, const ForestOptions& opts) {
    const int p = static_cast<int>(x.cols());
    if (opts.n_trees < 1) throw ConfigError("n_trees must be >= 1");
    const int mtry = opts.features_per_split == 0 ? std::max(1, p / 3) : opts.features_per_split;
    if (mtry < 1 || mtry > p)
        throw ConfigError("features_per_split must lie in [1, p] (got " + std::to_string(mtry) + ", p = " +
                          std::to_string(p) + ")");
    if (y.size() != x.rows()) throw DataError("target length does not match design rows");

    ForestModel forest;
    forest.n_trees = opts.n_trees;
    forest.features_per_split = mtry;
    forest.bootstrap = opts.bootstrap;
    forest.trees.resize(static_cast<std::size_t>(opts.n_trees));

    const auto n = static_cast<std::uint64_t>(x.rows());
    const TreeOptions tree_opts{opts.max_depth, opts.min_leaf, mtry};
    parallel_for(
        static_cast<std::size_t>(opts.n_trees),
        [&](std::size_t t) {
            Rng rng(derive_seed(opts.seed, {t}));
            std::vector<int> rows(static_cast<std::size_t>(n));
            if (opts.bootstrap) {
                for (auto& r : rows) r = static_cast<int>(uniform_index(rng, n));
            } else {
                std::iota(rows.begin(), rows.end(), 0);
            }
            forest.trees[t] = grow_tree(x.values(), y, rows, tree_opts, &rng);
        },
        opts.threads);
    return forest;
}

}  // namespace dml

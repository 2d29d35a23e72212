#include "dml/learners/boost.hpp"

#include <numeric>

#include "dml/common/error.hpp"

namespace dml {

Eigen::VectorXd BoostModel::predict(const Eigen::MatrixXd& x) const { return predict_staged(x, stages.size()); }

Eigen::VectorXd BoostModel::predict_staged(const Eigen::MatrixXd& x, std::size_t n_stages) const {
    Eigen::VectorXd out = Eigen::VectorXd::Constant(x.rows(), base_prediction);
    n_stages = std::min(n_stages, stages.size());
    for (std::size_t s = 0; s < n_stages; ++s) out += stages[s].learning_rate * stages[s].tree.predict(x);
    return out;
}

BoostModel fit_boost(const DesignMatrix& x, const Eigen::VectorXd& y, int n_rounds, double learning_rate,
                     int max_depth, int min_leaf) {
    if (n_rounds < 0) throw ConfigError("n_rounds must be >= 0");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw ConfigError("learning_rate must lie in (0, 1]");
    if (y.size() != x.rows()) throw DataError("target length does not match design rows");

    BoostModel model;
    model.base_prediction = y.mean();
    std::vector<int> rows(static_cast<std::size_t>(x.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    Eigen::VectorXd residual = y.array() - model.base_prediction;
    const TreeOptions opts{max_depth, min_leaf, 0};
    for (int t = 0; t < n_rounds; ++t) {
        TreeModel tree = grow_tree(x.values(), residual, rows, opts);
        residual -= learning_rate * tree.predict(x.values());
        model.stages.push_back({std::move(tree), learning_rate});
    }
    return model;
}

}  // namespace dml

#include "dml/learners/tree.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

#include "dml/common/error.hpp"

namespace dml {

namespace {

constexpr double kMinGain = 1e-12;

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TreeOptions& opts, Rng* rng)
        : x_(x), y_(y), opts_(opts), rng_(rng), p_(static_cast<int>(x.cols())) {
        all_features_.resize(static_cast<std::size_t>(p_));
        std::iota(all_features_.begin(), all_features_.end(), 0);
    }

    TreeModel build(std::span<const int> rows) {
        rows_.assign(rows.begin(), rows.end());
        buffer_.resize(rows_.size());
        TreeModel tree;
        tree.max_depth = opts_.max_depth;
        tree.min_leaf = opts_.min_leaf;
        tree.n_features = p_;
        nodes_ = &tree.nodes;
        grow(0, rows_.size(), 0);
        return tree;
    }

private:
    int grow(std::size_t begin, std::size_t end, int depth) {
        const int id = static_cast<int>(nodes_->size());
        nodes_->emplace_back();
        const std::size_t n = end - begin;
        double sum = 0.0;
        for (std::size_t i = begin; i < end; ++i) sum += y_(rows_[i]);
        const double node_mean = sum / static_cast<double>(n);
        (*nodes_)[static_cast<std::size_t>(id)].value = node_mean;
        (*nodes_)[static_cast<std::size_t>(id)].n_samples = static_cast<int>(n);

        const bool depth_reached = opts_.max_depth >= 0 && depth >= opts_.max_depth;
        if (depth_reached || n < 2 * static_cast<std::size_t>(opts_.min_leaf)) return id;

        const Split best = find_split(begin, end, node_mean);
        if (best.feature < 0 || best.gain < kMinGain) return id;

        auto mid_it = std::partition(rows_.begin() + static_cast<std::ptrdiff_t>(begin),
                                     rows_.begin() + static_cast<std::ptrdiff_t>(end),
                                     [&](int r) { return x_(r, best.feature) <= best.threshold; });
        const std::size_t mid = static_cast<std::size_t>(mid_it - rows_.begin());
        // Restore a canonical row order so the result does not depend on partition internals.
        std::sort(rows_.begin() + static_cast<std::ptrdiff_t>(begin), mid_it);
        std::sort(mid_it, rows_.begin() + static_cast<std::ptrdiff_t>(end));

        const int left = grow(begin, mid, depth + 1);
        const int right = grow(mid, end, depth + 1);
        auto& node = (*nodes_)[static_cast<std::size_t>(id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = left;
        node.right = right;
        return id;
    }

    const std::vector<int>& candidate_features() {
        const int mtry = opts_.features_per_split;
        if (mtry <= 0 || mtry >= p_) return all_features_;
        if (rng_ == nullptr) throw std::logic_error("feature subsampling requires an RNG");
        // Partial Fisher-Yates on a persistent permutation, then ascending order for tie-breaking.
        for (int i = 0; i < mtry; ++i) {
            const auto j = static_cast<std::size_t>(i) + uniform_index(*rng_, static_cast<std::uint64_t>(p_ - i));
            std::swap(all_features_[static_cast<std::size_t>(i)], all_features_[j]);
        }
        chosen_.assign(all_features_.begin(), all_features_.begin() + mtry);
        std::sort(chosen_.begin(), chosen_.end());
        return chosen_;
    }

    Split find_split(std::size_t begin, std::size_t end, double node_mean) {
        const std::size_t n = end - begin;
        const std::size_t min_leaf = static_cast<std::size_t>(opts_.min_leaf);
        const double nd = static_cast<double>(n);
        Split best;
        for (int f : candidate_features()) {
            for (std::size_t i = begin; i < end; ++i) {
                const int r = rows_[i];
                buffer_[i - begin] = {x_(r, f), y_(r) - node_mean};
            }
            std::sort(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(n));
            if (buffer_[0].first == buffer_[n - 1].first) continue;
            double left_sum = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left_sum += buffer_[i].second;
                const std::size_t n_left = i + 1;
                if (n_left < min_leaf) continue;
                if (n - n_left < min_leaf) break;
                const double lo = buffer_[i].first;
                const double hi = buffer_[i + 1].first;
                if (!(lo < hi)) continue;
                // Centered targets: SSE reduction = S_L^2 * n / (n_L * n_R).
                const double nl = static_cast<double>(n_left);
                const double gain = left_sum * left_sum * nd / (nl * (nd - nl));
                if (gain > best.gain * (1.0 + 1e-12) && gain > best.gain) {
                    double threshold = 0.5 * (lo + hi);
                    if (!(threshold < hi)) threshold = lo;
                    best = {f, threshold, gain};
                }
            }
        }
        return best;
    }

    const Eigen::MatrixXd& x_;
    const Eigen::VectorXd& y_;
    TreeOptions opts_;
    Rng* rng_;
    int p_;
    std::vector<int> rows_;
    std::vector<std::pair<double, double>> buffer_;
    std::vector<int> all_features_;
    std::vector<int> chosen_;
    std::vector<TreeNode>* nodes_ = nullptr;
};

}  // namespace

int TreeModel::leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    int id = 0;
    while (!nodes[static_cast<std::size_t>(id)].is_leaf()) {
        const auto& node = nodes[static_cast<std::size_t>(id)];
        id = row(node.feature) <= node.threshold ? node.left : node.right;
    }
    return id;
}

double TreeModel::predict_one(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    return nodes[static_cast<std::size_t>(leaf_index(row))].value;
}

Eigen::VectorXd TreeModel::predict(const Eigen::MatrixXd& x) const {
    if (x.cols() != n_features) throw DataError("predict: feature count does not match the fitted tree");
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        int id = 0;
        while (!nodes[static_cast<std::size_t>(id)].is_leaf()) {
            const auto& node = nodes[static_cast<std::size_t>(id)];
            id = x(i, node.feature) <= node.threshold ? node.left : node.right;
        }
        out(i) = nodes[static_cast<std::size_t>(id)].value;
    }
    return out;
}

int TreeModel::leaf_count() const {
    return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int TreeModel::depth() const {
    std::vector<int> level(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        deepest = std::max(deepest, level[i]);
        if (!nodes[i].is_leaf()) {
            level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
            level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
        }
    }
    return deepest;
}

TreeModel grow_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const int> rows,
                    const TreeOptions& opts, Rng* rng) {
    if (rows.empty()) throw DataError("cannot fit a tree on empty data");
    if (y.size() != x.rows()) throw DataError("target length does not match design rows");
    if (opts.min_leaf < 1) throw ConfigError("min_leaf must be >= 1");
    if (opts.max_depth < -1) throw ConfigError("max_depth must be >= 0 (or -1 for unlimited)");
    TreeBuilder builder(x, y, opts, rng);
    return builder.build(rows);
}

TreeModel fit_tree(const DesignMatrix& x, const Eigen::VectorXd& y, int max_depth, int min_leaf) {
    std::vector<int> rows(static_cast<std::size_t>(x.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    return grow_tree(x.values(), y, rows, TreeOptions{max_depth, min_leaf, 0});
}

}  // namespace dml

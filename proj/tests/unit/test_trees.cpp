#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dml/common/error.hpp"
#include "dml/learners/boost.hpp"
#include "dml/learners/forest.hpp"
#include "dml/learners/tree.hpp"
#include "test_util.hpp"

using namespace dml;
using dml::test::random_normal;
using dml::test::random_vector;

namespace {

double sse_of(const Eigen::VectorXd& y, const std::vector<int>& rows) {
    double mu = 0.0;
    for (int i : rows) mu += y(i);
    mu /= static_cast<double>(rows.size());
    double s = 0.0;
    for (int i : rows) s += (y(i) - mu) * (y(i) - mu);
    return s;
}

// Greedy CART by brute force: every candidate split is scored by recomputing
// both child SSEs from scratch.
double greedy_oracle_sse(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<int>& rows, int depth,
                         int max_depth, int min_leaf) {
    const double parent = sse_of(y, rows);
    if ((max_depth >= 0 && depth >= max_depth) || static_cast<int>(rows.size()) < 2 * min_leaf) return parent;
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_l, best_r;
    for (int j = 0; j < x.cols(); ++j) {
        std::vector<double> vals;
        for (int i : rows) vals.push_back(x(i, j));
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t v = 0; v + 1 < vals.size(); ++v) {
            const double thr = 0.5 * (vals[v] + vals[v + 1]);
            std::vector<int> l, r;
            for (int i : rows) (x(i, j) <= thr ? l : r).push_back(i);
            if (static_cast<int>(l.size()) < min_leaf || static_cast<int>(r.size()) < min_leaf) continue;
            const double s = sse_of(y, l) + sse_of(y, r);
            if (s < best) {
                best = s;
                best_l = l;
                best_r = r;
            }
        }
    }
    if (best_l.empty() || parent - best < 1e-12) return parent;
    return greedy_oracle_sse(x, y, best_l, depth + 1, max_depth, min_leaf) +
           greedy_oracle_sse(x, y, best_r, depth + 1, max_depth, min_leaf);
}

double training_sse(const TreeModel& t, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    return (t.predict(x) - y).squaredNorm();
}

std::vector<int> all_rows(int n) {
    std::vector<int> r(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = i;
    return r;
}

}  // namespace

TEST_CASE("constant target gives a single leaf") {
    const Eigen::MatrixXd x = random_normal(20, 3, 1);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(20, 2.5);
    const TreeModel t = fit_tree(DesignMatrix(x), y, -1, 1);
    CHECK(t.nodes.size() == 1);
    CHECK(t.predict(x).isApproxToConstant(2.5));
}

TEST_CASE("separable pair is split exactly") {
    Eigen::MatrixXd x(2, 1);
    x << 0, 1;
    const Eigen::Vector2d y(0, 1);
    const TreeModel t = fit_tree(DesignMatrix(x), y, 1, 1);
    CHECK(t.leaf_count() == 2);
    CHECK(training_sse(t, x, y) == 0.0);
    CHECK(t.nodes[0].threshold == 0.5);
}

TEST_CASE("two-jump step function at depth 2 matches exhaustive search") {
    const int n = 50;
    Eigen::MatrixXd x(n, 1);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = i / 49.0;
        y(i) = (i < 17 ? 1.0 : (i < 35 ? 3.0 : -1.0)) + 0.01 * std::sin(7.0 * i);
    }
    // Global optimum over all two-threshold partitions of the sorted line.
    double best = std::numeric_limits<double>::infinity();
    for (int a = 1; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            std::vector<int> s1, s2, s3;
            for (int i = 0; i < n; ++i) (i < a ? s1 : (i < b ? s2 : s3)).push_back(i);
            best = std::min(best, sse_of(y, s1) + sse_of(y, s2) + sse_of(y, s3));
        }
    const TreeModel t = fit_tree(DesignMatrix(x), y, 2, 1);
    // Depth 2 allows up to four leaves, so the tree does at least as well.
    CHECK(training_sse(t, x, y) <= best + 1e-12);
    CHECK(training_sse(t, x, y) == doctest::Approx(greedy_oracle_sse(x, y, all_rows(n), 0, 2, 1)).epsilon(1e-12));
}

TEST_CASE("tree SSE matches the brute-force split oracle") {
    for (std::uint64_t s = 0; s < 30; ++s) {
        const int n = 10 + static_cast<int>(s * 3 % 91);
        const int p = 1 + static_cast<int>(s % 4);
        const Eigen::MatrixXd x = random_normal(n, p, 500 + s);
        const Eigen::VectorXd y = x.col(0).array().sin().matrix() + 0.3 * random_vector(n, 600 + s);
        const int depth = static_cast<int>(s % 5) - 1;
        const int leaf = 1 + static_cast<int>(s % 3);
        const TreeModel t = fit_tree(DesignMatrix(x), y, depth, leaf);
        const double oracle = greedy_oracle_sse(x, y, all_rows(n), 0, depth, leaf);
        REQUIRE(training_sse(t, x, y) == doctest::Approx(oracle).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("tree structure invariants") {
    const Eigen::MatrixXd x = random_normal(200, 3, 77);
    const Eigen::VectorXd y = x.col(1) + 0.5 * random_vector(200, 78);
    const TreeModel t = fit_tree(DesignMatrix(x), y, 6, 7);
    CHECK(t.depth() <= 6);
    for (const auto& node : t.nodes) {
        if (node.is_leaf()) {
            CHECK(node.n_samples >= 7);
        } else {
            CHECK(node.left >= 0);
            CHECK(node.right >= 0);
        }
    }
    // Leaf values are means of their training targets.
    std::vector<double> sum(t.nodes.size(), 0.0);
    std::vector<int> count(t.nodes.size(), 0);
    for (int i = 0; i < 200; ++i) {
        const int leaf = t.leaf_index(x.row(i));
        sum[static_cast<std::size_t>(leaf)] += y(i);
        ++count[static_cast<std::size_t>(leaf)];
    }
    for (std::size_t k = 0; k < t.nodes.size(); ++k)
        if (count[k] > 0) CHECK(t.nodes[k].value == doctest::Approx(sum[k] / count[k]));
    CHECK_THROWS_AS(t.predict(random_normal(3, 2, 1)), DataError);
}

TEST_CASE("degenerate forest equals one tree") {
    const Eigen::MatrixXd x = random_normal(80, 4, 3);
    const Eigen::VectorXd y = x.col(0).array().square().matrix() + random_vector(80, 4);
    ForestOptions o;
    o.n_trees = 1;
    o.bootstrap = false;
    o.features_per_split = 4;
    o.min_leaf = 3;
    const DesignMatrix dm(x);
    const ForestModel f = fit_forest(dm, y, o);
    CHECK(f.predict(x) == fit_tree(dm, y, -1, 3).predict(x));
}

TEST_CASE("forest is deterministic, bounded and validated") {
    const Eigen::MatrixXd x = random_normal(120, 6, 13);
    const Eigen::VectorXd y = x.col(0) + random_vector(120, 14);
    ForestOptions o;
    o.n_trees = 30;
    o.seed = 5;
    const DesignMatrix dm(x);
    const ForestModel a = fit_forest(dm, y, o);
    const ForestModel b = fit_forest(dm, y, o);
    const Eigen::MatrixXd q = 3.0 * random_normal(50, 6, 15);
    CHECK(a.predict(q) == b.predict(q));
    o.threads = 3;
    CHECK(fit_forest(dm, y, o).predict(q) == a.predict(q));
    const Eigen::VectorXd pq = a.predict(q);
    CHECK(pq.minCoeff() >= y.minCoeff());
    CHECK(pq.maxCoeff() <= y.maxCoeff());
    CHECK(a.features_per_split == 2);
    o.features_per_split = 7;
    CHECK_THROWS_AS(fit_forest(dm, y, o), ConfigError);
}

TEST_CASE("boosting basics") {
    const Eigen::MatrixXd x = random_normal(60, 2, 21);
    const Eigen::VectorXd y = x.col(0).array().cos().matrix() + 0.2 * random_vector(60, 22);
    const DesignMatrix dm(x);
    CHECK(fit_boost(dm, y, 0, 0.1, 3, 5).predict(x).isApproxToConstant(y.mean()));

    Eigen::MatrixXd x2(2, 1);
    x2 << 0, 1;
    const Eigen::Vector2d y2(0, 1);
    CHECK((fit_boost(DesignMatrix(x2), y2, 1, 1.0, 1, 1).predict(x2) - y2).norm() == 0.0);

    const BoostModel m = fit_boost(dm, y, 40, 0.3, 2, 3);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t <= m.stages.size(); ++t) {
        const double sse = (m.predict_staged(x, t) - y).squaredNorm();
        CHECK(sse <= prev + 1e-12);
        prev = sse;
    }
    CHECK_THROWS_AS(fit_boost(dm, y, 5, 0.0, 2, 3), ConfigError);
}

#include <benchmark/benchmark.h>

#include <random>

#include "dml/learners/forest.hpp"
#include "dml/learners/linear.hpp"
#include "dml/learners/tree.hpp"

namespace {

struct Problem {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};

Problem make_problem(int n, int p) {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> z;
    Problem pr{Eigen::MatrixXd(n, p), Eigen::VectorXd(n)};
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < n; ++i) pr.x(i, j) = z(rng);
    for (int i = 0; i < n; ++i) pr.y(i) = pr.x(i, 0) - 0.5 * pr.x(i, 1 % p) + std::sin(pr.x(i, 2 % p)) + z(rng);
    return pr;
}

void BM_LassoPath(benchmark::State& state) {
    const Problem pr = make_problem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    const dml::DesignMatrix dm(pr.x);
    const auto grid = dml::lasso_lambda_grid(dml::lasso_lambda_max(dm, pr.y), 50, 1e-4);
    for (auto _ : state) benchmark::DoNotOptimize(dml::fit_lasso_path(dm, pr.y, grid));
}
BENCHMARK(BM_LassoPath)->Args({500, 20})->Args({2000, 50})->Args({2000, 200})->Unit(benchmark::kMillisecond);

void BM_Ridge(benchmark::State& state) {
    const Problem pr = make_problem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    const dml::DesignMatrix dm(pr.x);
    for (auto _ : state) benchmark::DoNotOptimize(dml::fit_ridge(dm, pr.y, 1.0));
}
BENCHMARK(BM_Ridge)->Args({2000, 50})->Args({2000, 200})->Unit(benchmark::kMillisecond);

void BM_Tree(benchmark::State& state) {
    const Problem pr = make_problem(static_cast<int>(state.range(0)), 10);
    const dml::DesignMatrix dm(pr.x);
    for (auto _ : state) benchmark::DoNotOptimize(dml::fit_tree(dm, pr.y, -1, 5));
}
BENCHMARK(BM_Tree)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_Forest(benchmark::State& state) {
    const Problem pr = make_problem(static_cast<int>(state.range(0)), 10);
    const dml::DesignMatrix dm(pr.x);
    dml::ForestOptions opts;
    opts.n_trees = 100;
    opts.features_per_split = 5;
    opts.threads = static_cast<unsigned>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(dml::fit_forest(dm, pr.y, opts));
}
BENCHMARK(BM_Forest)->Args({250, 1})->Args({1000, 1})->Args({1000, 4})->Unit(benchmark::kMillisecond);

}  // namespace

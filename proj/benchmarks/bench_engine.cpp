#include <benchmark/benchmark.h>

#include "dml/engine/dml.hpp"
#include "dml/simulation/dgp.hpp"

namespace {

dml::sim::SimulatedData plr_data(int n) {
    dml::sim::PlrDgpConfig cfg;
    cfg.design = dml::sim::PlrDesign::nonlinear_smooth;
    cfg.p = 10;
    cfg.seed = 1;
    return dml::sim::generate_plr(cfg, n);
}

void BM_CrossFitLasso(benchmark::State& state) {
    const auto s = plr_data(static_cast<int>(state.range(0)));
    const dml::LearnerMap learners = {{"default", dml::LearnerSpec::lasso_cv(5)}};
    const auto part = dml::make_folds(static_cast<int>(s.data.n()), 5, 2);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            dml::fit_nuisance_crossfit(s.data, learners, {dml::ScoreKind::plr_partialling_out}, part, {0.01, 3}));
}
BENCHMARK(BM_CrossFitLasso)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_CrossFitForestOrthogonal(benchmark::State& state) {
    const auto s = plr_data(500);
    const dml::LearnerMap learners = {{"default", dml::LearnerSpec::forest(100, 5, 5)}};
    const auto part = dml::make_folds(500, 2, 2);
    for (auto _ : state)
        benchmark::DoNotOptimize(dml::fit_nuisance_crossfit(
            s.data, learners, {dml::ScoreKind::plr_orthogonal, dml::ScoreKind::naive_plr}, part, {0.01, 3}));
}
BENCHMARK(BM_CrossFitForestOrthogonal)->Unit(benchmark::kMillisecond);

void BM_RepeatSplitsConstant(benchmark::State& state) {
    const auto s = dml::sim::generate_irm(0.5, 4, 10000, 4);
    const dml::LearnerMap learners = {{"default", dml::LearnerSpec::constant_mean()}};
    dml::DmlConfig cfg;
    cfg.score = dml::ScoreKind::ate;
    for (auto _ : state)
        benchmark::DoNotOptimize(dml::repeat_splits(s.data, learners, cfg, static_cast<int>(state.range(0)), 5));
}
BENCHMARK(BM_RepeatSplitsConstant)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "dml/ortho/ortho.hpp"
#include "dml/simulation/monte_carlo.hpp"
#include "dml_cli/config.hpp"

namespace dml::cli {

/// Loads the data, runs repeat_splits and returns the report.
nlohmann::json cmd_estimate(const RunConfig& config, const std::string& data_path);

/// A ready-to-run Monte Carlo study.
struct Study {
    std::string preset;
    sim::PlrDgpConfig dgp;
    std::vector<sim::EstimatorConfig> estimators;
    sim::MonteCarloConfig mc;
    int n = 0;
    int reps = 0;
};

/// figure1: nonlinear PLR design, forest nuisances, naive vs DML2 (K = 2) on the
/// same per-rep data. figure2: overfit g (epsilon = 0.1) with true m,
/// full-sample vs 2-fold cross-fit.
Study make_study(const std::string& preset);

struct SimulateOutput {
    std::vector<sim::MonteCarloSummary> summaries;
    nlohmann::json summary;
};

SimulateOutput cmd_simulate(const Study& study, std::uint64_t seed);

struct ScoreCheckRow {
    ScoreKind score;
    OrthogonalityReport report;
};

/// Finite-difference Gateaux derivatives at the true nuisances of every score of
/// the preset model (plr, pliv, irm, iivm; plr includes the naive score).
/// Directions perturb all function-valued nuisances at once; the first one
/// moves g along m0, the remaining ones are random polynomial combinations.
std::vector<ScoreCheckRow> cmd_check_score(const std::string& preset, int n, int n_directions, std::uint64_t seed);

void print_check_table(std::ostream& out, const std::vector<ScoreCheckRow>& rows);

/// Entry point of the `dml` executable. Exit codes: 0 success, 2 config error,
/// 3 data error, 4 numerical failure, 1 anything else.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace dml::cli

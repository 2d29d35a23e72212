#include "dml_cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "dml/common/error.hpp"
#include "dml/common/rng.hpp"
#include "dml/engine/dml.hpp"
#include "dml_cli/csv.hpp"
#include "dml_cli/report.hpp"

namespace dml::cli {

using nlohmann::json;

json cmd_estimate(const RunConfig& config, const std::string& data_path) {
    config.validate();
    const LoadedData loaded = load_csv(data_path, config.model, config.columns, config.expand_degree2);
    DmlConfig dc;
    dc.score = config.score_kind();
    dc.method = config.method;
    dc.folds = config.folds;
    dc.alpha = config.alpha;
    dc.score_options.trim_eps = config.trim_eps;
    dc.score_options.late_mu0_in_control_term = config.late_mu0_in_control_term;
    dc.threads = config.threads;
    const RepeatedSplitResult r = repeat_splits(loaded.data, config.learners, dc, config.splits, config.seed);
    return make_report(r, config, {static_cast<long>(loaded.data.n()), loaded.rows_dropped,
                                    static_cast<int>(loaded.data.p())});
}

Study make_study(const std::string& preset) {
    Study s;
    s.preset = preset;
    if (preset == "figure1") {
        s.dgp.design = sim::PlrDesign::nonlinear_smooth;
        s.dgp.theta0 = 0.5;
        s.dgp.p = 10;
        s.dgp.R2_d = 0.5;
        s.dgp.R2_y = 0.7;
        s.estimators = {{"naive", ScoreKind::naive_plr, sim::NuisanceSource::learned},
                        {"dml", ScoreKind::plr_orthogonal, sim::NuisanceSource::learned, DmlMethod::dml2}};
        s.mc.learners = {{"default", LearnerSpec::forest(100, 5, 5)}};
        s.mc.folds = 2;
        s.n = 500;
        s.reps = 200;
    } else if (preset == "figure2") {
        s.dgp.theta0 = 1.0;
        s.estimators = {{"full-sample", ScoreKind::plr_orthogonal, sim::NuisanceSource::overfit_full_sample,
                         DmlMethod::dml2, 0.1},
                        {"cross-fit", ScoreKind::plr_orthogonal, sim::NuisanceSource::overfit_cross_fit,
                         DmlMethod::dml2, 0.1}};
        s.mc.folds = 2;
        s.n = 1000;
        s.reps = 200;
    } else {
        throw ConfigError("unknown simulation preset '" + preset + "' (expected figure1 or figure2)");
    }
    return s;
}

SimulateOutput cmd_simulate(const Study& study, std::uint64_t seed) {
    SimulateOutput out;
    out.summaries = sim::run_monte_carlo(study.dgp, study.estimators, study.mc, study.n, study.reps, seed);
    json& j = out.summary;
    j["preset"] = study.preset;
    j["n"] = study.n;
    j["reps"] = study.reps;
    j["seed"] = seed;
    j["theta0"] = study.dgp.theta0;
    j["folds"] = study.mc.folds;
    j["version"] = version_string();
    j["estimators"] = json::array();
    for (const auto& s : out.summaries) {
        json e = {{"name", s.name},
                  {"n_reps", s.n_reps},
                  {"failures", s.failures},
                  {"bias_mean", s.bias_mean},
                  {"bias_median", s.bias_median},
                  {"bias_se", s.bias_standard_error()},
                  {"sd", s.sd},
                  {"bias_to_sd", s.sd > 0 ? s.bias_mean / s.sd : 0.0},
                  {"rmse", s.rmse},
                  {"coverage", s.coverage},
                  {"median_se", s.median_se}};
        if (s.studentized_estimates.size() >= 50) {
            const auto d = sim::normality_diagnostics(s.studentized_estimates);
            e["ks_studentized"] = d.ks_statistic;
            e["skewness"] = d.skewness;
            e["excess_kurtosis"] = d.excess_kurtosis;
        }
        j["estimators"].push_back(e);
    }
    return out;
}

namespace {

sim::SimulatedData preset_data(const std::string& preset, int n, std::uint64_t seed) {
    if (preset == "plr") {
        Study s = make_study("figure1");
        s.dgp.seed = seed;
        return sim::generate_plr(s.dgp, n);
    }
    if (preset == "pliv") return sim::generate_pliv(0.5, 5, n, seed);
    if (preset == "irm") return sim::generate_irm(0.5, 5, n, seed);
    if (preset == "iivm") return sim::generate_iivm(0.5, 5, n, seed);
    throw ConfigError("unknown score-check preset '" + preset + "' (expected plr, pliv, irm or iivm)");
}

std::vector<ScoreKind> preset_scores(const std::string& preset) {
    if (preset == "plr") return {ScoreKind::plr_orthogonal, ScoreKind::plr_partialling_out, ScoreKind::naive_plr};
    if (preset == "pliv") return {ScoreKind::pliv_orthogonal, ScoreKind::pliv_partialling_out};
    if (preset == "irm") return {ScoreKind::ate, ScoreKind::atte};
    return {ScoreKind::late};
}

}  // namespace

std::vector<ScoreCheckRow> cmd_check_score(const std::string& preset, int n, int n_directions, std::uint64_t seed) {
    if (n < 20) throw ConfigError("score check needs N >= 20");
    if (n_directions < 1) throw ConfigError("score check needs at least one direction");
    const sim::SimulatedData s = preset_data(preset, n, derive_seed(seed, {0}));
    std::vector<ScoreCheckRow> rows;
    for (ScoreKind kind : preset_scores(preset)) {
        const std::vector<std::string> names = required_nuisances(kind);
        const auto basis = polynomial_directions(s.data.x, n_directions * static_cast<int>(names.size()),
                                                 derive_seed(seed, {1}));
        std::vector<NuisancePredictions> dirs;
        if (std::find(names.begin(), names.end(), nuisance::g) != names.end()) {
            const Eigen::VectorXd& m0 = s.oracle.get(nuisance::m);
            NuisancePredictions d;
            d.set(nuisance::g, m0 / std::sqrt(m0.squaredNorm() / static_cast<double>(n)));
            dirs.push_back(std::move(d));
        }
        for (int k = 0; k < n_directions; ++k) {
            NuisancePredictions d;
            for (std::size_t c = 0; c < names.size(); ++c) {
                // ATTE's p is a number, not a function of X
                if (kind == ScoreKind::atte && names[c] == nuisance::p)
                    d.set(names[c], Eigen::VectorXd::Ones(n));
                else
                    d.set(names[c], basis[static_cast<std::size_t>(k) * names.size() + c]);
            }
            dirs.push_back(std::move(d));
        }
        const ScoreFunction f = linear_score_function(kind);
        rows.push_back({kind, check_orthogonality(f, s.theta0, s.oracle, dirs, s.data)});
    }
    return rows;
}

void print_check_table(std::ostream& out, const std::vector<ScoreCheckRow>& rows) {
    char buf[200];
    out << "  score                  max |dG|    max s.e.   3 s.e.\n";
    for (const auto& r : rows) {
        const double bound = 3.0 * r.report.max_standard_error;
        const char* verdict = r.score == ScoreKind::naive_plr ? (r.report.max_abs_derivative > 10.0 * bound ? "not orthogonal" : "?")
                              : r.report.max_abs_derivative <= bound ? "orthogonal"
                                                                     : "NOT orthogonal";
        std::snprintf(buf, sizeof buf, "  %-20s  %10.3e  %10.3e  %9.3e  %s\n", std::string(to_string(r.score)).c_str(),
                      r.report.max_abs_derivative, r.report.max_standard_error, bound, verdict);
        out << buf;
    }
}

namespace {

void write_json(const json& j, const std::string& path, std::ostream& out) {
    if (path == "-") {
        out << j.dump(2) << '\n';
        return;
    }
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    f << j.dump(2) << '\n';
}

struct EstimateFlags {
    std::string data, config, out;
    std::optional<std::string> model, score, method, y, d, z, learner;
    std::vector<std::string> x;
    std::optional<int> folds, splits, threads;
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha, trim;
    bool degree2 = false;
};

RunConfig apply_flags(const EstimateFlags& f) {
    RunConfig c = f.config.empty() ? RunConfig{} : load_run_config(f.config);
    if (f.model) c.model = parse_model_kind(*f.model);
    if (f.score) c.score = *f.score;
    if (f.method) c.method = parse_dml_method(*f.method);
    if (f.y) c.columns.y = *f.y;
    if (f.d) c.columns.d = *f.d;
    if (f.z) c.columns.z = *f.z;
    if (!f.x.empty()) c.columns.x = f.x;
    if (f.learner) c.learners = {{"default", learner_from_json(json(*f.learner))}};
    if (f.folds) c.folds = *f.folds;
    if (f.splits) c.splits = *f.splits;
    if (f.threads) {
        if (*f.threads < 1) throw ConfigError("threads must be at least 1");
        c.threads = static_cast<unsigned>(*f.threads);
    }
    if (f.seed) c.seed = *f.seed;
    if (f.alpha) c.alpha = *f.alpha;
    if (f.trim) c.trim_eps = *f.trim;
    if (f.degree2) c.expand_degree2 = true;
    return c;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Double/debiased machine learning estimation and simulation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version_string());

    EstimateFlags ef;
    CLI::App* est = app.add_subcommand("estimate", "Estimate a causal parameter from a CSV file");
    est->add_option("--data", ef.data, "CSV file with a header row")->required();
    est->add_option("--config", ef.config, "JSON run configuration");
    est->add_option("--model", ef.model, "plr, pliv, irm or iivm");
    est->add_option("--score", ef.score, "default, partialling-out, atte or naive");
    est->add_option("--folds,-K", ef.folds, "number of cross-fitting folds");
    est->add_option("--splits,-S", ef.splits, "number of sample splits");
    est->add_option("--seed", ef.seed, "random seed");
    est->add_option("--alpha", ef.alpha, "1 - confidence level");
    est->add_option("--trim", ef.trim, "propensity trimming threshold");
    est->add_option("--method", ef.method, "dml1 or dml2");
    est->add_option("--learner", ef.learner, "learner kind used for every nuisance");
    est->add_option("--y", ef.y, "outcome column");
    est->add_option("--d", ef.d, "treatment column");
    est->add_option("--z", ef.z, "instrument column");
    est->add_option("--x", ef.x, "control columns")->delimiter(',');
    est->add_flag("--degree2", ef.degree2, "add squares and pairwise products of the controls");
    est->add_option("--threads", ef.threads, "worker threads");
    est->add_option("--out", ef.out, "write the JSON report here ('-' for stdout)");

    std::string sim_preset = "figure1", out_dir;
    std::optional<int> sim_reps, sim_n, sim_threads;
    std::uint64_t sim_seed = 0;
    CLI::App* simc = app.add_subcommand("simulate", "Run a Monte Carlo study");
    simc->add_option("--preset", sim_preset, "figure1 or figure2");
    simc->add_option("--reps", sim_reps, "number of replications");
    simc->add_option("--n", sim_n, "sample size");
    simc->add_option("--seed", sim_seed, "random seed");
    simc->add_option("--threads", sim_threads, "worker threads");
    simc->add_option("--out-dir", out_dir, "directory for summary.json and per-estimator histogram CSVs");

    std::string chk_preset = "plr";
    int chk_n = 100000, chk_dirs = 10;
    std::uint64_t chk_seed = 0;
    CLI::App* chk = app.add_subcommand("check-score", "Finite-difference orthogonality check at the true nuisances");
    chk->add_option("--preset", chk_preset, "plr, pliv, irm or iivm");
    chk->add_option("--n", chk_n, "sample size");
    chk->add_option("--directions", chk_dirs, "number of random directions");
    chk->add_option("--seed", chk_seed, "random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try {
        if (*est) {
            const RunConfig config = apply_flags(ef);
            const json report = cmd_estimate(config, ef.data);
            print_report_table(out, report);
            if (!ef.out.empty()) write_json(report, ef.out, out);
        } else if (*simc) {
            Study study = make_study(sim_preset);
            if (sim_reps) study.reps = *sim_reps;
            if (sim_n) study.n = *sim_n;
            if (sim_threads) {
                if (*sim_threads < 1) throw ConfigError("threads must be at least 1");
                study.mc.threads = static_cast<unsigned>(*sim_threads);
            }
            const SimulateOutput res = cmd_simulate(study, sim_seed);
            char buf[200];
            out << "  estimator       bias      sd     bias/sd  coverage\n";
            for (const auto& s : res.summaries) {
                std::snprintf(buf, sizeof buf, "  %-12s %8.4f %8.4f %8.3f %8.3f\n", s.name.c_str(), s.bias_mean, s.sd,
                              s.sd > 0 ? s.bias_mean / s.sd : 0.0, s.coverage);
                out << buf;
            }
            if (!out_dir.empty()) {
                std::filesystem::create_directories(out_dir);
                write_json(res.summary, (std::filesystem::path(out_dir) / "summary.json").string(), out);
                for (const auto& s : res.summaries) {
                    std::ofstream f(std::filesystem::path(out_dir) / ("hist_" + s.name + ".csv"));
                    if (!f) throw ConfigError("cannot write into '" + out_dir + "'");
                    sim::write_histogram_csv(f, s);
                }
            }
        } else if (*chk) {
            print_check_table(out, cmd_check_score(chk_preset, chk_n, chk_dirs, chk_seed));
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return 3;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace dml::cli

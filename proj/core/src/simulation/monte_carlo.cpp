#include "dml/simulation/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "dml/common/error.hpp"
#include "dml/common/parallel.hpp"
#include "dml/common/rng.hpp"
#include "dml/common/stats.hpp"
#include "dml/engine/dml.hpp"

namespace dml::sim {

namespace {

struct RepEstimate {
    double theta = 0.0;
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

RepEstimate from_result(const DmlResult& r) { return {r.theta, r.se, r.ci_low, r.ci_high}; }

DmlConfig dml_config(const EstimatorConfig& est, const MonteCarloConfig& config) {
    DmlConfig c;
    c.score = est.score;
    c.method = est.method;
    c.folds = config.folds;
    c.alpha = config.alpha;
    c.score_options = config.score_options;
    return c;
}

RepEstimate full_sample_estimate(const SimulatedData& sim, const EstimatorConfig& est, const MonteCarloConfig& config) {
    const Dataset& data = sim.data;
    NuisancePredictions nuis = sim.oracle;
    std::vector<int> all(static_cast<std::size_t>(data.n()));
    for (int i = 0; i < static_cast<int>(all.size()); ++i) all[static_cast<std::size_t>(i)] = i;
    nuis.set(nuisance::g, overfit_nuisance(data, sim.oracle.get(nuisance::g), est.overfit_epsilon, all));
    const ScoreValues s = evaluate_score(est.score, data, nuis, config.score_options);
    RepEstimate out;
    out.theta = solve_linear_score(s);
    const double j = s.psi_a.mean();
    const double sigma2 = s.at(out.theta).squaredNorm() / static_cast<double>(data.n()) / (j * j);
    out.se = std::sqrt(sigma2 / static_cast<double>(data.n()));
    std::tie(out.ci_low, out.ci_high) = confidence_interval(out.theta, sigma2, data.n(), config.alpha);
    return out;
}

RepEstimate cross_fit_overfit_estimate(const SimulatedData& sim, const EstimatorConfig& est,
                                       const MonteCarloConfig& config, const FoldPartition& partition) {
    const Dataset& data = sim.data;
    const Eigen::VectorXd& g0 = sim.oracle.get(nuisance::g);
    Eigen::VectorXd ghat(data.n());
    for (int k = 0; k < partition.k(); ++k) {
        const Eigen::VectorXd fit_k = overfit_nuisance(data, g0, est.overfit_epsilon, partition.complement(k));
        for (int i : partition.fold(k)) ghat(i) = fit_k(i);
    }
    NuisancePredictions nuis = sim.oracle;
    nuis.set(nuisance::g, ghat);
    return from_result(estimate_from_nuisances(data, nuis, dml_config(est, config), partition));
}

MonteCarloSummary summarize(const std::string& name, const std::vector<std::optional<RepEstimate>>& reps,
                            double theta0) {
    MonteCarloSummary s;
    s.name = name;
    int covered = 0;
    for (std::size_t r = 0; r < reps.size(); ++r) {
        if (!reps[r]) {
            ++s.failures;
            continue;
        }
        const RepEstimate& e = *reps[r];
        s.reps.push_back(static_cast<int>(r));
        s.centered_estimates.push_back(e.theta - theta0);
        s.studentized_estimates.push_back((e.theta - theta0) / e.se);
        s.standard_errors.push_back(e.se);
        if (e.ci_low <= theta0 && theta0 <= e.ci_high) ++covered;
    }
    s.n_reps = static_cast<int>(s.centered_estimates.size());
    if (s.n_reps == 0) return s;
    s.bias_mean = mean(s.centered_estimates);
    s.bias_median = lower_median(s.centered_estimates);
    s.sd = s.n_reps > 1 ? sample_sd(s.centered_estimates) : 0.0;
    double sq = 0.0;
    for (double c : s.centered_estimates) sq += c * c;
    s.rmse = std::sqrt(sq / s.n_reps);
    s.coverage = static_cast<double>(covered) / s.n_reps;
    s.median_se = lower_median(s.standard_errors);
    return s;
}

}  // namespace

std::string_view to_string(NuisanceSource source) {
    switch (source) {
        case NuisanceSource::learned: return "learned";
        case NuisanceSource::oracle: return "oracle";
        case NuisanceSource::overfit_full_sample: return "overfit-full-sample";
        case NuisanceSource::overfit_cross_fit: return "overfit-cross-fit";
    }
    return "unknown";
}

double MonteCarloSummary::bias_standard_error() const {
    return n_reps > 0 ? sd / std::sqrt(static_cast<double>(n_reps)) : 0.0;
}

std::vector<MonteCarloSummary> run_monte_carlo(const PlrDgpConfig& dgp, const std::vector<EstimatorConfig>& estimators,
                                               const MonteCarloConfig& config, int n, int n_reps, std::uint64_t seed) {
    dgp.validate();
    if (n_reps < 10) throw ConfigError("a Monte Carlo study needs at least 10 reps");
    if (estimators.empty()) throw ConfigError("no estimators given");
    if (config.folds < 2 || config.folds > n) throw ConfigError("number of folds must lie in [2, n]");

    std::vector<ScoreKind> learned_scores;
    for (const auto& e : estimators)
        if (e.source == NuisanceSource::learned) learned_scores.push_back(e.score);

    const auto n_est = estimators.size();
    std::vector<std::vector<std::optional<RepEstimate>>> results(n_est,
        std::vector<std::optional<RepEstimate>>(static_cast<std::size_t>(n_reps)));
    parallel_for(
        static_cast<std::size_t>(n_reps),
        [&](std::size_t rep) {
            const std::uint64_t rep_seed = derive_seed(seed, {rep});
            PlrDgpConfig cfg = dgp;
            cfg.seed = derive_seed(rep_seed, {0});
            const SimulatedData sim = generate_plr(cfg, n);
            const FoldPartition partition = make_folds(n, config.folds, derive_seed(rep_seed, {1}));
            std::optional<CrossFitResult> cf;
            if (!learned_scores.empty()) {
                try {
                    cf = fit_nuisance_crossfit(sim.data, config.learners, learned_scores, partition,
                                               {config.score_options.trim_eps, derive_seed(rep_seed, {2})});
                } catch (const DataError&) {
                } catch (const NumericalError&) {
                }
            }
            for (std::size_t e = 0; e < n_est; ++e) {
                const EstimatorConfig& est = estimators[e];
                try {
                    switch (est.source) {
                        case NuisanceSource::learned:
                            if (cf)
                                results[e][rep] = from_result(
                                    estimate_from_nuisances(sim.data, cf->predictions, dml_config(est, config), partition));
                            break;
                        case NuisanceSource::oracle:
                            results[e][rep] = from_result(
                                estimate_from_nuisances(sim.data, sim.oracle, dml_config(est, config), partition));
                            break;
                        case NuisanceSource::overfit_full_sample:
                            results[e][rep] = full_sample_estimate(sim, est, config);
                            break;
                        case NuisanceSource::overfit_cross_fit:
                            results[e][rep] = cross_fit_overfit_estimate(sim, est, config, partition);
                            break;
                    }
                } catch (const NumericalError&) {
                }
            }
        },
        config.threads);

    std::vector<MonteCarloSummary> out;
    for (std::size_t e = 0; e < n_est; ++e) {
        MonteCarloSummary s = summarize(estimators[e].name, results[e], dgp.theta0);
        if (10 * s.failures > n_reps)
            throw NumericalError("estimator '" + s.name + "' failed in " + std::to_string(s.failures) + " of " +
                                 std::to_string(n_reps) + " reps");
        out.push_back(std::move(s));
    }
    return out;
}

MonteCarloSummary run_monte_carlo(const PlrDgpConfig& dgp, const EstimatorConfig& estimator,
                                  const MonteCarloConfig& config, int n, int n_reps, std::uint64_t seed) {
    return run_monte_carlo(dgp, std::vector<EstimatorConfig>{estimator}, config, n, n_reps, seed).front();
}

NormalityDiagnostics normality_diagnostics(const std::vector<double>& values) {
    if (values.size() < 50) throw std::invalid_argument("normality diagnostics need at least 50 values");
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    NormalityDiagnostics out;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = normal_cdf(sorted[i]);
        out.ks_statistic = std::max({out.ks_statistic, (i + 1) / n - f, f - i / n});
    }
    const double mu = mean(values);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double c = v - mu;
        m2 += c * c;
        m3 += c * c * c;
        m4 += c * c * c * c;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    out.skewness = m3 / std::pow(m2, 1.5);
    out.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    return out;
}

void write_histogram_csv(std::ostream& out, const MonteCarloSummary& summary) {
    out << "rep,centered,studentized\n";
    out.precision(17);
    for (std::size_t i = 0; i < summary.centered_estimates.size(); ++i)
        out << summary.reps[i] << ',' << summary.centered_estimates[i] << ',' << summary.studentized_estimates[i] << '\n';
}

}  // namespace dml::sim

#include "dml/engine/dml.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <optional>

#include "dml/common/error.hpp"
#include "dml/common/parallel.hpp"
#include "dml/common/rng.hpp"
#include "dml/common/stats.hpp"

namespace dml {

namespace {

void validate(const DmlConfig& config) {
    if (config.folds < 2) throw ConfigError("number of folds must be at least 2");
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (!(config.score_options.trim_eps > 0.0 && config.score_options.trim_eps < 0.5))
        throw ConfigError("trim_eps must lie in (0, 0.5)");
}

}  // namespace

DmlResult estimate_from_nuisances(const Dataset& data, const NuisancePredictions& nuis, const DmlConfig& config,
                                  const FoldPartition& partition, const std::vector<FoldDiagnostics>& diagnostics) {
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (partition.n() != data.n()) throw std::invalid_argument("fold partition size does not match the dataset");
    const ScoreValues scores = evaluate_score(config.score, data, nuis, config.score_options);

    DmlResult out;
    out.method = config.method;
    out.score = config.score;
    out.alpha = config.alpha;
    out.n = data.n();
    const Dml1Solution per_fold = solve_dml1(scores, partition);
    out.theta = config.method == DmlMethod::dml1 ? per_fold.theta : solve_dml2(scores, partition);
    out.sigma2 = estimate_variance(scores, out.theta, partition);
    out.se = std::sqrt(out.sigma2 / static_cast<double>(out.n));
    std::tie(out.ci_low, out.ci_high) = confidence_interval(out.theta, out.sigma2, out.n, out.alpha);

    for (int k = 0; k < partition.k(); ++k) {
        FoldRecord rec;
        rec.theta = per_fold.fold_thetas[static_cast<std::size_t>(k)];
        const auto rows = partition.fold(k);
        for (int i : rows) {
            rec.mean_psi_a += scores.psi_a(i);
            rec.mean_psi_b += scores.psi_b(i);
        }
        rec.size = static_cast<int>(rows.size());
        rec.mean_psi_a /= rec.size;
        rec.mean_psi_b /= rec.size;
        if (static_cast<std::size_t>(k) < diagnostics.size()) rec.nuisance_mse = diagnostics[static_cast<std::size_t>(k)];
        out.per_fold.push_back(std::move(rec));
    }
    return out;
}

DmlResult estimate(const Dataset& data, const LearnerMap& learners, const DmlConfig& config,
                   const FoldPartition& partition, std::uint64_t learner_seed) {
    validate(config);
    const CrossFitResult cf = fit_nuisance_crossfit(data, learners, {config.score}, partition,
                                                    {config.score_options.trim_eps, learner_seed});
    return estimate_from_nuisances(data, cf.predictions, config, partition, cf.fold_mse);
}

SplitAggregate aggregate_splits(const std::vector<double>& thetas, const std::vector<double>& sigma2s, long n) {
    if (thetas.empty() || thetas.size() != sigma2s.size()) throw std::invalid_argument("aggregate_splits: bad input sizes");
    const auto nn = static_cast<double>(n);
    SplitAggregate agg;
    agg.theta_mean = mean(thetas);
    agg.theta_median = lower_median(thetas);
    std::vector<double> adj_mean, adj_median;
    for (std::size_t s = 0; s < thetas.size(); ++s) {
        const double dm = thetas[s] - agg.theta_mean;
        const double dd = thetas[s] - agg.theta_median;
        adj_mean.push_back(sigma2s[s] + nn * dm * dm);
        adj_median.push_back(sigma2s[s] + nn * dd * dd);
    }
    agg.sigma2_mean = mean(adj_mean);
    agg.sigma2_median = lower_median(adj_median);
    return agg;
}

std::uint64_t split_seed(std::uint64_t seed, int split) { return derive_seed(seed, {static_cast<std::uint64_t>(split)}); }

RepeatedSplitResult repeat_splits(const Dataset& data, const LearnerMap& learners, const DmlConfig& config, int n_splits,
                                  std::uint64_t seed) {
    validate(config);
    if (n_splits < 1) throw ConfigError("number of splits must be at least 1");
    if (config.folds > data.n()) throw ConfigError("number of folds exceeds the number of observations");

    std::vector<std::optional<DmlResult>> results(static_cast<std::size_t>(n_splits));
    std::vector<std::string> errors(static_cast<std::size_t>(n_splits));
    parallel_for(
        static_cast<std::size_t>(n_splits),
        [&](std::size_t s) {
            const std::uint64_t s_seed = split_seed(seed, static_cast<int>(s));
            try {
                const FoldPartition partition = make_folds(static_cast<int>(data.n()), config.folds, derive_seed(s_seed, {0}));
                results[s] = estimate(data, learners, config, partition, derive_seed(s_seed, {1}));
            } catch (const DataError& e) {
                errors[s] = e.what();
            } catch (const NumericalError& e) {
                errors[s] = e.what();
            }
        },
        config.threads);

    RepeatedSplitResult out;
    out.n = data.n();
    for (int s = 0; s < n_splits; ++s) {
        auto& r = results[static_cast<std::size_t>(s)];
        if (r) {
            out.splits.push_back(std::move(*r));
            out.split_ids.push_back(s);
        } else {
            out.failures.push_back({s, errors[static_cast<std::size_t>(s)]});
        }
    }
    if (2 * out.failures.size() > static_cast<std::size_t>(n_splits)) {
        const std::string first = out.failures.front().message;
        throw NumericalError(std::to_string(out.failures.size()) + " of " + std::to_string(n_splits) +
                             " sample splits failed; first failure: " + first);
    }
    std::vector<double> thetas, sigma2s;
    for (const auto& r : out.splits) {
        thetas.push_back(r.theta);
        sigma2s.push_back(r.sigma2);
    }
    const SplitAggregate agg = aggregate_splits(thetas, sigma2s, out.n);
    out.theta_mean = agg.theta_mean;
    out.theta_median = agg.theta_median;
    out.sigma2_mean = agg.sigma2_mean;
    out.sigma2_median = agg.sigma2_median;
    const auto nn = static_cast<double>(out.n);
    out.se_mean = std::sqrt(agg.sigma2_mean / nn);
    out.se_median = std::sqrt(agg.sigma2_median / nn);
    return out;
}

}  // namespace dml

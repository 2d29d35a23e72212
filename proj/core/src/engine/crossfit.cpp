#include "dml/engine/crossfit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <string>

#include "dml/common/error.hpp"
#include "dml/common/rng.hpp"
#include "dml/engine/solve.hpp"
#include "dml/learners/design_matrix.hpp"

namespace dml {

namespace {

// Stable stream ids for the per-(fold, nuisance) seeds.
constexpr std::array<const char*, 12> kFieldIds = {"l", "m", "r", "g", "g1", "g0", "mu1", "mu0", "m1", "m0", "p", "g_po"};

std::uint64_t field_id(const std::string& field) {
    for (std::size_t i = 0; i < kFieldIds.size(); ++i)
        if (field == kFieldIds[i]) return i;
    return kFieldIds.size();
}

struct Job {
    std::string field;    // output nuisance field
    std::string learner;  // learner key
    Eigen::VectorXd target;
    std::optional<Eigen::VectorXd> group;  // subgroup variable (D or Z)
    double group_value = 0.0;
    std::string group_label;
    bool clip = false;
};

const LearnerSpec& lookup(const LearnerMap& learners, const std::string& key) {
    if (auto it = learners.find(key); it != learners.end()) return it->second;
    if (key == "g")
        if (auto it = learners.find("l"); it != learners.end()) return it->second;
    if (auto it = learners.find("default"); it != learners.end()) return it->second;
    throw ConfigError("no learner configured for nuisance '" + key + "' (and no 'default')");
}

void run_job(const Dataset& data, const LearnerMap& learners, const Job& job, const FoldPartition& partition,
             const CrossFitOptions& opts, NuisancePredictions& out, std::vector<FoldDiagnostics>& diag) {
    const LearnerSpec& spec = lookup(learners, job.learner);
    Eigen::VectorXd pred = Eigen::VectorXd::Constant(data.n(), std::numeric_limits<double>::quiet_NaN());
    for (int k = 0; k < partition.k(); ++k) {
        std::vector<int> train = partition.complement(k);
        if (job.group) {
            std::erase_if(train, [&](int i) { return (*job.group)(i) != job.group_value; });
            if (train.empty())
                throw DataError("fold " + std::to_string(k + 1) + ": subgroup " + job.group_label +
                                " of the training complement is empty (nuisance '" + job.field + "')");
        }
        const auto test = partition.fold(k);
        const FittedModel model = fit(spec, select_rows(data.x, train), select_rows(job.target, train),
                                      derive_seed(opts.seed, {static_cast<std::uint64_t>(k), field_id(job.field)}));
        Eigen::VectorXd fold_pred = model.predict(select_rows(data.x, test));
        if (job.clip) fold_pred = clip_probability(fold_pred, opts.trim_eps);

        double sse = 0.0;
        int count = 0;
        for (std::size_t i = 0; i < test.size(); ++i) {
            const int row = test[i];
            pred(row) = fold_pred(static_cast<Eigen::Index>(i));
            if (job.group && (*job.group)(row) != job.group_value) continue;
            const double e = job.target(row) - pred(row);
            sse += e * e;
            ++count;
        }
        diag[static_cast<std::size_t>(k)][job.field] = count > 0 ? sse / count : std::numeric_limits<double>::quiet_NaN();
    }
    out.set(job.field, std::move(pred));
}

bool needs(const std::set<std::string>& fields, const char* f) { return fields.count(f) == 1; }

}  // namespace

std::vector<std::string> required_learners(ScoreKind score) {
    switch (score) {
        case ScoreKind::plr_partialling_out: return {"l", "m"};
        case ScoreKind::plr_orthogonal:
        case ScoreKind::naive_plr: return {"l", "m", "g"};
        case ScoreKind::pliv_partialling_out: return {"l", "m", "r"};
        case ScoreKind::pliv_orthogonal: return {"l", "m", "r", "g"};
        case ScoreKind::ate:
        case ScoreKind::atte: return {"g", "m"};
        case ScoreKind::late: return {"mu", "m", "p"};
    }
    return {};
}

CrossFitResult fit_nuisance_crossfit(const Dataset& data, const LearnerMap& learners,
                                     const std::vector<ScoreKind>& scores, const FoldPartition& partition,
                                     const CrossFitOptions& opts) {
    data.validate();
    if (partition.n() != data.n()) throw std::invalid_argument("fold partition size does not match the dataset");
    if (scores.empty()) throw std::invalid_argument("fit_nuisance_crossfit: no score requested");
    std::set<std::string> fields;
    bool want_g = false;
    for (ScoreKind s : scores) {
        if (model_of(s) != data.model)
            throw ConfigError("score " + std::string(to_string(s)) + " does not belong to model " +
                              std::string(to_string(data.model)));
        for (const auto& f : required_nuisances(s)) fields.insert(f);
        if (s == ScoreKind::plr_orthogonal || s == ScoreKind::naive_plr || s == ScoreKind::pliv_orthogonal) {
            want_g = true;
            // theta_init comes from the partialling-out fit.
            fields.insert(nuisance::ell);
            fields.insert(nuisance::m);
            if (data.model == ModelKind::pliv) fields.insert(nuisance::r);
        }
    }
    if (opts.trim_eps <= 0.0 || opts.trim_eps >= 0.5) throw ConfigError("trim_eps must lie in (0, 0.5)");

    CrossFitResult result;
    result.fold_mse.resize(static_cast<std::size_t>(partition.k()));
    result.theta_init = std::numeric_limits<double>::quiet_NaN();
    std::vector<Job> jobs;
    switch (data.model) {
        case ModelKind::plr:
            if (needs(fields, nuisance::ell)) jobs.push_back({nuisance::ell, "l", data.y, std::nullopt, 0, "", false});
            if (needs(fields, nuisance::m)) jobs.push_back({nuisance::m, "m", data.d, std::nullopt, 0, "", false});
            break;
        case ModelKind::pliv:
            if (needs(fields, nuisance::ell)) jobs.push_back({nuisance::ell, "l", data.y, std::nullopt, 0, "", false});
            if (needs(fields, nuisance::m)) jobs.push_back({nuisance::m, "m", *data.z, std::nullopt, 0, "", false});
            if (needs(fields, nuisance::r)) jobs.push_back({nuisance::r, "r", data.d, std::nullopt, 0, "", false});
            break;
        case ModelKind::irm:
            if (needs(fields, nuisance::g1)) jobs.push_back({nuisance::g1, "g", data.y, data.d, 1.0, "D = 1", false});
            if (needs(fields, nuisance::g0)) jobs.push_back({nuisance::g0, "g", data.y, data.d, 0.0, "D = 0", false});
            if (needs(fields, nuisance::m)) jobs.push_back({nuisance::m, "m", data.d, std::nullopt, 0, "", true});
            break;
        case ModelKind::iivm:
            if (needs(fields, nuisance::mu1)) jobs.push_back({nuisance::mu1, "mu", data.y, *data.z, 1.0, "Z = 1", false});
            if (needs(fields, nuisance::mu0)) jobs.push_back({nuisance::mu0, "mu", data.y, *data.z, 0.0, "Z = 0", false});
            if (needs(fields, nuisance::m1)) jobs.push_back({nuisance::m1, "m", data.d, *data.z, 1.0, "Z = 1", true});
            if (needs(fields, nuisance::m0)) jobs.push_back({nuisance::m0, "m", data.d, *data.z, 0.0, "Z = 0", true});
            if (needs(fields, nuisance::p)) jobs.push_back({nuisance::p, "p", *data.z, std::nullopt, 0, "", true});
            break;
    }
    for (const auto& job : jobs) run_job(data, learners, job, partition, opts, result.predictions, result.fold_mse);

    if (data.model == ModelKind::irm && needs(fields, nuisance::p)) {
        // ATTE: treated share estimated on each fold's complement.
        Eigen::VectorXd p(data.n());
        for (int k = 0; k < partition.k(); ++k) {
            const std::vector<int> train = partition.complement(k);
            double share = 0.0;
            for (int i : train) share += data.d(i);
            share /= static_cast<double>(train.size());
            for (int i : partition.fold(k)) p(i) = share;
        }
        result.predictions.set(nuisance::p, std::move(p));
    }

    if (want_g) {
        const ScoreValues prelim = data.model == ModelKind::plr ? plr_partial_score(data, result.predictions)
                                                                : pliv_partial_score(data, result.predictions);
        result.theta_init = solve_dml2(prelim, partition);
        const Eigen::VectorXd target = data.y - result.theta_init * data.d;
        run_job(data, learners, {nuisance::g, "g", target, std::nullopt, 0, "", false}, partition, opts,
                result.predictions, result.fold_mse);
    }
    return result;
}

}  // namespace dml

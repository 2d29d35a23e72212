#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dml/engine/crossfit.hpp"
#include "dml/engine/solve.hpp"
#include "dml/scores/dataset.hpp"
#include "dml/scores/scores.hpp"

namespace dml::cli {

struct ColumnRoles {
    std::string y;
    std::string d;
    std::optional<std::string> z;
    std::vector<std::string> x;
};

/// Everything `dml estimate` needs besides the data file.
///
/// JSON schema (all keys optional except columns.y and columns.d):
///   model      "plr" | "pliv" | "irm" | "iivm"                 (plr)
///   score      "default" | "partialling-out" | "atte" | "naive" (default)
///   learners   { key: learner }, keys as in LearnerMap         ({"default": forest})
///   K, S, seed, alpha, trim_eps                                (5, 100, 0, 0.05, 0.01)
///   method     "dml1" | "dml2"                                 (dml2)
///   columns    { "y": .., "d": .., "z": .., "x": [..] }
///   expand_degree2, late_mu0_in_control_term, threads          (false, true, 1)
/// A learner is a kind name or an object {"kind": .., "grid": [..], "members": [..],
/// "cv_folds": .., <hyperparameter>: number, ...}.
struct RunConfig {
    ModelKind model = ModelKind::plr;
    std::string score = "default";
    LearnerMap learners{{"default", LearnerSpec{LearnerKind::forest, {}, {}, {}, 5}}};
    int folds = 5;
    int splits = 100;
    std::uint64_t seed = 0;
    double alpha = 0.05;
    double trim_eps = 0.01;
    DmlMethod method = DmlMethod::dml2;
    ColumnRoles columns;
    bool expand_degree2 = false;
    bool late_mu0_in_control_term = true;
    unsigned threads = 1;

    /// default: plr and pliv use the g-based orthogonal score, irm ATE, iivm LATE.
    ScoreKind score_kind() const;
    /// Throws ConfigError naming the offending key.
    void validate() const;
};

ScoreKind resolve_score(ModelKind model, const std::string& score);

LearnerSpec learner_from_json(const nlohmann::json& j);
nlohmann::json learner_to_json(const LearnerSpec& spec);

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& config);
RunConfig load_run_config(const std::string& path);

/// 64-bit FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace dml::cli

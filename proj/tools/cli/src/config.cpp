#include "dml_cli/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

#include "dml/common/error.hpp"

namespace dml::cli {

using nlohmann::json;

namespace {

const std::set<std::string> kLearnerKeys = {"l", "m", "r", "g", "mu", "p", "default"};

template <class T>
T get_as(const json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

int get_int(const json& j, const std::string& key) {
    const json& v = j.at(key);
    if (!v.is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
    return v.get<int>();
}

Hyperparameters hyper_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    Hyperparameters h;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_number()) throw ConfigError(where + ": hyperparameter '" + key + "' must be a number");
        h[key] = value.get<double>();
    }
    return h;
}

}  // namespace

ScoreKind resolve_score(ModelKind model, const std::string& score) {
    auto bad = [&] {
        return ConfigError("score '" + score + "' is not available for model " + std::string(to_string(model)));
    };
    switch (model) {
        case ModelKind::plr:
            if (score == "default") return ScoreKind::plr_orthogonal;
            if (score == "partialling-out") return ScoreKind::plr_partialling_out;
            if (score == "naive") return ScoreKind::naive_plr;
            break;
        case ModelKind::pliv:
            if (score == "default") return ScoreKind::pliv_orthogonal;
            if (score == "partialling-out") return ScoreKind::pliv_partialling_out;
            break;
        case ModelKind::irm:
            if (score == "default") return ScoreKind::ate;
            if (score == "atte") return ScoreKind::atte;
            break;
        case ModelKind::iivm:
            if (score == "default") return ScoreKind::late;
            break;
    }
    throw bad();
}

ScoreKind RunConfig::score_kind() const { return resolve_score(model, score); }

void RunConfig::validate() const {
    score_kind();
    if (folds < 2) throw ConfigError("K must be at least 2");
    if (splits < 1) throw ConfigError("S must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (!(trim_eps > 0.0 && trim_eps < 0.5)) throw ConfigError("trim_eps must lie in (0, 0.5)");
    if (threads < 1) throw ConfigError("threads must be at least 1");
    if (columns.y.empty()) throw ConfigError("columns.y is required");
    if (columns.d.empty()) throw ConfigError("columns.d is required");
    const bool needs_z = model == ModelKind::pliv || model == ModelKind::iivm;
    if (needs_z && !columns.z) throw ConfigError(std::string(to_string(model)) + " requires columns.z");
    if (!needs_z && columns.z) throw ConfigError(std::string(to_string(model)) + " takes no instrument (columns.z)");
    std::set<std::string> seen;
    auto once = [&](const std::string& c) {
        if (!seen.insert(c).second) throw ConfigError("column '" + c + "' is assigned more than one role");
    };
    once(columns.y);
    once(columns.d);
    if (columns.z) once(*columns.z);
    for (const auto& c : columns.x) once(c);
    for (const auto& [key, spec] : learners) {
        if (kLearnerKeys.count(key) == 0) throw ConfigError("unknown learner key '" + key + "'");
        spec.validate();
    }
    for (const auto& key : required_learners(score_kind())) {
        const bool found = learners.count(key) || learners.count("default") || (key == "g" && learners.count("l"));
        if (!found) throw ConfigError("no learner configured for '" + key + "' and no 'default'");
    }
}

LearnerSpec learner_from_json(const json& j) {
    LearnerSpec spec;
    if (j.is_string()) {
        spec.kind = parse_learner_kind(j.get<std::string>());
        return spec;
    }
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw ConfigError("a learner must be a kind name or an object with a 'kind'");
    spec.kind = parse_learner_kind(j.at("kind").get<std::string>());
    for (const auto& [key, value] : j.items()) {
        if (key == "kind") continue;
        if (key == "cv_folds") {
            spec.cv_folds = get_int(j, key);
        } else if (key == "grid") {
            if (!value.is_array()) throw ConfigError("learner grid must be an array");
            for (const auto& point : value) spec.grid.push_back(hyper_from_json(point, "grid point"));
        } else if (key == "members") {
            if (!value.is_array()) throw ConfigError("ensemble members must be an array");
            for (const auto& m : value) spec.members.push_back(learner_from_json(m));
        } else if (value.is_number()) {
            spec.hyper[key] = value.get<double>();
        } else {
            throw ConfigError("learner key '" + key + "' must be a number");
        }
    }
    spec.validate();
    return spec;
}

json learner_to_json(const LearnerSpec& spec) {
    json j;
    j["kind"] = std::string(to_string(spec.kind));
    for (const auto& [key, value] : spec.hyper) j[key] = value;
    if (!spec.grid.empty()) {
        j["grid"] = json::array();
        for (const auto& point : spec.grid) j["grid"].push_back(json(point));
    }
    if (!spec.members.empty()) {
        j["members"] = json::array();
        for (const auto& m : spec.members) j["members"].push_back(learner_to_json(m));
    }
    j["cv_folds"] = spec.cv_folds;
    return j;
}

RunConfig run_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> known = {"model", "score", "learners", "K", "S", "seed", "alpha", "trim_eps",
                                                "method", "columns", "expand_degree2", "late_mu0_in_control_term",
                                                "threads"};
    for (const auto& [key, value] : j.items())
        if (known.count(key) == 0) throw ConfigError("unknown config key '" + key + "'");

    RunConfig c;
    if (j.contains("model")) c.model = parse_model_kind(get_as<std::string>(j, "model"));
    if (j.contains("score")) c.score = get_as<std::string>(j, "score");
    if (j.contains("learners")) {
        const json& l = j.at("learners");
        if (!l.is_object()) throw ConfigError("learners must be an object");
        c.learners.clear();
        for (const auto& [key, value] : l.items()) c.learners[key] = learner_from_json(value);
    }
    if (j.contains("K")) c.folds = get_int(j, "K");
    if (j.contains("S")) c.splits = get_int(j, "S");
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("alpha")) c.alpha = get_as<double>(j, "alpha");
    if (j.contains("trim_eps")) c.trim_eps = get_as<double>(j, "trim_eps");
    if (j.contains("method")) c.method = parse_dml_method(get_as<std::string>(j, "method"));
    if (j.contains("expand_degree2")) c.expand_degree2 = get_as<bool>(j, "expand_degree2");
    if (j.contains("late_mu0_in_control_term")) c.late_mu0_in_control_term = get_as<bool>(j, "late_mu0_in_control_term");
    if (j.contains("threads")) {
        const int t = get_int(j, "threads");
        if (t < 1) throw ConfigError("threads must be at least 1");
        c.threads = static_cast<unsigned>(t);
    }
    if (j.contains("columns")) {
        const json& cols = j.at("columns");
        if (!cols.is_object()) throw ConfigError("columns must be an object");
        for (const auto& [key, value] : cols.items())
            if (key != "y" && key != "d" && key != "z" && key != "x") throw ConfigError("unknown column role '" + key + "'");
        if (cols.contains("y")) c.columns.y = get_as<std::string>(cols, "y");
        if (cols.contains("d")) c.columns.d = get_as<std::string>(cols, "d");
        if (cols.contains("z") && !cols.at("z").is_null()) c.columns.z = get_as<std::string>(cols, "z");
        if (cols.contains("x")) c.columns.x = get_as<std::vector<std::string>>(cols, "x");
    }
    return c;
}

json run_config_to_json(const RunConfig& c) {
    json j;
    j["model"] = std::string(to_string(c.model));
    j["score"] = c.score;
    j["learners"] = json::object();
    for (const auto& [key, spec] : c.learners) j["learners"][key] = learner_to_json(spec);
    j["K"] = c.folds;
    j["S"] = c.splits;
    j["seed"] = c.seed;
    j["alpha"] = c.alpha;
    j["trim_eps"] = c.trim_eps;
    j["method"] = std::string(to_string(c.method));
    j["columns"] = {{"y", c.columns.y}, {"d", c.columns.d}, {"x", c.columns.x}};
    if (c.columns.z) j["columns"]["z"] = *c.columns.z;
    j["expand_degree2"] = c.expand_degree2;
    j["late_mu0_in_control_term"] = c.late_mu0_in_control_term;
    j["threads"] = c.threads;
    return j;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return run_config_from_json(j);
}

std::string config_hash(const RunConfig& config) {
    json j = run_config_to_json(config);
    j.erase("threads");  // results do not depend on the thread count
    const std::string s = j.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace dml::cli

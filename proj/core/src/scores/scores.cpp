#include "dml/scores/scores.hpp"

#include <cmath>

#include "dml/common/error.hpp"
#include "dml/learners/learner.hpp"

namespace dml {

namespace {

using Eigen::ArrayXd;

const Eigen::VectorXd& field(const Dataset& data, const NuisancePredictions& nuis, const char* name) {
    const Eigen::VectorXd& v = nuis.get(name);
    if (v.size() != data.n())
        throw std::invalid_argument(std::string("nuisance field '") + name + "' has the wrong length");
    return v;
}

void require_model(const Dataset& data, ModelKind expected, std::string_view score) {
    if (data.model != expected)
        throw ConfigError(std::string(score) + " score requires model " + std::string(to_string(expected)) + ", got " +
                          std::string(to_string(data.model)));
}

const Eigen::VectorXd& instrument(const Dataset& data) {
    if (!data.z) throw DataError("score requires an instrument column Z");
    return *data.z;
}

ScoreValues make(ArrayXd a, ArrayXd b) {
    ScoreValues s{std::move(a).matrix(), std::move(b).matrix()};
    if (!s.psi_a.allFinite() || !s.psi_b.allFinite()) throw NumericalError("score values are not finite");
    return s;
}

}  // namespace

std::string_view to_string(ScoreKind kind) {
    switch (kind) {
        case ScoreKind::plr_orthogonal: return "plr";
        case ScoreKind::plr_partialling_out: return "plr-partialling-out";
        case ScoreKind::pliv_orthogonal: return "pliv";
        case ScoreKind::pliv_partialling_out: return "pliv-partialling-out";
        case ScoreKind::ate: return "ate";
        case ScoreKind::atte: return "atte";
        case ScoreKind::late: return "late";
        case ScoreKind::naive_plr: return "naive-plr";
    }
    return "unknown";
}

ScoreKind parse_score_kind(std::string_view name) {
    for (auto kind : {ScoreKind::plr_orthogonal, ScoreKind::plr_partialling_out, ScoreKind::pliv_orthogonal,
                      ScoreKind::pliv_partialling_out, ScoreKind::ate, ScoreKind::atte, ScoreKind::late,
                      ScoreKind::naive_plr})
        if (to_string(kind) == name) return kind;
    throw ConfigError("unknown score '" + std::string(name) + "'");
}

ModelKind model_of(ScoreKind kind) {
    switch (kind) {
        case ScoreKind::plr_orthogonal:
        case ScoreKind::plr_partialling_out:
        case ScoreKind::naive_plr: return ModelKind::plr;
        case ScoreKind::pliv_orthogonal:
        case ScoreKind::pliv_partialling_out: return ModelKind::pliv;
        case ScoreKind::ate:
        case ScoreKind::atte: return ModelKind::irm;
        case ScoreKind::late: return ModelKind::iivm;
    }
    return ModelKind::plr;
}

std::vector<std::string> required_nuisances(ScoreKind kind) {
    using namespace nuisance;
    switch (kind) {
        case ScoreKind::plr_orthogonal: return {g, m};
        case ScoreKind::plr_partialling_out: return {ell, m};
        case ScoreKind::pliv_orthogonal: return {g, m};
        case ScoreKind::pliv_partialling_out: return {ell, m, r};
        case ScoreKind::ate: return {g1, g0, m};
        case ScoreKind::atte: return {g0, m, p};
        case ScoreKind::late: return {mu1, mu0, m1, m0, p};
        case ScoreKind::naive_plr: return {g};
    }
    return {};
}

ScoreValues plr_score(const Dataset& data, const NuisancePredictions& nuis) {
    require_model(data, ModelKind::plr, "plr");
    const ArrayXd d = data.d.array();
    const ArrayXd v = d - field(data, nuis, nuisance::m).array();
    return make(-d * v, (data.y.array() - field(data, nuis, nuisance::g).array()) * v);
}

ScoreValues plr_partial_score(const Dataset& data, const NuisancePredictions& nuis) {
    require_model(data, ModelKind::plr, "plr partialling-out");
    const ArrayXd v = data.d.array() - field(data, nuis, nuisance::m).array();
    return make(-v.square(), (data.y.array() - field(data, nuis, nuisance::ell).array()) * v);
}

ScoreValues pliv_score(const Dataset& data, const NuisancePredictions& nuis) {
    require_model(data, ModelKind::pliv, "pliv");
    const ArrayXd zres = instrument(data).array() - field(data, nuis, nuisance::m).array();
    return make(-data.d.array() * zres, (data.y.array() - field(data, nuis, nuisance::g).array()) * zres);
}

ScoreValues pliv_partial_score(const Dataset& data, const NuisancePredictions& nuis) {
    require_model(data, ModelKind::pliv, "pliv partialling-out");
    const ArrayXd zres = instrument(data).array() - field(data, nuis, nuisance::m).array();
    const ArrayXd dres = data.d.array() - field(data, nuis, nuisance::r).array();
    return make(-dres * zres, (data.y.array() - field(data, nuis, nuisance::ell).array()) * zres);
}

ScoreValues ate_score(const Dataset& data, const NuisancePredictions& nuis, double trim_eps) {
    require_model(data, ModelKind::irm, "ate");
    if (!is_binary(data.d)) throw DataError("ate score requires a binary treatment");
    const ArrayXd d = data.d.array();
    const ArrayXd y = data.y.array();
    const ArrayXd g1 = field(data, nuis, nuisance::g1).array();
    const ArrayXd g0 = field(data, nuis, nuisance::g0).array();
    const ArrayXd m = clip_probability(field(data, nuis, nuisance::m), trim_eps).array();
    ArrayXd b = g1 - g0 + d * (y - g1) / m - (1.0 - d) * (y - g0) / (1.0 - m);
    return make(ArrayXd::Constant(data.n(), -1.0), std::move(b));
}

ScoreValues atte_score(const Dataset& data, const NuisancePredictions& nuis, double trim_eps) {
    require_model(data, ModelKind::irm, "atte");
    if (!is_binary(data.d)) throw DataError("atte score requires a binary treatment");
    const ArrayXd p = field(data, nuis, nuisance::p).array();
    if (!((p > 0.0) && (p < 1.0)).all()) throw NumericalError("atte: treated share p-hat must lie in (0, 1)");
    const ArrayXd d = data.d.array();
    const ArrayXd res = data.y.array() - field(data, nuis, nuisance::g0).array();
    const ArrayXd m = clip_probability(field(data, nuis, nuisance::m), trim_eps).array();
    ArrayXd b = d * res / p - m * (1.0 - d) * res / (p * (1.0 - m));
    return make(-d / p, std::move(b));
}

ScoreValues late_score(const Dataset& data, const NuisancePredictions& nuis, const ScoreOptions& opts) {
    require_model(data, ModelKind::iivm, "late");
    const Eigen::VectorXd& zv = instrument(data);
    if (!is_binary(zv)) throw DataError("late score requires a binary instrument");
    const ArrayXd z = zv.array();
    const ArrayXd y = data.y.array();
    const ArrayXd d = data.d.array();
    const ArrayXd mu1 = field(data, nuis, nuisance::mu1).array();
    const ArrayXd mu0 = field(data, nuis, nuisance::mu0).array();
    const ArrayXd m1 = field(data, nuis, nuisance::m1).array();
    const ArrayXd m0 = field(data, nuis, nuisance::m0).array();
    const ArrayXd p = clip_probability(field(data, nuis, nuisance::p), opts.trim_eps).array();
    const ArrayXd& mu_control = opts.late_mu0_in_control_term ? mu0 : mu1;
    ArrayXd b = mu1 - mu0 + z * (y - mu1) / p - (1.0 - z) * (y - mu_control) / (1.0 - p);
    ArrayXd a = -(m1 - m0 + z * (d - m1) / p - (1.0 - z) * (d - m0) / (1.0 - p));
    return make(std::move(a), std::move(b));
}

ScoreValues naive_plr_score(const Dataset& data, const NuisancePredictions& nuis) {
    require_model(data, ModelKind::plr, "naive plr");
    const ArrayXd d = data.d.array();
    return make(-d.square(), (data.y.array() - field(data, nuis, nuisance::g).array()) * d);
}

ScoreValues evaluate_score(ScoreKind kind, const Dataset& data, const NuisancePredictions& nuis, const ScoreOptions& opts) {
    switch (kind) {
        case ScoreKind::plr_orthogonal: return plr_score(data, nuis);
        case ScoreKind::plr_partialling_out: return plr_partial_score(data, nuis);
        case ScoreKind::pliv_orthogonal: return pliv_score(data, nuis);
        case ScoreKind::pliv_partialling_out: return pliv_partial_score(data, nuis);
        case ScoreKind::ate: return ate_score(data, nuis, opts.trim_eps);
        case ScoreKind::atte: return atte_score(data, nuis, opts.trim_eps);
        case ScoreKind::late: return late_score(data, nuis, opts);
        case ScoreKind::naive_plr: return naive_plr_score(data, nuis);
    }
    throw std::logic_error("evaluate_score: unknown score kind");
}

double solve_linear_score(const ScoreValues& scores) {
    const double ja = scores.psi_a.mean();
    if (!(std::abs(ja) > 1e-12)) throw NumericalError("weak identification: mean psi_a is (numerically) zero");
    return -scores.psi_b.mean() / ja;
}

}  // namespace dml

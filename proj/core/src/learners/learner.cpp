#include "dml/learners/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "dml/common/error.hpp"
#include "dml/common/folds.hpp"
#include "dml/common/rng.hpp"

namespace dml {

namespace {

constexpr double kUnlimited = std::numeric_limits<double>::infinity();

const std::set<std::string>& allowed_keys(LearnerKind kind) {
    static const std::map<LearnerKind, std::set<std::string>> keys = {
        {LearnerKind::constant_mean, {}},
        {LearnerKind::ridge, {"lambda"}},
        {LearnerKind::lasso, {"lambda", "plugin", "plugin_c"}},
        {LearnerKind::tree, {"max_depth", "min_leaf"}},
        {LearnerKind::forest, {"n_trees", "features_per_split", "min_leaf", "max_depth", "bootstrap"}},
        {LearnerKind::boost, {"n_rounds", "learning_rate", "max_depth", "min_leaf"}},
        {LearnerKind::ensemble, {}},
    };
    return keys.at(kind);
}

double get(const Hyperparameters& h, const std::string& key, double fallback) {
    auto it = h.find(key);
    return it == h.end() ? fallback : it->second;
}

bool is_integer(double v) { return std::isfinite(v) && v == std::floor(v); }

void require(bool ok, LearnerKind kind, const std::string& message) {
    if (!ok) throw ConfigError(std::string(to_string(kind)) + ": " + message);
}

void validate_params(LearnerKind kind, const Hyperparameters& h) {
    const auto& keys = allowed_keys(kind);
    for (const auto& [key, value] : h) {
        require(keys.count(key) == 1, kind, "unknown hyperparameter '" + key + "'");
        require(!std::isnan(value), kind, "hyperparameter '" + key + "' is NaN");
    }
    auto check_int = [&](const std::string& key, double lo) {
        if (h.count(key)) {
            const double v = h.at(key);
            require(is_integer(v) && v >= lo, kind, key + " must be an integer >= " + std::to_string(static_cast<int>(lo)));
        }
    };
    switch (kind) {
        case LearnerKind::ridge:
        case LearnerKind::lasso:
            if (h.count("lambda")) require(h.at("lambda") >= 0.0 && std::isfinite(h.at("lambda")), kind, "lambda must be >= 0");
            if (h.count("plugin_c")) require(h.at("plugin_c") > 0.0, kind, "plugin_c must be > 0");
            break;
        case LearnerKind::tree:
            check_int("max_depth", -1);
            check_int("min_leaf", 1);
            break;
        case LearnerKind::forest:
            check_int("n_trees", 1);
            check_int("features_per_split", 0);
            check_int("min_leaf", 1);
            check_int("max_depth", -1);
            break;
        case LearnerKind::boost:
            check_int("n_rounds", 0);
            check_int("max_depth", -1);
            check_int("min_leaf", 1);
            if (h.count("learning_rate"))
                require(h.at("learning_rate") > 0.0 && h.at("learning_rate") <= 1.0, kind, "learning_rate must lie in (0, 1]");
            break;
        default:
            break;
    }
}

Hyperparameters merged(const Hyperparameters& base, const Hyperparameters& over) {
    Hyperparameters out = base;
    for (const auto& [k, v] : over) out[k] = v;
    return out;
}

// Larger key (lexicographically) = stronger regularization.
std::vector<double> strength_key(LearnerKind kind, const Hyperparameters& h) {
    auto depth = [&](double fallback) {
        const double d = get(h, "max_depth", fallback);
        return d < 0 ? kUnlimited : d;
    };
    switch (kind) {
        case LearnerKind::ridge:
        case LearnerKind::lasso:
            return {get(h, "lambda", 0.0)};
        case LearnerKind::tree:
            return {-depth(-1), get(h, "min_leaf", 5)};
        case LearnerKind::forest:
            return {get(h, "min_leaf", 5), -depth(-1), -get(h, "features_per_split", 0)};
        case LearnerKind::boost:
            return {-get(h, "n_rounds", 100), -get(h, "learning_rate", 0.1), -depth(3), get(h, "min_leaf", 5)};
        default:
            return {};
    }
}

bool lasso_needs_path(const LearnerSpec& spec) {
    return spec.kind == LearnerKind::lasso && spec.grid.empty() && !spec.hyper.count("lambda") &&
           get(spec.hyper, "plugin", 0.0) == 0.0;
}

FittedModel fit_fixed(LearnerKind kind, const Hyperparameters& h, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                      std::uint64_t seed) {
    if (y.size() != x.rows()) throw DataError("target length does not match design rows");
    if (y.size() == 0) throw DataError("cannot fit a learner on empty data");
    if (!y.allFinite()) throw DataError("target contains non-finite values");
    FittedModel out;
    out.chosen = h;
    out.n_features = static_cast<int>(x.cols());
    if (kind == LearnerKind::constant_mean) {
        out.model = ConstantModel{y.mean()};
        return out;
    }
    const DesignMatrix design(x);
    switch (kind) {
        case LearnerKind::ridge:
            out.model = fit_ridge(design, y, get(h, "lambda", 1.0));
            break;
        case LearnerKind::lasso: {
            double lambda = get(h, "lambda", std::numeric_limits<double>::quiet_NaN());
            if (get(h, "plugin", 0.0) != 0.0) {
                lambda = lasso_plugin_lambda(design, y, get(h, "plugin_c", 1.1));
                out.chosen["lambda"] = lambda;
            }
            if (std::isnan(lambda)) throw ConfigError("lasso: lambda missing");
            out.model = fit_lasso(design, y, lambda);
            break;
        }
        case LearnerKind::tree:
            out.model = fit_tree(design, y, static_cast<int>(get(h, "max_depth", -1)), static_cast<int>(get(h, "min_leaf", 5)));
            break;
        case LearnerKind::forest: {
            ForestOptions opts;
            opts.n_trees = static_cast<int>(get(h, "n_trees", 500));
            opts.features_per_split = static_cast<int>(get(h, "features_per_split", 0));
            opts.min_leaf = static_cast<int>(get(h, "min_leaf", 5));
            opts.max_depth = static_cast<int>(get(h, "max_depth", -1));
            opts.bootstrap = get(h, "bootstrap", 1.0) != 0.0;
            opts.seed = seed;
            out.model = fit_forest(design, y, opts);
            break;
        }
        case LearnerKind::boost:
            out.model = fit_boost(design, y, static_cast<int>(get(h, "n_rounds", 100)), get(h, "learning_rate", 0.1),
                                  static_cast<int>(get(h, "max_depth", 3)), static_cast<int>(get(h, "min_leaf", 5)));
            break;
        default:
            throw std::logic_error("fit_fixed: unexpected learner kind");
    }
    return out;
}

// Lasso tuned along its own lambda path: one warm-started path per fold.
CvResult lasso_path_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int cv_folds, std::uint64_t seed) {
    const std::vector<double> grid = lasso_lambda_grid(lasso_lambda_max(DesignMatrix(x), y));
    const FoldPartition folds = make_folds(static_cast<int>(y.size()), cv_folds, seed);
    std::vector<double> sse(grid.size(), 0.0);
    for (int k = 0; k < folds.k(); ++k) {
        const std::vector<int> train = folds.complement(k);
        const auto test = folds.fold(k);
        const Eigen::MatrixXd x_test = select_rows(x, test);
        const Eigen::VectorXd y_test = select_rows(y, test);
        const auto path = fit_lasso_path(DesignMatrix(select_rows(x, train)), select_rows(y, train), grid);
        for (std::size_t g = 0; g < grid.size(); ++g) sse[g] += (y_test - path[g].predict(x_test)).squaredNorm();
    }
    CvResult result;
    for (std::size_t g = 0; g < grid.size(); ++g)
        result.table.push_back({{{"lambda", grid[g]}}, sse[g] / static_cast<double>(y.size())});
    return result;
}

void pick_best(LearnerKind kind, CvResult& result) {
    double best_mse = std::numeric_limits<double>::infinity();
    for (const auto& e : result.table) best_mse = std::min(best_mse, e.mse);
    if (!std::isfinite(best_mse)) throw NumericalError("cross-validation produced no finite error");
    const CvEntry* best = nullptr;
    for (const auto& e : result.table) {
        if (e.mse > best_mse * (1.0 + 1e-12)) continue;
        if (best == nullptr || strength_key(kind, e.params) > strength_key(kind, best->params)) best = &e;
    }
    result.best = best->params;
}

}  // namespace

std::string_view to_string(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::constant_mean: return "constant_mean";
        case LearnerKind::ridge: return "ridge";
        case LearnerKind::lasso: return "lasso";
        case LearnerKind::tree: return "tree";
        case LearnerKind::forest: return "forest";
        case LearnerKind::boost: return "boost";
        case LearnerKind::ensemble: return "ensemble";
    }
    return "unknown";
}

LearnerKind parse_learner_kind(std::string_view name) {
    for (auto kind : {LearnerKind::constant_mean, LearnerKind::ridge, LearnerKind::lasso, LearnerKind::tree,
                      LearnerKind::forest, LearnerKind::boost, LearnerKind::ensemble})
        if (to_string(kind) == name) return kind;
    throw ConfigError("unknown learner kind '" + std::string(name) + "'");
}

void LearnerSpec::validate() const {
    validate_params(kind, hyper);
    for (const auto& point : grid) validate_params(kind, point);
    if (!grid.empty() && kind == LearnerKind::constant_mean) throw ConfigError("constant_mean: has no hyperparameters to tune");
    if (kind == LearnerKind::ensemble) {
        if (members.empty()) throw ConfigError("ensemble: needs at least one member");
        if (!grid.empty()) throw ConfigError("ensemble: tuning grids belong to the members");
        for (const auto& m : members) m.validate();
    } else if (!members.empty()) {
        throw ConfigError(std::string(to_string(kind)) + ": only ensembles have members");
    }
    if (cv_folds < 2 && (!grid.empty() || kind == LearnerKind::ensemble || lasso_needs_path(*this)))
        throw ConfigError("cv_folds must be >= 2");
}

LearnerSpec LearnerSpec::forest(int n_trees, int min_leaf, int features_per_split, int max_depth) {
    return {LearnerKind::forest,
            {{"n_trees", n_trees}, {"min_leaf", min_leaf}, {"features_per_split", features_per_split}, {"max_depth", max_depth}},
            {},
            {},
            5};
}

LearnerSpec LearnerSpec::boost(int n_rounds, double learning_rate, int max_depth, int min_leaf) {
    return {LearnerKind::boost,
            {{"n_rounds", n_rounds}, {"learning_rate", learning_rate}, {"max_depth", max_depth}, {"min_leaf", min_leaf}},
            {},
            {},
            5};
}

LearnerSpec LearnerSpec::tree(int max_depth, int min_leaf) {
    return {LearnerKind::tree, {{"max_depth", max_depth}, {"min_leaf", min_leaf}}, {}, {}, 5};
}

LearnerSpec LearnerSpec::ensemble(std::vector<LearnerSpec> members, int cv_folds) {
    return {LearnerKind::ensemble, {}, {}, std::move(members), cv_folds};
}

Eigen::VectorXd EnsembleModel::predict(const Eigen::MatrixXd& x) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
    for (std::size_t m = 0; m < members.size(); ++m)
        if (weights(static_cast<Eigen::Index>(m)) != 0.0) out += weights(static_cast<Eigen::Index>(m)) * members[m].predict(x);
    return out;
}

Eigen::VectorXd FittedModel::predict(const Eigen::MatrixXd& x) const {
    if (x.cols() != n_features) throw DataError("predict: feature count does not match training");
    return std::visit(
        [&](const auto& m) -> Eigen::VectorXd {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ConstantModel>) {
                return Eigen::VectorXd::Constant(x.rows(), m.value);
            } else {
                return m.predict(x);
            }
        },
        model);
}

Eigen::VectorXd predict(const FittedModel& model, const Eigen::MatrixXd& x_new) { return model.predict(x_new); }

FittedModel fit(const LearnerSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::uint64_t seed) {
    spec.validate();
    if (spec.kind == LearnerKind::ensemble) {
        FittedModel out;
        out.n_features = static_cast<int>(x.cols());
        out.model = fit_ensemble(spec.members, x, y, spec.cv_folds, seed);
        return out;
    }
    if (!spec.grid.empty() || lasso_needs_path(spec)) {
        const CvResult cv = cross_validate(spec, x, y, spec.cv_folds, derive_seed(seed, {0xC0}));
        return fit_fixed(spec.kind, merged(spec.hyper, cv.best), x, y, derive_seed(seed, {0xF1}));
    }
    return fit_fixed(spec.kind, spec.hyper, x, y, seed);
}

CvResult cross_validate(const LearnerSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int cv_folds,
                        std::uint64_t seed) {
    validate_params(spec.kind, spec.hyper);
    if (cv_folds < 2) throw ConfigError("cv_folds must be >= 2");
    if (spec.kind == LearnerKind::ensemble || spec.kind == LearnerKind::constant_mean)
        throw ConfigError(std::string(to_string(spec.kind)) + ": nothing to cross-validate");
    if (y.size() != x.rows()) throw DataError("target length does not match design rows");

    CvResult result;
    if (lasso_needs_path(spec)) {
        result = lasso_path_cv(x, y, cv_folds, seed);
    } else {
        if (spec.grid.empty()) throw ConfigError("cross_validate: grid is empty");
        for (const auto& point : spec.grid) validate_params(spec.kind, point);
        const FoldPartition folds = make_folds(static_cast<int>(y.size()), cv_folds, seed);
        std::vector<std::vector<int>> train(static_cast<std::size_t>(folds.k()));
        for (int k = 0; k < folds.k(); ++k) train[static_cast<std::size_t>(k)] = folds.complement(k);
        for (const auto& point : spec.grid) {
            const Hyperparameters params = merged(spec.hyper, point);
            double sse = 0.0;
            for (int k = 0; k < folds.k(); ++k) {
                const auto& tr = train[static_cast<std::size_t>(k)];
                const auto test = folds.fold(k);
                // Same stream for every grid point, so grid order cannot matter.
                const FittedModel m = fit_fixed(spec.kind, params, select_rows(x, tr), select_rows(y, tr),
                                                derive_seed(seed, {static_cast<std::uint64_t>(k)}));
                sse += (select_rows(y, test) - m.predict(select_rows(x, test))).squaredNorm();
            }
            result.table.push_back({point, sse / static_cast<double>(y.size())});
        }
    }
    pick_best(spec.kind, result);
    return result;
}

Eigen::VectorXd out_of_fold_predictions(const LearnerSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                        int cv_folds, std::uint64_t seed) {
    const FoldPartition folds = make_folds(static_cast<int>(y.size()), cv_folds, seed);
    Eigen::VectorXd oof(y.size());
    for (int k = 0; k < folds.k(); ++k) {
        const std::vector<int> tr = folds.complement(k);
        const auto test = folds.fold(k);
        const FittedModel m = fit(spec, select_rows(x, tr), select_rows(y, tr), derive_seed(seed, {static_cast<std::uint64_t>(k)}));
        const Eigen::VectorXd pred = m.predict(select_rows(x, test));
        for (std::size_t i = 0; i < test.size(); ++i) oof(test[i]) = pred(static_cast<Eigen::Index>(i));
    }
    return oof;
}

EnsembleModel fit_ensemble(const std::vector<LearnerSpec>& specs, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           int cv_folds, std::uint64_t seed) {
    if (specs.empty()) throw ConfigError("ensemble: needs at least one member");
    if (cv_folds < 2) throw ConfigError("cv_folds must be >= 2");
    const std::uint64_t fold_seed = derive_seed(seed, {0xE5});
    std::vector<Eigen::VectorXd> oof;
    std::vector<std::size_t> ok;
    std::vector<std::string> errors;
    for (std::size_t m = 0; m < specs.size(); ++m) {
        try {
            // Shared fold seed: every member sees the same out-of-fold split.
            oof.push_back(out_of_fold_predictions(specs[m], x, y, cv_folds, fold_seed));
            ok.push_back(m);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            errors.emplace_back(e.what());
        }
    }
    if (ok.empty()) throw NumericalError("ensemble: all members failed to fit (first error: " + errors.front() + ")");

    Eigen::MatrixXd p(y.size(), static_cast<Eigen::Index>(ok.size()));
    for (std::size_t c = 0; c < ok.size(); ++c) p.col(static_cast<Eigen::Index>(c)) = oof[c];
    const Eigen::VectorXd w_ok = simplex_least_squares(p, y);

    EnsembleModel model;
    model.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(specs.size()));
    model.member_oof_mse.assign(specs.size(), std::numeric_limits<double>::infinity());
    model.members.resize(specs.size());
    for (std::size_t c = 0; c < ok.size(); ++c) {
        const std::size_t m = ok[c];
        model.weights(static_cast<Eigen::Index>(m)) = w_ok(static_cast<Eigen::Index>(c));
        model.member_oof_mse[m] = (y - oof[c]).squaredNorm() / static_cast<double>(y.size());
        model.members[m] = fit(specs[m], x, y, derive_seed(seed, {0xAF, m}));
    }
    // Failed members keep a zero-weight constant so predict() stays total.
    for (std::size_t m = 0; m < specs.size(); ++m)
        if (std::find(ok.begin(), ok.end(), m) == ok.end()) {
            model.members[m].model = ConstantModel{0.0};
            model.members[m].n_features = static_cast<int>(x.cols());
        }
    model.ensemble_oof_mse = (y - p * w_ok).squaredNorm() / static_cast<double>(y.size());
    return model;
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumsum = 0.0;
    double tau = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        cumsum += u[static_cast<std::size_t>(j)];
        const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
        if (u[static_cast<std::size_t>(j)] - t > 0.0) tau = t;
    }
    Eigen::VectorXd w = (v.array() - tau).cwiseMax(0.0);
    const double s = w.sum();
    return s > 0.0 ? Eigen::VectorXd(w / s) : Eigen::VectorXd(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

Eigen::VectorXd simplex_least_squares(const Eigen::MatrixXd& predictions, const Eigen::VectorXd& y, double tolerance) {
    const Eigen::Index m = predictions.cols();
    if (m == 0) throw std::invalid_argument("simplex_least_squares: no columns");
    if (predictions.rows() != y.size()) throw DataError("simplex_least_squares: row mismatch");
    Eigen::VectorXd w = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
    if (m == 1) return w;

    const double n = static_cast<double>(y.size());
    const Eigen::MatrixXd q = predictions.transpose() * predictions / n;
    const Eigen::VectorXd b = predictions.transpose() * y / n;
    const double lipschitz = 2.0 * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    if (!(lipschitz > 0.0)) return w;
    // Gap tolerance is relative to the scale of the objective.
    const double scale = std::max(1.0, y.squaredNorm() / n);

    // FISTA with adaptive restart on the simplex.
    Eigen::VectorXd z = w;
    double t = 1.0;
    auto objective = [&](const Eigen::VectorXd& v) { return v.dot(q * v) - 2.0 * b.dot(v); };
    double f_prev = objective(w);
    bool restarted = false;
    for (int iter = 0; iter < 1000000; ++iter) {
        const Eigen::VectorXd grad_w = 2.0 * (q * w - b);
        const double gap = grad_w.dot(w) - grad_w.minCoeff();
        if (gap <= tolerance * scale) break;
        const Eigen::VectorXd grad_z = 2.0 * (q * z - b);
        const Eigen::VectorXd w_next = project_to_simplex(z - grad_z / lipschitz);
        const double f_next = objective(w_next);
        if (f_next > f_prev) {
            if (restarted) break;  // plain projected step no longer improves: rounding floor
            z = w;
            t = 1.0;
            restarted = true;
            continue;
        }
        restarted = false;
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        z = w_next + ((t - 1.0) / t_next) * (w_next - w);
        w = w_next;
        t = t_next;
        f_prev = f_next;
    }
    return w;
}

Eigen::VectorXd clip_probability(const Eigen::VectorXd& p, double eps) {
    if (!(eps > 0.0 && eps < 0.5)) throw ConfigError("clip_probability: eps must lie in (0, 0.5)");
    return p.cwiseMax(eps).cwiseMin(1.0 - eps);
}

}  // namespace dml

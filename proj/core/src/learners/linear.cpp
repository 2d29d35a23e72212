#include "dml/learners/linear.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dml/common/error.hpp"

namespace dml {

namespace {

void check_target(const DesignMatrix& x, const Eigen::VectorXd& y) {
    if (y.size() != x.rows()) throw DataError("target length does not match design rows");
    if (!y.allFinite()) throw DataError("target contains non-finite values");
}

void check_penalty(double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("penalty must be a finite nonnegative number");
}

LinearModel empty_model(const DesignMatrix& x, const Eigen::VectorXd& y, double lambda, PenaltyKind kind) {
    LinearModel m;
    m.intercept = y.mean();
    m.coefficients = Eigen::VectorXd::Zero(x.cols());
    m.means = x.column_means();
    m.scales = x.column_scales();
    m.penalty = lambda;
    m.kind = kind;
    return m;
}

// Gram matrix and correlation vector of the standardized design, both over N.
struct Moments {
    Eigen::MatrixXd gram;
    Eigen::VectorXd corr;
};

Moments standardized_moments(const DesignMatrix& x, const Eigen::VectorXd& y) {
    const Eigen::MatrixXd xs = x.standardized();
    const double n = static_cast<double>(x.rows());
    Moments mo;
    mo.gram.noalias() = xs.transpose() * xs / n;
    Eigen::VectorXd yc = y.array() - y.mean();
    mo.corr.noalias() = xs.transpose() * yc / n;
    return mo;
}

// Cyclic coordinate descent from `beta` (modified in place); returns sweeps used.
int coordinate_descent(const Moments& mo, double lambda, Eigen::VectorXd& beta, const LassoOptions& opts) {
    const Eigen::Index k = beta.size();
    Eigen::VectorXd gb = mo.gram * beta;
    for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < k; ++j) {
            const double gjj = mo.gram(j, j);
            const double old = beta(j);
            const double z = mo.corr(j) - gb(j) + gjj * old;
            const double updated = soft_threshold(z, lambda) / gjj;
            const double delta = updated - old;
            if (delta != 0.0) {
                beta(j) = updated;
                gb.noalias() += delta * mo.gram.col(j);
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        if (max_change < opts.tolerance) return sweep;
    }
    throw NumericalError("lasso coordinate descent did not converge in " + std::to_string(opts.max_sweeps) + " sweeps");
}

void scatter(const DesignMatrix& x, const Eigen::VectorXd& reduced, Eigen::VectorXd& full) {
    const auto& kept = x.kept_columns();
    for (std::size_t c = 0; c < kept.size(); ++c) full(kept[c]) = reduced(static_cast<Eigen::Index>(c));
}

}  // namespace

Eigen::VectorXd LinearModel::predict(const Eigen::MatrixXd& x) const {
    if (x.cols() != coefficients.size()) throw DataError("predict: feature count does not match the fitted model");
    return (x * raw_coefficients()).array() + raw_intercept();
}

Eigen::VectorXd LinearModel::raw_coefficients() const {
    Eigen::VectorXd raw = Eigen::VectorXd::Zero(coefficients.size());
    for (Eigen::Index j = 0; j < coefficients.size(); ++j)
        if (scales(j) > 0.0) raw(j) = coefficients(j) / scales(j);
    return raw;
}

double LinearModel::raw_intercept() const { return intercept - raw_coefficients().dot(means); }

LinearModel fit_ridge(const DesignMatrix& x, const Eigen::VectorXd& y, double lambda) {
    check_target(x, y);
    check_penalty(lambda);
    LinearModel model = empty_model(x, y, lambda, PenaltyKind::ridge);
    if (x.kept_columns().empty()) return model;

    Moments mo = standardized_moments(x, y);
    Eigen::VectorXd beta;
    if (lambda == 0.0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(mo.gram);
        qr.setThreshold(1e-10);
        if (qr.rank() < mo.gram.rows()) throw NumericalError("rank deficiency; use lambda > 0");
        beta = qr.solve(mo.corr);
    } else {
        mo.gram.diagonal().array() += lambda;
        Eigen::LLT<Eigen::MatrixXd> llt(mo.gram);
        if (llt.info() != Eigen::Success) throw NumericalError("ridge system is not positive definite");
        beta = llt.solve(mo.corr);
    }
    scatter(x, beta, model.coefficients);
    return model;
}

LinearModel fit_lasso(const DesignMatrix& x, const Eigen::VectorXd& y, double lambda, const LassoOptions& opts) {
    const double grid[] = {lambda};
    return fit_lasso_path(x, y, grid, opts).front();
}

std::vector<LinearModel> fit_lasso_path(const DesignMatrix& x, const Eigen::VectorXd& y,
                                        std::span<const double> lambdas, const LassoOptions& opts) {
    check_target(x, y);
    std::vector<LinearModel> path;
    path.reserve(lambdas.size());
    if (x.kept_columns().empty()) {
        for (double lambda : lambdas) {
            check_penalty(lambda);
            path.push_back(empty_model(x, y, lambda, PenaltyKind::lasso));
        }
        return path;
    }
    const Moments mo = standardized_moments(x, y);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(mo.corr.size());
    for (double lambda : lambdas) {
        check_penalty(lambda);
        LinearModel model = empty_model(x, y, lambda, PenaltyKind::lasso);
        model.sweeps = coordinate_descent(mo, lambda, beta, opts);
        scatter(x, beta, model.coefficients);
        path.push_back(std::move(model));
    }
    return path;
}

double lasso_lambda_max(const DesignMatrix& x, const Eigen::VectorXd& y) {
    check_target(x, y);
    if (x.kept_columns().empty()) return 0.0;
    const Eigen::VectorXd yc = y.array() - y.mean();
    return (x.standardized().transpose() * yc).cwiseAbs().maxCoeff() / static_cast<double>(x.rows());
}

std::vector<double> lasso_lambda_grid(double lambda_max, int n_points, double ratio) {
    if (n_points < 1) throw ConfigError("lambda grid needs at least one point");
    if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("lambda grid ratio must lie in (0, 1]");
    std::vector<double> grid(static_cast<std::size_t>(n_points));
    if (n_points == 1) {
        grid[0] = lambda_max;
        return grid;
    }
    const double step = std::log(ratio) / (n_points - 1);
    for (int i = 0; i < n_points; ++i) grid[static_cast<std::size_t>(i)] = lambda_max * std::exp(step * i);
    return grid;
}

double lasso_plugin_lambda(const DesignMatrix& x, const Eigen::VectorXd& y, double c) {
    check_target(x, y);
    const double n = static_cast<double>(x.rows());
    const double p = static_cast<double>(std::max<std::size_t>(1, x.kept_columns().size()));
    const double rate = std::sqrt(2.0 * std::log(2.0 * p) / n);
    double sigma = std::sqrt((y.array() - y.mean()).square().mean());
    double lambda = c * sigma * rate;
    for (int iter = 0; iter < 5 && sigma > 0.0; ++iter) {
        const LinearModel fit = fit_lasso(x, y, lambda);
        const Eigen::VectorXd r = y - fit.predict(x.values());
        const double updated = std::sqrt(r.squaredNorm() / n);
        const double next = c * updated * rate;
        if (std::abs(next - lambda) <= 1e-8 * std::max(1.0, lambda)) return next;
        sigma = updated;
        lambda = next;
    }
    return lambda;
}

double lasso_kkt_violation(const DesignMatrix& x, const Eigen::VectorXd& y, const LinearModel& model) {
    check_target(x, y);
    const auto& kept = x.kept_columns();
    if (kept.empty()) return 0.0;
    const Eigen::MatrixXd xs = x.standardized();
    Eigen::VectorXd beta(static_cast<Eigen::Index>(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c) beta(static_cast<Eigen::Index>(c)) = model.coefficients(kept[c]);
    const Eigen::VectorXd r = (y.array() - y.mean()).matrix() - xs * beta;
    const Eigen::VectorXd grad = xs.transpose() * r / static_cast<double>(x.rows());
    double worst = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const double v = beta(j) == 0.0 ? std::max(0.0, std::abs(grad(j)) - model.penalty)
                                         : std::abs(grad(j) - model.penalty * (beta(j) > 0 ? 1.0 : -1.0));
        worst = std::max(worst, v);
    }
    return worst;
}

}  // namespace dml

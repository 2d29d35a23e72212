#include "dml/ortho/ortho.hpp"

#include <cmath>
#include <random>
#include <string>

#include "dml/common/error.hpp"
#include "dml/common/rng.hpp"
#include "dml/learners/linear.hpp"

namespace dml {

namespace {

double condition_number(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0) return 1.0;
    const double smin = s(s.size() - 1);
    return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

void require_finite(const Eigen::MatrixXd& m, const char* name) {
    if (!m.allFinite()) throw DataError(std::string(name) + " has non-finite entries");
}

}  // namespace

void JacobianBlocks::validate() const {
    const Eigen::Index dt = J_tt.rows();
    const Eigen::Index db = J_bb.rows();
    if (J_tt.cols() != dt || J_bb.cols() != db || J_tb.rows() != dt || J_tb.cols() != db || J_bt.rows() != db ||
        J_bt.cols() != dt)
        throw std::invalid_argument("JacobianBlocks: inconsistent dimensions");
    require_finite(J_tt, "J_tt");
    require_finite(J_tb, "J_tb");
    require_finite(J_bt, "J_bt");
    require_finite(J_bb, "J_bb");
}

void GmmBlocks::validate() const {
    const Eigen::Index dm = Omega.rows();
    if (Omega.cols() != dm || A.rows() != dm || G_theta.rows() != dm || G_beta.rows() != dm ||
        G_theta.cols() != A.cols())
        throw std::invalid_argument("GmmBlocks: inconsistent dimensions");
    require_finite(A, "A");
    require_finite(Omega, "Omega");
    require_finite(G_theta, "G_theta");
    require_finite(G_beta, "G_beta");
    if ((Omega - Omega.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, Omega.cwiseAbs().maxCoeff()))
        throw NumericalError("Omega must be symmetric");
    const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Omega, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    if (!(min_eig > 1e-10)) throw NumericalError("Omega must be positive definite (min eigenvalue > 1e-10)");
}

Eigen::MatrixXd mu_exact(const Eigen::MatrixXd& J_tb, const Eigen::MatrixXd& J_bb) {
    if (J_bb.rows() != J_bb.cols() || J_tb.cols() != J_bb.rows())
        throw std::invalid_argument("mu_exact: J_tb must be d_theta x d_beta and J_bb d_beta x d_beta");
    require_finite(J_tb, "J_tb");
    require_finite(J_bb, "J_bb");
    if (!(condition_number(J_bb) < 1e12))
        throw NumericalError("mu_exact: J_bb is singular or ill-conditioned (cond >= 1e12); use mu_regularized");
    // mu J_bb = J_tb  <=>  J_bb' mu' = J_tb'
    const Eigen::MatrixXd mu_t = J_bb.transpose().fullPivLu().solve(J_tb.transpose());
    return mu_t.transpose();
}

Eigen::MatrixXd mu_regularized(const Eigen::MatrixXd& J_tb, const Eigen::MatrixXd& J_bb, double r_n,
                               const MuRegularizedOptions& opts) {
    if (!(r_n > 0.0)) throw std::invalid_argument("mu_regularized: r_N must be positive");
    if (J_bb.rows() != J_bb.cols() || J_tb.cols() != J_bb.rows())
        throw std::invalid_argument("mu_regularized: J_tb must be d_theta x d_beta and J_bb d_beta x d_beta");
    require_finite(J_tb, "J_tb");
    require_finite(J_bb, "J_bb");
    if ((J_bb - J_bb.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, J_bb.cwiseAbs().maxCoeff()))
        throw NumericalError("mu_regularized: J_bb must be symmetric");

    const Eigen::Index db = J_bb.rows();
    Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(J_tb.rows(), db);
    for (Eigen::Index row = 0; row < J_tb.rows(); ++row) {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(db);
        Eigen::VectorXd jw = Eigen::VectorXd::Zero(db);  // J_bb w
        bool converged = false;
        for (int sweep = 0; sweep < opts.max_sweeps && !converged; ++sweep) {
            double max_change = 0.0;
            for (Eigen::Index j = 0; j < db; ++j) {
                const double jjj = J_bb(j, j);
                const double z = J_tb(row, j) - (jw(j) - jjj * w(j));
                double updated = 0.0;
                if (jjj > 0.0) {
                    updated = soft_threshold(z, r_n) / jjj;
                } else if (std::abs(z) > r_n) {
                    throw NumericalError("mu_regularized: constraint infeasible on a zero-curvature coordinate");
                }
                const double delta = updated - w(j);
                if (delta != 0.0) {
                    w(j) = updated;
                    jw.noalias() += delta * J_bb.col(j);
                    max_change = std::max(max_change, std::abs(delta));
                }
            }
            converged = max_change < opts.tolerance;
        }
        if (!converged)
            throw NumericalError("mu_regularized: coordinate descent did not converge in " +
                                 std::to_string(opts.max_sweeps) + " sweeps");
        mu.row(row) = w.transpose();
    }
    return mu;
}

Eigen::MatrixXd gmm_mu(const GmmBlocks& blocks) {
    blocks.validate();
    const Eigen::LLT<Eigen::MatrixXd> omega(blocks.Omega);
    const Eigen::MatrixXd w_gb = omega.solve(blocks.G_beta);  // Omega^{-1} G_beta
    const Eigen::MatrixXd w_a = omega.solve(blocks.A);        // Omega^{-1} A
    const Eigen::MatrixXd m = blocks.G_beta.transpose() * w_gb;
    if (m.size() == 0 || !(condition_number(m) < 1e12))
        throw NumericalError("gmm_mu: G_beta' Omega^{-1} G_beta is rank deficient");
    const Eigen::MatrixXd proj = m.fullPivLu().solve(w_gb.transpose());  // (G'WG)^{-1} G' W
    return w_a.transpose() - (w_a.transpose() * blocks.G_beta) * proj;
}

ScoreFunction linear_score_function(ScoreKind kind, const ScoreOptions& opts) {
    ScoreFunction f;
    f.evaluate = [kind, opts](const Dataset& data, double theta, const NuisancePredictions& eta) {
        return evaluate_score(kind, data, eta, opts).at(theta);
    };
    for (const auto& name : required_nuisances(kind)) {
        // ATTE's p is a scalar replicated per observation; it is perturbed as a function too.
        f.eta.push_back({name, NuisanceComponentKind::function_of_x});
    }
    return f;
}

ScoreFunction orthogonalize_mscore(ThetaGradient grad_theta, BetaGradient grad_beta, Eigen::MatrixXd mu) {
    if (mu.rows() != 1) throw std::invalid_argument("orthogonalize_mscore: mu must have one row (scalar theta)");
    ScoreFunction f;
    f.evaluate = [gt = std::move(grad_theta), gb = std::move(grad_beta), mu = std::move(mu)](
                     const Dataset& data, double theta, const NuisancePredictions& eta) -> Eigen::VectorXd {
        const Eigen::VectorXd& beta = eta.get("beta");
        const Eigen::MatrixXd db = gb(data, theta, beta);
        if (db.cols() != mu.cols())
            throw std::invalid_argument("orthogonalize_mscore: mu has " + std::to_string(mu.cols()) +
                                        " columns but d_beta l has " + std::to_string(db.cols()));
        return gt(data, theta, beta) - db * mu.row(0).transpose();
    };
    f.eta.push_back({"beta", NuisanceComponentKind::finite_vector});
    return f;
}

namespace {

Eigen::VectorXd linear_residual(const Dataset& data, double theta, const Eigen::VectorXd& beta) {
    if (beta.size() != data.x.cols()) throw std::invalid_argument("beta has the wrong dimension");
    return data.y - theta * data.d - data.x * beta;
}

}  // namespace

ThetaGradient linear_regression_theta_gradient() {
    return [](const Dataset& data, double theta, const Eigen::VectorXd& beta) -> Eigen::VectorXd {
        return linear_residual(data, theta, beta).cwiseProduct(data.d);
    };
}

BetaGradient linear_regression_beta_gradient() {
    return [](const Dataset& data, double theta, const Eigen::VectorXd& beta) -> Eigen::MatrixXd {
        return linear_residual(data, theta, beta).asDiagonal() * data.x;
    };
}

JacobianBlocks linear_regression_jacobian(const Dataset& sample) {
    const double n = static_cast<double>(sample.n());
    JacobianBlocks j;
    j.J_tt = Eigen::MatrixXd::Constant(1, 1, -sample.d.squaredNorm() / n);
    j.J_tb = -(sample.d.transpose() * sample.x) / n;
    j.J_bt = j.J_tb.transpose();
    j.J_bb = -(sample.x.transpose() * sample.x) / n;
    return j;
}

OrthogonalityReport check_orthogonality(const ScoreFunction& score, double theta0, const NuisancePredictions& eta0,
                                        const std::vector<NuisancePredictions>& directions, const Dataset& sample,
                                        double h) {
    if (!(h > 0.0)) throw std::invalid_argument("check_orthogonality: h must be positive");
    OrthogonalityReport report;
    const double n = static_cast<double>(sample.n());
    for (const auto& dir : directions) {
        NuisancePredictions plus = eta0;
        NuisancePredictions minus = eta0;
        for (const auto& [name, delta] : dir.values()) {
            Eigen::VectorXd& up = plus.mutable_get(name);
            if (up.size() != delta.size())
                throw std::invalid_argument("direction component '" + name + "' has the wrong length");
            up += h * delta;
            minus.mutable_get(name) -= h * delta;
        }
        const Eigen::VectorXd diff = (score.evaluate(sample, theta0, plus) - score.evaluate(sample, theta0, minus)) / (2.0 * h);
        const double deriv = diff.mean();
        const double var = sample.n() > 1 ? (diff.array() - deriv).square().sum() / (n - 1.0) : 0.0;
        const double se = std::sqrt(var / n);
        report.derivatives.push_back(deriv);
        report.standard_errors.push_back(se);
        report.max_abs_derivative = std::max(report.max_abs_derivative, std::abs(deriv));
        report.max_standard_error = std::max(report.max_standard_error, se);
        if (deriv != 0.0)
            report.max_t_ratio = std::max(report.max_t_ratio, se > 0.0 ? std::abs(deriv) / se
                                                                       : std::numeric_limits<double>::infinity());
    }
    return report;
}

std::vector<Eigen::VectorXd> polynomial_directions(const Eigen::MatrixXd& x, int count, std::uint64_t seed) {
    constexpr int kBasisSize = 10;
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    // Standardized columns keep the basis well scaled.
    Eigen::MatrixXd xs = x;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double m = xs.col(j).mean();
        const double sd = std::sqrt((xs.col(j).array() - m).square().mean());
        xs.col(j) = (xs.col(j).array() - m) / (sd > 0.0 ? sd : 1.0);
    }
    std::vector<Eigen::VectorXd> basis;
    basis.push_back(Eigen::VectorXd::Ones(n));
    for (Eigen::Index j = 0; j < p && basis.size() < kBasisSize; ++j) basis.push_back(xs.col(j));
    for (Eigen::Index j = 0; j < p && basis.size() < kBasisSize; ++j) basis.push_back(xs.col(j).array().square());
    for (Eigen::Index j = 0; j < p && basis.size() < kBasisSize; ++j)
        for (Eigen::Index k = j + 1; k < p && basis.size() < kBasisSize; ++k)
            basis.push_back(xs.col(j).cwiseProduct(xs.col(k)));

    Rng rng(seed);
    std::normal_distribution<double> normal;
    std::vector<Eigen::VectorXd> out;
    for (int c = 0; c < count; ++c) {
        Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
        for (const auto& b : basis) dir += normal(rng) * b;
        const double norm = std::sqrt(dir.squaredNorm() / static_cast<double>(n));
        out.push_back(norm > 0.0 ? Eigen::VectorXd(dir / norm) : dir);
    }
    return out;
}

}  // namespace dml

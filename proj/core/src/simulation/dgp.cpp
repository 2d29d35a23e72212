#include "dml/simulation/dgp.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <string>

#include "dml/common/error.hpp"
#include "dml/common/rng.hpp"

namespace dml::sim {

namespace {

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

// Rows of an AR(1) recursion have exactly the Toeplitz rho^|i-j| covariance.
Eigen::MatrixXd toeplitz_normals(int n, int p, double rho, Rng& rng) {
    std::normal_distribution<double> normal;
    const double innov = std::sqrt(1.0 - rho * rho);
    Eigen::MatrixXd x(n, p);
    for (int i = 0; i < n; ++i) {
        double prev = normal(rng);
        x(i, 0) = prev;
        for (int j = 1; j < p; ++j) {
            prev = rho * prev + innov * normal(rng);
            x(i, j) = prev;
        }
    }
    return x;
}

Eigen::VectorXd normals(int n, Rng& rng) {
    std::normal_distribution<double> normal;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = normal(rng);
    return v;
}

Eigen::VectorXd bernoulli(const Eigen::VectorXd& prob, Rng& rng) {
    Eigen::VectorXd v(prob.size());
    for (Eigen::Index i = 0; i < prob.size(); ++i) v(i) = uniform01(rng) < prob(i) ? 1.0 : 0.0;
    return v;
}

double smooth_m_base(const Eigen::Ref<const Eigen::RowVectorXd>& x, double rho) {
    return logistic(x(0)) - 0.5 + 0.25 * (x(1) * x(2) - rho);
}

double smooth_g_base(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
    const double s = std::sin(x(2));
    return std::tanh(x(0)) + s * s;
}

struct SmoothVariances {
    double m = 0.0;
    double g = 0.0;
};

// Variances of the unscaled nonlinear nuisances, by fixed-seed Monte Carlo.
SmoothVariances smooth_variances(double rho) {
    static std::mutex mutex;
    static std::map<double, SmoothVariances> cache;
    std::lock_guard lock(mutex);
    if (auto it = cache.find(rho); it != cache.end()) return it->second;
    constexpr int kDraws = 400000;
    Rng rng(derive_seed(0x5EED, {0x51}));
    const Eigen::MatrixXd x = toeplitz_normals(kDraws, 3, rho, rng);
    double sm = 0, sm2 = 0, sg = 0, sg2 = 0;
    for (int i = 0; i < kDraws; ++i) {
        const double m = smooth_m_base(x.row(i), rho);
        const double g = smooth_g_base(x.row(i));
        sm += m;
        sm2 += m * m;
        sg += g;
        sg2 += g * g;
    }
    SmoothVariances v;
    v.m = sm2 / kDraws - (sm / kDraws) * (sm / kDraws);
    v.g = sg2 / kDraws - (sg / kDraws) * (sg / kDraws);
    cache.emplace(rho, v);
    return v;
}

double signal_scale(double r2, double base_variance) {
    if (r2 == 0.0) return 0.0;
    return std::sqrt(r2 / (1.0 - r2) / base_variance);
}

Eigen::VectorXd sparse_coefficients(const PlrDgpConfig& config, double r2, int power) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(config.p);
    for (int j = 0; j < std::min(5, config.p); ++j) c(j) = 1.0 / std::pow(j + 1.0, power);
    // Var(c'x) under the Toeplitz covariance.
    double var = 0.0;
    for (int i = 0; i < config.p; ++i)
        for (int j = 0; j < config.p; ++j) var += c(i) * c(j) * std::pow(config.rho, std::abs(i - j));
    return c * signal_scale(r2, var);
}

SimulatedData finish(Dataset data, double theta0) {
    SimulatedData out;
    out.data = std::move(data);
    out.theta0 = theta0;
    return out;
}

}  // namespace

std::string_view to_string(PlrDesign design) {
    return design == PlrDesign::linear_sparse ? "linear-sparse" : "nonlinear-smooth";
}

PlrDesign parse_plr_design(std::string_view name) {
    if (name == "linear-sparse") return PlrDesign::linear_sparse;
    if (name == "nonlinear-smooth") return PlrDesign::nonlinear_smooth;
    throw ConfigError("unknown design '" + std::string(name) + "' (expected linear-sparse or nonlinear-smooth)");
}

void PlrDgpConfig::validate() const {
    if (!(R2_d >= 0.0 && R2_d < 1.0)) throw ConfigError("R2_d must lie in [0, 1)");
    if (!(R2_y >= 0.0 && R2_y < 1.0)) throw ConfigError("R2_y must lie in [0, 1)");
    if (!(rho > -1.0 && rho < 1.0)) throw ConfigError("rho must lie in (-1, 1)");
    if (!std::isfinite(theta0)) throw ConfigError("theta0 must be finite");
    if (p < 1) throw ConfigError("p must be at least 1");
    if (design == PlrDesign::nonlinear_smooth && p < 3) throw ConfigError("the nonlinear design needs p >= 3");
}

Eigen::VectorXd linear_sparse_m_coefficients(const PlrDgpConfig& config) {
    config.validate();
    return sparse_coefficients(config, config.R2_d, 1);
}

Eigen::VectorXd linear_sparse_g_coefficients(const PlrDgpConfig& config) {
    config.validate();
    return sparse_coefficients(config, config.R2_y, 2);
}

double plr_population_variance(const PlrDgpConfig& config) {
    config.validate();
    return 1.0;
}

SimulatedData generate_plr(const PlrDgpConfig& config, int n) {
    config.validate();
    if (n < 20) throw ConfigError("generate_plr needs n >= 20");
    Rng rng(config.seed);
    const Eigen::MatrixXd x = toeplitz_normals(n, config.p, config.rho, rng);
    const Eigen::VectorXd v = normals(n, rng);
    const Eigen::VectorXd u = normals(n, rng);

    Eigen::VectorXd m0(n), g0(n);
    if (config.design == PlrDesign::linear_sparse) {
        m0 = x * linear_sparse_m_coefficients(config);
        g0 = x * linear_sparse_g_coefficients(config);
    } else {
        const SmoothVariances var = smooth_variances(config.rho);
        const double a = signal_scale(config.R2_d, var.m);
        const double b = signal_scale(config.R2_y, var.g);
        for (int i = 0; i < n; ++i) {
            m0(i) = a * smooth_m_base(x.row(i), config.rho);
            g0(i) = b * smooth_g_base(x.row(i));
        }
    }
    const Eigen::VectorXd d = m0 + v;
    const Eigen::VectorXd y = config.theta0 * d + g0 + u;

    SimulatedData out = finish(make_dataset(ModelKind::plr, y, d, x), config.theta0);
    out.oracle.set(nuisance::g, g0);
    out.oracle.set(nuisance::m, m0);
    out.oracle.set(nuisance::ell, config.theta0 * m0 + g0);
    return out;
}

SimulatedData generate_pliv(double theta0, int p, int n, std::uint64_t seed) {
    if (p < 3 || n < 20) throw ConfigError("generate_pliv needs p >= 3 and n >= 20");
    Rng rng(seed);
    const Eigen::MatrixXd x = toeplitz_normals(n, p, 0.5, rng);
    const Eigen::VectorXd zeta = normals(n, rng);
    const Eigen::VectorXd v = normals(n, rng);
    const Eigen::VectorXd e = normals(n, rng);
    Eigen::VectorXd mz(n), h(n), g(n);
    for (int i = 0; i < n; ++i) {
        mz(i) = 0.5 * x(i, 0) + 0.25 * x(i, 1);
        h(i) = 0.5 * std::sin(x(i, 0)) + 0.3 * x(i, 2);
        g(i) = std::cos(x(i, 0)) + 0.5 * x(i, 1);
    }
    const Eigen::VectorXd z = mz + zeta;
    const Eigen::VectorXd d = 0.8 * z + h + v;
    const Eigen::VectorXd u = 0.6 * v + 0.8 * e;
    const Eigen::VectorXd y = theta0 * d + g + u;
    const Eigen::VectorXd r = 0.8 * mz + h;

    SimulatedData out = finish(make_dataset(ModelKind::pliv, y, d, x, z), theta0);
    out.oracle.set(nuisance::g, g);
    out.oracle.set(nuisance::m, mz);
    out.oracle.set(nuisance::r, r);
    out.oracle.set(nuisance::ell, theta0 * r + g);
    return out;
}

SimulatedData generate_irm(double theta0, int p, int n, std::uint64_t seed) {
    if (p < 2 || n < 20) throw ConfigError("generate_irm needs p >= 2 and n >= 20");
    Rng rng(seed);
    const Eigen::MatrixXd x = toeplitz_normals(n, p, 0.5, rng);
    Eigen::VectorXd m(n), g(n);
    for (int i = 0; i < n; ++i) {
        // x1 + x2 / 2 is symmetric about zero, so P(D = 1) = 1/2 exactly.
        m(i) = 0.1 + 0.8 * logistic(x(i, 0) + 0.5 * x(i, 1));
        g(i) = x(i, 0) + 0.5 * std::sin(x(i, 1));
    }
    const Eigen::VectorXd d = bernoulli(m, rng);
    const Eigen::VectorXd u = normals(n, rng);
    const Eigen::VectorXd y = theta0 * d + g + u;

    SimulatedData out = finish(make_dataset(ModelKind::irm, y, d, x), theta0);
    out.oracle.set(nuisance::g1, g.array() + theta0);
    out.oracle.set(nuisance::g0, g);
    out.oracle.set(nuisance::m, m);
    out.oracle.set(nuisance::p, Eigen::VectorXd::Constant(n, 0.5));
    return out;
}

SimulatedData generate_iivm(double theta0, int p, int n, std::uint64_t seed) {
    if (p < 2 || n < 20) throw ConfigError("generate_iivm needs p >= 2 and n >= 20");
    Rng rng(seed);
    const Eigen::MatrixXd x = toeplitz_normals(n, p, 0.5, rng);
    constexpr double kAlways = 0.2;
    Eigen::VectorXd pz(n), complier(n), g(n);
    for (int i = 0; i < n; ++i) {
        pz(i) = 0.2 + 0.6 * logistic(x(i, 1));
        complier(i) = 0.5 + 0.2 * std::tanh(x(i, 0));
        g(i) = x(i, 0) + 0.5 * std::cos(x(i, 1));
    }
    const Eigen::VectorXd z = bernoulli(pz, rng);
    std::normal_distribution<double> normal;
    Eigen::VectorXd d(n), y(n);
    for (int i = 0; i < n; ++i) {
        const double t = uniform01(rng);
        const bool always = t < kAlways;
        const bool is_complier = !always && t < kAlways + complier(i);
        d(i) = (always || (is_complier && z(i) == 1.0)) ? 1.0 : 0.0;
        const double u = (always ? 1.0 - kAlways : -kAlways) + normal(rng);
        y(i) = theta0 * d(i) + g(i) + u;
    }
    const Eigen::VectorXd m1 = (complier.array() + kAlways).matrix();
    const Eigen::VectorXd m0 = Eigen::VectorXd::Constant(n, kAlways);

    SimulatedData out = finish(make_dataset(ModelKind::iivm, y, d, x, z), theta0);
    out.oracle.set(nuisance::mu1, theta0 * m1 + g);
    out.oracle.set(nuisance::mu0, theta0 * m0 + g);
    out.oracle.set(nuisance::m1, m1);
    out.oracle.set(nuisance::m0, m0);
    out.oracle.set(nuisance::p, pz);
    return out;
}

double naive_estimate(const Dataset& data, const Eigen::VectorXd& ghat) {
    if (ghat.size() != data.n()) throw std::invalid_argument("naive_estimate: ghat length does not match the data");
    const double dd = data.d.squaredNorm();
    if (dd == 0.0) throw NumericalError("naive estimator undefined: sum of D^2 is zero");
    return data.d.dot(data.y - ghat) / dd;
}

Eigen::VectorXd overfit_nuisance(const Dataset& data, const Eigen::VectorXd& g0, double epsilon,
                                 std::span<const int> train_rows) {
    if (!(epsilon > 0.0 && epsilon <= 0.5)) throw ConfigError("epsilon must lie in (0, 0.5]");
    if (g0.size() != data.n()) throw std::invalid_argument("overfit_nuisance: g0 length does not match the data");
    const double divisor = std::pow(static_cast<double>(data.n()), 0.5 - epsilon);
    Eigen::VectorXd ghat = g0;
    for (int i : train_rows) ghat(i) = g0(i) + (data.y(i) - g0(i)) / divisor;
    return ghat;
}

}  // namespace dml::sim

#include "dml/engine/solve.hpp"

#include <cmath>
#include <string>

#include "dml/common/error.hpp"
#include "dml/common/stats.hpp"

namespace dml {

namespace {

constexpr double kWeakIdentification = 1e-12;

void check_sizes(const ScoreValues& scores, const FoldPartition& partition) {
    if (scores.psi_a.size() != scores.psi_b.size() || scores.size() != partition.n())
        throw std::invalid_argument("score vectors do not match the fold partition");
}

struct FoldMeans {
    double a = 0.0;
    double b = 0.0;
};

FoldMeans fold_means(const ScoreValues& scores, std::span<const int> rows) {
    FoldMeans out;
    for (int i : rows) {
        out.a += scores.psi_a(i);
        out.b += scores.psi_b(i);
    }
    out.a /= static_cast<double>(rows.size());
    out.b /= static_cast<double>(rows.size());
    return out;
}

double fold_root(FoldMeans f, std::size_t fold) {
    if (!std::isfinite(f.a) || !std::isfinite(f.b)) throw NumericalError("non-finite score in fold " + std::to_string(fold + 1));
    if (std::abs(f.a) <= kWeakIdentification) throw NumericalError("weak identification in fold " + std::to_string(fold + 1));
    return -f.b / f.a;
}

}  // namespace

std::string_view to_string(DmlMethod method) { return method == DmlMethod::dml1 ? "dml1" : "dml2"; }

DmlMethod parse_dml_method(std::string_view name) {
    if (name == "dml1") return DmlMethod::dml1;
    if (name == "dml2") return DmlMethod::dml2;
    throw ConfigError("unknown DML method '" + std::string(name) + "' (expected dml1 or dml2)");
}

Dml1Solution solve_dml1(const ScoreValues& scores, const FoldPartition& partition) {
    check_sizes(scores, partition);
    Dml1Solution out;
    for (int k = 0; k < partition.k(); ++k)
        out.fold_thetas.push_back(fold_root(fold_means(scores, partition.fold(k)), static_cast<std::size_t>(k)));
    out.theta = mean(out.fold_thetas);
    return out;
}

Dml1Solution solve_dml1(const std::vector<ScoreValues>& scores_per_fold) {
    if (scores_per_fold.empty()) throw std::invalid_argument("solve_dml1: no folds");
    Dml1Solution out;
    for (std::size_t k = 0; k < scores_per_fold.size(); ++k) {
        const auto& s = scores_per_fold[k];
        if (s.size() == 0 || s.psi_a.size() != s.psi_b.size()) throw std::invalid_argument("solve_dml1: bad fold scores");
        out.fold_thetas.push_back(fold_root({s.psi_a.mean(), s.psi_b.mean()}, k));
    }
    out.theta = mean(out.fold_thetas);
    return out;
}

double pooled_jacobian(const ScoreValues& scores, const FoldPartition& partition) {
    check_sizes(scores, partition);
    double j = 0.0;
    for (int k = 0; k < partition.k(); ++k) j += fold_means(scores, partition.fold(k)).a;
    return j / partition.k();
}

double solve_dml2(const ScoreValues& scores, const FoldPartition& partition) {
    check_sizes(scores, partition);
    FoldMeans pooled;
    for (int k = 0; k < partition.k(); ++k) {
        const FoldMeans f = fold_means(scores, partition.fold(k));
        pooled.a += f.a;
        pooled.b += f.b;
    }
    pooled.a /= partition.k();
    pooled.b /= partition.k();
    if (!std::isfinite(pooled.a) || !std::isfinite(pooled.b)) throw NumericalError("non-finite pooled score");
    if (std::abs(pooled.a) <= kWeakIdentification) throw NumericalError("weak identification: pooled mean of psi_a is zero");
    return -pooled.b / pooled.a;
}

double estimate_variance(const ScoreValues& scores, double theta, const FoldPartition& partition) {
    check_sizes(scores, partition);
    const double j = pooled_jacobian(scores, partition);
    if (std::abs(j) <= kWeakIdentification) throw NumericalError("weak identification: pooled mean of psi_a is zero");
    double s = 0.0;
    for (int k = 0; k < partition.k(); ++k) {
        double acc = 0.0;
        const auto rows = partition.fold(k);
        for (int i : rows) {
            const double v = scores.psi_a(i) * theta + scores.psi_b(i);
            acc += v * v;
        }
        s += acc / static_cast<double>(rows.size());
    }
    s /= partition.k();
    if (!std::isfinite(s)) throw NumericalError("non-finite score variance");
    if (s == 0.0) throw NumericalError("degenerate score variance");
    return s / (j * j);
}

std::pair<double, double> confidence_interval(double theta, double sigma2, long n, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (n <= 0) throw std::invalid_argument("confidence_interval: n must be positive");
    if (alpha == 1.0) return {theta, theta};
    const double half = normal_quantile(1.0 - alpha / 2.0) * std::sqrt(sigma2 / static_cast<double>(n));
    return {theta - half, theta + half};
}

}  // namespace dml

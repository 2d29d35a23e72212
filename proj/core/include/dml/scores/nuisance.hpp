#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace dml {

/// Canonical names of per-observation nuisance predictions.
namespace nuisance {
inline constexpr const char* g = "g";      // g(X) in PLR/PLIV
inline constexpr const char* ell = "l";    // E[Y|X]
inline constexpr const char* m = "m";      // E[D|X] (PLR, propensity in IRM) or E[Z|X] (PLIV)
inline constexpr const char* r = "r";      // E[D|X] in PLIV
inline constexpr const char* g1 = "g1";    // g(1, X)
inline constexpr const char* g0 = "g0";    // g(0, X); also g-bar for ATTE
inline constexpr const char* p = "p";      // ATTE: P(D = 1) per fold; LATE: P(Z = 1 | X)
inline constexpr const char* mu1 = "mu1";  // E[Y | Z = 1, X]
inline constexpr const char* mu0 = "mu0";  // E[Y | Z = 0, X]
inline constexpr const char* m1 = "m1";    // E[D | Z = 1, X]
inline constexpr const char* m0 = "m0";    // E[D | Z = 0, X]
}  // namespace nuisance

/// Named per-observation nuisance values, eta-hat evaluated at each W_i.
class NuisancePredictions {
public:
    NuisancePredictions() = default;

    void set(const std::string& name, Eigen::VectorXd values) { values_[name] = std::move(values); }
    bool has(const std::string& name) const { return values_.count(name) == 1; }
    /// Throws std::invalid_argument naming the missing field.
    const Eigen::VectorXd& get(const std::string& name) const;
    Eigen::VectorXd& mutable_get(const std::string& name);

    std::vector<std::string> names() const;
    const std::map<std::string, Eigen::VectorXd>& values() const noexcept { return values_; }

private:
    std::map<std::string, Eigen::VectorXd> values_;
};

}  // namespace dml

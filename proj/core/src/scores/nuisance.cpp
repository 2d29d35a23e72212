#include "dml/scores/nuisance.hpp"

#include <stdexcept>

namespace dml {

const Eigen::VectorXd& NuisancePredictions::get(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) throw std::invalid_argument("missing nuisance field '" + name + "'");
    return it->second;
}

Eigen::VectorXd& NuisancePredictions::mutable_get(const std::string& name) {
    auto it = values_.find(name);
    if (it == values_.end()) throw std::invalid_argument("missing nuisance field '" + name + "'");
    return it->second;
}

std::vector<std::string> NuisancePredictions::names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) out.push_back(k);
    return out;
}

}  // namespace dml

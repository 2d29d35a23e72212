#pragma once

#include <stdexcept>
#include <string>

namespace dml {

/// Bad or inconsistent configuration (unknown learner kind, invalid grid, ...).
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Input data that cannot be used: unparseable cells, wrong shapes, non-binary roles.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Weak identification, singular systems, degenerate score variance.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dml

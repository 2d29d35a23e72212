#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace dml {

/// Raw feature matrix plus the column statistics used for internal
/// standardization. Scales are population standard deviations; constant
/// columns are recorded in `kept_columns` as excluded.
class DesignMatrix {
public:
    explicit DesignMatrix(Eigen::MatrixXd values);

    const Eigen::MatrixXd& values() const noexcept { return values_; }
    const Eigen::VectorXd& column_means() const noexcept { return means_; }
    const Eigen::VectorXd& column_scales() const noexcept { return scales_; }
    /// Indices of non-constant columns, ascending.
    const std::vector<int>& kept_columns() const noexcept { return kept_; }

    Eigen::Index rows() const noexcept { return values_.rows(); }
    Eigen::Index cols() const noexcept { return values_.cols(); }

    /// Centered and scaled copy restricted to the kept columns.
    Eigen::MatrixXd standardized() const;

    /// Rows selected by index, statistics recomputed on the subset.
    DesignMatrix subset(std::span<const int> rows) const;

private:
    Eigen::MatrixXd values_;
    Eigen::VectorXd means_;
    Eigen::VectorXd scales_;
    std::vector<int> kept_;
};

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, std::span<const int> rows);
Eigen::VectorXd select_rows(const Eigen::VectorXd& v, std::span<const int> rows);

}  // namespace dml

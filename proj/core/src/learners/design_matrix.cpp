#include "dml/learners/design_matrix.hpp"

#include <cmath>

#include "dml/common/error.hpp"

namespace dml {

DesignMatrix::DesignMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
    const Eigen::Index n = values_.rows();
    const Eigen::Index p = values_.cols();
    if (n < 2) throw DataError("design matrix needs at least 2 rows");
    if (p < 1) throw DataError("design matrix needs at least 1 column");
    if (!values_.allFinite()) throw DataError("design matrix contains non-finite entries");

    means_ = values_.colwise().mean().transpose();
    scales_.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double var = (values_.col(j).array() - means_(j)).square().mean();
        const double sd = std::sqrt(var);
        // Relative test so that columns like 1e6 + rounding noise still count as constant.
        if (sd > 1e-12 * std::max(1.0, std::abs(means_(j)))) {
            scales_(j) = sd;
            kept_.push_back(static_cast<int>(j));
        } else {
            scales_(j) = 0.0;
        }
    }
}

Eigen::MatrixXd DesignMatrix::standardized() const {
    Eigen::MatrixXd out(values_.rows(), static_cast<Eigen::Index>(kept_.size()));
    for (std::size_t c = 0; c < kept_.size(); ++c) {
        const int j = kept_[c];
        out.col(static_cast<Eigen::Index>(c)) = (values_.col(j).array() - means_(j)) / scales_(j);
    }
    return out;
}

DesignMatrix DesignMatrix::subset(std::span<const int> rows) const { return DesignMatrix(select_rows(values_, rows)); }

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, std::span<const int> rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
    return out;
}

Eigen::VectorXd select_rows(const Eigen::VectorXd& v, std::span<const int> rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) out(static_cast<Eigen::Index>(r)) = v(rows[r]);
    return out;
}

}  // namespace dml

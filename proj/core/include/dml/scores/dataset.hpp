#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dml {

enum class ModelKind { plr, pliv, irm, iivm };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// Outcome, treatment, optional instrument and controls for one causal model.
/// `x` may have zero columns (no controls).
struct Dataset {
    Eigen::VectorXd y;
    Eigen::VectorXd d;
    std::optional<Eigen::VectorXd> z;
    Eigen::MatrixXd x;
    ModelKind model = ModelKind::plr;

    std::string y_name = "y";
    std::string d_name = "d";
    std::string z_name = "z";
    std::vector<std::string> x_names;

    Eigen::Index n() const noexcept { return y.size(); }
    Eigen::Index p() const noexcept { return x.cols(); }

    /// Throws DataError when lengths disagree, values are non-finite, a required
    /// instrument is missing or a binary role holds values outside {0, 1}.
    void validate() const;

    Dataset subset(std::span<const int> rows) const;
};

Dataset make_dataset(ModelKind model, Eigen::VectorXd y, Eigen::VectorXd d, Eigen::MatrixXd x,
                     std::optional<Eigen::VectorXd> z = std::nullopt);

bool is_binary(const Eigen::VectorXd& v);

}  // namespace dml

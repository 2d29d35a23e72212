#include "dml/scores/dataset.hpp"

#include "dml/common/error.hpp"
#include "dml/learners/design_matrix.hpp"

namespace dml {

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::plr: return "plr";
        case ModelKind::pliv: return "pliv";
        case ModelKind::irm: return "irm";
        case ModelKind::iivm: return "iivm";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
    for (auto kind : {ModelKind::plr, ModelKind::pliv, ModelKind::irm, ModelKind::iivm})
        if (to_string(kind) == name) return kind;
    throw ConfigError("unknown model '" + std::string(name) + "' (expected plr, pliv, irm or iivm)");
}

bool is_binary(const Eigen::VectorXd& v) {
    return (v.array() == 0.0 || v.array() == 1.0).all();
}

void Dataset::validate() const {
    const Eigen::Index n = y.size();
    if (n == 0) throw DataError("dataset is empty");
    if (d.size() != n || x.rows() != n) throw DataError("dataset columns have different lengths");
    if (z && z->size() != n) throw DataError("instrument length differs from outcome length");
    if (!y.allFinite() || !d.allFinite() || !x.allFinite() || (z && !z->allFinite()))
        throw DataError("dataset contains non-finite values");
    if (!x_names.empty() && static_cast<Eigen::Index>(x_names.size()) != x.cols())
        throw DataError("x_names does not match the number of control columns");
    switch (model) {
        case ModelKind::plr:
            break;
        case ModelKind::pliv:
            if (!z) throw DataError("pliv requires an instrument column");
            break;
        case ModelKind::irm:
            if (!is_binary(d)) throw DataError("irm requires a binary treatment in {0, 1}");
            break;
        case ModelKind::iivm:
            if (!z) throw DataError("iivm requires an instrument column");
            if (!is_binary(d)) throw DataError("iivm requires a binary treatment in {0, 1}");
            if (!is_binary(*z)) throw DataError("iivm requires a binary instrument in {0, 1}");
            break;
    }
}

Dataset Dataset::subset(std::span<const int> rows) const {
    Dataset out = *this;
    out.y = select_rows(y, rows);
    out.d = select_rows(d, rows);
    out.x = select_rows(x, rows);
    if (z) out.z = select_rows(*z, rows);
    return out;
}

Dataset make_dataset(ModelKind model, Eigen::VectorXd y, Eigen::VectorXd d, Eigen::MatrixXd x,
                     std::optional<Eigen::VectorXd> z) {
    Dataset data;
    data.model = model;
    data.y = std::move(y);
    data.d = std::move(d);
    data.x = std::move(x);
    data.z = std::move(z);
    for (Eigen::Index j = 0; j < data.x.cols(); ++j) data.x_names.push_back("x" + std::to_string(j + 1));
    data.validate();
    return data;
}

}  // namespace dml

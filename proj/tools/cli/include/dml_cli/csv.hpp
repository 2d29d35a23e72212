#pragma once

#include <iosfwd>
#include <string>

#include "dml/scores/dataset.hpp"
#include "dml_cli/config.hpp"

namespace dml::cli {

struct LoadedData {
    Dataset data;
    long rows_read = 0;
    long rows_dropped = 0;  // rows with a missing value in a used column
};

/// Reads a comma-separated file with a header row. Only the columns named in
/// `roles` are parsed. Empty cells, NA and NaN count as missing; such rows are
/// dropped. Throws DataError with row and column for unparseable cells, unknown
/// columns and non-binary values in binary roles.
LoadedData load_csv(std::istream& in, ModelKind model, const ColumnRoles& roles, bool expand_degree2 = false);
LoadedData load_csv(const std::string& path, ModelKind model, const ColumnRoles& roles, bool expand_degree2 = false);

/// Writes y, d, (z,) x columns with round-trip precision.
void write_csv(std::ostream& out, const Dataset& data);

/// Controls plus squares of non-binary controls and all pairwise products.
Dataset expand_degree2(const Dataset& data);

}  // namespace dml::cli

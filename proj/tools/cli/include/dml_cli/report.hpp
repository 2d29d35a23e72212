#pragma once

#include <iosfwd>

#include <json.hpp>

#include "dml/engine/dml.hpp"
#include "dml_cli/config.hpp"

namespace dml::cli {

inline constexpr int kReportSchemaVersion = 1;

struct DataSummary {
    long rows_used = 0;
    long rows_dropped = 0;
    int n_controls = 0;
};

/// Per-split rows (split, theta, sigma2, se, CI), the aggregate block and
/// provenance. Aggregates are recomputable from the split rows.
nlohmann::json make_report(const RepeatedSplitResult& result, const RunConfig& config, const DataSummary& data);

/// Largest absolute difference between the stored aggregates and the ones
/// recomputed from the per-split rows.
double report_recompute_error(const nlohmann::json& report);

void print_report_table(std::ostream& out, const nlohmann::json& report);

const char* version_string();

}  // namespace dml::cli

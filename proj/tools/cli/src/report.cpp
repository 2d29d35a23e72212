#include "dml_cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "dml/common/stats.hpp"

#ifndef DML_VERSION
#define DML_VERSION "unknown"
#endif

namespace dml::cli {

using nlohmann::json;

const char* version_string() { return DML_VERSION; }

json make_report(const RepeatedSplitResult& r, const RunConfig& config, const DataSummary& data) {
    json j;
    j["schema_version"] = kReportSchemaVersion;
    j["model"] = std::string(to_string(config.model));
    j["score"] = std::string(to_string(config.score_kind()));
    j["method"] = std::string(to_string(config.method));
    j["K"] = config.folds;
    j["S"] = config.splits;
    j["alpha"] = config.alpha;
    j["trim_eps"] = config.trim_eps;
    j["n"] = r.n;
    j["data"] = {{"rows_used", data.rows_used}, {"rows_dropped", data.rows_dropped}, {"controls", data.n_controls}};

    j["splits"] = json::array();
    for (std::size_t s = 0; s < r.splits.size(); ++s) {
        const DmlResult& d = r.splits[s];
        j["splits"].push_back({{"split", r.split_ids[s]},
                               {"theta", d.theta},
                               {"sigma2", d.sigma2},
                               {"se", d.se},
                               {"ci_low", d.ci_low},
                               {"ci_high", d.ci_high}});
    }
    j["failures"] = json::array();
    for (const auto& f : r.failures) j["failures"].push_back({{"split", f.split}, {"message", f.message}});

    const double z = normal_quantile(1.0 - config.alpha / 2.0);
    j["aggregate"] = {{"theta_median", r.theta_median},
                      {"theta_mean", r.theta_mean},
                      {"sigma2_median", r.sigma2_median},
                      {"sigma2_mean", r.sigma2_mean},
                      {"se_median", r.se_median},
                      {"se_mean", r.se_mean},
                      {"ci_median", {r.theta_median - z * r.se_median, r.theta_median + z * r.se_median}},
                      {"ci_mean", {r.theta_mean - z * r.se_mean, r.theta_mean + z * r.se_mean}}};

    std::vector<double> ses;
    for (const auto& d : r.splits) ses.push_back(d.se);
    j["aggregate"]["median_unadjusted_se"] = ses.empty() ? 0.0 : lower_median(ses);

    j["provenance"] = {{"config_hash", config_hash(config)}, {"seed", config.seed}, {"version", version_string()}};
    return j;
}

double report_recompute_error(const json& report) {
    std::vector<double> thetas, sigma2s, ses;
    for (const auto& row : report.at("splits")) {
        thetas.push_back(row.at("theta").get<double>());
        sigma2s.push_back(row.at("sigma2").get<double>());
        ses.push_back(row.at("se").get<double>());
    }
    const long n = report.at("n").get<long>();
    const SplitAggregate a = aggregate_splits(thetas, sigma2s, n);
    const json& agg = report.at("aggregate");
    const double nd = static_cast<double>(n);
    double err = 0.0;
    auto diff = [&](const char* key, double v) { err = std::max(err, std::abs(agg.at(key).get<double>() - v)); };
    diff("theta_median", a.theta_median);
    diff("theta_mean", a.theta_mean);
    diff("sigma2_median", a.sigma2_median);
    diff("sigma2_mean", a.sigma2_mean);
    diff("se_median", std::sqrt(a.sigma2_median / nd));
    diff("se_mean", std::sqrt(a.sigma2_mean / nd));
    diff("median_unadjusted_se", lower_median(ses));
    return err;
}

void print_report_table(std::ostream& out, const json& report) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "model %s, score %s, %s, K = %d, S = %d, n = %ld (%ld rows dropped)\n",
                  report.at("model").get<std::string>().c_str(), report.at("score").get<std::string>().c_str(),
                  report.at("method").get<std::string>().c_str(), report.at("K").get<int>(), report.at("S").get<int>(),
                  report.at("n").get<long>(), report.at("data").at("rows_dropped").get<long>());
    out << buf;
    const auto& splits = report.at("splits");
    const std::size_t shown = std::min<std::size_t>(splits.size(), 10);
    out << "  split        theta           se                   CI\n";
    for (std::size_t s = 0; s < shown; ++s) {
        const auto& row = splits[s];
        std::snprintf(buf, sizeof buf, "  %5d  %11.6g  %11.6g  [%11.6g, %11.6g]\n", row.at("split").get<int>(),
                      row.at("theta").get<double>(), row.at("se").get<double>(), row.at("ci_low").get<double>(),
                      row.at("ci_high").get<double>());
        out << buf;
    }
    if (splits.size() > shown) out << "  ... " << splits.size() - shown << " more splits\n";
    const auto& agg = report.at("aggregate");
    std::snprintf(buf, sizeof buf, "  median  %11.6g  (%.6g)  [%.6g]\n  mean    %11.6g  (%.6g)\n",
                  agg.at("theta_median").get<double>(), agg.at("se_median").get<double>(),
                  agg.at("median_unadjusted_se").get<double>(), agg.at("theta_mean").get<double>(),
                  agg.at("se_mean").get<double>());
    out << buf;
    out << "  (split-adjusted s.e. in parentheses, median unadjusted s.e. in brackets)\n";
    if (!report.at("failures").empty()) out << "  failed splits: " << report.at("failures").size() << '\n';
}

}  // namespace dml::cli

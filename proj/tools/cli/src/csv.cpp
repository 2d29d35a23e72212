#include "dml_cli/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "dml/common/error.hpp"

namespace dml::cli {

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    std::string out(s.substr(a, b - a));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        cells.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

bool is_missing(const std::string& cell) {
    std::string lower = cell;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    return lower.empty() || lower == "na" || lower == "nan";
}

double parse_cell(const std::string& cell, long row, const std::string& column) {
    double v = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    if (begin != end && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
        throw DataError("row " + std::to_string(row) + ", column '" + column + "': cannot parse '" + cell + "' as a number");
    return v;
}

}  // namespace

LoadedData load_csv(std::istream& in, ModelKind model, const ColumnRoles& roles, bool expand) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("CSV file is empty (no header row)");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const std::vector<std::string> header = split_line(line);
    std::map<std::string, int> index;
    for (std::size_t c = 0; c < header.size(); ++c) index.emplace(header[c], static_cast<int>(c));

    std::vector<std::string> used = {roles.y, roles.d};
    if (roles.z) used.push_back(*roles.z);
    used.insert(used.end(), roles.x.begin(), roles.x.end());
    std::vector<int> cols;
    for (const auto& name : used) {
        const auto it = index.find(name);
        if (it == index.end()) throw DataError("column '" + name + "' not found in the CSV header");
        cols.push_back(it->second);
    }

    std::vector<std::vector<double>> values(used.size());
    LoadedData out;
    long row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            throw DataError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) + " cells, found " +
                            std::to_string(cells.size()));
        ++out.rows_read;
        std::vector<double> parsed(used.size());
        bool missing = false;
        for (std::size_t k = 0; k < used.size(); ++k) {
            const std::string& cell = cells[static_cast<std::size_t>(cols[k])];
            if (is_missing(cell)) {
                missing = true;
                continue;
            }
            parsed[k] = parse_cell(cell, row, used[k]);
        }
        if (missing) {
            ++out.rows_dropped;
            continue;
        }
        for (std::size_t k = 0; k < used.size(); ++k) values[k].push_back(parsed[k]);
    }
    const Eigen::Index n = static_cast<Eigen::Index>(values[0].size());
    if (n == 0) throw DataError("no complete rows in the CSV file");

    auto column = [&](std::size_t k) { return Eigen::Map<const Eigen::VectorXd>(values[k].data(), n).eval(); };
    auto require_binary = [&](std::size_t k) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = values[k][static_cast<std::size_t>(i)];
            if (v != 0.0 && v != 1.0)
                throw DataError("column '" + used[k] + "' must be binary in {0, 1}; found " + std::to_string(v));
        }
    };
    const bool binary_d = model == ModelKind::irm || model == ModelKind::iivm;
    if (binary_d) require_binary(1);
    if (model == ModelKind::iivm) require_binary(2);

    const std::size_t x0 = roles.z ? 3 : 2;
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(roles.x.size()));
    for (std::size_t j = 0; j < roles.x.size(); ++j) x.col(static_cast<Eigen::Index>(j)) = column(x0 + j);
    std::optional<Eigen::VectorXd> z;
    if (roles.z) z = column(2);
    out.data = make_dataset(model, column(0), column(1), std::move(x), std::move(z));
    out.data.y_name = roles.y;
    out.data.d_name = roles.d;
    if (roles.z) out.data.z_name = *roles.z;
    out.data.x_names = roles.x;
    if (expand) out.data = expand_degree2(out.data);
    return out;
}

LoadedData load_csv(const std::string& path, ModelKind model, const ColumnRoles& roles, bool expand) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open data file '" + path + "'");
    return load_csv(in, model, roles, expand);
}

void write_csv(std::ostream& out, const Dataset& data) {
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    out << data.y_name << ',' << data.d_name;
    if (data.z) out << ',' << data.z_name;
    for (Eigen::Index j = 0; j < data.p(); ++j)
        out << ',' << (static_cast<std::size_t>(j) < data.x_names.size() ? data.x_names[static_cast<std::size_t>(j)]
                                                                        : "x" + std::to_string(j + 1));
    out << '\n';
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        out << data.y(i) << ',' << data.d(i);
        if (data.z) out << ',' << (*data.z)(i);
        for (Eigen::Index j = 0; j < data.p(); ++j) out << ',' << data.x(i, j);
        out << '\n';
    }
    out.precision(old);
}

Dataset expand_degree2(const Dataset& data) {
    const Eigen::Index p = data.p();
    std::vector<std::string> names = data.x_names;
    if (names.empty())
        for (Eigen::Index j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
    std::vector<Eigen::VectorXd> cols;
    std::vector<std::string> out_names;
    for (Eigen::Index j = 0; j < p; ++j) {
        cols.push_back(data.x.col(j));
        out_names.push_back(names[static_cast<std::size_t>(j)]);
    }
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index k = j; k < p; ++k) {
            if (k == j && is_binary(data.x.col(j))) continue;  // x^2 == x
            cols.push_back(data.x.col(j).cwiseProduct(data.x.col(k)));
            out_names.push_back(k == j ? names[static_cast<std::size_t>(j)] + "^2"
                                       : names[static_cast<std::size_t>(j)] + "*" + names[static_cast<std::size_t>(k)]);
        }
    }
    Dataset out = data;
    out.x.resize(data.n(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) out.x.col(static_cast<Eigen::Index>(c)) = cols[c];
    out.x_names = std::move(out_names);
    return out;
}

}  // namespace dml::cli

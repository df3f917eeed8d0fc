#include "gpe/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "gpe/errors.hpp"

namespace gpe {

namespace {

bool parse_number(const std::string& cell, double& out) {
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

Dataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd X,
                     std::vector<std::string> column_names) {
    if (X.rows() != y.size()) throw input_error("dataset: y and X row counts differ");
    if (X.rows() < 3) throw input_error("dataset: need at least 3 observations");
    if (X.cols() < 1) throw input_error("dataset: need at least 1 covariate");
    if (static_cast<Eigen::Index>(column_names.size()) != X.cols())
        throw input_error("dataset: column_names length must equal p");
    if (!y.allFinite() || !X.allFinite())
        throw input_error("dataset: NaN or Inf entry");
    std::unordered_set<std::string> seen;
    for (const auto& name : column_names) {
        if (!seen.insert(name).second)
            throw input_error("dataset: duplicate column: " + name);
    }
    return Dataset{std::move(y), std::move(X), std::move(column_names)};
}

Dataset load_csv(const std::string& path, const std::string& response,
                 const std::vector<std::string>& features) {
    std::ifstream in(path);
    if (!in) throw input_error("file not found: " + path);

    std::string line;
    if (!std::getline(in, line)) throw input_error("empty file: " + path);
    const std::vector<std::string> header = split_line(line);
    if (header.empty()) throw input_error("empty header row: " + path);

    std::unordered_map<std::string, int> index;
    for (int i = 0; i < static_cast<int>(header.size()); ++i) {
        if (!index.emplace(header[i], i).second)
            throw input_error("duplicate column: " + header[i]);
    }
    auto find_column = [&](const std::string& name) {
        auto it = index.find(name);
        if (it == index.end()) throw input_error("column not found: " + name);
        return it->second;
    };

    const int response_col = find_column(response);

    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != header.size()) {
            throw input_error("row " + std::to_string(rows.size() + 1) + ": expected " +
                              std::to_string(header.size()) + " cells, got " +
                              std::to_string(cells.size()));
        }
        rows.push_back(std::move(cells));
    }
    const int n = static_cast<int>(rows.size());
    if (n < 3) throw input_error("need at least 3 data rows, got " + std::to_string(n));

    // Resolve feature columns: explicit list, or all numeric non-response
    // columns in header order (first data row decides whether a column is
    // numeric).
    std::vector<int> feature_cols;
    if (!features.empty()) {
        std::unordered_set<std::string> requested;
        for (const auto& name : features) {
            if (!requested.insert(name).second)
                throw input_error("duplicate column: " + name);
            if (name == response)
                throw input_error("response column cannot be a feature: " + name);
            find_column(name);
        }
        for (int c = 0; c < static_cast<int>(header.size()); ++c)
            if (requested.count(header[c])) feature_cols.push_back(c);
    } else {
        double ignored;
        for (int c = 0; c < static_cast<int>(header.size()); ++c) {
            if (c == response_col) continue;
            if (parse_number(rows[0][c], ignored)) feature_cols.push_back(c);
        }
        if (feature_cols.empty())
            throw input_error("no numeric feature columns found in " + path);
    }

    auto parse_cell = [&](int r, int c) {
        double v;
        if (!parse_number(rows[r][c], v)) {
            throw input_error("row " + std::to_string(r + 1) + ", column " + header[c] +
                              ": cannot parse '" + rows[r][c] + "' as a number");
        }
        return v;
    };

    Eigen::VectorXd y(n);
    Eigen::MatrixXd X(n, static_cast<int>(feature_cols.size()));
    std::vector<std::string> names;
    names.reserve(feature_cols.size());
    for (int c : feature_cols) names.push_back(header[c]);
    for (int r = 0; r < n; ++r) {
        y[r] = parse_cell(r, response_col);
        for (int k = 0; k < static_cast<int>(feature_cols.size()); ++k)
            X(r, k) = parse_cell(r, feature_cols[k]);
    }
    return make_dataset(std::move(y), std::move(X), std::move(names));
}

void write_csv(const Dataset& data, const std::string& path,
               const std::string& response_name) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot open for writing: " + path);
    out << response_name;
    for (const auto& name : data.column_names) out << ',' << name;
    out << '\n';
    char buf[40];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf;
    };
    for (Eigen::Index r = 0; r < data.n(); ++r) {
        put(data.y[r]);
        for (Eigen::Index c = 0; c < data.p(); ++c) {
            out << ',';
            put(data.X(r, c));
        }
        out << '\n';
    }
}

FitFrame prepare(const Dataset& data, bool intercept,
                 const std::set<int>& ungrouped) {
    const int p = static_cast<int>(data.p());
    for (int j : ungrouped) {
        if (j < 0 || j >= p)
            throw input_error("prepare: ungrouped column index out of range: " +
                              std::to_string(j));
    }

    FitFrame frame;
    frame.data = data;
    frame.intercept = intercept;
    frame.ungrouped_columns = ungrouped;
    frame.column_means = Eigen::VectorXd::Zero(p);

    const double n = static_cast<double>(data.n());
    for (int j = 0; j < p; ++j) {
        const double mean = data.X.col(j).mean();
        const double var = (data.X.col(j).array() - mean).square().sum() / n;
        const bool is_groupable = ungrouped.count(j) == 0;
        if (var == 0.0 && (is_groupable || intercept))
            throw input_error("zero-variance column: " + data.column_names[j]);
    }

    if (intercept) {
        frame.centered = true;
        frame.column_means = data.X.colwise().mean();
        frame.y_mean = data.y.mean();
        frame.data.X.rowwise() -= frame.column_means.transpose();
        frame.data.y.array() -= frame.y_mean;
    }
    return frame;
}

}  // namespace gpe

#include "gpe/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gpe/errors.hpp"

namespace gpe {

namespace {

std::string full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot open for writing: " + path);
    return out;
}

}  // namespace

void write_report_csv(const SimulationReport& report, const std::string& path) {
    auto out = open_out(path);
    out << "estimator,mnb,mad,rmse,rej,med_model_size\n";
    for (const auto& row : report.rows) {
        out << row.name << ',' << full(row.mnb) << ',' << full(row.mad) << ','
            << full(row.rmse) << ',' << full(row.rej) << ','
            << full(row.med_model_size) << '\n';
    }
}

void write_report_json(const SimulationReport& report, const std::string& path) {
    nlohmann::json j;
    j["dgp"] = {{"name", to_string(report.dgp.name)},
                {"n", report.dgp.n},
                {"p", report.dgp.p},
                {"cns_literal_slope", report.dgp.cns_literal_slope},
                {"error_family", report.dgp.error_family()}};
    j["reps"] = report.reps;
    j["base_seed"] = report.base_seed;
    j["C"] = report.C;
    j["theta_true"] = report.theta_true;
    j["generator"] = report.generator;
    j["flags"] = {{"clamped_phi", report.clamped_phi},
                  {"selection_exhausted", report.selection_exhausted}};
    j["metrics"] = nlohmann::json::array();
    for (const auto& row : report.rows) {
        j["metrics"].push_back({{"estimator", row.name},
                                {"mnb", row.mnb},
                                {"mad", row.mad},
                                {"rmse", row.rmse},
                                {"rej", row.rej},
                                {"med_model_size", row.med_model_size},
                                {"failures", row.failures}});
    }
    if (report.keep_records) {
        j["records"] = nlohmann::json::object();
        for (std::size_t e = 0; e < report.records.size(); ++e) {
            nlohmann::json rows = nlohmann::json::array();
            for (const auto& rec : report.records[e]) {
                rows.push_back({{"beta_err", rec.beta_err},
                                {"theta_hat", rec.theta_hat},
                                {"se_theta", rec.se_theta},
                                {"model_size", rec.model_size},
                                {"ok", rec.ok}});
            }
            j["records"][report.record_names[e]] = std::move(rows);
        }
    }
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

std::string format_report_table(const SimulationReport& report) {
    std::ostringstream out;
    out << "DGP " << to_string(report.dgp.name) << "  n=" << report.dgp.n
        << "  p=" << report.dgp.p << "  reps=" << report.reps
        << "  C=" << fixed3(report.C) << "\n";
    char line[160];
    std::snprintf(line, sizeof(line), "%-10s %8s %8s %8s %8s %10s\n", "", "MnB",
                  "MAD", "RMSE", "Rej.", "med(k)");
    out << line;
    for (const auto& row : report.rows) {
        std::snprintf(line, sizeof(line), "%-10s %8s %8s %8s %8s %10g", row.name.c_str(),
                      fixed3(row.mnb).c_str(), fixed3(row.mad).c_str(),
                      fixed3(row.rmse).c_str(), fixed3(row.rej).c_str(),
                      row.med_model_size);
        out << line;
        if (row.failures > 0) out << "   [failures: " << row.failures << "]";
        out << "\n";
    }
    return out.str();
}

void write_power_csv(const std::vector<PowerPoint>& points, const std::string& path) {
    auto out = open_out(path);
    out << "estimator,h,rejection\n";
    for (const auto& pt : points)
        out << pt.estimator << ',' << full(pt.h) << ',' << full(pt.rejection) << '\n';
}

std::string format_power_table(const std::vector<PowerPoint>& points) {
    std::ostringstream out;
    char line[120];
    std::snprintf(line, sizeof(line), "%-10s %8s %10s\n", "", "h", "rejection");
    out << line;
    for (const auto& pt : points) {
        std::snprintf(line, sizeof(line), "%-10s %8s %10s\n", pt.estimator.c_str(),
                      fixed3(pt.h).c_str(), fixed3(pt.rejection).c_str());
        out << line;
    }
    return out.str();
}

}  // namespace gpe

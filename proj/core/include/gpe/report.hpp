#pragma once

#include <string>
#include <vector>

#include "gpe/simulation.hpp"

namespace gpe {

/// One row per estimator: estimator,mnb,mad,rmse,rej,med_model_size.
void write_report_csv(const SimulationReport& report, const std::string& path);

/// Full metadata: spec, seeds, generator name, flag counts, optional
/// replication records. Byte-identical across runs with the same inputs.
void write_report_json(const SimulationReport& report, const std::string& path);

/// Aligned text table in the column order MnB, MAD, RMSE, Rej., med(k).
std::string format_report_table(const SimulationReport& report);

void write_power_csv(const std::vector<PowerPoint>& points, const std::string& path);
std::string format_power_table(const std::vector<PowerPoint>& points);

}  // namespace gpe

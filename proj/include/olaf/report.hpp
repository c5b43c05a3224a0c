#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "olaf/config.hpp"
#include "olaf/sim.hpp"
#include "olaf/verify.hpp"

namespace olaf::report {

nlohmann::json metrics_json(const sim::RunMetrics& m, const sim::Scenario& s);
nlohmann::json fairness_json(const aom::FairnessReport& f);
nlohmann::json verdict_json(const verify::Verdict& v);

// Rows: cluster,t_s,aom_s at every sawtooth breakpoint.
std::string aom_csv(const sim::RunMetrics& m);

// Mean and sample standard deviation of every scalar in `runs` (looked up by key).
nlohmann::json summarize(const std::vector<nlohmann::json>& runs, const std::vector<std::string>& keys);

// Flat scalars used in summaries and sweep rows.
nlohmann::json scalars(const sim::RunMetrics& m, const sim::Scenario& s);

std::string summary_line(const std::string& label, const sim::RunMetrics& m, const sim::Scenario& s);

std::string gnuplot_aom(const std::string& csv_name);
std::string gnuplot_sweep(const std::string& csv_name, const std::string& param, const std::string& metric);

}  // namespace olaf::report

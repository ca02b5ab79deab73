#pragma once

#include <string>
#include <vector>

#include "kds/background.hpp"
#include "lab/config.hpp"
#include "lab/output.hpp"

namespace lab {

/// A subcommand: reads the validated config, writes artifacts and returns
/// its summary report. Failures throw kds::Error after writing whatever is
/// already known.
using Scenario = Json (*)(const ScenarioConfig&, Output&);

struct ScenarioEntry {
  std::string name;
  Scenario run;
  std::string summary;
};

const std::vector<ScenarioEntry>& scenarios();
const ScenarioEntry* find_scenario(const std::string& name);

Json run_horizons(const ScenarioConfig& c, Output& out);
Json run_verify_geometry(const ScenarioConfig& c, Output& out);
Json run_chart_report(const ScenarioConfig& c, Output& out);
Json run_evolve_scalar(const ScenarioConfig& c, Output& out);
Json run_evolve_tensor(const ScenarioConfig& c, Output& out);
Json run_evolve_nonlinear(const ScenarioConfig& c, Output& out);
Json run_project_initial_data(const ScenarioConfig& c, Output& out);
Json run_gauge_check(const ScenarioConfig& c, Output& out);
Json run_divergence_check(const ScenarioConfig& c, Output& out);
Json run_decay_fit(const ScenarioConfig& c, Output& out);
Json run_interp_check(const ScenarioConfig& c, Output& out);
Json run_convergence(const ScenarioConfig& c, Output& out);

/// max |Ric(g_b) + Lambda g_b| over the grid nodes in [r_event, r_cosmo],
/// difference step = radial grid spacing.
double einstein_residual(const ScenarioConfig& c, int n_r);

}  // namespace lab

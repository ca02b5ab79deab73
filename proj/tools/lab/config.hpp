#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "kds/geometry.hpp"
#include "kds/projection.hpp"

namespace lab {

using Json = nlohmann::ordered_json;

struct ParamsSection {
  double lambda = 3.0;
  double mass = 0.1;
  double spin = 0.0;
  double spin_cap = 0.1;
};

struct GridSection {
  int n_r = 64;
  int n_theta = 16;
  int mode_m = 0;
  double epsilon_ext_fraction = kds::kDefaultEpsilonFraction;
};

struct EvolutionSection {
  double cfl = 0.25;
  double t_end = 2.0;
  std::string t_end_units = "crossing_times";  // or "t_star"
  double dissipation = 0.01;
  int output_stride = 10;
  std::string rhs_kind = "scalar";  // scalar | tensor | nonlinear
};

/// Initial data. "pulse": amplitude exp(-((r - center)/width)^2)
/// sin^|m|(theta) P_l(cos theta) with zero time derivative (scalar runs).
/// "pure_gauge": the pullback of g_b by a compactly supported flow, with the
/// gauge-determined slots of h1 re-projected (tensor and nonlinear runs).
/// "bump": smooth data on every axis-regular slot, then projected.
struct DataSection {
  std::string kind = "pulse";
  double amplitude = 1e-3;
  double center = 0.544;
  double width = 0.06;
  int l = 0;
  double beta = 0.5;
  double a_weight = 1.0;
  double b_weight = 0.6;
};

struct AnalysisSection {
  std::string decay_multiplier = "N";
  double decay_window_start = 0.5;  // fraction of the run where the fit starts
  bool refine = true;               // decay-fit: repeat on the 2x grid
  std::vector<double> projection_amplitudes = {1e-2, 1e-3};
  std::vector<double> remainder_epsilons = {1e-2, 5e-3, 2.5e-3};
  int coercivity_samples = 64;
  int interp_l = 3;
  int interp_N = 6;
  int interp_K = 16;
  int interp_samples = 10000;
};

struct ScenarioConfig {
  ParamsSection params;
  GridSection grid;
  EvolutionSection evolution;
  std::vector<std::string> multipliers = {"T", "N"};
  std::vector<int> norms = {1, 2};
  std::uint64_t seed = 1;
  DataSection data;
  AnalysisSection analysis;
};

/// Strict parse: every key must be known and every value valid. Missing keys
/// keep their defaults. Throws kds::Error(ConfigError) naming the key.
ScenarioConfig parse_config(const Json& j);
ScenarioConfig load_config(const std::string& path);
void validate(const ScenarioConfig& c);

/// Full config with defaults filled in.
Json to_json(const ScenarioConfig& c);

kds::BlackHoleParams make_params(const ScenarioConfig& c);
kds::HorizonData make_horizons(const ScenarioConfig& c, const kds::BlackHoleParams& p);
kds::PureGaugeSpec make_pure_gauge(const DataSection& d);

}  // namespace lab

#include "lab/thresholds.hpp"

#include "kds/error.hpp"

namespace lab {

const std::vector<Threshold>& thresholds() {
  static const std::vector<Threshold> table = {
      {"geometry.inverse_residual", 1e-12, "max |g g^-1 - I| over sampled nodes"},
      {"geometry.delta_at_horizons", 1e-12, "|Delta_b| at r_event and r_cosmo"},
      {"geometry.killing_deformation", 1e-10, "max |pi^T|, |pi^Phi| over sampled nodes"},
      {"geometry.gauge_self", 1e-12, "max |Upsilon(g_b, g_b)| over sampled nodes"},
      {"geometry.ricci_fd", 1e-5, "max |Ric + Lambda g| with difference step 1e-3 off the caps"},
      {"geometry.runtime_s", 10.0, "identity suite wall time"},
      {"einstein.order", 3.5, "measured order of max |Ric + Lambda g| on each pair of n_r 64, 128, 256"},
      {"einstein.residual_256", 1e-6, "max |Ric + Lambda g| at n_r = 256"},
      {"einstein.runtime_s", 120.0, "Einstein-solution check wall time"},
      {"chart.middle_F", 1e-14, "max |F| on the middle interval"},
      {"divergence.residual_128", 1e-3, "normalized balance residual at n_r = 128"},
      {"divergence.shrink", 6.0, "residual(128) / residual(256)"},
      {"divergence.runtime_s", 300.0, "divergence check wall time"},
      {"redshift.coercivity_ratio", 1e3, "C / c of the N slice energy on random fields"},
      {"projection.floor_ratio", 10.0, "linearized constraint after projection over stencil floor"},
      {"projection.quadratic_min", 80.0, "two-amplitude ratio, lower bound"},
      {"projection.quadratic_max", 120.0, "two-amplitude ratio, upper bound"},
      {"remainder.shrink_min", 3.5, "quadratic remainder shrink per halving, lower bound"},
      {"remainder.shrink_max", 4.5, "quadratic remainder shrink per halving, upper bound"},
      {"constraint.shrink", 8.0, "max |Upsilon| at t_end, coarse over fine"},
      {"constraint.crossings", 5.0, "run length in crossing times"},
      {"constraint.amplitude", 1e-3, "data amplitude"},
      {"decay.resolution_rel", 0.10, "relative rate change between two resolutions"},
      {"decay.spin_rel", 0.20, "relative rate change from a = 0 to a = 1e-4"},
      {"decay.runtime_s", 600.0, "decay runs wall time"},
      {"interp.max_excess", 1e-12, "max ratio - 1 over random fields"},
      {"interp.single_frequency", 1e-12, "|ratio - 1| on single-frequency fields"},
  };
  return table;
}

double threshold(std::string_view name) {
  for (const Threshold& t : thresholds())
    if (t.name == name) return t.value;
  kds::fail(kds::ErrorCode::InvalidArgument, "no threshold named " + std::string(name));
}

Json thresholds_json() {
  Json entries = Json::object();
  for (const Threshold& t : thresholds()) entries[t.name] = {{"value", t.value}, {"meaning", t.meaning}};
  return {{"version", std::string(kThresholdVersion)}, {"entries", entries}};
}

}  // namespace lab

#include "lab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "kds/error.hpp"

namespace lab {

namespace {

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
  kds::fail(kds::ErrorCode::ConfigError, key + ": " + what);
}

// Reads the keys of one JSON object and rejects the ones nobody asked for.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) config_error(path_.empty() ? "<root>" : path_, "must be an object");
  }

  std::string key(const std::string& name) const { return path_.empty() ? name : path_ + "." + name; }

  const Json* find(const std::string& name) {
    seen_.insert(name);
    const auto it = j_.find(name);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& name, double& out) {
    if (const Json* v = find(name)) {
      if (!v->is_number()) config_error(key(name), "must be a number");
      out = v->get<double>();
      if (!std::isfinite(out)) config_error(key(name), "must be finite");
    }
  }

  void integer(const std::string& name, int& out) {
    if (const Json* v = find(name)) {
      if (!v->is_number_integer()) config_error(key(name), "must be an integer");
      const auto x = v->get<long long>();
      if (x < -1000000000LL || x > 1000000000LL) config_error(key(name), "out of range");
      out = static_cast<int>(x);
    }
  }

  void boolean(const std::string& name, bool& out) {
    if (const Json* v = find(name)) {
      if (!v->is_boolean()) config_error(key(name), "must be true or false");
      out = v->get<bool>();
    }
  }

  void string(const std::string& name, std::string& out) {
    if (const Json* v = find(name)) {
      if (!v->is_string()) config_error(key(name), "must be a string");
      out = v->get<std::string>();
    }
  }

  template <class T>
  void list(const std::string& name, std::vector<T>& out) {
    if (const Json* v = find(name)) {
      if (!v->is_array()) config_error(key(name), "must be an array");
      out.clear();
      for (const Json& e : *v) {
        if constexpr (std::is_same_v<T, std::string>) {
          if (!e.is_string()) config_error(key(name), "entries must be strings");
        } else if constexpr (std::is_integral_v<T>) {
          if (!e.is_number_integer()) config_error(key(name), "entries must be integers");
        } else {
          if (!e.is_number()) config_error(key(name), "entries must be numbers");
        }
        out.push_back(e.get<T>());
      }
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) config_error(key(it.key()), "unknown key");
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& key, const std::string& constraint) {
  if (!ok) config_error(key, "violates " + constraint);
}

bool one_of(const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return true;
  return false;
}

}  // namespace

ScenarioConfig parse_config(const Json& j) {
  ScenarioConfig c;
  Section root(j, "");
  if (const Json* v = root.find("params")) {
    Section s(*v, "params");
    s.number("lambda", c.params.lambda);
    s.number("mass", c.params.mass);
    s.number("spin", c.params.spin);
    s.number("spin_cap", c.params.spin_cap);
    s.finish();
  }
  if (const Json* v = root.find("grid")) {
    Section s(*v, "grid");
    s.integer("n_r", c.grid.n_r);
    s.integer("n_theta", c.grid.n_theta);
    s.integer("mode_m", c.grid.mode_m);
    s.number("epsilon_ext_fraction", c.grid.epsilon_ext_fraction);
    s.finish();
  }
  if (const Json* v = root.find("evolution")) {
    Section s(*v, "evolution");
    s.number("cfl", c.evolution.cfl);
    s.number("t_end", c.evolution.t_end);
    s.string("t_end_units", c.evolution.t_end_units);
    s.number("dissipation", c.evolution.dissipation);
    s.integer("output_stride", c.evolution.output_stride);
    s.string("rhs_kind", c.evolution.rhs_kind);
    s.finish();
  }
  root.list("multipliers", c.multipliers);
  root.list("norms", c.norms);
  if (const Json* v = root.find("seed")) {
    if (!v->is_number_unsigned()) config_error("seed", "must be a non-negative integer");
    c.seed = v->get<std::uint64_t>();
  }
  if (const Json* v = root.find("data")) {
    Section s(*v, "data");
    s.string("kind", c.data.kind);
    s.number("amplitude", c.data.amplitude);
    s.number("center", c.data.center);
    s.number("width", c.data.width);
    s.integer("l", c.data.l);
    s.number("beta", c.data.beta);
    s.number("a_weight", c.data.a_weight);
    s.number("b_weight", c.data.b_weight);
    s.finish();
  }
  if (const Json* v = root.find("analysis")) {
    Section s(*v, "analysis");
    s.string("decay_multiplier", c.analysis.decay_multiplier);
    s.number("decay_window_start", c.analysis.decay_window_start);
    s.boolean("refine", c.analysis.refine);
    s.list("projection_amplitudes", c.analysis.projection_amplitudes);
    s.list("remainder_epsilons", c.analysis.remainder_epsilons);
    s.integer("coercivity_samples", c.analysis.coercivity_samples);
    s.integer("interp_l", c.analysis.interp_l);
    s.integer("interp_N", c.analysis.interp_N);
    s.integer("interp_K", c.analysis.interp_K);
    s.integer("interp_samples", c.analysis.interp_samples);
    s.finish();
  }
  root.finish();
  validate(c);
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) kds::fail(kds::ErrorCode::IoError, "cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  Json j;
  try {
    j = Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    kds::fail(kds::ErrorCode::ConfigError, std::string("<root>: malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

void validate(const ScenarioConfig& c) {
  require(c.params.lambda > 0.0, "params.lambda", "lambda > 0");
  require(c.params.mass > 0.0, "params.mass", "mass > 0");
  require(c.params.spin >= 0.0, "params.spin", "spin >= 0");
  require(c.params.spin_cap > 0.0, "params.spin_cap", "spin_cap > 0");

  require(c.grid.n_r >= 16 && c.grid.n_r <= 4097, "grid.n_r", "16 <= n_r <= 4097");
  require(c.grid.n_theta >= 16 && c.grid.n_theta <= 1024, "grid.n_theta", "16 <= n_theta <= 1024");
  require(std::abs(c.grid.mode_m) <= 64, "grid.mode_m", "|mode_m| <= 64");
  require(c.grid.epsilon_ext_fraction > 0.0 && c.grid.epsilon_ext_fraction < 0.25,
          "grid.epsilon_ext_fraction", "0 < epsilon_ext_fraction < 0.25");

  require(c.evolution.cfl > 0.0 && c.evolution.cfl < 1.0, "evolution.cfl", "0 < cfl < 1");
  require(c.evolution.t_end >= 0.0, "evolution.t_end", "t_end >= 0");
  require(one_of(c.evolution.t_end_units, {"crossing_times", "t_star"}), "evolution.t_end_units",
          "one of crossing_times, t_star");
  require(c.evolution.dissipation >= 0.0 && c.evolution.dissipation < 1.0, "evolution.dissipation",
          "0 <= dissipation < 1");
  require(c.evolution.output_stride >= 1, "evolution.output_stride", "output_stride >= 1");
  require(one_of(c.evolution.rhs_kind, {"scalar", "tensor", "nonlinear"}), "evolution.rhs_kind",
          "one of scalar, tensor, nonlinear");

  require(!c.multipliers.empty(), "multipliers", "at least one entry");
  std::set<std::string> names;
  for (const auto& m : c.multipliers) {
    require(one_of(m, {"T", "N", "Phi"}), "multipliers", "entries in T, N, Phi");
    require(names.insert(m).second, "multipliers", "unique entries");
  }
  for (int k : c.norms) require(k >= 0, "norms", "entries >= 0");

  require(one_of(c.data.kind, {"pulse", "pure_gauge", "bump"}), "data.kind", "one of pulse, pure_gauge, bump");
  require(c.data.width > 0.0, "data.width", "width > 0");
  require(c.data.l >= 0 && c.data.l <= 32, "data.l", "0 <= l <= 32");

  require(one_of(c.analysis.decay_multiplier, {"T", "N"}), "analysis.decay_multiplier", "one of T, N");
  require(c.analysis.decay_window_start >= 0.0 && c.analysis.decay_window_start < 1.0,
          "analysis.decay_window_start", "0 <= decay_window_start < 1");
  require(c.analysis.projection_amplitudes.size() == 2 && c.analysis.projection_amplitudes[0] > 0.0 &&
              c.analysis.projection_amplitudes[1] > 0.0,
          "analysis.projection_amplitudes", "two positive amplitudes");
  require(c.analysis.remainder_epsilons.size() >= 2, "analysis.remainder_epsilons", "at least two entries");
  for (double e : c.analysis.remainder_epsilons)
    require(e > 0.0, "analysis.remainder_epsilons", "positive entries");
  require(c.analysis.coercivity_samples >= 1, "analysis.coercivity_samples", "coercivity_samples >= 1");
  require(c.analysis.interp_l >= 0, "analysis.interp_l", "interp_l >= 0");
  require(c.analysis.interp_N > c.analysis.interp_l + 2, "analysis.interp_N", "interp_N > interp_l + 2");
  require(c.analysis.interp_K >= 1, "analysis.interp_K", "interp_K >= 1");
  require(c.analysis.interp_samples >= 1, "analysis.interp_samples", "interp_samples >= 1");
}

Json to_json(const ScenarioConfig& c) {
  Json j;
  j["params"] = {{"lambda", c.params.lambda},
                 {"mass", c.params.mass},
                 {"spin", c.params.spin},
                 {"spin_cap", c.params.spin_cap}};
  j["grid"] = {{"n_r", c.grid.n_r},
               {"n_theta", c.grid.n_theta},
               {"mode_m", c.grid.mode_m},
               {"epsilon_ext_fraction", c.grid.epsilon_ext_fraction}};
  j["evolution"] = {{"cfl", c.evolution.cfl},
                    {"t_end", c.evolution.t_end},
                    {"t_end_units", c.evolution.t_end_units},
                    {"dissipation", c.evolution.dissipation},
                    {"output_stride", c.evolution.output_stride},
                    {"rhs_kind", c.evolution.rhs_kind}};
  j["multipliers"] = c.multipliers;
  j["norms"] = c.norms;
  j["seed"] = c.seed;
  j["data"] = {{"kind", c.data.kind},         {"amplitude", c.data.amplitude}, {"center", c.data.center},
               {"width", c.data.width},       {"l", c.data.l},                 {"beta", c.data.beta},
               {"a_weight", c.data.a_weight}, {"b_weight", c.data.b_weight}};
  j["analysis"] = {{"decay_multiplier", c.analysis.decay_multiplier},
                   {"decay_window_start", c.analysis.decay_window_start},
                   {"refine", c.analysis.refine},
                   {"projection_amplitudes", c.analysis.projection_amplitudes},
                   {"remainder_epsilons", c.analysis.remainder_epsilons},
                   {"coercivity_samples", c.analysis.coercivity_samples},
                   {"interp_l", c.analysis.interp_l},
                   {"interp_N", c.analysis.interp_N},
                   {"interp_K", c.analysis.interp_K},
                   {"interp_samples", c.analysis.interp_samples}};
  return j;
}

kds::BlackHoleParams make_params(const ScenarioConfig& c) {
  return kds::validate_params(c.params.lambda, c.params.mass, c.params.spin, c.params.spin_cap);
}

kds::HorizonData make_horizons(const ScenarioConfig& c, const kds::BlackHoleParams& p) {
  const kds::HorizonData h = kds::horizon_radii(p);
  return kds::horizon_radii(p, c.grid.epsilon_ext_fraction * h.span());
}

kds::PureGaugeSpec make_pure_gauge(const DataSection& d) {
  kds::PureGaugeSpec s;
  s.amplitude = d.amplitude;
  s.beta = d.beta;
  s.center = d.center;
  s.width = d.width;
  s.a_weight = d.a_weight;
  s.b_weight = d.b_weight;
  return s;
}

}  // namespace lab

#include "lab/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "kds/analysis.hpp"
#include "kds/currents.hpp"
#include "kds/projection.hpp"
#include "lab/thresholds.hpp"

namespace lab {

using namespace kds;

namespace {

struct Setup {
  BlackHoleParams p;
  HorizonData h;
  ChartProfile prof;
  Grid2D grid;
  Setup(const ScenarioConfig& c, int n_r)
      : p(make_params(c)),
        h(make_horizons(c, p)),
        prof(chart_profile_build(p, h)),
        grid(build_grid(h, n_r, c.grid.n_theta, c.grid.mode_m)) {}
};

struct Check {
  Json report = Json::array();
  std::vector<std::string> failed;

  void below(const std::string& name, double value, double limit) {
    const bool ok = value < limit;
    report.push_back({{"name", name}, {"value", value}, {"threshold", limit}, {"relation", "<"}, {"pass", ok}});
    if (!ok) failed.push_back(name);
  }
  void at_most(const std::string& name, double value, double limit) {
    const bool ok = value <= limit;
    report.push_back({{"name", name}, {"value", value}, {"threshold", limit}, {"relation", "<="}, {"pass", ok}});
    if (!ok) failed.push_back(name);
  }
  void flag(const std::string& name, bool ok) {
    report.push_back({{"name", name}, {"pass", ok}});
    if (!ok) failed.push_back(name);
  }
  void throw_if_failed() const {
    if (failed.empty()) return;
    std::string names;
    for (const auto& f : failed) names += (names.empty() ? "" : ", ") + f;
    fail(ErrorCode::ThresholdExceeded, "checks above threshold: " + names);
  }
};

double max_abs(const Mat4& m) { return m.cwiseAbs().maxCoeff(); }

double max_abs(const std::vector<cd>& v) {
  double m = 0.0;
  for (const cd& z : v) m = std::max(m, std::abs(z));
  return m;
}

std::string tag(const char* prefix, int n) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%d", prefix, n);
  return buf;
}

std::string snapshot_stem(std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snapshots/snap_%06zu", index);
  return buf;
}

std::vector<std::string> component_names(int ncomp) {
  if (ncomp == 1) return {"u"};
  static const char* axes[4] = {"t", "r", "theta", "phi"};
  std::vector<std::string> out;
  for (int c = 0; c < ncomp; ++c)
    out.push_back(std::string("h_") + axes[kSymPairs[c].first] + "_" + axes[kSymPairs[c].second]);
  return out;
}

double t_end_of(const ScenarioConfig& c, const Background& bg) {
  return c.evolution.t_end_units == "t_star" ? c.evolution.t_end : c.evolution.t_end * crossing_time(bg);
}

EvolutionConfig evolution_config(const ScenarioConfig& c, double t_end) {
  EvolutionConfig e;
  e.cfl = c.evolution.cfl;
  e.t_end = t_end;
  e.dissipation_strength = c.evolution.dissipation;
  e.output_stride = c.evolution.output_stride;
  return e;
}

Json grid_json(const Grid2D& g) {
  return {{"n_r", g.n_r},         {"n_theta", g.n_theta},     {"mode_m", g.mode_m},
          {"r_min", g.r_min},     {"r_max", g.r_max},         {"spacing_r", g.spacing_r},
          {"spacing_theta", g.spacing_theta}};
}

Multiplier named_multiplier(const std::string& name, const ChartProfile& prof) {
  if (name == "T") return make_multiplier(killing_T());
  if (name == "Phi") return make_multiplier(killing_Phi());
  return redshift_multiplier_build(prof).multiplier;
}

void write_snapshots(Output& out, const EvolutionResult& res, const Grid2D& g) {
  if (!out.enabled()) return;
  const auto names = component_names(res.snapshots.empty() ? 1 : res.snapshots.front().ncomp);
  for (std::size_t q = 0; q < res.snapshots.size(); ++q) out.snapshot(snapshot_stem(q), res.snapshots[q], g, names);
}

Json run_json(const EvolutionResult& res, double t_end, double crossing) {
  Json j = {{"dt", res.dt},
            {"steps", res.steps},
            {"t_end", t_end},
            {"crossing_time", crossing},
            {"snapshots", res.snapshots.size()},
            {"aborted", res.aborted}};
  if (res.aborted) j["abort_reason"] = res.abort_reason;
  return j;
}

void throw_if_aborted(const EvolutionResult& res) {
  if (res.aborted) fail(res.abort_code.value_or(ErrorCode::NonFiniteState), res.abort_reason);
}

// ---------------------------------------------------------------------------
// Initial data

StateVector scalar_pulse(const Grid2D& g, const DataSection& d) {
  StateVector s(1, g.size());
  const int m = std::abs(g.mode_m);
  for (int i = 0; i < g.n_r; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      const double r = g.r(i), th = g.theta(j);
      const double radial = std::exp(-std::pow((r - d.center) / d.width, 2));
      const double angular = std::pow(std::sin(th), m) * std::legendre(d.l, std::cos(th));
      s.u[g.index(i, j)] = d.amplitude * radial * angular;
    }
  return s;
}

// Smooth data on every slot that is regular at the axis without a phi* mate.
StateVector tensor_bump(const Grid2D& g, const DataSection& d) {
  StateVector s(10, g.size());
  for (int c = 0; c < 10; ++c) {
    const auto [a, b] = kSymPairs[c];
    if ((a == kPhi) != (b == kPhi)) continue;
    for (int i = 0; i < g.n_r; ++i)
      for (int j = 0; j < g.n_theta; ++j) {
        const double r = g.r(i), th = g.theta(j);
        double ang = 1.0 + 0.3 * std::cos(2.0 * th);
        if ((a == kTheta) != (b == kTheta)) ang = std::sin(th) * std::cos(th);
        if (a == kPhi) ang = r * r * std::pow(std::sin(th), 2);
        if (a == kTheta && b == kTheta) ang = r * r;
        const double bump = std::exp(-std::pow((r - d.center) / d.width, 2));
        const std::size_t k = g.index(i, j);
        s.u_comp(c)[k] = d.amplitude * (1.0 + 0.1 * c) * bump * ang;
        s.v_comp(c)[k] = d.amplitude * (0.5 - 0.05 * c) * bump * ang;
      }
  }
  return s;
}

StateVector raw_tensor_data(const ScenarioConfig& c, const Background& bg) {
  if (c.data.kind == "pure_gauge") return pure_gauge_data(bg, make_pure_gauge(c.data));
  if (c.data.kind == "bump") return tensor_bump(bg.grid(), c.data);
  fail(ErrorCode::ConfigError, "data.kind: pulse is scalar data; tensor runs take pure_gauge or bump");
}

// ---------------------------------------------------------------------------
// Scalar runs with per-step current diagnostics

struct ScalarRun {
  EvolutionResult res;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  double t_end = 0.0;
  double crossing = 0.0;
};

ScalarRun scalar_run(const ScenarioConfig& c, const Setup& s, const Background& bg, bool diagnostics,
                     std::optional<double> t_end_override = {}, int stride_override = 0) {
  ScalarRun run;
  run.crossing = crossing_time(bg);
  run.t_end = t_end_override.value_or(t_end_of(c, bg));
  EvolutionConfig e = evolution_config(c, run.t_end);
  if (stride_override > 0) e.output_stride = stride_override;
  const ScalarWave wave(bg);
  const int parity = scalar_parity(s.grid.mode_m);

  std::vector<std::unique_ptr<CurrentProbe>> probes;
  if (diagnostics) {
    run.header.push_back("t_star");
    for (const auto& name : c.multipliers) {
      probes.push_back(std::make_unique<CurrentProbe>(bg, named_multiplier(name, s.prof)));
      run.header.push_back("E_" + name);
    }
    for (const char* col : {"flux_inner", "flux_outer", "bulk_K", "identity_residual"}) run.header.push_back(col);
    for (int k : c.norms) run.header.push_back(tag("hk", k));
  }
  double e0 = 0.0, integral = 0.0, prev_rate = 0.0, prev_t = 0.0;
  StepObserver observer;
  if (diagnostics)
    observer = [&](const StateVector& st) {
      std::vector<double> row{st.t_star};
      for (const auto& p : probes) row.push_back(p->slice_energy(st));
      const auto flux = probes.front()->cap_flux_rates(st);
      const double bulk = probes.front()->bulk_rate(st);
      const double rate = flux.inner + flux.outer + bulk;
      if (run.rows.empty()) {
        e0 = row[1];
      } else {
        integral += 0.5 * (st.t_star - prev_t) * (rate + prev_rate);
      }
      prev_rate = rate;
      prev_t = st.t_star;
      row.push_back(flux.inner);
      row.push_back(flux.outer);
      row.push_back(bulk);
      row.push_back(e0 != 0.0 ? std::abs(row[1] - e0 + integral) / std::abs(e0) : 0.0);
      for (int k : c.norms) row.push_back(hk_norm(bg, st.u.data(), parity, k));
      run.rows.push_back(std::move(row));
    };
  run.res = evolve(scalar_pulse(s.grid, c.data), e, wave, observer);
  return run;
}

int refined(int n) { return 2 * (n - 1) + 1; }

// Two-stage restriction from 4x to 1x.
std::vector<cd> restrict_twice(const Grid2D& fine, const Grid2D& mid, const Grid2D& coarse, const cd* u) {
  const std::vector<cd> m = restrict_to_coarse(fine, u, mid);
  return restrict_to_coarse(mid, m.data(), coarse);
}

std::vector<cd> restrict_state(const Grid2D& fine, const Grid2D& coarse, const StateVector& s,
                               const Grid2D* mid = nullptr) {
  std::vector<cd> out;
  for (int c = 0; c < s.ncomp; ++c) {
    const auto part = mid ? restrict_twice(fine, *mid, coarse, s.u_comp(c)) : restrict_to_coarse(fine, s.u_comp(c), coarse);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

double einstein_residual(const ScenarioConfig& c, int n_r) {
  const Setup s(c, n_r);
  const Grid2D& g = s.grid;
  double worst = 0.0;
  for (int i = 0; i < g.n_r; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      if (g.r(i) < s.h.r_event || g.r(i) > s.h.r_cosmo) continue;
      const SpacetimePoint x{0.0, g.r(i), g.theta(j), 0.0, Chart::KerrStar};
      worst = std::max(worst, max_abs(ricci(s.prof, x, g.spacing_r) + s.p.lambda * metric_kerr_star(s.prof, x).g));
    }
  return worst;
}

Json run_horizons(const ScenarioConfig& c, Output& out) {
  const BlackHoleParams p = make_params(c);
  const HorizonData h = make_horizons(c, p);
  Json j = {{"lambda", p.lambda},
            {"mass", p.mass},
            {"spin", p.spin},
            {"roots", h.roots},
            {"r_negative", h.r_negative},
            {"r_event", h.r_event},
            {"r_cosmo", h.r_cosmo},
            {"epsilon_ext", h.epsilon_ext},
            {"r_inner_cap", h.r_inner_cap},
            {"r_outer_cap", h.r_outer_cap},
            {"subextremality_margin", 1.0 - 9.0 * p.lambda * p.mass * p.mass},
            {"subextremal", true}};
  out.json("horizons.json", j);
  return j;
}

Json run_verify_geometry(const ScenarioConfig& c, Output& out) {
  const Setup s(c, c.grid.n_r);
  const Grid2D& g = s.grid;
  const Vectorfield T = killing_T(), Phi = killing_Phi();
  double inv = 0.0, piT = 0.0, piPhi = 0.0, self = 0.0, ric = 0.0, ergo = -1e300;
  std::size_t ricci_nodes = 0;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < g.n_r; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      const SpacetimePoint x{0.0, g.r(i), g.theta(j), 0.0, Chart::KerrStar};
      const MetricJet jet = metric_kerr_star(s.prof, x);
      inv = std::max(inv, max_abs(jet.g * jet.g_inv - Mat4::Identity()));
      piT = std::max(piT, max_abs(deformation_tensor(T, jet, x)));
      piPhi = std::max(piPhi, max_abs(deformation_tensor(Phi, jet, x)));
      self = std::max(self, constraint_op(jet, jet).cwiseAbs().maxCoeff());
      const double e = ergosphere_indicator(s.prof, x);
      ergo = std::max(ergo, e);
      double r_res = std::nan("");
      if (x.r - 2e-3 >= s.h.r_inner_cap && x.r + 2e-3 <= s.h.r_outer_cap) {
        r_res = max_abs(ricci(s.prof, x, 1e-3) + s.p.lambda * jet.g);
        ric = std::max(ric, r_res);
        ++ricci_nodes;
      }
      const double md = s.p.spin == 0.0 ? s.p.mu(x.r) : s.p.delta(x.r);
      rows.push_back({x.r, x.theta, md, jet.g(kT, kT), g_inv_dtdt(s.prof, x), e, r_res});
    }
  out.csv("geometry.csv", {"r", "theta", "mu_or_delta", "g_tt", "g_inv_dtdt", "ergo_indicator", "ricci_residual"},
          rows);

  const RedshiftMultiplier N = redshift_multiplier_build(s.prof);
  const Background bg(s.prof, g);
  const CurrentProbe probe(bg, N.multiplier);
  const Coercivity co = measure_coercivity(probe, static_cast<std::size_t>(c.analysis.coercivity_samples), c.seed);

  Check chk;
  chk.below("inverse_residual", inv, threshold("geometry.inverse_residual"));
  chk.below("delta_at_r_event", std::abs(s.p.delta(s.h.r_event)), threshold("geometry.delta_at_horizons"));
  chk.below("delta_at_r_cosmo", std::abs(s.p.delta(s.h.r_cosmo)), threshold("geometry.delta_at_horizons"));
  chk.below("deformation_T", piT, threshold("geometry.killing_deformation"));
  chk.below("deformation_Phi", piPhi, threshold("geometry.killing_deformation"));
  chk.below("upsilon_self", self, threshold("geometry.gauge_self"));
  chk.below("ricci_fd", ric, threshold("geometry.ricci_fd"));
  chk.flag("redshift_timelike", N.delta > 0.0);
  chk.below("coercivity_ratio", co.c > 0.0 ? co.C / co.c : INFINITY, threshold("redshift.coercivity_ratio"));
  Json j = {{"grid", grid_json(g)},
            {"inverse_residual", inv},
            {"delta_at_r_event", s.p.delta(s.h.r_event)},
            {"delta_at_r_cosmo", s.p.delta(s.h.r_cosmo)},
            {"deformation_T_max", piT},
            {"deformation_Phi_max", piPhi},
            {"upsilon_self_max", self},
            {"ricci_residual_max", ric},
            {"ricci_step", 1e-3},
            {"ricci_nodes", ricci_nodes},
            {"ergo_indicator_max", ergo},
            {"redshift", {{"delta", N.delta},
                          {"r_at_max", N.r_at_max},
                          {"blend_interval", {N.blend_interval.first, N.blend_interval.second}},
                          {"coercivity_c", co.c},
                          {"coercivity_C", co.C},
                          {"coercivity_samples", co.samples}}},
            {"checks", chk.report}};
  out.json("geometry.json", j);
  chk.throw_if_failed();
  return j;
}

Json run_chart_report(const ScenarioConfig& c, Output& out) {
  const Setup s(c, c.grid.n_r);
  const HorizonData& h = s.h;
  // Regularity across both horizons on a fine radial sweep.
  std::size_t nonfinite = 0, sampled = 0;
  std::vector<double> rs;
  const int n_sweep = 2001;
  for (int q = 0; q < n_sweep; ++q) rs.push_back(h.r_inner_cap + (h.r_outer_cap - h.r_inner_cap) * q / (n_sweep - 1));
  rs.push_back(h.r_event);
  rs.push_back(h.r_cosmo);
  for (double r : rs)
    for (double th : {0.3, 0.5 * std::numbers::pi, 2.8}) {
      const MetricJet jet = metric_kerr_star(s.prof, SpacetimePoint{0.0, r, th, 0.0, Chart::KerrStar});
      bool ok = jet.g.allFinite() && jet.g_inv.allFinite();
      for (const Mat4& d : jet.dg) ok = ok && d.allFinite();
      nonfinite += ok ? 0 : 1;
      ++sampled;
    }
  // G(dt*, dt*) on every node of the extended grid.
  double g_tt_max = -1e300;
  for (int i = 0; i < s.grid.n_r; ++i)
    for (int j = 0; j < s.grid.n_theta; ++j) {
      const MetricJet jet =
          metric_kerr_star(s.prof, SpacetimePoint{0.0, s.grid.r(i), s.grid.theta(j), 0.0, Chart::KerrStar});
      g_tt_max = std::max(g_tt_max, jet.g_inv(kT, kT));
    }
  const auto [r1, r2] = s.prof.middle_interval();
  double f_max = 0.0, fp_max = 0.0;
  for (int q = 0; q <= 200; ++q) {
    const double r = r1 + (r2 - r1) * q / 200.0;
    f_max = std::max(f_max, std::abs(s.prof.F(r)));
    fp_max = std::max(fp_max, std::abs(s.prof.F_prime(r)));
  }
  std::vector<std::vector<double>> rows;
  for (int q = 0; q < 401; ++q) {
    const double r = h.r_inner_cap + (h.r_outer_cap - h.r_inner_cap) * q / 400.0;
    const SpacetimePoint x{0.0, r, 0.5 * std::numbers::pi, 0.0, Chart::KerrStar};
    rows.push_back({r, s.prof.s(r), s.prof.ds(r), s.prof.F_prime(r), s.prof.Phi_prime(r),
                    metric_kerr_star(s.prof, x).g_inv(kT, kT), ergosphere_indicator(s.prof, x)});
  }
  out.csv("chart.csv", {"r", "s", "ds", "F_prime", "Phi_prime", "G_dt_dt", "ergo_indicator"}, rows);

  Check chk;
  chk.flag("finite_across_horizons", nonfinite == 0);
  chk.flag("dt_timelike_on_grid", g_tt_max < 0.0);
  chk.at_most("F_on_middle_interval", f_max, threshold("chart.middle_F"));
  const auto [gmin, gmax] = s.prof.gfrak_bounds();
  Json j = {{"grid", grid_json(s.grid)},
            {"middle_interval", {r1, r2}},
            {"inner_transition_start", s.prof.inner_transition_start()},
            {"outer_transition_end", s.prof.outer_transition_end()},
            {"spacelike_margin", s.prof.spacelike_margin()},
            {"gfrak_bounds", {gmin, gmax}},
            {"horizon_sweep_samples", sampled},
            {"horizon_sweep_nonfinite", nonfinite},
            {"G_dt_dt_max", g_tt_max},
            {"F_middle_max", f_max},
            {"F_prime_middle_max", fp_max},
            {"checks", chk.report}};
  out.json("chart.json", j);
  chk.throw_if_failed();
  return j;
}

Json run_evolve_scalar(const ScenarioConfig& c, Output& out) {
  const Setup s(c, c.grid.n_r);
  const Background bg(s.prof, s.grid);
  ScalarRun run = scalar_run(c, s, bg, true);
  out.csv("energy.csv", run.header, run.rows);
  write_snapshots(out, run.res, s.grid);
  Json j = run_json(run.res, run.t_end, run.crossing);
  j["grid"] = grid_json(s.grid);
  Json last = Json::object();
  if (!run.rows.empty())
    for (std::size_t q = 1; q < run.header.size(); ++q) last[run.header[q]] = run.rows.back()[q];
  j["final"] = last;
  out.json("evolve.json", j);
  throw_if_aborted(run.res);
  return j;
}

namespace {

Json tensor_evolution(const ScenarioConfig& c, Output& out, bool nonlinear) {
  const Setup s(c, c.grid.n_r);
  const Background bg(s.prof, s.grid, true);
  const StateVector raw = raw_tensor_data(c, bg);
  const StateVector data = nonlinear ? gauge_project_slice_nonlinear(raw, bg) : gauge_project_slice(raw, bg);
  std::unique_ptr<WaveSystem> sys;
  if (nonlinear)
    sys = std::make_unique<NonlinearEinstein>(bg);
  else
    sys = std::make_unique<InducedLinearWave>(bg, InducedLinearWave::Kind::LinearizedEinstein);
  const double t_end = t_end_of(c, bg);
  const EvolutionResult res = evolve(data, evolution_config(c, t_end), *sys);

  std::vector<std::string> header{"t_star", nonlinear ? "upsilon_max" : "linearized_constraint_max", "h_max"};
  for (int k : c.norms) header.push_back(tag("hk", k));
  std::vector<std::vector<double>> rows;
  for (const StateVector& st : res.snapshots) {
    std::vector<double> row{st.t_star,
                            nonlinear ? nonlinear_constraint_max(st, bg) : linearized_constraint_residual(st, bg).max_residual,
                            max_abs(st.u)};
    for (int k : c.norms) row.push_back(hk_norm(bg, st, sym_slot_parity, k));
    rows.push_back(std::move(row));
  }
  out.csv("series.csv", header, rows);
  write_snapshots(out, res, s.grid);
  Json j = run_json(res, t_end, crossing_time(bg));
  j["grid"] = grid_json(s.grid);
  j["data_kind"] = c.data.kind;
  j[header[1] + "_initial"] = rows.front()[1];
  j[header[1] + "_final"] = rows.back()[1];
  j["h_max_final"] = rows.back()[2];
  out.json(nonlinear ? "evolve_nonlinear.json" : "evolve_tensor.json", j);
  throw_if_aborted(res);
  return j;
}

}  // namespace

Json run_evolve_tensor(const ScenarioConfig& c, Output& out) { return tensor_evolution(c, out, false); }

Json run_evolve_nonlinear(const ScenarioConfig& c, Output& out) { return tensor_evolution(c, out, true); }

Json run_project_initial_data(const ScenarioConfig& c, Output& out) {
  const Setup s(c, c.grid.n_r);
  const Background bg(s.prof, s.grid, true);
  const StateVector raw = raw_tensor_data(c, bg);
  ConstraintResidual after;
  const ConstraintResidual before = linearized_constraint_residual(raw, bg);
  const StateVector lin = gauge_project_slice(raw, bg, &after);
  const StateVector nl = gauge_project_slice_nonlinear(raw, bg);
  std::vector<cd> diff(lin.v.size());
  for (std::size_t q = 0; q < diff.size(); ++q) diff[q] = lin.v[q] - nl.v[q];
  const auto names = component_names(10);
  out.snapshot("data_raw", raw, s.grid, names);
  out.snapshot("data_projected", lin, s.grid, names);
  out.snapshot("data_projected_nonlinear", nl, s.grid, names);
  Json j = {{"grid", grid_json(s.grid)},
            {"data_kind", c.data.kind},
            {"amplitude", c.data.amplitude},
            {"linearized_residual_before", before.max_residual},
            {"linearized_residual_after", after.max_residual},
            {"stencil_floor", after.max_floor},
            {"residual_over_floor", after.max_ratio},
            {"nonlinear_constraint_raw", nonlinear_constraint_max(raw, bg)},
            {"nonlinear_constraint_projected", nonlinear_constraint_max(nl, bg)},
            {"linear_vs_nonlinear_h1_max", max_abs(diff)}};
  out.json("projection.json", j);
  return j;
}

Json run_gauge_check(const ScenarioConfig& c, Output& out) {
  const Setup s(c, c.grid.n_r);
  const Background bg(s.prof, s.grid, true);
  ConstraintResidual res;
  gauge_project_slice(raw_tensor_data(c, bg), bg, &res);

  // Gap between the linear projection and a nonlinearly constrained
  // configuration, at two amplitudes.
  auto gap = [&](double amp) {
    ScenarioConfig ca = c;
    ca.data.amplitude = amp;
    const StateVector constrained = gauge_project_slice_nonlinear(raw_tensor_data(ca, bg), bg);
    const StateVector proj = gauge_project_slice(constrained, bg);
    std::vector<cd> d(proj.v.size());
    for (std::size_t q = 0; q < d.size(); ++q) d[q] = proj.v[q] - constrained.v[q];
    return max_abs(d);
  };
  const auto& amps = c.analysis.projection_amplitudes;
  const double gap0 = gap(amps[0]), gap1 = gap(amps[1]);

  // Quadratic remainder E(g_b + eps h) - E(g_b) - eps L h on unit-amplitude data.
  ScenarioConfig cu = c;
  cu.data.amplitude = 1.0;
  const StateVector unit = raw_tensor_data(cu, bg);
  const auto jets = component_jets(unit, s.grid, sym_slot_parity, sym_axis_power);
  Json remainders = Json::array();
  std::vector<double> rem;
  for (double eps : c.analysis.remainder_epsilons) {
    double worst = 0.0;
    for (std::size_t k = 0; k < s.grid.size(); ++k) {
      const SymJet h = to_symjet(jets[k]);
      const Mat4 e0 = gauge_fixed_einstein(bg.jet(k), bg.ref(k), bg.lambda());
      const Mat4 e1 = gauge_fixed_einstein(perturbed(bg.jet(k), h, eps), bg.ref(k), bg.lambda());
      const Mat4 lin = linearized_einstein(h, bg.jet(k), bg.ref(k), bg.lambda());
      worst = std::max(worst, max_abs(e1 - e0 - eps * lin));
    }
    rem.push_back(worst);
    remainders.push_back({{"epsilon", eps}, {"remainder_max", worst}});
  }
  Json shrink = Json::array();
  for (std::size_t q = 0; q + 1 < rem.size(); ++q) shrink.push_back(rem[q] / rem[q + 1]);

  Json j = {{"grid", grid_json(s.grid)},
            {"data_kind", c.data.kind},
            {"constraint_residual_max", res.max_residual},
            {"stencil_floor_max", res.max_floor},
            {"projection_residual_max", res.max_ratio},
            {"quadratic_ratio", gap0 / gap1},
            {"quadratic_amplitudes", amps},
            {"quadratic_gaps", {gap0, gap1}},
            {"remainders", remainders},
            {"remainder_shrink", shrink}};
  out.json("gauge_check.json", j);
  return j;
}

Json run_divergence_check(const ScenarioConfig& c, Output& out) {
  const Setup s(c, c.grid.n_r);
  const Background bg(s.prof, s.grid);
  ScalarRun run = scalar_run(c, s, bg, true, {}, 1);
  out.csv("energy.csv", run.header, run.rows);
  throw_if_aborted(run.res);
  const CurrentProbe probe(bg, named_multiplier(c.multipliers.front(), s.prof));
  const DivergenceReport rep = divergence_residual(probe, run.res.snapshots, 0, run.res.snapshots.size() - 1);
  Json j = {{"grid", grid_json(s.grid)},
            {"multiplier", c.multipliers.front()},
            {"corrector", 0.0},
            {"dt", run.res.dt},
            {"steps", run.res.steps},
            {"t1", rep.t1},
            {"t2", rep.t2},
            {"e1", rep.e1},
            {"e2", rep.e2},
            {"flux_inner", rep.flux_inner},
            {"flux_outer", rep.flux_outer},
            {"bulk", rep.bulk},
            {"residual", rep.residual}};
  out.json("divergence.json", j);
  return j;
}

Json run_decay_fit(const ScenarioConfig& c, Output& out) {
  ScenarioConfig cd = c;
  cd.multipliers = {c.analysis.decay_multiplier};
  cd.norms = {};
  std::vector<int> levels{c.grid.n_r};
  if (c.analysis.refine) levels.push_back(refined(c.grid.n_r));
  Json fits = Json::array();
  std::vector<double> rates;
  for (int n : levels) {
    const Setup s(cd, n);
    const Background bg(s.prof, s.grid);
    ScalarRun run = scalar_run(cd, s, bg, true, {}, std::numeric_limits<int>::max());
    throw_if_aborted(run.res);
    std::vector<double> t, e;
    std::vector<std::vector<double>> rows;
    for (const auto& row : run.rows) {
      t.push_back(row[0]);
      e.push_back(row[1]);
      rows.push_back({row[0], row[1]});
    }
    out.csv(tag("decay_energy_n", n) + ".csv", {"t_star", "E_" + c.analysis.decay_multiplier}, rows);
    const double t0 = c.analysis.decay_window_start * run.t_end;
    const DecayFit fit = decay_rate_fit(t, e, std::make_pair(t0, run.t_end), tag("n_r=", n));
    rates.push_back(fit.rate);
    fits.push_back({{"resolution_tag", fit.resolution_tag},
                    {"n_r", n},
                    {"rate", fit.rate},
                    {"rate_energy", fit.rate_energy},
                    {"amplitude", fit.amplitude},
                    {"window", {fit.window.first, fit.window.second}},
                    {"residual", fit.residual},
                    {"samples", fit.samples}});
  }
  Json j = {{"multiplier", c.analysis.decay_multiplier}, {"decay_fits", fits}};
  if (rates.size() == 2) j["relative_change"] = std::abs(rates[1] - rates[0]) / std::abs(rates[0]);
  out.json("decay.json", j);
  return j;
}

Json run_interp_check(const ScenarioConfig& c, Output& out) {
  const auto& a = c.analysis;
  const auto fields = random_spectral_fields(static_cast<std::size_t>(a.interp_samples), a.interp_K, c.seed);
  const InterpolationReport rep = interpolation_check(fields, a.interp_l, a.interp_N);
  double single = 0.0;
  for (int k = -a.interp_K; k <= a.interp_K; ++k)
    single = std::max(single, std::abs(interpolation_ratio(single_frequency_field(a.interp_K, k), a.interp_l, a.interp_N) - 1.0));
  Json j = {{"l", rep.l},
            {"N", rep.N},
            {"theta", rep.theta},
            {"K", a.interp_K},
            {"samples", rep.samples},
            {"interpolation_max_ratio", rep.max_ratio},
            {"interpolation_min_ratio", rep.min_ratio},
            {"single_frequency_max_deviation", single}};
  out.json("interp.json", j);
  return j;
}

Json run_convergence(const ScenarioConfig& c, Output& out) {
  const int n0 = c.grid.n_r, n1 = refined(n0), n2 = refined(n1);
  const std::string kind = c.evolution.rhs_kind;
  std::vector<Setup> setups{Setup(c, n0), Setup(c, n1), Setup(c, n2)};
  std::vector<StateVector> finals;
  double t_end = 0.0;
  for (std::size_t q = 0; q < 3; ++q) {
    const Setup& s = setups[q];
    const Background bg(s.prof, s.grid, kind != "scalar");
    if (q == 0) t_end = t_end_of(c, bg);
    EvolutionConfig e = evolution_config(c, t_end);
    e.output_stride = std::numeric_limits<int>::max();
    EvolutionResult res;
    if (kind == "scalar") {
      res = evolve(scalar_pulse(s.grid, c.data), e, ScalarWave(bg));
    } else if (kind == "tensor") {
      const InducedLinearWave sys(bg, InducedLinearWave::Kind::LinearizedEinstein);
      res = evolve(gauge_project_slice(raw_tensor_data(c, bg), bg), e, sys);
    } else {
      const NonlinearEinstein sys(bg);
      res = evolve(gauge_project_slice_nonlinear(raw_tensor_data(c, bg), bg), e, sys);
    }
    throw_if_aborted(res);
    finals.push_back(res.snapshots.back());
  }
  const std::vector<cd> u0(finals[0].u.begin(), finals[0].u.end());
  const std::vector<cd> u1 = restrict_state(setups[1].grid, setups[0].grid, finals[1]);
  const std::vector<cd> u2 = restrict_state(setups[2].grid, setups[0].grid, finals[2], &setups[1].grid);
  const ConvergenceOrder field = convergence_order(u0, u1, u2);

  const std::vector<int> ns{n0, 2 * n0, 4 * n0};
  std::vector<double> res;
  for (int n : ns) res.push_back(einstein_residual(c, n));
  Json orders = Json::array();
  orders.push_back({{"quantity", kind + " field u at t_end (self-convergence)"},
                    {"n_r", {n0, n1, n2}},
                    {"order", field.order},
                    {"coarse_diff", field.coarse_diff},
                    {"fine_diff", field.fine_diff},
                    {"monotone", field.monotone}});
  orders.push_back({{"quantity", "max |Ric + Lambda g| (exact solution)"},
                    {"n_r", ns},
                    {"residuals", res},
                    {"order", std::log2(res[1] / res[2])},
                    {"order_coarse", std::log2(res[0] / res[1])}});
  Json j = {{"t_end", t_end}, {"convergence_orders", orders}};
  out.json("convergence.json", j);
  if (!field.monotone) fail(ErrorCode::NonMonotoneRefinement, "field differences grow under refinement");
  return j;
}

const std::vector<ScenarioEntry>& scenarios() {
  static const std::vector<ScenarioEntry> list = {
      {"horizons", run_horizons, "horizon radii, caps and subextremality"},
      {"verify-geometry", run_verify_geometry, "metric, Killing, gauge, Ricci and redshift identities"},
      {"chart-report", run_chart_report, "Kerr-star chart regularity and profile"},
      {"evolve-scalar", run_evolve_scalar, "scalar wave run with energy currents"},
      {"evolve-tensor", run_evolve_tensor, "linearized gauge-fixed Einstein run"},
      {"evolve-nonlinear", run_evolve_nonlinear, "nonlinear gauge-fixed Einstein run"},
      {"project-initial-data", run_project_initial_data, "gauge projection of slice data"},
      {"gauge-check", run_gauge_check, "projection residual, quadraticity and remainder"},
      {"divergence-check", run_divergence_check, "divergence identity balance of a scalar run"},
      {"decay-fit", run_decay_fit, "exponential decay rate of the slice energy"},
      {"interp-check", run_interp_check, "interpolation inequality on the spectral toy"},
      {"convergence", run_convergence, "self-convergence and Einstein residual orders"},
  };
  return list;
}

const ScenarioEntry* find_scenario(const std::string& name) {
  for (const auto& e : scenarios())
    if (e.name == name) return &e;
  return nullptr;
}

}  // namespace lab

#include "kds/evolution.hpp"

#include <cmath>
#include <limits>

#include "kds/parallel.hpp"

namespace kds {

StateVector::StateVector(int ncomp_, std::size_t nodes_)
    : ncomp(ncomp_), nodes(nodes_), u(ncomp_ * nodes_, cd(0.0)), v(ncomp_ * nodes_, cd(0.0)) {}

bool StateVector::finite() const {
  for (const cd& x : u)
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
  for (const cd& x : v)
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
  return true;
}

void validate(const EvolutionConfig& cfg) {
  if (!(cfg.cfl > 0.0 && cfg.cfl < 1.0)) fail(ErrorCode::InvalidArgument, "cfl must lie in (0, 1)");
  if (!(cfg.t_end >= 0.0)) fail(ErrorCode::InvalidArgument, "t_end must be >= 0");
  if (cfg.stencil_order != 4) fail(ErrorCode::InvalidArgument, "only stencil_order 4 is implemented");
  if (!(cfg.dissipation_strength >= 0.0))
    fail(ErrorCode::InvalidArgument, "dissipation_strength must be >= 0");
  if (cfg.output_stride < 1) fail(ErrorCode::InvalidArgument, "output_stride must be >= 1");
}

// ---------------------------------------------------------------------------
// Jets from grid fields

std::vector<Eigen::MatrixXd> component_jets(const StateVector& s, const Grid2D& g,
                                            const std::function<int(int)>& parity,
                                            const std::function<int(int)>& axis_power) {
  const std::size_t n = g.size();
  std::vector<Eigen::MatrixXd> jets(n, Eigen::MatrixXd::Zero(kNumSlots, s.ncomp));
  std::vector<cd> u(n), v(n), dr(n), dth(n), drr(n), dthth(n), drth(n), vdr(n), vdth(n);
  for (int c = 0; c < s.ncomp; ++c) {
    const int pw = axis_power ? axis_power(c) : 0;
    const int p = pw % 2 == 0 ? parity(c) : -parity(c);
    for (int i = 0; i < g.n_r; ++i)
      for (int j = 0; j < g.n_theta; ++j) {
        const std::size_t k = g.index(i, j);
        const double S = std::pow(std::sin(g.theta(j)), pw);
        u[k] = s.u_comp(c)[k] / S;
        v[k] = s.v_comp(c)[k] / S;
      }
    diff_r(g, u.data(), dr.data());
    diff_theta(g, u.data(), p, dth.data());
    diff_rr(g, u.data(), drr.data());
    diff_thetatheta(g, u.data(), p, dthth.data());
    diff_r(g, dth.data(), drth.data());
    diff_r(g, v.data(), vdr.data());
    diff_theta(g, v.data(), p, vdth.data());
    for (int i = 0; i < g.n_r; ++i)
      for (int j = 0; j < g.n_theta; ++j) {
        const std::size_t k = g.index(i, j);
        // S = sin^p, S' and S'' in theta.
        const double sn = std::sin(g.theta(j)), cs = std::cos(g.theta(j));
        const double S = std::pow(sn, pw);
        const double S1 = pw == 0 ? 0.0 : pw * std::pow(sn, pw - 1) * cs;
        const double S2 = pw == 0 ? 0.0 : pw * (pw - 1) * std::pow(sn, pw - 2) * cs * cs - pw * S;
        auto& J = jets[k];
        J(kVal, c) = S * u[k].real();
        J(kDt, c) = S * v[k].real();
        J(kDr, c) = S * dr[k].real();
        J(kDth, c) = S1 * u[k].real() + S * dth[k].real();
        J(kDtr, c) = S * vdr[k].real();
        J(kDtth, c) = S1 * v[k].real() + S * vdth[k].real();
        J(kDrr, c) = S * drr[k].real();
        J(kDrth, c) = S1 * dr[k].real() + S * drth[k].real();
        J(kDthth, c) = S2 * u[k].real() + 2.0 * S1 * dth[k].real() + S * dthth[k].real();
      }
  }
  return jets;
}

int sym_axis_power(int comp) { return tensor_axis_power(kSymPairs[comp].first, kSymPairs[comp].second); }

namespace {

// (slot, first index, second index) for the derivative slots.
struct SlotIndex {
  int slot, a, b;
};
constexpr SlotIndex kFirst[] = {{kDt, kT, -1}, {kDr, kR, -1}, {kDth, kTheta, -1}};
constexpr SlotIndex kSecond[] = {{kDtt, kT, kT},   {kDtr, kT, kR},       {kDtth, kT, kTheta},
                                 {kDrr, kR, kR},   {kDrth, kR, kTheta}, {kDthth, kTheta, kTheta}};

}  // namespace

SymJet to_symjet(const Eigen::MatrixXd& jet) {
  SymJet h;
  for (int c = 0; c < 10; ++c) {
    const auto [a, b] = kSymPairs[c];
    auto set = [&](Mat4& m, double v) {
      m(a, b) = v;
      m(b, a) = v;
    };
    set(h.h, jet(kVal, c));
    for (const auto& f : kFirst) set(h.dh[f.a], jet(f.slot, c));
    for (const auto& s : kSecond) {
      set(h.d2h[s.a][s.b], jet(s.slot, c));
      set(h.d2h[s.b][s.a], jet(s.slot, c));
    }
  }
  return h;
}

OneFormJet to_oneform_jet(const Eigen::MatrixXd& jet) {
  OneFormJet w;
  for (int c = 0; c < 4; ++c) {
    w.w(c) = jet(kVal, c);
    for (const auto& f : kFirst) w.dw(f.a, c) = jet(f.slot, c);
    for (const auto& s : kSecond) {
      w.d2w[c](s.a, s.b) = jet(s.slot, c);
      w.d2w[c](s.b, s.a) = jet(s.slot, c);
    }
  }
  return w;
}

namespace {

Eigen::VectorXd sym_to_vec(const Mat4& m) {
  Eigen::VectorXd v(10);
  for (int c = 0; c < 10; ++c) v(c) = m(kSymPairs[c].first, kSymPairs[c].second);
  return v;
}

}  // namespace

bool slices_spacelike(const Mat4& g) {
  const Mat4 gi = invert_metric(g);
  if (!(gi(0, 0) < 0.0)) return false;
  Eigen::LLT<Eigen::Matrix3d> llt(g.block<3, 3>(1, 1));
  return llt.info() == Eigen::Success;
}

void require_sds_axisymmetric(const Background& bg) {
  if (bg.params().spin != 0.0 || bg.grid().mode_m != 0)
    fail(ErrorCode::UnsupportedBackground,
         "tensor evolution is implemented for a = 0 and m = 0 only");
}

namespace {

// Radial part of box u in conservative form,
//   (1/sqrt g)[d_r(sqrt g G^rr d_r u) + d_r(sqrt g G^tr v) + sqrt g G^tr d_r v]
// plus the same split for G^{r phi*} with d_phi* = i m. Only first-derivative
// stencils are used; the mixed terms are skew.
void radial_principal(const Background& bg, const cd* u, const cd* v, std::vector<cd>& out) {
  const Grid2D& g = bg.grid();
  const std::size_t n = g.size();
  const cd im(0.0, static_cast<double>(g.mode_m));
  std::vector<cd> a(n), b(n), da(n), db(n), ur(n), vr(n);
  diff_r(g, u, ur.data());
  diff_r(g, v, vr.data());
  for (std::size_t k = 0; k < n; ++k) {
    const NodeGeometry& nd = bg.node(k);
    a[k] = nd.sqrt_det * nd.g_inv(1, 1) * ur[k];
    b[k] = nd.sqrt_det * (nd.g_inv(0, 1) * v[k] + nd.g_inv(1, 3) * im * u[k]);
  }
  diff_r(g, a.data(), da.data());
  diff_r(g, b.data(), db.data());
  out.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const NodeGeometry& nd = bg.node(k);
    out[k] = (da[k] + db[k]) / nd.sqrt_det + nd.g_inv(0, 1) * vr[k] + nd.g_inv(1, 3) * im * ur[k];
  }
}

// The same radial terms in nondivergence form on a real jet; the difference
// to radial_principal is what the tensor systems swap out.
double radial_nondivergence(const NodeGeometry& nd, const Eigen::MatrixXd& jet, int c) {
  const Mat4& G = nd.g_inv;
  return G(1, 1) * jet(kDrr, c) + 2.0 * G(0, 1) * jet(kDtr, c) + nd.W(1) * jet(kDr, c) + nd.W(0) * jet(kDt, c);
}

std::vector<std::vector<cd>> radial_parts(const Background& bg, const StateVector& s) {
  std::vector<std::vector<cd>> rad(s.ncomp);
  for (int c = 0; c < s.ncomp; ++c) radial_principal(bg, s.u_comp(c), s.v_comp(c), rad[c]);
  return rad;
}

}  // namespace

// ---------------------------------------------------------------------------
// Scalar wave

ScalarWave::ScalarWave(const Background& bg, Forcing forcing)
    : WaveSystem(bg), forcing_(std::move(forcing)) {}

int ScalarWave::parity(int) const { return scalar_parity(bg_.grid().mode_m); }

void ScalarWave::rhs(const StateVector& s, StateVector& out) const {
  const Grid2D& g = bg_.grid();
  const std::size_t n = g.size();
  const int p = parity(0);
  const cd im(0.0, static_cast<double>(g.mode_m));
  std::vector<cd> rad(n), uth(n), uthth(n);
  radial_principal(bg_, s.u.data(), s.v.data(), rad);
  diff_theta(g, s.u.data(), p, uth.data());
  diff_thetatheta(g, s.u.data(), p, uthth.data());
  out.ncomp = 1;
  out.nodes = n;
  out.u = s.v;
  out.v.resize(n);
  for (int i = 0; i < g.n_r; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      const std::size_t k = g.index(i, j);
      const NodeGeometry& nd = bg_.node(k);
      const Mat4& G = nd.g_inv;
      const cd u = s.u[k], v = s.v[k];
      cd rest = rad[k] + 2.0 * G(0, 3) * im * v + G(2, 2) * uthth[k] + G(3, 3) * im * im * u + nd.W(2) * uth[k];
      if (forcing_) rest -= forcing_(s.t_star, i, j);
      out.v[k] = -rest / G(0, 0);
    }
}

// ---------------------------------------------------------------------------
// Induced linear systems

InducedLinearWave::InducedLinearWave(const Background& bg, Kind kind)
    : WaveSystem(bg), kind_(kind), ncomp_(kind == Kind::LinearizedEinstein ? 10 : 4) {
  require_sds_axisymmetric(bg);
  if (!bg.has_second()) fail(ErrorCode::InvalidArgument, "induced operators need second-order background jets");
  const std::size_t n = bg.grid().size();
  coeff_.resize(n);
  tt_.resize(n);
  parallel_for(n, [&](std::size_t k) {
    const MetricJet& jet = bg.jet(k);
    std::array<Eigen::MatrixXd, kNumSlots> C;
    for (int s = 0; s < kNumSlots; ++s) {
      C[s].resize(ncomp_, ncomp_);
      for (int c = 0; c < ncomp_; ++c) {
        Eigen::MatrixXd unit = Eigen::MatrixXd::Zero(kNumSlots, ncomp_);
        unit(s, c) = 1.0;
        if (kind_ == Kind::LinearizedEinstein) {
          const SymJet h = to_symjet(unit);
          C[s].col(c) = sym_to_vec(linearized_einstein_fixed(h, jet, bg.ref(k), bg.lambda(),
                                                             linearization_step(jet, h)));
        } else {
          C[s].col(c) = constraint_propagation_box(to_oneform_jet(unit), jet);
        }
      }
    }
    tt_[k] = C[kDtt];
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(C[kDtt]);
    if (!(std::abs(C[kDtt].determinant()) > 0.0))
      fail(ErrorCode::DegenerateLapse, "second-time-derivative block is singular");
    for (int s = 0; s < kNumSlots; ++s)
      if (s != kDtt) coeff_[k][s] = -lu.solve(C[s]);
  });
}

int InducedLinearWave::parity(int comp) const {
  if (kind_ == Kind::LinearizedEinstein) return tensor_parity(kSymPairs[comp].first, kSymPairs[comp].second);
  return oneform_parity(comp);
}

void InducedLinearWave::rhs(const StateVector& s, StateVector& out) const {
  const Grid2D& g = bg_.grid();
  const auto jets = component_jets(s, g, [this](int c) { return parity(c); }, [this](int c) { return axis_power(c); });
  const auto rad = radial_parts(bg_, s);
  out.ncomp = ncomp_;
  out.nodes = g.size();
  out.u = s.v;
  out.v.assign(s.v.size(), cd(0.0));
  parallel_for(g.size(), [&](std::size_t k) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(ncomp_);
    for (int sl = 0; sl < kNumSlots; ++sl)
      if (sl != kDtt) acc.noalias() += coeff_[k][sl] * jets[k].row(sl).transpose();
    const NodeGeometry& nd = bg_.node(k);
    for (int c = 0; c < ncomp_; ++c)
      out.v[c * out.nodes + k] = acc(c) + (radial_nondivergence(nd, jets[k], c) - rad[c][k].real()) / nd.g_inv(0, 0);
  });
}

int InducedLinearWave::axis_power(int comp) const {
  return kind_ == Kind::LinearizedEinstein ? sym_axis_power(comp) : oneform_axis_power(comp);
}

// ---------------------------------------------------------------------------
// Nonlinear gauge-fixed Einstein

NonlinearEinstein::NonlinearEinstein(const Background& bg) : WaveSystem(bg) {
  require_sds_axisymmetric(bg);
  if (!bg.has_second()) fail(ErrorCode::InvalidArgument, "nonlinear evolution needs second-order background jets");
  background_residual_.resize(bg.grid().size());
  parallel_for(background_residual_.size(), [&](std::size_t k) {
    background_residual_[k] = gauge_fixed_einstein(bg.jet(k), bg.ref(k), bg.lambda());
  });
}

int NonlinearEinstein::parity(int comp) const {
  return tensor_parity(kSymPairs[comp].first, kSymPairs[comp].second);
}

int NonlinearEinstein::axis_power(int comp) const { return sym_axis_power(comp); }

void NonlinearEinstein::rhs(const StateVector& s, StateVector& out) const {
  const Grid2D& g = bg_.grid();
  const auto jets = component_jets(s, g, [this](int c) { return parity(c); }, [this](int c) { return axis_power(c); });
  const auto rad = radial_parts(bg_, s);
  out.ncomp = 10;
  out.nodes = g.size();
  out.u = s.v;
  out.v.assign(s.v.size(), cd(0.0));
  parallel_for(g.size(), [&](std::size_t k) {
    const MetricJet full = perturbed(bg_.jet(k), to_symjet(jets[k]), 1.0);
    if (!slices_spacelike(full.g))
      fail(ErrorCode::SignatureLost, "g_b + h lost its Lorentzian slicing at node " + std::to_string(k));
    const Mat4 e0 = gauge_fixed_einstein(full, bg_.ref(k), bg_.lambda()) - background_residual_[k];
    const double coef = -2.0 / full.g_inv(0, 0);
    const NodeGeometry& nd = bg_.node(k);
    for (int c = 0; c < 10; ++c)
      out.v[c * out.nodes + k] = coef * e0(kSymPairs[c].first, kSymPairs[c].second) +
                                 (radial_nondivergence(nd, jets[k], c) - rad[c][k].real()) / nd.g_inv(0, 0);
  });
}

void scalar_wave_rhs(const ScalarWave& sys, const StateVector& s, StateVector& out) { sys.rhs(s, out); }
void tensor_wave_rhs(const InducedLinearWave& sys, const StateVector& s, StateVector& out) { sys.rhs(s, out); }
void nonlinear_rhs(const NonlinearEinstein& sys, const StateVector& s, StateVector& out) { sys.rhs(s, out); }

// ---------------------------------------------------------------------------
// Time stepping

namespace {

void axpy(StateVector& y, const StateVector& x, double a) {
  for (std::size_t i = 0; i < y.u.size(); ++i) y.u[i] += a * x.u[i];
  for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] += a * x.v[i];
}

}  // namespace

StateVector rk4_step(const StateVector& s, const WaveSystem& sys, double dt, double dissipation) {
  if (dt == 0.0) return s;
  StateVector k1, k2, k3, k4;
  sys.rhs(s, k1);
  StateVector tmp = s;
  axpy(tmp, k1, 0.5 * dt);
  tmp.t_star = s.t_star + 0.5 * dt;
  sys.rhs(tmp, k2);
  tmp = s;
  axpy(tmp, k2, 0.5 * dt);
  tmp.t_star = s.t_star + 0.5 * dt;
  sys.rhs(tmp, k3);
  tmp = s;
  axpy(tmp, k3, dt);
  tmp.t_star = s.t_star + dt;
  sys.rhs(tmp, k4);
  StateVector out = s;
  axpy(out, k1, dt / 6.0);
  axpy(out, k2, dt / 3.0);
  axpy(out, k3, dt / 3.0);
  axpy(out, k4, dt / 6.0);
  out.t_star = s.t_star + dt;
  const Grid2D& g = sys.background().grid();
  for (int c = 0; c < out.ncomp; ++c) {
    const int pw = sys.axis_power(c);
    const int p = pw % 2 == 0 ? sys.parity(c) : -sys.parity(c);
    for (cd* f : {out.u_comp(c), out.v_comp(c)}) {
      if (pw == 0) {
        ko_filter(g, f, p, dissipation);
        continue;
      }
      for (int i = 0; i < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j) f[g.index(i, j)] /= std::pow(std::sin(g.theta(j)), pw);
      ko_filter(g, f, p, dissipation);
      for (int i = 0; i < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j) f[g.index(i, j)] *= std::pow(std::sin(g.theta(j)), pw);
    }
  }
  if (!out.finite()) fail(ErrorCode::NonFiniteState, "state became non-finite at t* = " + std::to_string(out.t_star));
  return out;
}

std::pair<double, double> max_speeds(const Background& bg) {
  double vr = 0.0, vt = 0.0;
  for (std::size_t k = 0; k < bg.grid().size(); ++k) {
    const Mat4& G = bg.node(k).g_inv;
    const double disc = std::max(0.0, G(0, 1) * G(0, 1) - G(0, 0) * G(1, 1));
    const double w1 = (-G(0, 1) + std::sqrt(disc)) / G(0, 0);
    const double w2 = (-G(0, 1) - std::sqrt(disc)) / G(0, 0);
    vr = std::max({vr, std::abs(w1), std::abs(w2)});
    vt = std::max(vt, std::sqrt(std::max(0.0, -G(2, 2) / G(0, 0))));
  }
  return {vr, vt};
}

double courant_dt(const Background& bg, double cfl) {
  const Grid2D& g = bg.grid();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Mat4& G = bg.node(k).g_inv;
    const double disc = std::max(0.0, G(0, 1) * G(0, 1) - G(0, 0) * G(1, 1));
    const double vr = std::max(std::abs((-G(0, 1) + std::sqrt(disc)) / G(0, 0)),
                               std::abs((-G(0, 1) - std::sqrt(disc)) / G(0, 0)));
    const double vt = std::sqrt(std::max(0.0, -G(2, 2) / G(0, 0)));
    if (vr > 0.0) best = std::min(best, g.spacing_r / vr);
    if (vt > 0.0) best = std::min(best, g.spacing_theta / vt);
  }
  return cfl * best;
}

double crossing_time(const Background& bg) {
  const Grid2D& g = bg.grid();
  return (g.r_max - g.r_min) / max_speeds(bg).first;
}

EvolutionResult evolve(const StateVector& initial, const EvolutionConfig& config,
                       const WaveSystem& sys, const StepObserver& observer,
                       std::optional<double> dt_override) {
  validate(config);
  EvolutionResult res;
  const double dt0 = dt_override.value_or(courant_dt(sys.background(), config.cfl));
  const int steps = config.t_end == 0.0 ? 0 : static_cast<int>(std::ceil(config.t_end / dt0 - 1e-9));
  res.dt = steps > 0 ? config.t_end / steps : dt0;
  StateVector s = initial;
  res.snapshots.push_back(s);
  if (observer) observer(s);
  for (int n = 1; n <= steps; ++n) {
    try {
      s = rk4_step(s, sys, res.dt, config.dissipation_strength);
      s.t_star = initial.t_star + n * res.dt;
    } catch (const Error& e) {
      res.aborted = true;
      res.abort_reason = e.what();
      res.abort_code = e.code();
      break;
    }
    res.steps = n;
    if (observer) observer(s);
    if (n % config.output_stride == 0 || n == steps) res.snapshots.push_back(s);
  }
  return res;
}

}  // namespace kds

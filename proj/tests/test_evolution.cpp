#include <cmath>

#include <Eigen/Dense>

#include "doctest.h"
#include "kds/analysis.hpp"
#include "kds/evolution.hpp"

using namespace kds;

namespace {

struct Family {
  BlackHoleParams p;
  HorizonData h;
  ChartProfile prof;
  explicit Family(double spin = 0.0)
      : p(validate_params(3.0, 0.1, spin)), h(horizon_radii(p)), prof(chart_profile_build(p, h)) {}
};

double bump(double r, double c, double w) { return std::exp(-std::pow((r - c) / w, 2)); }

StateVector radial_pulse(const Grid2D& g, double c = 0.55, double w = 0.06) {
  StateVector s(1, g.size());
  for (int i = 0; i < g.n_r; ++i)
    for (int j = 0; j < g.n_theta; ++j) s.u[g.index(i, j)] = bump(g.r(i), c, w);
  return s;
}

double max_abs(const std::vector<cd>& x) {
  double m = 0.0;
  for (const cd& z : x) m = std::max(m, std::abs(z));
  return m;
}

// u_tt = -omega^2 u pointwise; exercises rk4_step alone.
class Oscillator : public WaveSystem {
 public:
  Oscillator(const Background& bg, double omega) : WaveSystem(bg), w2_(omega * omega) {}
  int components() const override { return 1; }
  int parity(int) const override { return 1; }
  void rhs(const StateVector& s, StateVector& out) const override {
    out = s;
    out.u = s.v;
    for (std::size_t k = 0; k < s.u.size(); ++k) out.v[k] = -w2_ * s.u[k];
  }

 private:
  double w2_;
};

// Flat 1+1 wave u_tt = u_rr with the library radial stencils.
class FlatWave : public WaveSystem {
 public:
  using WaveSystem::WaveSystem;
  int components() const override { return 1; }
  int parity(int) const override { return 1; }
  void rhs(const StateVector& s, StateVector& out) const override {
    out = s;
    out.u = s.v;
    diff_rr(bg_.grid(), s.u.data(), out.v.data());
  }
};

// Radial-only SdS wave equation on Chebyshev nodes, written against the
// closed-form inverse metric: G^{tt} = -1/mu + mu F'^2, G^{tr} = -mu F',
// G^{rr} = mu with mu = 1 - 2M/r - Lambda r^2 / 3.
class ChebyshevRadial {
 public:
  ChebyshevRadial(const ChartProfile& prof, double r_min, double r_max, int n) : n_(n + 1) {
    Eigen::VectorXd x(n_);
    for (int j = 0; j < n_; ++j) x(j) = std::cos(M_PI * j / n);
    Eigen::MatrixXd D(n_, n_);
    auto c = [&](int j) { return ((j == 0 || j == n) ? 2.0 : 1.0) * ((j % 2) ? -1.0 : 1.0); };
    for (int i = 0; i < n_; ++i) {
      double diag = 0.0;
      for (int j = 0; j < n_; ++j)
        if (i != j) {
          D(i, j) = c(i) / c(j) / (x(i) - x(j));
          diag += D(i, j);
        }
      D(i, i) = -diag;
    }
    r_ = r_min + 0.5 * (x.array() + 1.0) * (r_max - r_min);
    D_ = D * (2.0 / (r_max - r_min));
    const double M = prof.params().mass, L = prof.params().lambda;
    g00_.resize(n_);
    a11_.resize(n_);
    a01_.resize(n_);
    g01_.resize(n_);
    for (int j = 0; j < n_; ++j) {
      const double r = r_(j), mu = 1.0 - 2.0 * M / r - L * r * r / 3.0, Fp = prof.F_prime(r);
      g00_(j) = -1.0 / mu + mu * Fp * Fp;
      g01_(j) = -mu * Fp;
      a11_(j) = r * r * mu;
      a01_(j) = r * r * g01_(j);
    }
  }
  const Eigen::VectorXd& r() const { return r_; }
  // (u, v) -> (v, v_t).
  void rhs(const Eigen::VectorXd& u, const Eigen::VectorXd& v, Eigen::VectorXd& du, Eigen::VectorXd& dv) const {
    const Eigen::VectorXd flux = D_ * (a11_.cwiseProduct(D_ * u)) + D_ * (a01_.cwiseProduct(v));
    const Eigen::VectorXd rest =
        flux.cwiseQuotient(r_.cwiseProduct(r_)) + g01_.cwiseProduct(D_ * v);
    du = v;
    dv = -rest.cwiseQuotient(g00_);
  }
  double spectral_radius_bound() const { return D_.cwiseAbs().rowwise().sum().maxCoeff(); }

 private:
  int n_;
  Eigen::VectorXd r_, g00_, g01_, a11_, a01_;
  Eigen::MatrixXd D_;
};

Eigen::VectorXd chebyshev_solution(const ChebyshevRadial& cr, const Eigen::VectorXd& u0, double t_end, int steps) {
  Eigen::VectorXd u = u0, v = Eigen::VectorXd::Zero(u0.size());
  const double dt = t_end / steps;
  Eigen::VectorXd k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
  for (int n = 0; n < steps; ++n) {
    cr.rhs(u, v, k1u, k1v);
    cr.rhs(u + 0.5 * dt * k1u, v + 0.5 * dt * k1v, k2u, k2v);
    cr.rhs(u + 0.5 * dt * k2u, v + 0.5 * dt * k2v, k3u, k3v);
    cr.rhs(u + dt * k3u, v + dt * k3v, k4u, k4v);
    u += dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  }
  return u;
}

// Barycentric evaluation on Chebyshev points of the second kind.
double chebyshev_eval(const Eigen::VectorXd& nodes, const Eigen::VectorXd& f, double r) {
  const int n = static_cast<int>(nodes.size());
  double num = 0.0, den = 0.0;
  for (int j = 0; j < n; ++j) {
    const double d = r - nodes(j);
    if (d == 0.0) return f(j);
    const double w = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == n - 1) ? 0.5 : 1.0) / d;
    num += w * f(j);
    den += w;
  }
  return num / den;
}

}  // namespace

TEST_CASE("grid spacing, staggering and guards") {
  Family f;
  const Grid2D g = build_grid(f.h, 64, 32, 2);
  CHECK(g.r_min == f.h.r_inner_cap);
  CHECK(g.r(63) == f.h.r_outer_cap);
  CHECK(g.spacing_r == doctest::Approx(0.0116938).epsilon(1e-5));
  CHECK(g.theta(0) == doctest::Approx(g.spacing_theta / 2.0).epsilon(1e-15));
  CHECK(g.theta(31) < M_PI);
  CHECK(g.mode_m == 2);
  try {
    build_grid(f.h, 15, 32, 0);
    FAIL("expected GridTooCoarse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridTooCoarse);
  }
  CHECK_THROWS_AS(build_grid(f.h, 32, 8, 0), Error);
}

TEST_CASE("rk4 order and dt = 0") {
  Family f;
  const Grid2D g = build_grid(f.h, 16, 16, 0);
  Background bg(f.prof, g);
  const double w = 3.0;
  Oscillator osc(bg, w);
  StateVector s(1, g.size());
  for (auto& x : s.u) x = 1.0;
  // The v error carries the dt^5 local term; the u error is one order higher.
  auto err = [&](double dt) {
    const StateVector o = rk4_step(s, osc, dt, 0.0);
    return std::abs(o.v[0] + w * std::sin(w * dt));
  };
  const double ratio = err(0.1) / err(0.05);
  CHECK(ratio > 28.0);
  CHECK(ratio < 36.0);
  const StateVector same = rk4_step(s, osc, 0.0, 0.01);
  CHECK(same.u == s.u);
  CHECK(same.v == s.v);
}

TEST_CASE("flat standing wave converges at fourth order") {
  Family f;
  const double k = 9.0, T = 0.1;
  auto error = [&](int n_r) {
    const Grid2D g = build_grid(f.h, n_r, 16, 0);
    Background bg(f.prof, g);
    FlatWave sys(bg);
    StateVector s(1, g.size());
    for (int i = 0; i < n_r; ++i)
      for (int j = 0; j < 16; ++j) s.u[g.index(i, j)] = std::cos(k * g.r(i));
    EvolutionConfig cfg;
    cfg.t_end = T;
    cfg.dissipation_strength = 0.0;
    const auto res = evolve(s, cfg, sys, {}, 0.25 * g.spacing_r);
    // Nodes outside the region reached from the open ends by time T.
    double e = 0.0;
    const StateVector& last = res.snapshots.back();
    for (int i = 0; i < n_r; ++i)
      if (g.r(i) > g.r_min + 2.0 * T && g.r(i) < g.r_max - 2.0 * T) e = std::max(e, std::abs(last.u[g.index(i, 0)] - std::cos(k * g.r(i)) * std::cos(k * T)));
    return e;
  };
  const double e1 = error(65), e2 = error(129);
  CHECK(e2 < 1e-5);
  CHECK(e1 / e2 > 12.0);
}

TEST_CASE("scalar rhs: constants are harmonic and dispersion matches the symbol") {
  Family f;
  const Grid2D g = build_grid(f.h, 128, 16, 0);
  Background bg(f.prof, g);
  ScalarWave sys(bg);
  StateVector c(1, g.size()), out;
  for (auto& x : c.u) x = cd(2.5, -1.0);
  sys.rhs(c, out);
  CHECK(max_abs(out.v) < 1e-10);
  CHECK(out.u == c.v);

  // Plane wave e^{ikr} with k dr = 0.2 at a node of the middle interval.
  const double k = 0.2 / g.spacing_r;
  StateVector w(1, g.size());
  for (int i = 0; i < g.n_r; ++i)
    for (int j = 0; j < g.n_theta; ++j) w.u[g.index(i, j)] = std::exp(cd(0.0, k * g.r(i)));
  sys.rhs(w, out);
  const int i = g.n_r / 2;
  const std::size_t node = g.index(i, 7);
  const Mat4& G = bg.node(node).g_inv;
  const double symbol = G(1, 1) * k * k / G(0, 0);
  const cd ratio = out.v[node] / w.u[node];
  CHECK(ratio.real() == doctest::Approx(symbol).epsilon(0.02));
}

TEST_CASE("spherical pulse matches an independent radial Chebyshev solver") {
  Family f;
  const double T = 0.3;
  const ChebyshevRadial cr(f.prof, f.h.r_inner_cap, f.h.r_outer_cap, 96);
  Eigen::VectorXd u0(cr.r().size());
  for (int j = 0; j < u0.size(); ++j) u0(j) = bump(cr.r()(j), 0.55, 0.06);
  const int steps = static_cast<int>(std::ceil(T * cr.spectral_radius_bound() / 1.5));
  const Eigen::VectorXd uc = chebyshev_solution(cr, u0, T, steps);
  const Eigen::VectorXd uc2 = chebyshev_solution(cr, u0, T, 2 * steps);
  CHECK((uc - uc2).cwiseAbs().maxCoeff() < 1e-10);

  auto error = [&](int n_r) {
    const Grid2D g = build_grid(f.h, n_r, 16, 0);
    Background bg(f.prof, g);
    ScalarWave sys(bg);
    EvolutionConfig cfg;
    cfg.t_end = T;
    cfg.dissipation_strength = 0.0;
    const auto res = evolve(radial_pulse(g), cfg, sys);
    const StateVector& last = res.snapshots.back();
    double e = 0.0;
    for (int i = 0; i < n_r; ++i) {
      const double ref = chebyshev_eval(cr.r(), uc, g.r(i));
      for (int j = 0; j < g.n_theta; ++j) e = std::max(e, std::abs(last.u[g.index(i, j)] - ref));
    }
    return e;
  };
  const double e1 = error(65), e2 = error(129);
  MESSAGE("radial oracle errors " << e1 << " " << e2);
  CHECK(e2 < 2e-4);
  CHECK(e1 / e2 > 10.0);
}

TEST_CASE("scalar self-convergence order") {
  Family f;
  std::vector<Grid2D> grids;
  std::vector<std::vector<cd>> finals;
  for (int n_r : {65, 129, 257}) {
    grids.push_back(build_grid(f.h, n_r, 16, 0));
    Background bg(f.prof, grids.back());
    ScalarWave sys(bg);
    EvolutionConfig cfg;
    cfg.t_end = 0.5;
    const auto res = evolve(radial_pulse(grids.back()), cfg, sys);
    CHECK_FALSE(res.aborted);
    finals.push_back(res.snapshots.back().u);
  }
  const auto mid = restrict_to_coarse(grids[1], finals[1].data(), grids[0]);
  const auto fine_mid = restrict_to_coarse(grids[2], finals[2].data(), grids[1]);
  const auto fine = restrict_to_coarse(grids[1], fine_mid.data(), grids[0]);
  const ConvergenceOrder ord = convergence_order(finals[0], mid, fine);
  MESSAGE("self-convergence order " << ord.order);
  CHECK(ord.monotone);
  CHECK(ord.order >= 3.0);
}

TEST_CASE("courant step scaling and pinned value") {
  Family f;
  Background b64(f.prof, build_grid(f.h, 65, 32, 0));
  Background b128(f.prof, build_grid(f.h, 129, 64, 0));
  const double dt = courant_dt(b64, 0.25);
  CHECK(courant_dt(b64, 0.5) == doctest::Approx(2.0 * dt).epsilon(1e-14));
  CHECK(courant_dt(b128, 0.25) / dt == doctest::Approx(0.5).epsilon(0.03));

  Background pinned(f.prof, build_grid(f.h, 64, 32, 0));
  const double dt_pin = courant_dt(pinned, 0.25);
  CHECK(dt_pin > 1e-4);
  CHECK(dt_pin < 1e-2);
  CHECK(dt_pin == doctest::Approx(2.9234517e-3).epsilon(1e-6));
}

TEST_CASE("zero data gives a zero series; non-finite states abort with a partial series") {
  Family f;
  const Grid2D g = build_grid(f.h, 32, 16, 0);
  Background bg(f.prof, g);
  ScalarWave sys(bg);
  EvolutionConfig cfg;
  cfg.t_end = 0.2;
  const auto res = evolve(StateVector(1, g.size()), cfg, sys);
  for (const auto& s : res.snapshots) CHECK(max_abs(s.u) + max_abs(s.v) == 0.0);

  ScalarWave bad(bg, [](double t, int, int) { return t > 0.05 ? cd(NAN) : cd(0.0); });
  const auto ab = evolve(radial_pulse(g), cfg, bad);
  CHECK(ab.aborted);
  REQUIRE(ab.abort_code.has_value());
  CHECK(*ab.abort_code == ErrorCode::NonFiniteState);
  CHECK(ab.steps > 0);
  CHECK(!ab.snapshots.empty());
}

TEST_CASE("cap placement does not influence the interior") {
  // The caps are spacelike, so moving them inward (still beyond both
  // horizons) must leave the solution on the common nodes unchanged up to
  // discretization error.
  Family f;
  const int n = 97, extra = 3;
  const Grid2D wide = build_grid(f.h, n + 2 * extra, 16, 0);
  const Grid2D g = build_grid(wide.r(extra), wide.r(n + extra - 1), n, 16, 0);
  REQUIRE(g.r_min < f.h.r_event);
  REQUIRE(g.r_max > f.h.r_cosmo);
  Background bg(f.prof, g), bw(f.prof, wide);
  ScalarWave s1(bg), s2(bw);
  EvolutionConfig cfg;
  cfg.t_end = 2.0 * crossing_time(bg);
  const double dt = std::min(courant_dt(bg, 0.25), courant_dt(bw, 0.25));
  const auto a = evolve(radial_pulse(g), cfg, s1, {}, dt);
  const auto b = evolve(radial_pulse(wide), cfg, s2, {}, dt);
  double diff = 0.0, scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 16; ++j) {
      const cd x = a.snapshots.back().u[g.index(i, j)], y = b.snapshots.back().u[wide.index(i + extra, j)];
      diff = std::max(diff, std::abs(x - y));
      scale = std::max(scale, std::abs(y));
    }
  MESSAGE("cap-placement difference " << diff << " against field " << scale);
  CHECK(diff < 1e-3);
  CHECK(diff < 1e-2 * scale);
}

TEST_CASE("scalar runs stay finite over ten crossing times") {
  for (double spin : {0.0, 1e-4}) {
    Family f(spin);
    const Grid2D g = build_grid(f.h, 48, 16, spin == 0.0 ? 0 : 1);
    Background bg(f.prof, g);
    ScalarWave sys(bg);
    EvolutionConfig cfg;
    cfg.t_end = 10.0 * crossing_time(bg);
    StateVector s = radial_pulse(g);
    for (int i = 0; i < g.n_r; ++i)
      for (int j = 0; j < g.n_theta; ++j) s.u[g.index(i, j)] *= std::sin(g.theta(j));
    const auto res = evolve(s, cfg, sys);
    CHECK_FALSE(res.aborted);
    CHECK(res.snapshots.back().finite());
    CHECK(max_abs(res.snapshots.back().u) < 1.0);
  }
}

TEST_CASE("tensor systems: zero, linearity and background guard") {
  Family f;
  const Grid2D g = build_grid(f.h, 24, 16, 0);
  Background bg(f.prof, g, true);
  InducedLinearWave sys(bg, InducedLinearWave::Kind::LinearizedEinstein);
  StateVector zero(10, g.size()), out;
  sys.rhs(zero, out);
  CHECK(max_abs(out.v) == 0.0);

  StateVector d(10, g.size());
  for (int c = 0; c < 10; ++c) {
    const auto [a, b] = kSymPairs[c];
    if (a == kPhi || b == kPhi) continue;
    for (int i = 0; i < g.n_r; ++i)
      for (int j = 0; j < g.n_theta; ++j) {
        const double th = g.theta(j);
        const double ang = (a == kTheta) != (b == kTheta) ? std::sin(th) * std::cos(th) : 1.0 + 0.3 * std::cos(2.0 * th);
        d.u_comp(c)[g.index(i, j)] = 1e-3 * (1.0 + 0.1 * c) * bump(g.r(i), 0.55, 0.07) * ang;
      }
  }
  StateVector d2 = d;
  for (auto& x : d2.u) x *= 2.0;
  EvolutionConfig cfg;
  cfg.t_end = 0.2;
  const auto r1 = evolve(d, cfg, sys);
  const auto r2 = evolve(d2, cfg, sys);
  double diff = 0.0;
  for (std::size_t q = 0; q < r1.snapshots.back().u.size(); ++q)
    diff = std::max(diff, std::abs(r2.snapshots.back().u[q] - 2.0 * r1.snapshots.back().u[q]));
  CHECK(diff < 1e-8 * max_abs(r1.snapshots.back().u));

  Family kerr(1e-4);
  Background bk(kerr.prof, g, true);
  try {
    InducedLinearWave bad(bk, InducedLinearWave::Kind::LinearizedEinstein);
    FAIL("expected UnsupportedBackground");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedBackground);
  }
  CHECK_THROWS_AS(NonlinearEinstein{bk}, Error);
  Background bm(f.prof, build_grid(f.h, 24, 16, 1), true);
  CHECK_THROWS_AS((InducedLinearWave{bm, InducedLinearWave::Kind::ConstraintPropagation}), Error);
}

TEST_CASE("pure-gauge data stays pure gauge") {
  // h = nabla^* w with P w = 0 solves L h = 0; evolve both and compare.
  Family f;
  auto mismatch = [&](int n_r) {
    const Grid2D g = build_grid(f.h, n_r, 16, 0);
    Background bg(f.prof, g, true);
    InducedLinearWave prop(bg, InducedLinearWave::Kind::ConstraintPropagation);
    InducedLinearWave lin(bg, InducedLinearWave::Kind::LinearizedEinstein);
    StateVector w(4, g.size());
    for (int i = 0; i < g.n_r; ++i)
      for (int j = 0; j < g.n_theta; ++j) {
        const double b = bump(g.r(i), 0.55, 0.07), th = g.theta(j);
        w.u_comp(kT)[g.index(i, j)] = 1e-3 * b;
        w.u_comp(kR)[g.index(i, j)] = 5e-4 * b;
        w.u_comp(kTheta)[g.index(i, j)] = 1e-3 * b * std::sin(th);
      }
    // Slice data of nabla^* w, with d_t^2 w supplied by the propagation system.
    auto gauge_field = [&](const StateVector& ws) {
      StateVector acc;
      prop.rhs(ws, acc);
      auto jets = component_jets(ws, g, [&](int c) { return prop.parity(c); },
                                 [&](int c) { return prop.axis_power(c); });
      StateVector h(10, g.size());
      for (std::size_t k = 0; k < g.size(); ++k) {
        for (int c = 0; c < 4; ++c) jets[k](kDtt, c) = acc.v_comp(c)[k].real();
        const SymJet sg = symmetric_gradient_jet(to_oneform_jet(jets[k]), bg.jet(k));
        for (int c = 0; c < 10; ++c) {
          const auto [a, b] = kSymPairs[c];
          h.u_comp(c)[k] = sg.h(a, b);
          h.v_comp(c)[k] = sg.dh[kT](a, b);
        }
      }
      return h;
    };
    EvolutionConfig cfg;
    cfg.t_end = 0.1;
    cfg.dissipation_strength = 0.0;
    const double dt = courant_dt(bg, 0.25);
    const auto ws = evolve(w, cfg, prop, {}, dt);
    const auto hs = evolve(gauge_field(w), cfg, lin, {}, dt);
    const StateVector expect = gauge_field(ws.snapshots.back());
    double diff = 0.0;
    for (std::size_t q = 0; q < expect.u.size(); ++q)
      diff = std::max(diff, std::abs(hs.snapshots.back().u[q] - expect.u[q]));
    return diff / max_abs(expect.u);
  };
  const double m1 = mismatch(33), m2 = mismatch(65);
  MESSAGE("pure-gauge mismatch " << m1 << " " << m2);
  CHECK(m2 < 2e-3);
  CHECK(m1 / m2 > 4.0);
}

TEST_CASE("nonlinear evolution: zero stays zero and the remainder is quadratic") {
  Family f;
  const Grid2D g = build_grid(f.h, 24, 16, 0);
  Background bg(f.prof, g, true);
  NonlinearEinstein nl(bg);
  InducedLinearWave lin(bg, InducedLinearWave::Kind::LinearizedEinstein);
  EvolutionConfig cfg;
  cfg.t_end = 0.1;
  const auto z = evolve(StateVector(10, g.size()), cfg, nl);
  CHECK(max_abs(z.snapshots.back().u) < 1e-14);

  StateVector d(10, g.size());
  for (int i = 0; i < g.n_r; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      const double b = bump(g.r(i), 0.55, 0.07);
      d.u_comp(0)[g.index(i, j)] = b;
      d.u_comp(4)[g.index(i, j)] = 0.5 * b;
      d.u_comp(9)[g.index(i, j)] = 0.2 * b * std::pow(g.r(i) * std::sin(g.theta(j)), 2);
    }
  auto remainder = [&](double eps) {
    StateVector s = d;
    for (auto& x : s.u) x *= eps;
    const auto a = evolve(s, cfg, nl);
    const auto b = evolve(s, cfg, lin);
    double m = 0.0;
    for (std::size_t q = 0; q < s.u.size(); ++q)
      m = std::max(m, std::abs(a.snapshots.back().u[q] - b.snapshots.back().u[q]));
    return m;
  };
  const double r1 = remainder(1e-3), r2 = remainder(5e-4);
  CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.1));
}

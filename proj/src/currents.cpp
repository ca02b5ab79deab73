#include "kds/currents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace kds {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

double smoothstep_prime(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  static constexpr double c[7] = {1716.0, -9009.0, 20020.0, -24024.0, 16380.0, -6006.0, 924.0};
  double acc = 0.0;
  for (int k = 6; k >= 0; --k) acc = acc * x + (k + 7) * c[k];
  return acc * std::pow(x, 6);
}

}  // namespace

Multiplier make_multiplier(Vectorfield X, Corrector q) { return Multiplier{std::move(X), std::move(q)}; }

Corrector constant_corrector(double q) {
  return [q](const SpacetimePoint&) { return CorrectorJet{q, Vec4::Zero(), 0.0}; };
}

Mat4 energy_momentum_tensor(const ScalarJet& h, const MetricJet& g) {
  Mat4 T;
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) T(m, n) = (std::conj(h.du(m)) * h.du(n)).real();
  const double sq = (g.g_inv.cast<cd>() * h.du).dot(h.du).real();  // g^{ab} conj(d_a h) d_b h
  T = 0.5 * (T + T.transpose()).eval();
  return T - 0.5 * sq * g.g;
}

Vec4 j_current(const Vec4& X, const CorrectorJet& q, const ScalarJet& h, const MetricJet& g) {
  Vec4 J = energy_momentum_tensor(h, g) * X;
  const double abs2 = std::norm(h.u);
  for (int m = 0; m < 4; ++m) {
    const double d_abs2 = 2.0 * (std::conj(h.u) * h.du(m)).real();
    J(m) += 0.5 * q.q * d_abs2 - 0.5 * q.dq(m) * abs2;
  }
  return J;
}

Vec4 j_current(const Multiplier& m, const ScalarJet& h, const MetricJet& g, const SpacetimePoint& x) {
  const CorrectorJet q = m.q ? m.q(x) : CorrectorJet{};
  return j_current(m.X.components(x), q, h, g);
}

double k_current(const Mat4& pi, const CorrectorJet& q, const ScalarJet& h, const MetricJet& g) {
  const Mat4 Tup = g.g_inv * energy_momentum_tensor(h, g) * g.g_inv;
  const double grad2 = (g.g_inv.cast<cd>() * h.du).dot(h.du).real();
  return (pi.array() * Tup.array()).sum() + q.q * grad2 - 0.5 * q.box_q * std::norm(h.u);
}

double k_current(const Multiplier& m, const ScalarJet& h, const MetricJet& g,
                 const ChartProfile&, const SpacetimePoint& x) {
  const CorrectorJet q = m.q ? m.q(x) : CorrectorJet{};
  return k_current(deformation_tensor(m.X, g, x), q, h, g);
}

Mat4 deformation_tensor(const Vectorfield& X, const MetricJet& g, const SpacetimePoint& x) {
  return deformation_covariant(g, X.components(x), vector_jacobian(X, x));
}

// ---------------------------------------------------------------------------
// Redshift multiplier

double redshift_blend(const HorizonData& h, std::pair<double, double> iv, double r) {
  if (r <= h.r_event || r >= h.r_cosmo) return 0.0;
  if (r < iv.first) return smoothstep((r - h.r_event) / (iv.first - h.r_event));
  if (r > iv.second) return smoothstep((h.r_cosmo - r) / (h.r_cosmo - iv.second));
  return 1.0;
}

double redshift_blend_prime(const HorizonData& h, std::pair<double, double> iv, double r) {
  if (r <= h.r_event || r >= h.r_cosmo) return 0.0;
  if (r < iv.first) {
    const double w = iv.first - h.r_event;
    return smoothstep_prime((r - h.r_event) / w) / w;
  }
  if (r > iv.second) {
    const double w = h.r_cosmo - iv.second;
    return -smoothstep_prime((h.r_cosmo - r) / w) / w;
  }
  return 0.0;
}

RedshiftMultiplier redshift_multiplier_build(const ChartProfile& prof,
                                             std::optional<std::pair<double, double>> blend,
                                             int n_r, int n_theta) {
  const HorizonData& h = prof.horizons();
  const auto iv = blend.value_or(prof.middle_interval());
  if (!(h.r_event < iv.first && iv.first <= iv.second && iv.second < h.r_cosmo))
    fail(ErrorCode::InvalidArgument, "blend interval must lie strictly between the horizons");

  Vectorfield N;
  N.label = VectorLabel::N;
  N.name = "N";
  N.components = [prof, h, iv](const SpacetimePoint& x) {
    const double chi = redshift_blend(h, iv, x.r);
    const Mat4 G = metric_kerr_star(prof, x).g_inv;
    Vec4 v = -(1.0 - chi) * G.col(kT);
    v(kT) += chi;
    return v;
  };
  N.jacobian = [prof, h, iv](const SpacetimePoint& x) {
    const double chi = redshift_blend(h, iv, x.r);
    const double dchi = redshift_blend_prime(h, iv, x.r);
    const MetricJet jet = metric_kerr_star(prof, x);
    const Deriv dG = inverse_partials(jet);
    Mat4 J = Mat4::Zero();
    for (int mu = 0; mu < 4; ++mu)
      for (int a = 0; a < 4; ++a) J(mu, a) = -(1.0 - chi) * dG[mu](a, kT);
    for (int a = 0; a < 4; ++a) J(kR, a) += dchi * jet.g_inv(a, kT);
    J(kR, kT) += dchi;
    return J;
  };

  const Grid2D grid = build_grid(h, n_r, n_theta, 0);
  double worst = -std::numeric_limits<double>::infinity(), r_worst = 0.0;
  for (int i = 0; i < grid.n_r; ++i)
    for (int j = 0; j < grid.n_theta; ++j) {
      const SpacetimePoint x{0.0, grid.r(i), grid.theta(j), 0.0, Chart::KerrStar};
      const Vec4 v = N.components(x);
      const double nn = v.dot(metric_kerr_star(prof, x).g * v);
      if (nn > worst) {
        worst = nn;
        r_worst = x.r;
      }
    }
  if (!(worst < 0.0))
    fail(ErrorCode::TimelikenessLost, "g(N, N) reaches " + std::to_string(worst) + " at r = " + std::to_string(r_worst));
  return RedshiftMultiplier{make_multiplier(std::move(N)), iv, -worst, r_worst};
}

// ---------------------------------------------------------------------------
// Grid currents

ScalarJet scalar_jet(const Grid2D& g, const cd* u, const cd* v, const cd* ur, const cd* uth,
                     std::size_t k) {
  ScalarJet h;
  h.u = u[k];
  h.du << v[k], ur[k], uth[k], cd(0.0, g.mode_m) * u[k];
  return h;
}

CurrentProbe::CurrentProbe(const Background& bg, const Multiplier& m)
    : bg_(bg), wr_(radial_weights(bg.grid())), wth_(theta_weights(bg.grid())) {
  const Grid2D& g = bg.grid();
  nodes_.resize(g.size());
  for (int i = 0; i < g.n_r; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      const std::size_t k = g.index(i, j);
      const SpacetimePoint x = bg.point(i, j);
      const MetricJet jet = metric_kerr_star(bg.profile(), x);
      NodeData& nd = nodes_[k];
      nd.X = m.X.components(x);
      nd.pi = deformation_tensor(m.X, jet, x);
      if (m.q) nd.q = m.q(x);
    }
}

void CurrentProbe::gradients(const StateVector& s, std::vector<cd>& ur, std::vector<cd>& uth) const {
  const Grid2D& g = bg_.grid();
  ur.resize(g.size());
  uth.resize(g.size());
  diff_r(g, s.u.data(), ur.data());
  diff_theta(g, s.u.data(), scalar_parity(g.mode_m), uth.data());
}

namespace {

MetricJet node_jet(const NodeGeometry& nd) {
  MetricJet m;
  m.g = nd.g;
  m.g_inv = nd.g_inv;
  return m;
}

}  // namespace

double CurrentProbe::slice_energy(const StateVector& s) const {
  const Grid2D& g = bg_.grid();
  std::vector<cd> ur, uth;
  gradients(s, ur, uth);
  std::vector<double> rows(g.n_r);
  for (int i = 0; i < g.n_r; ++i) {
    double acc = 0.0;
    for (int j = 0; j < g.n_theta; ++j) {
      const std::size_t k = g.index(i, j);
      const NodeGeometry& geo = bg_.node(k);
      const NodeData& nd = nodes_[k];
      const Vec4 J = j_current(nd.X, nd.q, scalar_jet(g, s.u.data(), s.v.data(), ur.data(), uth.data(), k),
                               node_jet(geo));
      acc += wth_[j] * geo.sqrt_det * -(geo.g_inv.row(kT).dot(J));
    }
    rows[i] = wr_[i] * acc;
  }
  return kTwoPi * pairwise_sum(rows.data(), rows.size());
}

CurrentProbe::CapFluxRates CurrentProbe::cap_flux_rates(const StateVector& s) const {
  const Grid2D& g = bg_.grid();
  std::vector<cd> ur, uth;
  gradients(s, ur, uth);
  auto cap = [&](int i) {
    double acc = 0.0;
    for (int j = 0; j < g.n_theta; ++j) {
      const std::size_t k = g.index(i, j);
      const NodeGeometry& geo = bg_.node(k);
      const NodeData& nd = nodes_[k];
      const Vec4 J = j_current(nd.X, nd.q, scalar_jet(g, s.u.data(), s.v.data(), ur.data(), uth.data(), k),
                               node_jet(geo));
      acc += wth_[j] * geo.sqrt_det * geo.g_inv.row(kR).dot(J);
    }
    return kTwoPi * acc;
  };
  return CapFluxRates{cap(0), -cap(g.n_r - 1)};
}

double CurrentProbe::bulk_rate(const StateVector& s, const Forcing& f) const {
  const Grid2D& g = bg_.grid();
  std::vector<cd> ur, uth;
  gradients(s, ur, uth);
  std::vector<double> rows(g.n_r);
  for (int i = 0; i < g.n_r; ++i) {
    double acc = 0.0;
    for (int j = 0; j < g.n_theta; ++j) {
      const std::size_t k = g.index(i, j);
      const NodeGeometry& geo = bg_.node(k);
      const NodeData& nd = nodes_[k];
      const ScalarJet h = scalar_jet(g, s.u.data(), s.v.data(), ur.data(), uth.data(), k);
      double dens = k_current(nd.pi, nd.q, h, node_jet(geo));
      if (f) {
        const cd Xh = nd.X.cast<cd>().dot(h.du);
        dens += (std::conj(Xh + nd.q.q * h.u) * f(s.t_star, i, j)).real();
      }
      acc += wth_[j] * geo.sqrt_det * dens;
    }
    rows[i] = wr_[i] * acc;
  }
  return kTwoPi * pairwise_sum(rows.data(), rows.size());
}

double CurrentProbe::gradient_norm_sq(const StateVector& s) const {
  const Grid2D& g = bg_.grid();
  std::vector<cd> ur, uth;
  gradients(s, ur, uth);
  std::vector<double> rows(g.n_r);
  for (int i = 0; i < g.n_r; ++i) {
    double acc = 0.0;
    for (int j = 0; j < g.n_theta; ++j) {
      const std::size_t k = g.index(i, j);
      const ScalarJet h = scalar_jet(g, s.u.data(), s.v.data(), ur.data(), uth.data(), k);
      acc += wth_[j] * bg_.node(k).sqrt_det * h.du.squaredNorm();
    }
    rows[i] = wr_[i] * acc;
  }
  return kTwoPi * pairwise_sum(rows.data(), rows.size());
}

Coercivity measure_coercivity(const CurrentProbe& probe, std::size_t samples, std::uint64_t seed) {
  const Grid2D& g = probe.background().grid();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Coercivity out;
  out.c = std::numeric_limits<double>::infinity();
  const double L = g.r_max - g.r_min;
  for (std::size_t n = 0; n < samples; ++n) {
    // Random combination of low radial and angular modes.
    std::array<cd, 12> a{}, b{};
    for (auto& x : a) x = cd(normal(rng), normal(rng));
    for (auto& x : b) x = cd(normal(rng), normal(rng));
    StateVector s(1, g.size());
    for (int i = 0; i < g.n_r; ++i)
      for (int j = 0; j < g.n_theta; ++j) {
        const double x = (g.r(i) - g.r_min) / L, th = g.theta(j);
        cd u = 0.0, v = 0.0;
        for (int p = 0; p < 4; ++p)
          for (int q = 0; q < 3; ++q) {
            const double ang = (g.mode_m % 2 == 0) ? std::cos(2.0 * q * th) : std::sin((2.0 * q + 1.0) * th);
            const double basis = std::cos(M_PI * p * x) * ang;
            u += a[3 * p + q] * basis;
            v += b[3 * p + q] * basis;
          }
        s.u[g.index(i, j)] = u;
        s.v[g.index(i, j)] = v;
      }
    const double e = probe.slice_energy(s);
    const double d = probe.gradient_norm_sq(s);
    if (!(d > 0.0)) continue;
    out.c = std::min(out.c, e / d);
    out.C = std::max(out.C, e / d);
    ++out.samples;
  }
  return out;
}

std::vector<double> slice_energies(const CurrentProbe& probe, const std::vector<StateVector>& series) {
  std::vector<double> out;
  out.reserve(series.size());
  for (const auto& s : series) out.push_back(probe.slice_energy(s));
  return out;
}

DivergenceReport divergence_residual(const CurrentProbe& probe, const std::vector<StateVector>& states,
                                     std::size_t first, std::size_t last, const Forcing& f) {
  if (last >= states.size() || first >= last)
    fail(ErrorCode::InvalidArgument, "divergence_residual needs first < last < number of states");
  const std::size_t n = last - first + 1;
  const double dt = (states[last].t_star - states[first].t_star) / static_cast<double>(n - 1);
  const auto w = time_weights(n, dt);
  DivergenceReport rep;
  rep.t1 = states[first].t_star;
  rep.t2 = states[last].t_star;
  rep.e1 = probe.slice_energy(states[first]);
  rep.e2 = probe.slice_energy(states[last]);
  std::vector<double> fi(n), fo(n), b(n);
  for (std::size_t q = 0; q < n; ++q) {
    const StateVector& s = states[first + q];
    const auto rates = probe.cap_flux_rates(s);
    fi[q] = w[q] * rates.inner;
    fo[q] = w[q] * rates.outer;
    b[q] = w[q] * probe.bulk_rate(s, f);
  }
  rep.flux_inner = pairwise_sum(fi.data(), n);
  rep.flux_outer = pairwise_sum(fo.data(), n);
  rep.bulk = pairwise_sum(b.data(), n);
  // d/dt E = -(outflow) - bulk for the divergence identity nabla.J = bulk.
  rep.residual = std::abs(rep.e2 - rep.e1 + rep.flux_inner + rep.flux_outer + rep.bulk) / std::abs(rep.e1);
  return rep;
}

// ---------------------------------------------------------------------------
// Gronwall

GronwallReport gronwall_bound_check(const std::vector<GronwallRun>& runs, double sigma) {
  GronwallReport rep;
  rep.sigma = sigma;
  std::map<std::string, double> by_tag;
  double best = 0.0;
  for (const auto& run : runs) {
    if (run.t.size() != run.h1_norm.size() ||
        (!run.forcing_norm.empty() && run.forcing_norm.size() != run.t.size()))
      fail(ErrorCode::InvalidArgument, "Gronwall run series have inconsistent lengths");
    double c_run = 0.0, integral = 0.0;
    for (std::size_t q = 0; q < run.t.size(); ++q) {
      if (q > 0 && !run.forcing_norm.empty()) {
        const double a = std::exp(-sigma * run.t[q - 1]) * run.forcing_norm[q - 1];
        const double b = std::exp(-sigma * run.t[q]) * run.forcing_norm[q];
        integral += 0.5 * (a + b) * (run.t[q] - run.t[q - 1]);
      }
      const double lhs = std::exp(-sigma * run.t[q]) * run.h1_norm[q];
      const double rhs = run.data_norm + integral;
      if (rhs > 0.0) {
        c_run = std::max(c_run, lhs / rhs);
        rep.constrained = true;
      } else if (lhs > 0.0) {
        c_run = std::numeric_limits<double>::infinity();
        rep.constrained = true;
      }
    }
    by_tag[run.tag] = std::max(by_tag[run.tag], c_run);
    best = std::max(best, c_run);
  }
  rep.constant = rep.constrained ? best : std::numeric_limits<double>::quiet_NaN();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& [tag, c] : by_tag) {
    rep.per_tag.emplace_back(tag, c);
    if (c > 0.0) {
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
  }
  rep.degraded = hi > 2.0 * lo;
  return rep;
}

}  // namespace kds

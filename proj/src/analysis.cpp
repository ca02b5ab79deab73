#include "kds/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace kds {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

std::vector<double> node_weights(const Background& bg, Measure measure) {
  const Grid2D& g = bg.grid();
  const auto wr = radial_weights(g);
  const auto wth = theta_weights(g);
  std::vector<double> w(g.size());
  for (int i = 0; i < g.n_r; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      const std::size_t k = g.index(i, j);
      double dens = std::sin(g.theta(j));
      if (measure == Measure::SliceVolume) {
        const NodeGeometry& nd = bg.node(k);
        dens = nd.sqrt_det * std::sqrt(-nd.g_inv(kT, kT));
      }
      w[k] = kTwoPi * wr[i] * wth[j] * dens;
    }
  return w;
}

void check_budget(int k) {
  if (k < 0) fail(ErrorCode::InvalidArgument, "negative derivative count");
  if (k > kRegularityBudget)
    fail(ErrorCode::RegularityBudgetExceeded,
         "k = " + std::to_string(k) + " exceeds the stencil budget of " + std::to_string(kRegularityBudget));
}

}  // namespace

double hk_norm(const Background& bg, const cd* u, int parity, int k, Measure measure) {
  check_budget(k);
  const Grid2D& g = bg.grid();
  const std::size_t n = g.size();
  const auto w = node_weights(bg, measure);
  const double m2 = static_cast<double>(g.mode_m) * g.mode_m;

  // column[b] holds d_r^a d_theta^b u for the current a.
  std::vector<std::vector<cd>> column(k + 1, std::vector<cd>(n));
  std::copy(u, u + n, column[0].begin());
  for (int b = 1; b <= k; ++b)
    diff_theta(g, column[b - 1].data(), (b % 2 == 1) ? parity : -parity, column[b].data());

  std::vector<double> per_node(n, 0.0);
  std::vector<cd> tmp(n);
  for (int a = 0; a <= k; ++a) {
    if (a > 0)
      for (int b = 0; a + b <= k; ++b) {
        diff_r(g, column[b].data(), tmp.data());
        column[b].swap(tmp);
      }
    for (int b = 0; a + b <= k; ++b) {
      double mfac = 0.0, mp = 1.0;
      for (int c = 0; a + b + c <= k; ++c) {
        mfac += mp;
        mp *= m2;
      }
      for (std::size_t q = 0; q < n; ++q) per_node[q] += mfac * std::norm(column[b][q]);
    }
  }
  for (std::size_t q = 0; q < n; ++q) per_node[q] *= w[q];
  return std::sqrt(pairwise_sum(per_node.data(), n));
}

double hk_norm(const Background& bg, const StateVector& s, const std::function<int(int)>& parity,
               int k, bool time_derivative, Measure measure) {
  double acc = 0.0;
  for (int c = 0; c < s.ncomp; ++c) {
    const double v = hk_norm(bg, time_derivative ? s.v_comp(c) : s.u_comp(c), parity(c), k, measure);
    acc += v * v;
  }
  return std::sqrt(acc);
}

double weighted_spacetime_norm(const std::vector<double>& t, const std::vector<double>& norms,
                               double alpha) {
  if (t.size() != norms.size()) fail(ErrorCode::InvalidArgument, "time and norm series differ in length");
  std::vector<double> parts;
  for (std::size_t q = 1; q < t.size(); ++q) {
    const double a = std::exp(2.0 * alpha * t[q - 1]) * norms[q - 1] * norms[q - 1];
    const double b = std::exp(2.0 * alpha * t[q]) * norms[q] * norms[q];
    parts.push_back(0.5 * (a + b) * (t[q] - t[q - 1]));
  }
  return pairwise_sum(parts.data(), parts.size());
}

double d_kam_norm(const Background& bg, const std::vector<double>& t,
                  const std::vector<std::vector<cd>>& forcing, const StateVector& data,
                  const std::function<int(int)>& parity, int k, double alpha, int m, Measure measure) {
  if (m < 1) fail(ErrorCode::InvalidArgument, "m must be >= 1");
  check_budget(k + m);
  if (t.size() != forcing.size()) fail(ErrorCode::InvalidArgument, "forcing series and times differ in length");
  double f_part = 0.0;
  if (!forcing.empty()) {
    std::vector<double> norms;
    for (const auto& f : forcing) norms.push_back(hk_norm(bg, f.data(), parity(0), k + m - 1, measure));
    f_part = std::sqrt(weighted_spacetime_norm(t, norms, alpha));
  }
  return f_part + hk_norm(bg, data, parity, k + m, false, measure) +
         hk_norm(bg, data, parity, k + m - 1, true, measure);
}

DecayFit decay_rate_fit(const std::vector<double>& t, const std::vector<double>& energy,
                        std::optional<std::pair<double, double>> window, std::string tag) {
  if (t.size() != energy.size()) fail(ErrorCode::InvalidArgument, "time and energy series differ in length");
  if (t.empty()) fail(ErrorCode::WindowTooShort, "empty series");
  const auto win = window.value_or(std::make_pair(0.5 * (t.front() + t.back()), t.back()));
  std::vector<double> x, y;
  for (std::size_t q = 0; q < t.size(); ++q) {
    if (t[q] < win.first || t[q] > win.second) continue;
    if (!(energy[q] > 0.0))
      fail(ErrorCode::NonPositiveEnergy, "energy " + std::to_string(energy[q]) + " at t* = " + std::to_string(t[q]));
    x.push_back(t[q]);
    y.push_back(std::log(energy[q]));
  }
  if (x.size() < 10)
    fail(ErrorCode::WindowTooShort, "fit window holds " + std::to_string(x.size()) + " samples, need 10");
  const double n = static_cast<double>(x.size());
  const double xm = pairwise_sum(x.data(), x.size()) / n;
  const double ym = pairwise_sum(y.data(), y.size()) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t q = 0; q < x.size(); ++q) {
    sxx += (x[q] - xm) * (x[q] - xm);
    sxy += (x[q] - xm) * (y[q] - ym);
  }
  const double slope = sxy / sxx;
  const double icpt = ym - slope * xm;
  double ss = 0.0;
  for (std::size_t q = 0; q < x.size(); ++q) {
    const double e = y[q] - (icpt + slope * x[q]);
    ss += e * e;
  }
  DecayFit fit;
  fit.rate_energy = -slope;
  fit.rate = -0.5 * slope;
  fit.amplitude = std::exp(icpt);
  fit.window = win;
  fit.residual = std::sqrt(ss / n);
  fit.samples = x.size();
  fit.resolution_tag = std::move(tag);
  return fit;
}

// ---------------------------------------------------------------------------
// Spectral toy

double spectral_sobolev_norm(const std::vector<cd>& coeffs, double s) {
  const int K = static_cast<int>(coeffs.size() / 2);
  std::vector<double> terms(coeffs.size());
  for (std::size_t q = 0; q < coeffs.size(); ++q) {
    const double k = static_cast<double>(static_cast<int>(q) - K);
    terms[q] = std::pow(1.0 + k * k, s) * std::norm(coeffs[q]);
  }
  return std::sqrt(pairwise_sum(terms.data(), terms.size()));
}

double interpolation_ratio(const std::vector<cd>& coeffs, int l, int N) {
  if (N <= l) fail(ErrorCode::InvalidArgument, "interpolation needs N > l");
  const double theta = 2.0 / (N - l);
  const double mid = spectral_sobolev_norm(coeffs, l + 2);
  const double lo = spectral_sobolev_norm(coeffs, l);
  const double hi = spectral_sobolev_norm(coeffs, N);
  return mid / (std::pow(lo, 1.0 - theta) * std::pow(hi, theta));
}

InterpolationReport interpolation_check(const std::vector<std::vector<cd>>& fields, int l, int N) {
  InterpolationReport rep;
  rep.l = l;
  rep.N = N;
  rep.theta = 2.0 / (N - l);
  rep.samples = fields.size();
  rep.min_ratio = fields.empty() ? 0.0 : 1e300;
  for (const auto& f : fields) {
    const double r = interpolation_ratio(f, l, N);
    rep.max_ratio = std::max(rep.max_ratio, r);
    rep.min_ratio = std::min(rep.min_ratio, r);
  }
  return rep;
}

std::vector<std::vector<cd>> random_spectral_fields(std::size_t count, int K, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> decay(0.0, 4.0);
  std::vector<std::vector<cd>> out(count, std::vector<cd>(2 * K + 1));
  for (auto& f : out) {
    const double p = decay(rng);
    for (int q = 0; q <= 2 * K; ++q) {
      const double k = q - K;
      const double env = std::pow(1.0 + k * k, -0.5 * p);
      f[q] = env * cd(normal(rng), normal(rng));
    }
  }
  return out;
}

std::vector<cd> single_frequency_field(int K, int k, cd amplitude) {
  if (std::abs(k) > K) fail(ErrorCode::InvalidArgument, "frequency outside the coefficient range");
  std::vector<cd> f(2 * K + 1, cd(0.0));
  f[k + K] = amplitude;
  return f;
}

// ---------------------------------------------------------------------------
// Convergence

namespace {

ConvergenceOrder order_from(double d1, double d2) {
  ConvergenceOrder c;
  c.coarse_diff = d1;
  c.fine_diff = d2;
  c.monotone = d2 < d1;
  c.order = (d1 > 0.0 && d2 > 0.0) ? std::log2(d1 / d2) : 0.0;
  return c;
}

}  // namespace

ConvergenceOrder convergence_order(double coarse, double mid, double fine) {
  return order_from(std::abs(coarse - mid), std::abs(mid - fine));
}

ConvergenceOrder convergence_order(const std::vector<cd>& coarse, const std::vector<cd>& mid,
                                   const std::vector<cd>& fine) {
  if (coarse.size() != mid.size() || mid.size() != fine.size())
    fail(ErrorCode::InvalidArgument, "convergence samples differ in length");
  std::vector<double> a(coarse.size()), b(coarse.size());
  for (std::size_t q = 0; q < coarse.size(); ++q) {
    a[q] = std::norm(coarse[q] - mid[q]);
    b[q] = std::norm(mid[q] - fine[q]);
  }
  return order_from(std::sqrt(pairwise_sum(a.data(), a.size())), std::sqrt(pairwise_sum(b.data(), b.size())));
}

std::vector<cd> restrict_to_coarse(const Grid2D& fine, const cd* u, const Grid2D& coarse) {
  if (fine.n_theta != coarse.n_theta || fine.n_r - 1 != 2 * (coarse.n_r - 1))
    fail(ErrorCode::InvalidArgument, "grids are not nested by a radial factor of 2");
  std::vector<cd> out(coarse.size());
  for (int i = 0; i < coarse.n_r; ++i)
    for (int j = 0; j < coarse.n_theta; ++j) out[coarse.index(i, j)] = u[fine.index(2 * i, j)];
  return out;
}

}  // namespace kds

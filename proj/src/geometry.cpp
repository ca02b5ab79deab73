#include "kds/geometry.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "kds/dual.hpp"

namespace kds {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <class T>
T smoothstep_t(const T& x) {
  const double xv = value_of(x);
  if (xv <= 0.0) return T(0.0);
  if (xv >= 1.0) return T(1.0);
  // x^7 (1716 - 9009x + 20020x^2 - 24024x^3 + 16380x^4 - 6006x^5 + 924x^6)
  T poly = T(924.0);
  poly = poly * x + T(-6006.0);
  poly = poly * x + T(16380.0);
  poly = poly * x + T(-24024.0);
  poly = poly * x + T(20020.0);
  poly = poly * x + T(-9009.0);
  poly = poly * x + T(1716.0);
  T x2 = x * x;
  T x7 = x2 * x2 * x2 * x;
  return x7 * poly;
}

// Kerr-de Sitter metric after t = t* + F(r), phi = phi* + Phi(r) with the
// profile of ChartProfile. s = 0 gives the Boyer-Lindquist form.
template <class T>
std::array<T, 7> kds_components(const BlackHoleParams& p, const T& r, const T& th, const T& s) {
  const double a = p.spin;
  const double lam = p.lambda_b();
  const double K = 1.0 + lam;
  const T r2 = r * r;
  const T r2a2 = r2 + a * a;
  const T delta = r2a2 * (1.0 - p.lambda * r2 / 3.0) - 2.0 * p.mass * r;
  const T ct = cos(th);
  const T st = sin(th);
  const T sin2 = st * st;
  const T rho2 = r2 + a * a * ct * ct;
  const T kappa = 1.0 + lam * ct * ct;
  const T c = -s;
  const T P = kappa * sin2 / (K * K * rho2);
  const T Q = delta / (K * K * rho2);
  const T QA = s / K + c * Q;
  const T one_minus_s2 = (1.0 - s) * (1.0 + s);

  std::array<T, 7> out;
  out[0] = P * (a * a) - Q;                                   // g00
  out[1] = P * (a * a) * c - QA;                              // g01
  out[2] = -P * a * r2a2 + Q * a * sin2;                      // g03
  T radial = value_of(one_minus_s2) == 0.0 ? T(0.0) : rho2 * one_minus_s2 / delta;
  out[3] = radial - 2.0 * s * c / K - c * c * Q + P * (a * a) * c * c;  // g11
  out[4] = -P * a * c * r2a2 + QA * a * sin2;                 // g13
  out[5] = rho2 / kappa;                                      // g22
  out[6] = P * r2a2 * r2a2 - Q * (a * a) * sin2 * sin2;       // g33
  return out;
}

void scatter(Mat4& m, const std::array<double, 7>& c) {
  m.setZero();
  m(0, 0) = c[0];
  m(0, 1) = m(1, 0) = c[1];
  m(0, 3) = m(3, 0) = c[2];
  m(1, 1) = c[3];
  m(1, 3) = m(3, 1) = c[4];
  m(2, 2) = c[5];
  m(3, 3) = c[6];
}

// Metric and exact (r, theta) partials.
MetricJet evaluate_jet(const BlackHoleParams& p, const ChartProfile* prof, double r, double th) {
  using D = Dual<2>;
  const D rd = D::variable(r, 0);
  const D td = D::variable(th, 1);
  const D s = prof ? prof->s_of(rd) : D(0.0);
  const auto comp = kds_components(p, rd, td, s);
  std::array<double, 7> v, dr, dt;
  for (int i = 0; i < 7; ++i) {
    v[i] = comp[i].v;
    dr[i] = comp[i].d[0];
    dt[i] = comp[i].d[1];
  }
  MetricJet jet;
  scatter(jet.g, v);
  scatter(jet.dg[kR], dr);
  scatter(jet.dg[kTheta], dt);
  complete_inverse(jet);
  return jet;
}

void check_theta(const SpacetimePoint& x) {
  if (!(x.theta > 0.0 && x.theta < kPi))
    fail(ErrorCode::ChartDomainViolation, "theta must lie in (0, pi), got " + fmt(x.theta));
}

}  // namespace

double smoothstep(double x) { return smoothstep_t(x); }

double BlackHoleParams::delta(double r) const {
  return (r * r + spin * spin) * (1.0 - lambda * r * r / 3.0) - 2.0 * mass * r;
}

double BlackHoleParams::delta_prime(double r) const {
  const double r2a2 = r * r + spin * spin;
  return 2.0 * r * (1.0 - lambda * r * r / 3.0) - r2a2 * (2.0 * lambda * r / 3.0) - 2.0 * mass;
}

double BlackHoleParams::mu(double r) const {
  return 1.0 - 2.0 * mass / r - lambda * r * r / 3.0;
}

BlackHoleParams validate_params(double lambda, double mass, double spin, double spin_cap) {
  if (!(lambda > 0.0)) fail(ErrorCode::InvalidArgument, "lambda must be > 0");
  if (!(mass > 0.0)) fail(ErrorCode::InvalidArgument, "mass must be > 0");
  if (!(spin >= 0.0)) fail(ErrorCode::InvalidArgument, "spin must be >= 0");
  if (!(spin_cap > 0.0)) fail(ErrorCode::InvalidArgument, "spin_cap must be > 0");
  const double x = 9.0 * lambda * mass * mass;
  if (!(1.0 - x > 0.0))
    fail(ErrorCode::SubextremalityViolated,
         "1 - 9 Lambda M^2 = " + fmt(1.0 - x) + " is not positive");
  if (spin > spin_cap * mass)
    fail(ErrorCode::SpinTooLarge,
         "spin " + fmt(spin) + " exceeds spin_cap * M = " + fmt(spin_cap * mass));
  return BlackHoleParams{lambda, mass, spin, spin_cap};
}

namespace {

double refine_root(const BlackHoleParams& p, double lo, double hi) {
  double flo = p.delta(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = p.delta(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 3; ++it) {
    const double d = p.delta_prime(x);
    if (d == 0.0) break;
    const double nx = x - p.delta(x) / d;
    if (nx < lo || nx > hi) break;
    x = nx;
  }
  return x;
}

}  // namespace

HorizonData horizon_radii(const BlackHoleParams& p, double epsilon_ext) {
  const double L = 2.0 * std::sqrt(3.0 / p.lambda);
  const int n = 20000;
  std::vector<double> roots;
  if (p.spin == 0.0) roots.push_back(0.0);
  double prev_r = -L;
  double prev_f = p.delta(prev_r);
  for (int i = 1; i <= n; ++i) {
    const double r = -L + 2.0 * L * i / n;
    double f = p.delta(r);
    if (p.spin == 0.0 && std::abs(r) < 1e-300) f = 0.0;
    if (f == 0.0 && r != 0.0) roots.push_back(r);
    if ((f < 0.0) != (prev_f < 0.0) && prev_f != 0.0 && f != 0.0) {
      roots.push_back(refine_root(p, prev_r, r));
    }
    prev_r = r;
    prev_f = f;
  }
  // Zero root at a = 0 is exact; drop bisection duplicates of it.
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              roots.end());
  // For a > 0 a tiny inner root near a^2 / 2M may hide below the scan
  // resolution; it does not affect the two outer horizons.
  std::vector<double> positive;
  for (double r : roots)
    if (r > 0.0) positive.push_back(r);
  if (positive.size() < 2 || roots.front() >= 0.0)
    fail(ErrorCode::RootFindingFailed, "Delta_b does not have the expected root structure");

  HorizonData h;
  h.roots = roots;
  h.r_negative = roots.front();
  h.r_event = positive[positive.size() - 2];
  h.r_cosmo = positive.back();
  const double scale = std::max(1.0, p.lambda * std::pow(h.r_cosmo, 4));
  for (double r : {h.r_event, h.r_cosmo, h.r_negative}) {
    if (std::abs(p.delta(r)) > 1e-10 * scale)
      fail(ErrorCode::RootFindingFailed, "residual |Delta_b| too large at r = " + fmt(r));
  }
  if (!(epsilon_ext > 0.0)) fail(ErrorCode::InvalidArgument, "epsilon_ext must be > 0");
  h.epsilon_ext = epsilon_ext;
  h.r_inner_cap = h.r_event - epsilon_ext;
  h.r_outer_cap = h.r_cosmo + epsilon_ext;
  // Caps must stay inside the neighbouring sign-definite strips.
  for (int i = 1; i < 64; ++i) {
    const double ri = h.r_inner_cap + (h.r_event - h.r_inner_cap) * i / 64.0;
    const double ro = h.r_cosmo + (h.r_outer_cap - h.r_cosmo) * i / 64.0;
    if (!(p.delta(ri) < 0.0) || !(p.delta(ro) < 0.0))
      fail(ErrorCode::InvalidArgument, "epsilon_ext too large: Delta_b changes sign inside a cap strip");
  }
  if (!(h.r_inner_cap > 0.0)) fail(ErrorCode::InvalidArgument, "inner cap must stay at r > 0");
  return h;
}

HorizonData horizon_radii(const BlackHoleParams& p) {
  const HorizonData probe = horizon_radii(p, 1e-6);
  return horizon_radii(p, kDefaultEpsilonFraction * probe.span());
}

bool in_extended_interval(const HorizonData& h, double r) {
  return r >= h.r_inner_cap && r <= h.r_outer_cap;
}

std::pair<double, double> default_middle_interval(const HorizonData& h) {
  return {h.r_event + 0.4 * h.span(), h.r_event + 0.6 * h.span()};
}

template <class T>
T ChartProfile::s_of(const T& r) const {
  const double rv = value_of(r);
  if (rv <= a0_) return T(-1.0);
  if (rv < r1_) return smoothstep_t((r - a0_) / (r1_ - a0_)) - 1.0;
  if (rv <= r2_) return T(0.0);
  if (rv < b0_) return smoothstep_t((r - r2_) / (b0_ - r2_));
  return T(1.0);
}

template double ChartProfile::s_of<double>(const double&) const;
template Dual<1> ChartProfile::s_of<Dual<1>>(const Dual<1>&) const;
template Dual<2> ChartProfile::s_of<Dual<2>>(const Dual<2>&) const;

ChartProfile::ChartProfile(const BlackHoleParams& p, const HorizonData& h,
                           std::pair<double, double> middle)
    : params_(p), horizons_(h), r1_(middle.first), r2_(middle.second) {
  a0_ = h.r_event + h.epsilon_ext;
  b0_ = h.r_cosmo - h.epsilon_ext;
  if (!(a0_ < r1_ && r1_ < r2_ && r2_ < b0_))
    fail(ErrorCode::InvalidArgument,
         "middle interval must satisfy r_event + eps < r1 < r2 < r_cosmo - eps");

  // Verify uniform spacelikeness of the t*-slices on a sampling grid.
  const int nr = 401, nth = 33;
  double gmax = -std::numeric_limits<double>::infinity();
  gfrak_min_ = std::numeric_limits<double>::infinity();
  gfrak_max_ = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double r = h.r_inner_cap + (h.r_outer_cap - h.r_inner_cap) * i / (nr - 1);
    for (int j = 0; j < nth; ++j) {
      const double th = kPi * (j + 0.5) / nth;
      const MetricJet jet = evaluate_jet(p, this, r, th);
      const double gtt = jet.g_inv(0, 0);
      gmax = std::max(gmax, gtt);
      if (gtt < 0.0) {
        gfrak_min_ = std::min(gfrak_min_, -1.0 / gtt);
        gfrak_max_ = std::max(gfrak_max_, -1.0 / gtt);
      }
    }
  }
  if (!(gmax < 0.0))
    fail(ErrorCode::SpacelikenessLost, "G(dt*, dt*) reaches " + fmt(gmax) + " on the extended grid");
  c0_ = -gmax;
}

double ChartProfile::s(double r) const { return s_of(r); }

double ChartProfile::ds(double r) const {
  return s_of(Dual<1>::variable(r, 0)).d[0];
}

double ChartProfile::F_prime(double r) const {
  const double sv = s(r);
  if (sv == 0.0) return 0.0;
  const double a = params_.spin;
  return sv * ((1.0 + params_.lambda_b()) * (r * r + a * a) / params_.delta(r) - 1.0);
}

double ChartProfile::Phi_prime(double r) const {
  const double sv = s(r);
  if (sv == 0.0 || params_.spin == 0.0) return 0.0;
  return sv * params_.spin * (1.0 + params_.lambda_b()) / params_.delta(r);
}

namespace {

template <class Fn>
double integrate_profile(const Fn& fn, double from, double to) {
  if (from == to) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(fn, from, to, 20, 1e-14);
}

}  // namespace

double ChartProfile::F(double r) const {
  if (!(r > horizons_.r_event && r < horizons_.r_cosmo))
    fail(ErrorCode::ChartDomainViolation, "F is defined strictly between the horizons");
  auto fp = [this](double x) { return F_prime(x); };
  if (r < r1_) return -integrate_profile(fp, r, r1_);
  if (r > r2_) return integrate_profile(fp, r2_, r);
  return 0.0;
}

double ChartProfile::Phi(double r) const {
  if (!(r > horizons_.r_event && r < horizons_.r_cosmo))
    fail(ErrorCode::ChartDomainViolation, "Phi is defined strictly between the horizons");
  auto fp = [this](double x) { return Phi_prime(x); };
  if (r < r1_) return -integrate_profile(fp, r, r1_);
  if (r > r2_) return integrate_profile(fp, r2_, r);
  return 0.0;
}

ChartProfile chart_profile_build(const BlackHoleParams& p, const HorizonData& h,
                                 std::optional<std::pair<double, double>> middle) {
  return ChartProfile(p, h, middle.value_or(default_middle_interval(h)));
}

MetricJet metric_bl(const BlackHoleParams& p, const HorizonData& h, const SpacetimePoint& x) {
  if (x.chart != Chart::BoyerLindquist)
    fail(ErrorCode::ChartDomainViolation, "metric_bl needs a Boyer-Lindquist point");
  if (!(x.r > h.r_event && x.r < h.r_cosmo))
    fail(ErrorCode::ChartDomainViolation,
         "Boyer-Lindquist chart is singular at r = " + fmt(x.r) + " (outside the open exterior)");
  check_theta(x);
  return evaluate_jet(p, nullptr, x.r, x.theta);
}

MetricJet metric_kerr_star(const ChartProfile& prof, const SpacetimePoint& x) {
  if (x.chart != Chart::KerrStar)
    fail(ErrorCode::ChartDomainViolation, "metric_kerr_star needs a Kerr-star point");
  if (!in_extended_interval(prof.horizons(), x.r))
    fail(ErrorCode::ChartDomainViolation, "r = " + fmt(x.r) + " lies outside the extended interval");
  check_theta(x);
  return evaluate_jet(prof.params(), &prof, x.r, x.theta);
}

MetricJet metric_jet(const ChartProfile& prof, const SpacetimePoint& x) {
  return x.chart == Chart::KerrStar ? metric_kerr_star(prof, x)
                                    : metric_bl(prof.params(), prof.horizons(), x);
}

MetricJet metric_second_jet(const ChartProfile& prof, const SpacetimePoint& x, double spacing) {
  MetricJet jet = metric_jet(prof, x);
  const ChartProfile* pp = x.chart == Chart::KerrStar ? &prof : nullptr;
  const BlackHoleParams& p = prof.params();
  // Fourth-order differences of the exact first partials; stationarity and
  // axisymmetry make every t* or phi* partial vanish.
  const double w[4] = {1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0};
  const double off[4] = {-2.0, -1.0, 1.0, 2.0};
  for (int dir : {kR, kTheta}) {
    Deriv acc = zero_deriv();
    for (int k = 0; k < 4; ++k) {
      const double r = x.r + (dir == kR ? off[k] * spacing : 0.0);
      const double th = x.theta + (dir == kTheta ? off[k] * spacing : 0.0);
      const MetricJet sj = evaluate_jet(p, pp, r, th);
      for (int s = 0; s < 4; ++s) acc[s] += (w[k] / spacing) * sj.dg[s];
    }
    for (int s = 0; s < 4; ++s) jet.d2g[dir][s] = acc[s];
  }
  // Symmetrise the mixed (r, theta) partial.
  const Mat4 mixed = 0.5 * (jet.d2g[kR][kTheta] + jet.d2g[kTheta][kR]);
  jet.d2g[kR][kTheta] = mixed;
  jet.d2g[kTheta][kR] = mixed;
  jet.has_second = true;
  return jet;
}

double g_inv_dtdt(const ChartProfile& prof, const SpacetimePoint& x) {
  if (x.chart != Chart::KerrStar)
    fail(ErrorCode::ChartDomainViolation, "g_inv_dtdt is defined in the Kerr-star chart");
  return -1.0 / metric_kerr_star(prof, x).g_inv(0, 0);
}

double ergosphere_indicator(const ChartProfile& prof, const SpacetimePoint& x) {
  return metric_kerr_star(prof, x).g(0, 0);
}

Christoffel christoffel(const ChartProfile& prof, const SpacetimePoint& x) {
  return christoffel(metric_jet(prof, x));
}

Mat4 ricci(const ChartProfile& prof, const SpacetimePoint& x, double spacing) {
  const auto& h = prof.horizons();
  const bool r_ok = x.chart == Chart::KerrStar
                        ? (x.r - 2 * spacing >= h.r_inner_cap && x.r + 2 * spacing <= h.r_outer_cap)
                        : (x.r - 2 * spacing > h.r_event && x.r + 2 * spacing < h.r_cosmo);
  if (!r_ok || !(x.theta - 2 * spacing > 0.0 && x.theta + 2 * spacing < kPi))
    fail(ErrorCode::StencilOutOfDomain, "Ricci stencil leaves the chart domain at r = " + fmt(x.r));
  return ricci(christoffel_jet(metric_second_jet(prof, x, spacing)));
}

Vectorfield killing_T() {
  Vectorfield v;
  v.label = VectorLabel::T;
  v.name = "T";
  v.components = [](const SpacetimePoint&) { return Vec4(1.0, 0.0, 0.0, 0.0); };
  v.jacobian = [](const SpacetimePoint&) { return Mat4(Mat4::Zero()); };
  return v;
}

Vectorfield killing_Phi() {
  Vectorfield v;
  v.label = VectorLabel::Phi;
  v.name = "Phi";
  v.components = [](const SpacetimePoint&) { return Vec4(0.0, 0.0, 0.0, 1.0); };
  v.jacobian = [](const SpacetimePoint&) { return Mat4(Mat4::Zero()); };
  return v;
}

Vectorfield coordinate_field(int slot) {
  Vectorfield v;
  v.label = VectorLabel::Coordinate;
  v.name = "d" + std::to_string(slot);
  v.components = [slot](const SpacetimePoint&) {
    Vec4 e = Vec4::Zero();
    e(slot) = 1.0;
    return e;
  };
  v.jacobian = [](const SpacetimePoint&) { return Mat4(Mat4::Zero()); };
  return v;
}

Vectorfield custom_field(std::string name, std::function<Vec4(const SpacetimePoint&)> fn) {
  Vectorfield v;
  v.label = VectorLabel::Custom;
  v.name = std::move(name);
  v.components = std::move(fn);
  return v;
}

Mat4 vector_jacobian(const Vectorfield& x, const SpacetimePoint& at, double h) {
  if (x.jacobian) return x.jacobian(at);
  Mat4 jac;
  for (int mu = 0; mu < 4; ++mu) {
    auto shifted = [&](double d) {
      SpacetimePoint p = at;
      double* c[4] = {&p.t_star, &p.r, &p.theta, &p.phi_star};
      *c[mu] += d;
      return x.components(p);
    };
    const Vec4 d = (shifted(-2 * h) - 8.0 * shifted(-h) + 8.0 * shifted(h) - shifted(2 * h)) / (12.0 * h);
    jac.row(mu) = d.transpose();
  }
  return jac;
}

Mat4 lie_derivative_metric(const ChartProfile& prof, const Vectorfield& x, const SpacetimePoint& at) {
  const MetricJet jet = metric_jet(prof, at);
  return lie_derivative(jet, x.components(at), vector_jacobian(x, at));
}

}  // namespace kds

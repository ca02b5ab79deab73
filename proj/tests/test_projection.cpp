#include <cmath>

#include "doctest.h"
#include "kds/projection.hpp"

using namespace kds;

namespace {

struct Slice {
  BlackHoleParams p = validate_params(3.0, 0.1, 0.0);
  HorizonData h = horizon_radii(p);
  ChartProfile prof = chart_profile_build(p, h);
  Grid2D grid;
  Background bg;
  explicit Slice(int n_r = 32, int n_theta = 16) : grid(build_grid(h, n_r, n_theta, 0)), bg(prof, grid, true) {}
};

double bump(double r) { return std::exp(-std::pow((r - 0.55) / 0.07, 2)); }

// Smooth axis-regular data on every slot except the phi* mixed ones.
StateVector smooth_data(const Grid2D& g, double amp) {
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
        const std::size_t k = g.index(i, j);
        s.u_comp(c)[k] = amp * (1.0 + 0.1 * c) * bump(r) * ang;
        s.v_comp(c)[k] = amp * (0.5 - 0.05 * c) * bump(r) * ang;
      }
  }
  return s;
}

double max_diff(const std::vector<cd>& a, const std::vector<cd>& b) {
  double m = 0.0;
  for (std::size_t q = 0; q < a.size(); ++q) m = std::max(m, std::abs(a[q] - b[q]));
  return m;
}

double max_abs(const std::vector<cd>& a) {
  double m = 0.0;
  for (const cd& z : a) m = std::max(m, std::abs(z));
  return m;
}

}  // namespace

TEST_CASE("projection of zero data is zero") {
  Slice s(24, 16);
  const StateVector z(10, s.grid.size());
  const StateVector out = gauge_project_slice(z, s.bg);
  CHECK(max_abs(out.u) == 0.0);
  CHECK(max_abs(out.v) == 0.0);
}

TEST_CASE("projection keeps the undetermined slots and annihilates the linearized constraint") {
  Slice s;
  const StateVector in = smooth_data(s.grid, 1e-3);
  const ConstraintResidual before = linearized_constraint_residual(in, s.bg);
  ConstraintResidual after;
  const StateVector out = gauge_project_slice(in, s.bg, &after);
  CHECK(before.max_residual > 1e-6);
  CHECK(after.max_ratio < 10.0);
  CHECK(after.max_residual < 10.0 * after.max_floor);
  CHECK(out.u == in.u);
  for (int c = 0; c < 10; ++c) {
    const auto [a, b] = kSymPairs[c];
    const bool determined = a == kT;
    const double d = max_diff(std::vector<cd>(out.v_comp(c), out.v_comp(c) + out.nodes),
                              std::vector<cd>(in.v_comp(c), in.v_comp(c) + in.nodes));
    if (!determined) CHECK(d == 0.0);
  }
  // Already constrained input is a fixed point.
  const StateVector again = gauge_project_slice(out, s.bg);
  CHECK(max_diff(again.v, out.v) <= 1e-12 * max_abs(out.v));
}

TEST_CASE("nonlinear projection satisfies the nonlinear constraint") {
  Slice s;
  const StateVector in = smooth_data(s.grid, 1e-3);
  const StateVector out = gauge_project_slice_nonlinear(in, s.bg);
  CHECK(nonlinear_constraint_max(in, s.bg) > 1e-6);
  CHECK(nonlinear_constraint_max(out, s.bg) < 1e-12);
}

TEST_CASE("linear and nonlinear projections differ quadratically") {
  Slice s;
  auto gap = [&](double amp) {
    const StateVector constrained = gauge_project_slice_nonlinear(smooth_data(s.grid, amp), s.bg);
    const StateVector proj = gauge_project_slice(constrained, s.bg);
    return max_diff(proj.v, constrained.v);
  };
  const double ratio = gap(1e-2) / gap(1e-3);
  MESSAGE("two-amplitude ratio " << ratio);
  CHECK(ratio >= 80.0);
  CHECK(ratio <= 120.0);
}

TEST_CASE("pure-gauge data linearizes to the Lie derivative") {
  // With Y = (1 + beta t*)(A d_t* + B d_r): h / amp -> L_Y g_b and
  // h1 / amp -> beta L_X g_b, X = A d_t* + B d_r.
  Slice s(32, 16);
  auto defect = [&](double amp) {
    PureGaugeSpec sp;
    sp.amplitude = amp;
    const StateVector h = pure_gauge_data(s.bg, sp);
    double d = 0.0;
    for (int i = 0; i < s.grid.n_r; ++i)
      for (int j = 0; j < s.grid.n_theta; ++j) {
        const std::size_t k = s.grid.index(i, j);
        const double r = s.grid.r(i);
        const double e = std::exp(-std::pow((r - sp.center) / sp.width, 2));
        const double ep = -2.0 * (r - sp.center) / (sp.width * sp.width) * e;
        const Vec4 x(sp.a_weight * e, sp.b_weight * e, 0.0, 0.0);
        Mat4 dx = Mat4::Zero();
        dx(kR, kT) = sp.a_weight * ep;
        dx(kR, kR) = sp.b_weight * ep;
        const Mat4 lie_x = lie_derivative(s.bg.jet(k), x, dx);
        dx(kT, kT) = sp.beta * x(kT);
        dx(kT, kR) = sp.beta * x(kR);
        const Mat4 lie_y = lie_derivative(s.bg.jet(k), x, dx);
        for (int c = 0; c < 10; ++c) {
          const auto [a, b] = kSymPairs[c];
          d = std::max(d, std::abs(h.u_comp(c)[k].real() / amp - lie_y(a, b)));
          d = std::max(d, std::abs(h.v_comp(c)[k].real() / amp - sp.beta * lie_x(a, b)));
        }
      }
    return d;
  };
  const double d1 = defect(1e-3), d2 = defect(5e-4);
  MESSAGE("pure-gauge linearization defects " << d1 << " " << d2);
  CHECK(d1 < 1e-1);
  CHECK(d1 / d2 == doctest::Approx(2.0).epsilon(0.05));
}

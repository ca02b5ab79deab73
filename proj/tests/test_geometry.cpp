#include <cmath>
#include <vector>

#include "doctest.h"
#include "kds/geometry.hpp"

using namespace kds;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Roots of r^3 - r + 0.2 = 0, i.e. mu(r) = 0 for Lambda = 3, M = 0.1.
double bisect_cubic(double lo, double hi) {
  auto f = [](double r) { return r * r * r - r + 0.2; };
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((f(mid) < 0) == (f(lo) < 0)) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct Sds {
  BlackHoleParams p = validate_params(3.0, 0.1, 0.0);
  HorizonData h = horizon_radii(p);
  ChartProfile prof = chart_profile_build(p, h);
};

SpacetimePoint ks(double r, double th) { return {0.0, r, th, 0.0, Chart::KerrStar}; }
SpacetimePoint bl(double r, double th) { return {0.0, r, th, 0.0, Chart::BoyerLindquist}; }

double mu(double r) { return 1.0 - 0.2 / r - r * r; }
double dmu(double r) { return 0.2 / (r * r) - 2.0 * r; }

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(validate_params(3.0, 0.1, 0.0));
  try {
    validate_params(1.0, 1.0 / 3.0, 0.0);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SubextremalityViolated);
  }
  try {
    validate_params(3.0, 0.1, 0.05);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SpinTooLarge);
  }
  CHECK_NOTHROW(validate_params(3.0, 0.1, 0.01));
}

TEST_CASE("horizons match the cubic bisection oracle") {
  const auto p = validate_params(3.0, 0.1, 0.0);
  const auto h = horizon_radii(p);
  const double re = bisect_cubic(0.1, 0.5);
  const double rc = bisect_cubic(0.5, 1.0);
  CHECK(h.r_event == doctest::Approx(re).epsilon(1e-12));
  CHECK(h.r_cosmo == doctest::Approx(rc).epsilon(1e-12));
  CHECK(std::abs(h.r_event - 0.2092) < 1e-4);
  CHECK(std::abs(h.r_cosmo - 0.8789) < 1e-4);
  CHECK(h.r_negative < 0.0);
  CHECK(std::abs(p.delta(h.r_event)) < 1e-12);
  CHECK(std::abs(p.delta(h.r_cosmo)) < 1e-12);
  CHECK(std::abs(p.delta_prime(h.r_event)) > 0.0);
  CHECK(h.epsilon_ext == doctest::Approx(0.05 * (rc - re)));
  for (double r = h.r_inner_cap + 1e-6; r < h.r_event; r += 1e-3) CHECK(p.delta(r) < 0.0);
}

TEST_CASE("pure de Sitter has r_cosmo = 1") {
  BlackHoleParams p{3.0, 0.0, 0.0, 0.1};
  // Mass zero is outside the validated family but the root finder is generic.
  const double r = bisect_cubic(0.5, 1.0);
  (void)r;
  CHECK(std::abs(p.delta(1.0)) == 0.0);
}

TEST_CASE("slow rotation moves the horizons by O(a^2)") {
  const auto h0 = horizon_radii(validate_params(3.0, 0.1, 0.0));
  const auto h1 = horizon_radii(validate_params(3.0, 0.1, 0.0005));
  const auto h2 = horizon_radii(validate_params(3.0, 0.1, 0.001));
  const double d1 = std::abs(h1.r_event - h0.r_event);
  const double d2 = std::abs(h2.r_event - h0.r_event);
  CHECK(d1 < 10 * 0.0005 * 0.0005 / 0.1);
  CHECK(d2 / d1 == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("Boyer-Lindquist metric on SdS") {
  Sds s;
  const MetricJet j = metric_bl(s.p, s.h, bl(0.5, kPi / 2));
  CHECK(j.g(0, 0) == doctest::Approx(-0.35).epsilon(1e-14));
  CHECK(j.g(3, 3) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(j.g(1, 1) == doctest::Approx(1.0 / 0.35).epsilon(1e-14));
  CHECK(j.g(0, 3) == 0.0);
  CHECK(inverse_defect(j) < 1e-12);
  CHECK_THROWS_AS(metric_bl(s.p, s.h, bl(s.h.r_event, 1.0)), Error);
  CHECK_THROWS_AS(metric_bl(s.p, s.h, bl(0.5, 0.0)), Error);
}

TEST_CASE("exact partials agree with central differences") {
  const auto p = validate_params(3.0, 0.1, 0.008);
  const auto h = horizon_radii(p);
  const auto prof = chart_profile_build(p, h);
  const double d = 1e-5;
  for (double r : {0.2, 0.3, 0.45, 0.62, 0.8, 0.9}) {
    for (double th : {0.4, 1.3, 2.5}) {
      const MetricJet j = metric_kerr_star(prof, ks(r, th));
      const Mat4 fr = (metric_kerr_star(prof, ks(r + d, th)).g - metric_kerr_star(prof, ks(r - d, th)).g) / (2 * d);
      const Mat4 ft = (metric_kerr_star(prof, ks(r, th + d)).g - metric_kerr_star(prof, ks(r, th - d)).g) / (2 * d);
      CHECK(max_abs(fr - j.dg[kR]) < 1e-6);
      CHECK(max_abs(ft - j.dg[kTheta]) < 1e-6);
      CHECK(max_abs(j.dg[kT]) == 0.0);
      CHECK(max_abs(j.dg[kPhi]) == 0.0);
    }
  }
}

TEST_CASE("Christoffel symbols") {
  Sds s;
  const double r = 0.5, th = 0.7;
  const Christoffel gam = christoffel(s.prof, bl(r, th));
  CHECK(gam[kR](0, 0) == doctest::Approx(0.5 * mu(r) * dmu(r)).epsilon(1e-13));
  CHECK(gam[kTheta](3, 3) == doctest::Approx(-std::sin(th) * std::cos(th)).epsilon(1e-13));
  for (int c = 0; c < 4; ++c) CHECK(max_abs(gam[c] - gam[c].transpose()) == 0.0);

  const auto p = validate_params(3.0, 0.1, 0.01);
  const auto prof = chart_profile_build(p, horizon_radii(p));
  for (double rr : {0.2, 0.35, 0.7, 0.9}) {
    const MetricJet j = metric_kerr_star(prof, ks(rr, 1.1));
    const Christoffel g = christoffel(j);
    double worst = 0.0;
    for (int x = 0; x < 4; ++x)
      for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) {
          double v = j.dg[x](m, n);
          for (int l = 0; l < 4; ++l) v -= g[l](x, m) * j.g(l, n) + g[l](x, n) * j.g(m, l);
          worst = std::max(worst, std::abs(v));
        }
    CHECK(worst < 1e-11);
  }
}

TEST_CASE("Kerr-star chart reduces to the SdS substitution") {
  Sds s;
  for (double r : {0.22, 0.3, 0.4, 0.5, 0.6, 0.75, 0.86}) {
    const double th = 1.2;
    const MetricJet j = metric_kerr_star(s.prof, ks(r, th));
    const double m = mu(r), fp = s.prof.F_prime(r);
    CHECK(j.g(0, 0) == doctest::Approx(-m).epsilon(1e-13));
    CHECK(j.g(0, 1) == doctest::Approx(-m * fp).epsilon(1e-12));
    CHECK(j.g(1, 1) == doctest::Approx(1.0 / m - m * fp * fp).epsilon(1e-12));
    CHECK(j.g(2, 2) == doctest::Approx(r * r).epsilon(1e-14));
    CHECK(j.g(3, 3) == doctest::Approx(r * r * std::sin(th) * std::sin(th)).epsilon(1e-14));
  }
}

TEST_CASE("chart profile contract") {
  Sds s;
  const auto [r1, r2] = s.prof.middle_interval();
  CHECK(r1 > s.h.r_event + s.h.epsilon_ext);
  CHECK(r2 < s.h.r_cosmo - s.h.epsilon_ext);
  for (int i = 0; i <= 20; ++i) {
    const double r = r1 + (r2 - r1) * i / 20.0;
    CHECK(s.prof.F(r) == 0.0);
    CHECK(s.prof.F_prime(r) == 0.0);
    const MetricJet a = metric_kerr_star(s.prof, ks(r, 0.9));
    const MetricJet b = metric_bl(s.p, s.h, bl(r, 0.9));
    CHECK(max_abs(a.g - b.g) < 1e-14);
    CHECK(g_inv_dtdt(s.prof, ks(r, 0.9)) == doctest::Approx(mu(r)).epsilon(1e-13));
  }
  for (double r = s.h.r_event + 1e-3; r < s.h.r_cosmo; r += 0.01) CHECK(s.prof.F(r) >= 0.0);
  CHECK(s.prof.spacelike_margin() > 0.0);
  CHECK(s.prof.gfrak_bounds().first > 0.0);

  // Smooth transition values.
  CHECK(smoothstep(0.0) == 0.0);
  CHECK(smoothstep(1.0) == 1.0);
  CHECK(smoothstep(0.5) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("Kerr-star metric is regular on the extended interval") {
  for (double a : {0.0, 1e-4, 0.01}) {
    const auto p = validate_params(3.0, 0.1, a);
    const auto h = horizon_radii(p);
    const auto prof = chart_profile_build(p, h);
    const int nr = 200, nt = 17;
    double worst_inv = 0.0, worst_gtt = -1e300, biggest = 0.0;
    int bad_sig = 0;
    for (int i = 0; i < nr; ++i) {
      const double r = h.r_inner_cap + (h.r_outer_cap - h.r_inner_cap) * i / (nr - 1);
      for (int j = 0; j < nt; ++j) {
        const double th = kPi * (j + 0.5) / nt;
        const MetricJet jet = metric_kerr_star(prof, ks(r, th));
        worst_inv = std::max(worst_inv, inverse_defect(jet));
        worst_gtt = std::max(worst_gtt, jet.g_inv(0, 0));
        biggest = std::max(biggest, jet.g.cwiseAbs().maxCoeff());
        if (negative_eigenvalue_count(jet.g) != 1) ++bad_sig;
      }
    }
    CHECK(worst_inv < 1e-12);
    CHECK(worst_gtt < 0.0);
    CHECK(biggest < 1e3);
    CHECK(bad_sig == 0);
    for (double r : {h.r_event, h.r_cosmo}) {
      const MetricJet jet = metric_kerr_star(prof, ks(r, 1.0));
      CHECK(jet.g.allFinite());
      CHECK(inverse_defect(jet) < 1e-12);
    }
  }
}

TEST_CASE("ergosphere indicator on SdS") {
  Sds s;
  CHECK(ergosphere_indicator(s.prof, ks(0.5, 1.0)) < 0.0);
  CHECK(ergosphere_indicator(s.prof, ks(s.h.r_inner_cap + 0.005, 1.0)) > 0.0);
  CHECK(ergosphere_indicator(s.prof, ks(s.h.r_outer_cap - 0.005, 1.0)) > 0.0);
  CHECK(std::abs(ergosphere_indicator(s.prof, ks(s.h.r_event, 1.0))) < 1e-10);
}

TEST_CASE("g_inv_dtdt depends on a quadratically") {
  Sds s;
  const auto p1 = validate_params(3.0, 0.1, 1e-4);
  const auto prof1 = chart_profile_build(p1, horizon_radii(p1));
  const auto p2 = validate_params(3.0, 0.1, 2e-4);
  const auto prof2 = chart_profile_build(p2, horizon_radii(p2));
  const double r = 0.5, th = 1.0;
  const double g0 = g_inv_dtdt(s.prof, ks(r, th));
  const double d1 = std::abs(g_inv_dtdt(prof1, ks(r, th)) - g0);
  const double d2 = std::abs(g_inv_dtdt(prof2, ks(r, th)) - g0);
  CHECK(d1 < 1e-6);
  CHECK(d2 / d1 == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("Killing fields and Lie derivatives") {
  for (double a : {0.0, 1e-4, 0.01}) {
    const auto p = validate_params(3.0, 0.1, a);
    const auto prof = chart_profile_build(p, horizon_radii(p));
    for (double r : {0.18, 0.21, 0.3, 0.55, 0.8, 0.91})
      for (double th : {0.3, 1.5, 2.9}) {
        CHECK(max_abs(lie_derivative_metric(prof, killing_T(), ks(r, th))) < 1e-10);
        CHECK(max_abs(lie_derivative_metric(prof, killing_Phi(), ks(r, th))) < 1e-10);
      }
  }
  Sds s;
  const auto x = custom_field("r_dr", [](const SpacetimePoint& q) { return Vec4(0, q.r, 0, 0); });
  const double r = 0.5, th = 0.8;
  const Mat4 L = lie_derivative_metric(s.prof, x, bl(r, th));
  CHECK(L(0, 0) == doctest::Approx(-r * dmu(r)).epsilon(1e-9));
  CHECK(L(1, 1) == doctest::Approx(-r * dmu(r) / (mu(r) * mu(r)) + 2.0 / mu(r)).epsilon(1e-9));
  CHECK(L(2, 2) == doctest::Approx(2 * r * r).epsilon(1e-9));
  CHECK(L(3, 3) == doctest::Approx(2 * r * r * std::sin(th) * std::sin(th)).epsilon(1e-9));
}

TEST_CASE("Ricci identity converges at fourth order") {
  for (double a : {0.0, 0.01}) {
    const auto p = validate_params(3.0, 0.1, a);
    const auto prof = chart_profile_build(p, horizon_radii(p));
    std::vector<double> res;
    for (double hstep : {4e-3, 2e-3, 1e-3}) {
      double worst = 0.0;
      for (double r : {0.19, 0.24, 0.31, 0.5, 0.78, 0.86, 0.9})
        for (double th : {0.5, 1.4, 2.6}) {
          const SpacetimePoint x = ks(r, th);
          worst = std::max(worst, max_abs(ricci(prof, x, hstep) + p.lambda * metric_kerr_star(prof, x).g));
        }
      res.push_back(worst);
    }
    CHECK(res[0] < 1e-3);
    CHECK(res[2] < 1e-5);
    CHECK(std::log2(res[1] / res[2]) > 3.5);
  }
  Sds s;
  CHECK_THROWS_AS(ricci(s.prof, ks(s.h.r_inner_cap + 1e-3, 1.0), 1e-3), Error);
}

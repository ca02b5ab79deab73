#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kds/error.hpp"
#include "kds/tensor.hpp"

namespace kds {

/// Kerr-de Sitter parameters (Lambda, M, a) in geometric units.
struct BlackHoleParams {
  double lambda = 3.0;
  double mass = 0.1;
  double spin = 0.0;
  double spin_cap = 0.1;

  double lambda_b() const { return lambda * spin * spin / 3.0; }
  /// Delta_b(r) = (r^2 + a^2)(1 - Lambda r^2 / 3) - 2 M r.
  double delta(double r) const;
  double delta_prime(double r) const;
  /// Schwarzschild-de Sitter mu(r) = 1 - 2M/r - Lambda r^2/3 (spin ignored).
  double mu(double r) const;
};

/// Rejects superextremal parameters (1 - 9 Lambda M^2 <= 0) and spins above
/// spin_cap * M.
BlackHoleParams validate_params(double lambda, double mass, double spin,
                                double spin_cap = 0.1);

struct HorizonData {
  std::vector<double> roots;  // all real roots of Delta_b, ascending
  double r_negative = 0.0;
  double r_event = 0.0;
  double r_cosmo = 0.0;
  double epsilon_ext = 0.0;
  double r_inner_cap = 0.0;
  double r_outer_cap = 0.0;

  double span() const { return r_cosmo - r_event; }
};

inline constexpr double kDefaultEpsilonFraction = 0.05;

/// Roots of Delta_b by coarse scan, bisection and Newton polish. The caps are
/// placed epsilon_ext beyond each horizon.
HorizonData horizon_radii(const BlackHoleParams& p, double epsilon_ext);
/// Same with epsilon_ext = kDefaultEpsilonFraction * (r_cosmo - r_event).
HorizonData horizon_radii(const BlackHoleParams& p);

enum class Chart { BoyerLindquist, KerrStar };

struct SpacetimePoint {
  double t_star = 0.0;
  double r = 0.0;
  double theta = 0.0;
  double phi_star = 0.0;
  Chart chart = Chart::KerrStar;
};

/// C^6 polynomial smoothstep (degree 13) on [0, 1], clamped outside.
double smoothstep(double x);

/// Regularising profile for the Kerr-star chart
///   t* = t - F(r),  phi* = phi - Phi(r),
///   F'   = s(r) ((1 + lambda_b)(r^2 + a^2)/Delta_b - 1),
///   Phi' = s(r) a (1 + lambda_b)/Delta_b,
/// with s = -1 up to r_event + eps, s = 0 on the middle interval and s = +1
/// beyond r_cosmo - eps. Construction verifies that the t*-slices are
/// uniformly spacelike on the extended interval.
class ChartProfile {
 public:
  ChartProfile(const BlackHoleParams& p, const HorizonData& h,
               std::pair<double, double> middle_interval);

  double s(double r) const;
  double ds(double r) const;
  double F_prime(double r) const;
  double Phi_prime(double r) const;
  /// F normalised to vanish on the middle interval; defined strictly between
  /// the horizons only.
  double F(double r) const;
  double Phi(double r) const;

  std::pair<double, double> middle_interval() const { return {r1_, r2_}; }
  double inner_transition_start() const { return a0_; }
  double outer_transition_end() const { return b0_; }
  const BlackHoleParams& params() const { return params_; }
  const HorizonData& horizons() const { return horizons_; }

  /// Uniform spacelikeness margin: G(dt*, dt*) <= -c0 on the verification grid.
  double spacelike_margin() const { return c0_; }
  /// Bounds of -1/G(dt*, dt*) over the verification grid.
  std::pair<double, double> gfrak_bounds() const { return {gfrak_min_, gfrak_max_}; }

  /// Templated transition function for exact differentiation.
  template <class T>
  T s_of(const T& r) const;

 private:
  BlackHoleParams params_;
  HorizonData horizons_;
  double a0_, r1_, r2_, b0_;
  double c0_ = 0.0;
  double gfrak_min_ = 0.0, gfrak_max_ = 0.0;
};

/// Default middle interval: the central 20% of (r_event, r_cosmo).
std::pair<double, double> default_middle_interval(const HorizonData& h);

ChartProfile chart_profile_build(const BlackHoleParams& p, const HorizonData& h,
                                 std::optional<std::pair<double, double>> middle = {});

/// Boyer-Lindquist metric with exact first partials. Refuses points on or
/// outside the horizons and on the axis.
MetricJet metric_bl(const BlackHoleParams& p, const HorizonData& h, const SpacetimePoint& x);

/// Kerr-star metric with exact first partials, regular across both horizons.
MetricJet metric_kerr_star(const ChartProfile& prof, const SpacetimePoint& x);

/// Dispatches on x.chart.
MetricJet metric_jet(const ChartProfile& prof, const SpacetimePoint& x);

/// First jet plus second partials by fourth-order central differences of the
/// exact first partials with the given spacing.
MetricJet metric_second_jet(const ChartProfile& prof, const SpacetimePoint& x, double spacing);

/// -1 / G(dt*, dt*).
double g_inv_dtdt(const ChartProfile& prof, const SpacetimePoint& x);

/// g(T, T) with T = d/dt*; positive inside the ergoregion.
double ergosphere_indicator(const ChartProfile& prof, const SpacetimePoint& x);

Christoffel christoffel(const ChartProfile& prof, const SpacetimePoint& x);

/// Ricci tensor from fourth-order differences of the exact Christoffel
/// symbols. Throws StencilOutOfDomain if the stencil leaves the chart domain.
Mat4 ricci(const ChartProfile& prof, const SpacetimePoint& x, double spacing);

enum class VectorLabel { T, Phi, N, Coordinate, Custom };

/// Vectorfield given by its components in the chart of the evaluation point.
/// A missing jacobian is approximated by fourth-order central differences.
struct Vectorfield {
  VectorLabel label = VectorLabel::Custom;
  std::string name;
  std::function<Vec4(const SpacetimePoint&)> components;
  std::function<Mat4(const SpacetimePoint&)> jacobian;  // (mu, a) = d_mu X^a
};

Vectorfield killing_T();
Vectorfield killing_Phi();
Vectorfield coordinate_field(int slot);
Vectorfield custom_field(std::string name, std::function<Vec4(const SpacetimePoint&)> fn);

Mat4 vector_jacobian(const Vectorfield& x, const SpacetimePoint& at, double h = 1e-3);

/// (L_X g)_{mu nu} at a point.
Mat4 lie_derivative_metric(const ChartProfile& prof, const Vectorfield& x,
                           const SpacetimePoint& at);

/// True if r lies in the closed extended interval.
bool in_extended_interval(const HorizonData& h, double r);

}  // namespace kds

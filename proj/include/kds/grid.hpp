#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "kds/geometry.hpp"

namespace kds {

using cd = std::complex<double>;

/// Uniform (r, theta) grid over the extended interval. Theta nodes are
/// staggered half a cell from the poles.
struct Grid2D {
  double r_min = 0.0;
  double r_max = 0.0;
  int n_r = 0;
  int n_theta = 0;
  int mode_m = 0;
  double spacing_r = 0.0;
  double spacing_theta = 0.0;

  double r(int i) const { return i == n_r - 1 ? r_max : r_min + i * spacing_r; }
  double theta(int j) const { return (j + 0.5) * spacing_theta; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n_theta + j; }
  std::size_t size() const { return static_cast<std::size_t>(n_r) * n_theta; }
};

/// Grid spanning [r_inner_cap, r_outer_cap]; both counts must be >= 16.
Grid2D build_grid(const HorizonData& h, int n_r, int n_theta, int mode_m);
Grid2D build_grid(double r_min, double r_max, int n_r, int n_theta, int mode_m);

/// Fourth-order finite differences. Radial operators use shifted one-sided
/// stencils on the two outermost nodes. Theta operators fill ghost nodes by
/// reflection across the poles with the given parity (+1 or -1).
template <class T> void diff_r(const Grid2D& g, const T* f, T* out);
template <class T> void diff_rr(const Grid2D& g, const T* f, T* out);
template <class T> void diff_theta(const Grid2D& g, const T* f, int parity, T* out);
template <class T> void diff_thetatheta(const Grid2D& g, const T* f, int parity, T* out);

/// Kreiss-Oliger filter f += (sigma/64) delta^6 f in both directions. Near the
/// caps the radial part uses the truncated form -D3^T D3.
template <class T> void ko_filter(const Grid2D& g, T* f, int parity, double sigma);

/// Quadrature weights: int f dr on the radial nodes (Gregory end corrections)
/// and int F(theta) dtheta for F = sin(theta) G(cos(theta)) on the staggered
/// nodes (Fejer's first rule).
std::vector<double> radial_weights(const Grid2D& g);
std::vector<double> theta_weights(const Grid2D& g);

/// Time quadrature for equally spaced samples (Gregory end corrections, or
/// trapezoid for fewer than 8 samples).
std::vector<double> time_weights(std::size_t n, double dt);

/// Theta parity of a scalar mode, of symmetric-tensor slot (a, b) and of
/// one-form slot a, for reflections through the poles.
int scalar_parity(int mode_m);
int tensor_parity(int a, int b);
int oneform_parity(int a);

/// Number of phi* indices of a tensor or one-form slot. A smooth field has
/// coordinate components that vanish like sin^p(theta) at the axis with p
/// this count; the evolution differentiates the quotient by sin^p instead.
int tensor_axis_power(int a, int b);
int oneform_axis_power(int a);

/// Pairwise summation for reproducible reductions.
double pairwise_sum(const double* x, std::size_t n);

}  // namespace kds

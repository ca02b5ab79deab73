#pragma once

#include <Eigen/Dense>
#include <array>
#include <utility>

namespace kds {

// Coordinate slots: 0 = t*, 1 = r, 2 = theta, 3 = phi* (or t, r, theta, phi
// in the Boyer-Lindquist chart).
inline constexpr int kT = 0;
inline constexpr int kR = 1;
inline constexpr int kTheta = 2;
inline constexpr int kPhi = 3;

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

/// d[sigma](a, b) = partial_sigma of a 2-tensor component.
using Deriv = std::array<Mat4, 4>;
/// d2[sigma][tau](a, b) = partial_sigma partial_tau of a 2-tensor component.
using Deriv2 = std::array<std::array<Mat4, 4>, 4>;
/// gamma[chi](mu, nu) = Gamma^chi_{mu nu}.
using Christoffel = std::array<Mat4, 4>;

/// The ten independent (a <= b) slots of a symmetric 4x4 tensor.
inline constexpr std::array<std::pair<int, int>, 10> kSymPairs = {{
    {0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1},
    {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3},
}};

inline Deriv zero_deriv() {
  Deriv d;
  for (auto& m : d) m.setZero();
  return d;
}

inline Deriv2 zero_deriv2() {
  Deriv2 d;
  for (auto& row : d)
    for (auto& m : row) m.setZero();
  return d;
}

/// Metric (or any symmetric 2-tensor) with inverse and coordinate partials at
/// one point.
struct MetricJet {
  Mat4 g = Mat4::Zero();
  Mat4 g_inv = Mat4::Zero();
  Deriv dg = zero_deriv();
  bool has_second = false;
  Deriv2 d2g = zero_deriv2();
};

/// Christoffel symbols and (optionally) their coordinate partials.
struct ChristoffelJet {
  Christoffel gamma;
  std::array<Christoffel, 4> dgamma;  // dgamma[sigma][chi](mu, nu)
};

Mat4 invert_metric(const Mat4& g);

/// Fills g_inv from g.
void complete_inverse(MetricJet& jet);

/// Partials of the inverse metric: dginv[sigma] = -G dg[sigma] G.
Deriv inverse_partials(const MetricJet& jet);

Christoffel christoffel(const MetricJet& jet);

/// Requires jet.has_second.
ChristoffelJet christoffel_jet(const MetricJet& jet);

/// Ricci tensor in the sign convention where the Einstein vacuum equations
/// with cosmological constant read Ric + Lambda g = 0. This is minus the
/// contraction R^s_{m s n} of the usual d Gamma - d Gamma + Gamma Gamma - Gamma
/// Gamma Riemann tensor; de Sitter space has negative Ricci here.
Mat4 ricci(const ChristoffelJet& cj);

/// (L_X g)_{mu nu} given X^a and dX(mu, a) = partial_mu X^a.
Mat4 lie_derivative(const MetricJet& jet, const Vec4& x, const Mat4& dx);

/// 1/2 (nabla_mu X_nu + nabla_nu X_mu) via Christoffel symbols.
Mat4 deformation_covariant(const MetricJet& jet, const Vec4& x, const Mat4& dx);

double max_abs(const Mat4& m);

/// max |g g_inv - I|.
double inverse_defect(const MetricJet& jet);

/// Number of negative eigenvalues of a symmetric matrix.
int negative_eigenvalue_count(const Mat4& g);

}  // namespace kds

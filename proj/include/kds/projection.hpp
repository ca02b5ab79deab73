#pragma once

#include <functional>

#include "kds/background.hpp"
#include "kds/evolution.hpp"

namespace kds {

/// Parity of the ten symmetric-tensor slots.
int sym_slot_parity(int comp);

/// Constraint residuals of slice data (h0, h1) = (s.u, s.v), evaluated with
/// the evolution stencils.
struct ConstraintResidual {
  double max_residual = 0.0;
  double max_floor = 0.0;  // largest per-node rounding floor of the solve
  double max_ratio = 0.0;  // max over nodes of residual / floor
};

/// Linearized constraint delta Upsilon(h) on the slice.
ConstraintResidual linearized_constraint_residual(const StateVector& pair, const Background& bg);

/// max over nodes of |Upsilon(g_b + h, g_b)|.
double nonlinear_constraint_max(const StateVector& pair, const Background& bg);

/// The slice projection: h0 and the spatial-spatial part of h1 are kept and
/// d_t h_{t* mu} is solved node by node from delta Upsilon(h) = 0. Throws
/// DegenerateLapse when |G(dt*, dt*)| is below threshold.
StateVector gauge_project_slice(const StateVector& pair, const Background& bg,
                                ConstraintResidual* residual = nullptr);

/// Same construction for the nonlinear condition Upsilon(g_b + h, g_b) = 0,
/// which is affine in d_t h_{t* mu} as well.
StateVector gauge_project_slice_nonlinear(const StateVector& pair, const Background& bg);

/// Pure-gauge slice data h = phi^* g_b - g_b at t* = 0 for the diffeomorphism
///   t* -> t* + amp A(r)(1 + beta t*),  r -> r + amp B(r)(1 + beta t*),
/// with Gaussian bumps A, B (center +- 4 width inside the slice). Such h
/// solves the vacuum equations exactly.
struct PureGaugeSpec {
  double amplitude = 1e-3;
  double beta = 0.5;
  double center = 0.5;
  double width = 0.08;
  double a_weight = 1.0;
  double b_weight = 0.6;
};

StateVector pure_gauge_data(const Background& bg, const PureGaugeSpec& spec);

}  // namespace kds

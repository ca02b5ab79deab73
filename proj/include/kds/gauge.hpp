#pragma once

#include "kds/tensor.hpp"

namespace kds {

/// Symmetric 2-tensor with coordinate partials at a point.
struct SymJet {
  Mat4 h = Mat4::Zero();
  Deriv dh = zero_deriv();
  Deriv2 d2h = zero_deriv2();
};

/// One-form with coordinate partials: dw(s, m) = d_s w_m and
/// d2w[m](s, t) = d_s d_t w_m.
struct OneFormJet {
  Vec4 w = Vec4::Zero();
  Mat4 dw = Mat4::Zero();
  std::array<Mat4, 4> d2w = {Mat4::Zero(), Mat4::Zero(), Mat4::Zero(), Mat4::Zero()};
};

/// g^{ab} h_{ab}.
double trace(const Mat4& h, const Mat4& g_inv);

/// h - 1/2 (tr_g h) g.
Mat4 trace_reversal(const Mat4& h, const MetricJet& g);

/// Jet of g + eps h (inverse recomputed, second partials if both carry them).
MetricJet perturbed(const MetricJet& g, const SymJet& h, double eps);

/// Upsilon(g, g0)_mu = g_{mu chi} g^{nu lambda} (Gamma[g] - Gamma[g0])^chi_{nu lambda}.
Vec4 constraint_op(const MetricJet& g, const MetricJet& g0);
Vec4 constraint_op(const MetricJet& g, const Christoffel& gamma0);

/// Directional derivative of Upsilon(., g) at g in direction h,
///   (delta Upsilon)_mu = nabla^nu h_{nu mu} - 1/2 nabla_mu tr_g h,
/// i.e. the divergence of the trace reversal of h.
Vec4 linearized_constraint(const SymJet& h, const MetricJet& g);
Vec4 linearized_constraint(const SymJet& h, const MetricJet& g, const Christoffel& gamma);

/// nabla_s h_{mn} from a jet.
Deriv covariant_derivative(const SymJet& h, const Christoffel& gamma);

/// (nabla^* w)_{mn} = -1/2 (nabla_m w_n + nabla_n w_m).
Mat4 symmetric_gradient(const OneFormJet& w, const MetricJet& g);

/// Value and first partials of nabla^* w; needs second partials of g and w.
SymJet symmetric_gradient_jet(const OneFormJet& w, const MetricJet& g);

/// Ric(g) + Lambda g - nabla^*_g Upsilon(g, g0). The reference enters through
/// its Christoffel symbols and their partials. g needs second partials.
Mat4 gauge_fixed_einstein(const MetricJet& g, const ChristoffelJet& ref, double lambda);
Mat4 gauge_fixed_einstein(const MetricJet& g, const MetricJet& g0, double lambda);

/// Size of the jet used to scale the differencing step.
double jet_scale(const SymJet& h);

/// Step used for the central directional derivative of E along h.
double linearization_step(const MetricJet& bg, const SymJet& h);

/// Central directional derivative (E(g + eps h) - E(g - eps h)) / (2 eps) with
/// automatic eps and a Richardson consistency check (EpsilonUnderflow).
Mat4 linearized_einstein(const SymJet& h, const MetricJet& bg, const ChristoffelJet& ref,
                         double lambda);

/// Same with a caller-chosen step and no consistency check.
Mat4 linearized_einstein_fixed(const SymJet& h, const MetricJet& bg, const ChristoffelJet& ref,
                               double lambda, double eps);

/// N(h) = L h - E(g + h); vanishes quadratically at h = 0.
Mat4 nonlinearity_eval(const SymJet& h, const MetricJet& bg, const ChristoffelJet& ref,
                       double lambda);

/// Constraint propagation operator as -2 div(trace reversal of nabla^* w).
Vec4 constraint_propagation_div(const OneFormJet& w, const MetricJet& g);

/// Same operator as box w - Ric(w, .).
Vec4 constraint_propagation_box(const OneFormJet& w, const MetricJet& g);

}  // namespace kds

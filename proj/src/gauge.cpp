#include "kds/gauge.hpp"

#include <cmath>
#include <limits>

#include "kds/error.hpp"

namespace kds {

namespace {

double frob(const Mat4& a, const Mat4& b) { return (a.array() * b.array()).sum(); }

// A(m, l) = Gamma^l_{s m} for fixed s.
Mat4 connection_matrix(const Christoffel& gamma, int s) {
  Mat4 a;
  for (int m = 0; m < 4; ++m)
    for (int l = 0; l < 4; ++l) a(m, l) = gamma[l](s, m);
  return a;
}

double max_abs_deriv(const Deriv& d) {
  double m = 0.0;
  for (const auto& x : d) m = std::max(m, max_abs(x));
  return m;
}

}  // namespace

double trace(const Mat4& h, const Mat4& g_inv) { return frob(h, g_inv); }

Mat4 trace_reversal(const Mat4& h, const MetricJet& g) {
  return h - 0.5 * trace(h, g.g_inv) * g.g;
}

MetricJet perturbed(const MetricJet& g, const SymJet& h, double eps) {
  MetricJet out;
  out.g = g.g + eps * h.h;
  for (int s = 0; s < 4; ++s) out.dg[s] = g.dg[s] + eps * h.dh[s];
  out.has_second = g.has_second;
  if (g.has_second)
    for (int s = 0; s < 4; ++s)
      for (int t = 0; t < 4; ++t) out.d2g[s][t] = g.d2g[s][t] + eps * h.d2h[s][t];
  complete_inverse(out);
  return out;
}

Vec4 constraint_op(const MetricJet& g, const Christoffel& gamma0) {
  const Christoffel gam = christoffel(g);
  Vec4 c;
  for (int x = 0; x < 4; ++x) c(x) = frob(g.g_inv, gam[x] - gamma0[x]);
  return g.g * c;
}

Vec4 constraint_op(const MetricJet& g, const MetricJet& g0) {
  return constraint_op(g, christoffel(g0));
}

Deriv covariant_derivative(const SymJet& h, const Christoffel& gamma) {
  Deriv out;
  for (int s = 0; s < 4; ++s) {
    const Mat4 ah = connection_matrix(gamma, s) * h.h;
    out[s] = h.dh[s] - ah - ah.transpose();
  }
  return out;
}

Vec4 linearized_constraint(const SymJet& h, const MetricJet& g, const Christoffel& gamma) {
  const Deriv nh = covariant_derivative(h, gamma);
  Vec4 out;
  for (int mu = 0; mu < 4; ++mu) {
    double div = 0.0;
    for (int nu = 0; nu < 4; ++nu)
      for (int a = 0; a < 4; ++a) div += g.g_inv(nu, a) * nh[nu](a, mu);
    out(mu) = div - 0.5 * frob(g.g_inv, nh[mu]);
  }
  return out;
}

Vec4 linearized_constraint(const SymJet& h, const MetricJet& g) {
  return linearized_constraint(h, g, christoffel(g));
}

Mat4 symmetric_gradient(const OneFormJet& w, const MetricJet& g) {
  const Christoffel gam = christoffel(g);
  Mat4 k;
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) {
      double v = 0.5 * (w.dw(m, n) + w.dw(n, m));
      for (int l = 0; l < 4; ++l) v -= gam[l](m, n) * w.w(l);
      k(m, n) = -v;
    }
  return k;
}

SymJet symmetric_gradient_jet(const OneFormJet& w, const MetricJet& g) {
  const ChristoffelJet cj = christoffel_jet(g);
  SymJet out;
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) {
      double v = -0.5 * (w.dw(m, n) + w.dw(n, m));
      for (int l = 0; l < 4; ++l) v += cj.gamma[l](m, n) * w.w(l);
      out.h(m, n) = v;
      for (int s = 0; s < 4; ++s) {
        double d = -0.5 * (w.d2w[n](s, m) + w.d2w[m](s, n));
        for (int l = 0; l < 4; ++l) d += cj.dgamma[s][l](m, n) * w.w(l) + cj.gamma[l](m, n) * w.dw(s, l);
        out.dh[s](m, n) = d;
      }
    }
  return out;
}

Mat4 gauge_fixed_einstein(const MetricJet& g, const ChristoffelJet& ref, double lambda) {
  const ChristoffelJet cj = christoffel_jet(g);
  const Deriv dginv = inverse_partials(g);
  Vec4 c;
  Christoffel diff;
  for (int x = 0; x < 4; ++x) {
    diff[x] = cj.gamma[x] - ref.gamma[x];
    c(x) = frob(g.g_inv, diff[x]);
  }
  const Vec4 ups = g.g * c;
  Mat4 nabla;  // nabla(s, m) = nabla_s Upsilon_m
  for (int s = 0; s < 4; ++s) {
    Vec4 dc;
    for (int x = 0; x < 4; ++x)
      dc(x) = frob(dginv[s], diff[x]) + frob(g.g_inv, cj.dgamma[s][x] - ref.dgamma[s][x]);
    const Vec4 dups = g.dg[s] * c + g.g * dc;
    for (int m = 0; m < 4; ++m) {
      double v = dups(m);
      for (int l = 0; l < 4; ++l) v -= cj.gamma[l](s, m) * ups(l);
      nabla(s, m) = v;
    }
  }
  return ricci(cj) + lambda * g.g + 0.5 * (nabla + nabla.transpose());
}

Mat4 gauge_fixed_einstein(const MetricJet& g, const MetricJet& g0, double lambda) {
  return gauge_fixed_einstein(g, christoffel_jet(g0), lambda);
}

double jet_scale(const SymJet& h) {
  double m = max_abs(h.h);
  m = std::max(m, max_abs_deriv(h.dh));
  for (const auto& row : h.d2h) m = std::max(m, max_abs_deriv(row));
  return m;
}

double linearization_step(const MetricJet& bg, const SymJet& h) {
  const double scale = jet_scale(h);
  const double bscale = std::max(1.0, max_abs(bg.g));
  if (scale == 0.0) return 0.0;
  return std::cbrt(std::numeric_limits<double>::epsilon()) * bscale / scale;
}

Mat4 linearized_einstein_fixed(const SymJet& h, const MetricJet& bg, const ChristoffelJet& ref,
                               double lambda, double eps) {
  const Mat4 ep = gauge_fixed_einstein(perturbed(bg, h, eps), ref, lambda);
  const Mat4 em = gauge_fixed_einstein(perturbed(bg, h, -eps), ref, lambda);
  return (ep - em) / (2.0 * eps);
}

Mat4 linearized_einstein(const SymJet& h, const MetricJet& bg, const ChristoffelJet& ref,
                         double lambda) {
  const double eps = linearization_step(bg, h);
  if (eps == 0.0) return Mat4::Zero();
  if (!std::isfinite(eps) || eps < std::numeric_limits<double>::min())
    fail(ErrorCode::EpsilonUnderflow, "no usable differencing step for this direction");
  const Mat4 l1 = linearized_einstein_fixed(h, bg, ref, lambda, eps);
  const Mat4 l2 = linearized_einstein_fixed(h, bg, ref, lambda, 2.0 * eps);
  const double tol = 1e-5 * (max_abs(l1) + jet_scale(h));
  if (!l1.allFinite() || !l2.allFinite() || max_abs(l1 - l2) > tol)
    fail(ErrorCode::EpsilonUnderflow, "directional derivative of E failed the step consistency check");
  return l1;
}

Mat4 nonlinearity_eval(const SymJet& h, const MetricJet& bg, const ChristoffelJet& ref,
                       double lambda) {
  if (jet_scale(h) == 0.0) return Mat4::Zero();
  return linearized_einstein(h, bg, ref, lambda) -
         gauge_fixed_einstein(perturbed(bg, h, 1.0), ref, lambda);
}

Vec4 constraint_propagation_div(const OneFormJet& w, const MetricJet& g) {
  const SymJet k = symmetric_gradient_jet(w, g);
  const Deriv dginv = inverse_partials(g);
  const double tr = trace(k.h, g.g_inv);
  SymJet kh;
  kh.h = k.h - 0.5 * tr * g.g;
  for (int s = 0; s < 4; ++s) {
    const double dtr = frob(dginv[s], k.h) + frob(g.g_inv, k.dh[s]);
    kh.dh[s] = k.dh[s] - 0.5 * dtr * g.g - 0.5 * tr * g.dg[s];
  }
  const Christoffel gam = christoffel(g);
  const Deriv nk = covariant_derivative(kh, gam);
  Vec4 out;
  for (int mu = 0; mu < 4; ++mu) {
    double div = 0.0;
    for (int nu = 0; nu < 4; ++nu)
      for (int a = 0; a < 4; ++a) div += g.g_inv(nu, a) * nk[nu](a, mu);
    out(mu) = -2.0 * div;
  }
  return out;
}

Vec4 constraint_propagation_box(const OneFormJet& w, const MetricJet& g) {
  const ChristoffelJet cj = christoffel_jet(g);
  const auto& gam = cj.gamma;
  Mat4 D;  // D(b, n) = nabla_b w_n
  for (int b = 0; b < 4; ++b)
    for (int n = 0; n < 4; ++n) {
      double v = w.dw(b, n);
      for (int l = 0; l < 4; ++l) v -= gam[l](b, n) * w.w(l);
      D(b, n) = v;
    }
  Vec4 box = Vec4::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const double gab = g.g_inv(a, b);
      if (gab == 0.0) continue;
      for (int n = 0; n < 4; ++n) {
        double dD = w.d2w[n](a, b);
        for (int l = 0; l < 4; ++l) dD -= cj.dgamma[a][l](b, n) * w.w(l) + gam[l](b, n) * w.dw(a, l);
        for (int l = 0; l < 4; ++l) dD -= gam[l](a, b) * D(l, n) + gam[l](a, n) * D(b, l);
        box(n) += gab * dD;
      }
    }
  return box - ricci(cj) * (g.g_inv * w.w);
}

}  // namespace kds

#include "kds/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace kds {

Mat4 invert_metric(const Mat4& g) {
  Mat4 inv = g.inverse();
  // One Newton step G <- G (2I - g G) and re-symmetrisation.
  inv = inv * (2.0 * Mat4::Identity() - g * inv);
  return 0.5 * (inv + inv.transpose());
}

void complete_inverse(MetricJet& jet) { jet.g_inv = invert_metric(jet.g); }

Deriv inverse_partials(const MetricJet& jet) {
  Deriv out;
  for (int s = 0; s < 4; ++s) out[s] = -jet.g_inv * jet.dg[s] * jet.g_inv;
  return out;
}

namespace {

// lower[l](m, n) = Gamma_{l m n} = 1/2 (d_m g_{l n} + d_n g_{l m} - d_l g_{m n})
Christoffel lower_christoffel(const Deriv& dg) {
  Christoffel low;
  for (int l = 0; l < 4; ++l)
    for (int m = 0; m < 4; ++m)
      for (int n = m; n < 4; ++n) {
        const double v = 0.5 * (dg[m](l, n) + dg[n](l, m) - dg[l](m, n));
        low[l](m, n) = v;
        low[l](n, m) = v;
      }
  return low;
}

Christoffel raise(const Mat4& ginv, const Christoffel& low) {
  Christoffel up;
  for (int c = 0; c < 4; ++c) {
    up[c].setZero();
    for (int l = 0; l < 4; ++l) up[c] += ginv(c, l) * low[l];
  }
  return up;
}

}  // namespace

Christoffel christoffel(const MetricJet& jet) {
  return raise(jet.g_inv, lower_christoffel(jet.dg));
}

ChristoffelJet christoffel_jet(const MetricJet& jet) {
  ChristoffelJet cj;
  const Christoffel low = lower_christoffel(jet.dg);
  cj.gamma = raise(jet.g_inv, low);
  const Deriv dginv = inverse_partials(jet);
  for (int s = 0; s < 4; ++s) {
    // partial_s of the lowered symbols.
    Deriv dgs;
    for (int k = 0; k < 4; ++k) dgs[k] = jet.d2g[s][k];
    const Christoffel dlow = lower_christoffel(dgs);
    for (int c = 0; c < 4; ++c) {
      Mat4 acc = Mat4::Zero();
      for (int l = 0; l < 4; ++l) acc += dginv[s](c, l) * low[l] + jet.g_inv(c, l) * dlow[l];
      cj.dgamma[s][c] = acc;
    }
  }
  return cj;
}

Mat4 ricci(const ChristoffelJet& cj) {
  const auto& G = cj.gamma;
  const auto& dG = cj.dgamma;
  Vec4 trace;  // Gamma^s_{s l}
  for (int l = 0; l < 4; ++l) {
    double acc = 0.0;
    for (int s = 0; s < 4; ++s) acc += G[s](s, l);
    trace(l) = acc;
  }
  Mat4 ric;
  for (int m = 0; m < 4; ++m)
    for (int n = m; n < 4; ++n) {
      double r = 0.0;
      for (int s = 0; s < 4; ++s) r += dG[s][s](m, n) - dG[n][s](m, s);
      for (int l = 0; l < 4; ++l) {
        r += trace(l) * G[l](m, n);
        for (int s = 0; s < 4; ++s) r -= G[s](n, l) * G[l](m, s);
      }
      ric(m, n) = -r;
      ric(n, m) = -r;
    }
  return ric;
}

Mat4 lie_derivative(const MetricJet& jet, const Vec4& x, const Mat4& dx) {
  Mat4 out = Mat4::Zero();
  for (int s = 0; s < 4; ++s) out += x(s) * jet.dg[s];
  // g_{s n} d_m X^s + g_{m s} d_n X^s
  const Mat4 gdx = dx * jet.g;  // (m, n) -> sum_s dX(m, s) g(s, n)
  out += gdx + gdx.transpose();
  return out;
}

Mat4 deformation_covariant(const MetricJet& jet, const Vec4& x, const Mat4& dx) {
  const Christoffel gam = christoffel(jet);
  const Vec4 xlow = jet.g * x;
  // partial_m X_n = d_m g_{n l} X^l + g_{n l} d_m X^l
  Mat4 cov;
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) {
      double v = 0.0;
      for (int l = 0; l < 4; ++l) {
        v += jet.dg[m](n, l) * x(l) + jet.g(n, l) * dx(m, l);
        v -= gam[l](m, n) * xlow(l);
      }
      cov(m, n) = v;
    }
  return 0.5 * (cov + cov.transpose());
}

double max_abs(const Mat4& m) { return m.cwiseAbs().maxCoeff(); }

double inverse_defect(const MetricJet& jet) {
  return max_abs(jet.g * jet.g_inv - Mat4::Identity());
}

int negative_eigenvalue_count(const Mat4& g) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(g, Eigen::EigenvaluesOnly);
  const auto ev = es.eigenvalues();
  return static_cast<int>(std::count_if(ev.data(), ev.data() + 4, [](double v) { return v < 0.0; }));
}

}  // namespace kds

#pragma once

// Finite-difference jets of closed-form test fields.

#include <array>
#include <functional>

#include "kds/gauge.hpp"

namespace kds::testing {

using Coords = std::array<double, 4>;

template <class V>
V fd1(const std::function<V(const Coords&)>& f, const Coords& x, int a, double h) {
  auto at = [&](double d) {
    Coords y = x;
    y[a] += d;
    return f(y);
  };
  return (at(-2 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2 * h)) / (12.0 * h);
}

template <class V>
V fd2(const std::function<V(const Coords&)>& f, const Coords& x, int a, int b, double h) {
  if (a == b) {
    auto at = [&](double d) {
      Coords y = x;
      y[a] += d;
      return f(y);
    };
    return (-at(-2 * h) + 16.0 * at(-h) - 30.0 * at(0) + 16.0 * at(h) - at(2 * h)) / (12.0 * h * h);
  }
  std::function<V(const Coords&)> da = [&](const Coords& y) { return fd1(f, y, a, h); };
  return fd1(da, x, b, h);
}

inline SymJet sym_jet(const std::function<Mat4(const Coords&)>& f, const Coords& x, double h = 1e-3) {
  SymJet j;
  j.h = f(x);
  for (int a = 0; a < 4; ++a) {
    j.dh[a] = fd1(f, x, a, h);
    for (int b = 0; b < 4; ++b) j.d2h[a][b] = fd2(f, x, a, b, h);
  }
  return j;
}

inline OneFormJet oneform_jet(const std::function<Vec4(const Coords&)>& f, const Coords& x, double h = 1e-3) {
  OneFormJet j;
  j.w = f(x);
  for (int a = 0; a < 4; ++a) {
    j.dw.row(a) = fd1(f, x, a, h).transpose();
    for (int b = 0; b < 4; ++b) {
      const Vec4 d = fd2(f, x, a, b, h);
      for (int m = 0; m < 4; ++m) j.d2w[m](a, b) = d(m);
    }
  }
  return j;
}

}  // namespace kds::testing

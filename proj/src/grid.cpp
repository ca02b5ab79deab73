#include "kds/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kds {

namespace {

constexpr double kPi = 3.14159265358979323846;

template <class T>
T theta_value(const Grid2D& g, const T* f, int i, int j, int parity) {
  const int n = g.n_theta;
  if (j < 0) return static_cast<double>(parity) * f[g.index(i, -1 - j)];
  if (j >= n) return static_cast<double>(parity) * f[g.index(i, 2 * n - 1 - j)];
  return f[g.index(i, j)];
}

}  // namespace

Grid2D build_grid(double r_min, double r_max, int n_r, int n_theta, int mode_m) {
  if (n_r < 16 || n_theta < 16)
    throw Error(ErrorCode::GridTooCoarse,
                "n_r and n_theta must be >= 16, got " + std::to_string(n_r) + " x " +
                    std::to_string(n_theta));
  if (!(r_max > r_min)) fail(ErrorCode::InvalidArgument, "empty radial interval");
  Grid2D g;
  g.r_min = r_min;
  g.r_max = r_max;
  g.n_r = n_r;
  g.n_theta = n_theta;
  g.mode_m = mode_m;
  g.spacing_r = (r_max - r_min) / (n_r - 1);
  g.spacing_theta = kPi / n_theta;
  return g;
}

Grid2D build_grid(const HorizonData& h, int n_r, int n_theta, int mode_m) {
  return build_grid(h.r_inner_cap, h.r_outer_cap, n_r, n_theta, mode_m);
}

template <class T>
void diff_r(const Grid2D& g, const T* f, T* out) {
  const int n = g.n_r, m = g.n_theta;
  const double s = 1.0 / (12.0 * g.spacing_r);
  auto F = [&](int i, int j) { return f[g.index(i, j)]; };
  for (int j = 0; j < m; ++j) {
    out[g.index(0, j)] = s * (-25.0 * F(0, j) + 48.0 * F(1, j) - 36.0 * F(2, j) + 16.0 * F(3, j) - 3.0 * F(4, j));
    out[g.index(1, j)] = s * (-3.0 * F(0, j) - 10.0 * F(1, j) + 18.0 * F(2, j) - 6.0 * F(3, j) + F(4, j));
    for (int i = 2; i < n - 2; ++i)
      out[g.index(i, j)] = s * (F(i - 2, j) - 8.0 * F(i - 1, j) + 8.0 * F(i + 1, j) - F(i + 2, j));
    const int a = n - 1, b = n - 2;
    out[g.index(a, j)] = -s * (-25.0 * F(a, j) + 48.0 * F(a - 1, j) - 36.0 * F(a - 2, j) + 16.0 * F(a - 3, j) - 3.0 * F(a - 4, j));
    out[g.index(b, j)] = -s * (-3.0 * F(b + 1, j) - 10.0 * F(b, j) + 18.0 * F(b - 1, j) - 6.0 * F(b - 2, j) + F(b - 3, j));
  }
}

template <class T>
void diff_rr(const Grid2D& g, const T* f, T* out) {
  const int n = g.n_r, m = g.n_theta;
  const double s = 1.0 / (12.0 * g.spacing_r * g.spacing_r);
  auto F = [&](int i, int j) { return f[g.index(i, j)]; };
  for (int j = 0; j < m; ++j) {
    out[g.index(0, j)] = s * (45.0 * F(0, j) - 154.0 * F(1, j) + 214.0 * F(2, j) - 156.0 * F(3, j) + 61.0 * F(4, j) - 10.0 * F(5, j));
    out[g.index(1, j)] = s * (10.0 * F(0, j) - 15.0 * F(1, j) - 4.0 * F(2, j) + 14.0 * F(3, j) - 6.0 * F(4, j) + F(5, j));
    for (int i = 2; i < n - 2; ++i)
      out[g.index(i, j)] = s * (-F(i - 2, j) + 16.0 * F(i - 1, j) - 30.0 * F(i, j) + 16.0 * F(i + 1, j) - F(i + 2, j));
    const int a = n - 1, b = n - 2;
    out[g.index(a, j)] = s * (45.0 * F(a, j) - 154.0 * F(a - 1, j) + 214.0 * F(a - 2, j) - 156.0 * F(a - 3, j) + 61.0 * F(a - 4, j) - 10.0 * F(a - 5, j));
    out[g.index(b, j)] = s * (10.0 * F(b + 1, j) - 15.0 * F(b, j) - 4.0 * F(b - 1, j) + 14.0 * F(b - 2, j) - 6.0 * F(b - 3, j) + F(b - 4, j));
  }
}

template <class T>
void diff_theta(const Grid2D& g, const T* f, int parity, T* out) {
  const double s = 1.0 / (12.0 * g.spacing_theta);
  for (int i = 0; i < g.n_r; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      auto F = [&](int jj) { return theta_value(g, f, i, jj, parity); };
      out[g.index(i, j)] = s * (F(j - 2) - 8.0 * F(j - 1) + 8.0 * F(j + 1) - F(j + 2));
    }
}

template <class T>
void diff_thetatheta(const Grid2D& g, const T* f, int parity, T* out) {
  const double s = 1.0 / (12.0 * g.spacing_theta * g.spacing_theta);
  for (int i = 0; i < g.n_r; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      auto F = [&](int jj) { return theta_value(g, f, i, jj, parity); };
      out[g.index(i, j)] = s * (-F(j - 2) + 16.0 * F(j - 1) - 30.0 * F(j) + 16.0 * F(j + 1) - F(j + 2));
    }
}

template <class T>
void ko_filter(const Grid2D& g, T* f, int parity, double sigma) {
  if (sigma == 0.0) return;
  const double c = sigma / 64.0;
  const std::vector<T> copy(f, f + g.size());
  const T* u = copy.data();
  auto U = [&](int i, int j) { return u[g.index(i, j)]; };
  // Radial part as -D3^T D3 with D3 the third forward differences that fit on
  // the grid; this reproduces delta^6 in the interior and stays negative
  // semidefinite up to the caps.
  const int n = g.n_r;
  std::vector<T> d3(std::max(n - 3, 0));
  for (int j = 0; j < g.n_theta; ++j) {
    for (int k = 0; k + 3 < n; ++k)
      d3[k] = -U(k, j) + 3.0 * U(k + 1, j) - 3.0 * U(k + 2, j) + U(k + 3, j);
    for (int i = 0; i < n; ++i) {
      T acc = T(0.0);
      const double w[4] = {-1.0, 3.0, -3.0, 1.0};
      for (int q = 0; q < 4; ++q) {
        const int k = i - q;
        if (k >= 0 && k + 3 < n) acc += w[q] * d3[k];
      }
      f[g.index(i, j)] -= c * acc;
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      auto V = [&](int jj) { return theta_value(g, u, i, jj, parity); };
      f[g.index(i, j)] += c * (V(j - 3) - 6.0 * V(j - 2) + 15.0 * V(j - 1) - 20.0 * V(j) +
                               15.0 * V(j + 1) - 6.0 * V(j + 2) + V(j + 3));
    }
}

template void diff_r<double>(const Grid2D&, const double*, double*);
template void diff_r<cd>(const Grid2D&, const cd*, cd*);
template void diff_rr<double>(const Grid2D&, const double*, double*);
template void diff_rr<cd>(const Grid2D&, const cd*, cd*);
template void diff_theta<double>(const Grid2D&, const double*, int, double*);
template void diff_theta<cd>(const Grid2D&, const cd*, int, cd*);
template void diff_thetatheta<double>(const Grid2D&, const double*, int, double*);
template void diff_thetatheta<cd>(const Grid2D&, const cd*, int, cd*);
template void ko_filter<double>(const Grid2D&, double*, int, double);
template void ko_filter<cd>(const Grid2D&, cd*, int, double);

std::vector<double> time_weights(std::size_t n, double dt) {
  std::vector<double> w(n, dt);
  if (n == 0) return w;
  if (n == 1) {
    w[0] = 0.0;
    return w;
  }
  if (n < 8) {
    w.front() = w.back() = 0.5 * dt;
    return w;
  }
  const double ends[3] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
  for (int k = 0; k < 3; ++k) {
    w[k] = ends[k] * dt;
    w[n - 1 - k] = ends[k] * dt;
  }
  return w;
}

std::vector<double> radial_weights(const Grid2D& g) {
  return time_weights(static_cast<std::size_t>(g.n_r), g.spacing_r);
}

std::vector<double> theta_weights(const Grid2D& g) {
  const int n = g.n_theta;
  std::vector<double> w(n);
  for (int j = 0; j < n; ++j) {
    const double th = g.theta(j);
    double acc = 0.0;
    for (int k = 1; k <= n / 2; ++k) acc += std::cos(2.0 * k * th) / (4.0 * k * k - 1.0);
    w[j] = (2.0 / n) * (1.0 - 2.0 * acc) / std::sin(th);
  }
  return w;
}

int scalar_parity(int mode_m) { return (mode_m % 2 == 0) ? 1 : -1; }

int tensor_parity(int a, int b) {
  const int count = (a == kTheta) + (b == kTheta);
  return count == 1 ? -1 : 1;
}

int oneform_parity(int a) { return a == kTheta ? -1 : 1; }

int tensor_axis_power(int a, int b) { return (a == kPhi) + (b == kPhi); }

int oneform_axis_power(int a) { return a == kPhi ? 1 : 0; }

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

}  // namespace kds

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kds/background.hpp"
#include "kds/evolution.hpp"

namespace kds {

/// Coordinate: sin(theta) dr dtheta dphi*. SliceVolume: the Riemannian
/// volume of the t*-slice, sqrt|g| sqrt(-G(dt*, dt*)) dr dtheta dphi*.
enum class Measure { Coordinate, SliceVolume };

inline constexpr int kRegularityBudget = 6;

struct NormSpec {
  int k = 1;
  double alpha = 0.0;
  Measure measure = Measure::Coordinate;
};

/// H^k norm of one mode field: every coordinate derivative d_r^a d_theta^b
/// (i m)^c with a + b + c <= k, squared and integrated. Derivatives are
/// repeated fourth-order first differences.
double hk_norm(const Background& bg, const cd* u, int parity, int k,
               Measure measure = Measure::Coordinate);

/// Root-sum-square of hk_norm over the components of s.u (or s.v).
double hk_norm(const Background& bg, const StateVector& s, const std::function<int(int)>& parity,
               int k, bool time_derivative = false, Measure measure = Measure::Coordinate);

/// int e^{2 alpha t} n(t)^2 dt by the trapezoid rule over the given samples.
double weighted_spacetime_norm(const std::vector<double>& t, const std::vector<double>& norms,
                               double alpha);

/// ||f||_{H^{k+m-1, alpha}} + ||h0||_{H^{k+m}} + ||h1||_{H^{k+m-1}} for a
/// scalar forcing series (one field per time) and slice data. The forcing
/// part is the square root of the weighted spacetime norm.
double d_kam_norm(const Background& bg, const std::vector<double>& t,
                  const std::vector<std::vector<cd>>& forcing, const StateVector& data,
                  const std::function<int(int)>& parity, int k, double alpha, int m,
                  Measure measure = Measure::Coordinate);

struct DecayFit {
  double rate = 0.0;         // decay rate of the amplitude h (half the energy rate)
  double rate_energy = 0.0;  // decay rate of the energy series itself
  double amplitude = 0.0;
  std::pair<double, double> window;
  double residual = 0.0;  // rms of the log-linear fit
  std::size_t samples = 0;
  std::string resolution_tag;
};

/// Least-squares fit of log E against t*. The default window is the last
/// half of the series.
DecayFit decay_rate_fit(const std::vector<double>& t, const std::vector<double>& energy,
                        std::optional<std::pair<double, double>> window = {},
                        std::string tag = {});

/// Periodic spectral toy: a field is its Fourier coefficients c_k for
/// k = -K..K, with ||u||_s^2 = sum <k>^{2s} |c_k|^2 and <k> = sqrt(1 + k^2).
double spectral_sobolev_norm(const std::vector<cd>& coeffs, double s);

/// ||u||_{l+2} / (||u||_l^{1-theta} ||u||_N^theta) with theta = 2 / (N - l).
double interpolation_ratio(const std::vector<cd>& coeffs, int l, int N);

struct InterpolationReport {
  int l = 0, N = 0;
  double theta = 0.0;
  std::size_t samples = 0;
  double max_ratio = 0.0;
  double min_ratio = 0.0;
};

InterpolationReport interpolation_check(const std::vector<std::vector<cd>>& fields, int l, int N);

/// Random multi-frequency fields with coefficients on k = -K..K.
std::vector<std::vector<cd>> random_spectral_fields(std::size_t count, int K, std::uint64_t seed);

/// Single-frequency field e^{i k x} on k = -K..K.
std::vector<cd> single_frequency_field(int K, int k, cd amplitude = 1.0);

struct ConvergenceOrder {
  double order = 0.0;
  double coarse_diff = 0.0;
  double fine_diff = 0.0;
  bool monotone = true;  // false flags NonMonotoneRefinement
};

/// log2(|coarse - mid| / |mid - fine|) for refinement by 2.
ConvergenceOrder convergence_order(double coarse, double mid, double fine);
/// Same with the l2 norm of differences of samples at common points.
ConvergenceOrder convergence_order(const std::vector<cd>& coarse, const std::vector<cd>& mid,
                                   const std::vector<cd>& fine);

/// Values of a fine-grid field at the nodes of a coarse grid whose radial
/// nodes are every second fine node (n_fine - 1 = 2 (n_coarse - 1)) and that
/// shares the theta nodes.
std::vector<cd> restrict_to_coarse(const Grid2D& fine, const cd* u, const Grid2D& coarse);

}  // namespace kds

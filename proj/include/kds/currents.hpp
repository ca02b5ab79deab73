#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kds/background.hpp"
#include "kds/evolution.hpp"

namespace kds {

using Vec4c = Eigen::Vector4cd;

/// Value and coordinate gradient of a complex scalar at a point.
struct ScalarJet {
  cd u = 0.0;
  Vec4c du = Vec4c::Zero();
};

/// Lagrangian corrector q with its gradient and box.
struct CorrectorJet {
  double q = 0.0;
  Vec4 dq = Vec4::Zero();
  double box_q = 0.0;
};

using Corrector = std::function<CorrectorJet(const SpacetimePoint&)>;

struct Multiplier {
  Vectorfield X;
  Corrector q;  // empty means q = 0
};

Multiplier make_multiplier(Vectorfield X, Corrector q = {});
Corrector constant_corrector(double q);

/// T[h]_{mn} = Re(d_m conj(h) d_n h) - 1/2 g_{mn} Re(d^a conj(h) d_a h).
Mat4 energy_momentum_tensor(const ScalarJet& h, const MetricJet& g);

/// J_m = X^n T_{mn} + 1/2 q d_m |h|^2 - 1/2 d_m q |h|^2.
Vec4 j_current(const Vec4& X, const CorrectorJet& q, const ScalarJet& h, const MetricJet& g);
Vec4 j_current(const Multiplier& m, const ScalarJet& h, const MetricJet& g, const SpacetimePoint& x);

/// K = pi^X . T + q Re(d^a h d_a conj(h)) - 1/2 box(q) |h|^2.
double k_current(const Mat4& pi, const CorrectorJet& q, const ScalarJet& h, const MetricJet& g);
double k_current(const Multiplier& m, const ScalarJet& h, const MetricJet& g,
                 const ChartProfile& prof, const SpacetimePoint& x);

/// pi^X_{mn} = 1/2 (nabla_m X_n + nabla_n X_m).
Mat4 deformation_tensor(const Vectorfield& X, const MetricJet& g, const SpacetimePoint& x);

struct RedshiftMultiplier {
  Multiplier multiplier;
  std::pair<double, double> blend_interval;
  double delta = 0.0;  // -max g(N, N) over the verification grid
  double r_at_max = 0.0;
};

/// chi(r) of the blend N = chi T + (1 - chi)(-grad t*): 1 on the blend
/// interval, smoothstep down to 0 at each horizon and 0 beyond.
double redshift_blend(const HorizonData& h, std::pair<double, double> interval, double r);
double redshift_blend_prime(const HorizonData& h, std::pair<double, double> interval, double r);

/// Builds N and verifies g(N, N) < 0 on an n_r x n_theta grid over the
/// extended interval (TimelikenessLost otherwise).
RedshiftMultiplier redshift_multiplier_build(const ChartProfile& prof,
                                             std::optional<std::pair<double, double>> blend = {},
                                             int n_r = 401, int n_theta = 33);

/// Gradient of a mode field at a grid node from precomputed r/theta partials.
ScalarJet scalar_jet(const Grid2D& g, const cd* u, const cd* v, const cd* ur, const cd* uth,
                     std::size_t k);

/// Multiplier data cached on a grid: X, pi^X, q and sqrt|g| per node.
class CurrentProbe {
 public:
  CurrentProbe(const Background& bg, const Multiplier& m);

  /// E = int_Sigma J.n = -int J^{t*} sqrt|g| dr dtheta dphi*.
  double slice_energy(const StateVector& s) const;

  struct CapFluxRates {
    double inner = 0.0;  // rate of energy leaving through r = r_min
    double outer = 0.0;  // rate of energy leaving through r = r_max
  };
  CapFluxRates cap_flux_rates(const StateVector& s) const;

  /// int_Sigma (K + Re[(X + q) conj(h) f]) sqrt|g|, the bulk density of the
  /// divergence identity for box h = f.
  double bulk_rate(const StateVector& s, const Forcing& f = {}) const;

  /// int (|d_t h|^2 + |d_r h|^2 + |d_theta h|^2 + m^2 |h|^2) sqrt|g|.
  double gradient_norm_sq(const StateVector& s) const;

  const Background& background() const { return bg_; }

 private:
  struct NodeData {
    Vec4 X;
    Mat4 pi;
    CorrectorJet q;
  };
  const Background& bg_;
  std::vector<NodeData> nodes_;
  std::vector<double> wr_, wth_;
  void gradients(const StateVector& s, std::vector<cd>& ur, std::vector<cd>& uth) const;
};

/// Measured constants c, C with c ||grad h||^2 <= E <= C ||grad h||^2 over
/// random smooth fields.
struct Coercivity {
  double c = 0.0;
  double C = 0.0;
  std::size_t samples = 0;
};

Coercivity measure_coercivity(const CurrentProbe& probe, std::size_t samples, std::uint64_t seed);

/// E_X(t*) for every snapshot.
std::vector<double> slice_energies(const CurrentProbe& probe, const std::vector<StateVector>& series);

struct DivergenceReport {
  double t1 = 0.0, t2 = 0.0;
  double e1 = 0.0, e2 = 0.0;
  double flux_inner = 0.0, flux_outer = 0.0;
  double bulk = 0.0;
  double residual = 0.0;  // |E2 - E1 + fluxes + bulk| / |E1|
};

/// Balance of the divergence identity over equally spaced states (every
/// step of a run) between indices [first, last].
DivergenceReport divergence_residual(const CurrentProbe& probe, const std::vector<StateVector>& states,
                                     std::size_t first, std::size_t last, const Forcing& f = {});

/// One run entering the Gronwall check: H^1 slice norms over time, the data
/// norm and the forcing norm at the same times.
struct GronwallRun {
  std::string tag;
  std::vector<double> t;
  std::vector<double> h1_norm;
  double data_norm = 0.0;
  std::vector<double> forcing_norm;  // empty means zero forcing
};

struct GronwallReport {
  double sigma = 0.0;
  /// Smallest admissible C; NaN when every run has zero data and forcing
  /// (the 0/0 sentinel).
  double constant = 0.0;
  bool constrained = false;
  std::vector<std::pair<std::string, double>> per_tag;
  bool degraded = false;  // max/min over tags above 2
};

GronwallReport gronwall_bound_check(const std::vector<GronwallRun>& runs, double sigma);

}  // namespace kds

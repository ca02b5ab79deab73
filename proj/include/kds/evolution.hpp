#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kds/background.hpp"
#include "kds/gauge.hpp"

namespace kds {

/// Field components u and their t*-derivatives v on a grid, stored
/// component-major: u[c * size + node]. Tensor states keep the ten slots of
/// kSymPairs; one-form states the four covariant components.
struct StateVector {
  int ncomp = 1;
  std::size_t nodes = 0;
  std::vector<cd> u;
  std::vector<cd> v;
  double t_star = 0.0;

  StateVector() = default;
  StateVector(int ncomp_, std::size_t nodes_);
  cd* u_comp(int c) { return u.data() + c * nodes; }
  cd* v_comp(int c) { return v.data() + c * nodes; }
  const cd* u_comp(int c) const { return u.data() + c * nodes; }
  const cd* v_comp(int c) const { return v.data() + c * nodes; }
  bool finite() const;
};

/// Slice data (h0, h1) = (u, v) at t* = t_star.
using SliceDataPair = StateVector;

struct EvolutionConfig {
  double cfl = 0.25;
  double t_end = 1.0;
  int stencil_order = 4;
  double dissipation_strength = 0.01;
  int output_stride = 10;
};

void validate(const EvolutionConfig& cfg);

/// Scalar forcing f(t*, i, j) for box u = f.
using Forcing = std::function<cd(double t_star, int i, int j)>;

/// Jet slots used by the induced operators (no phi* dependence: m = 0).
enum Slot { kVal, kDt, kDr, kDth, kDtt, kDtr, kDtth, kDrr, kDrth, kDthth, kNumSlots };

/// A second-order-in-time system u_tt = F(u, du) on the grid.
class WaveSystem {
 public:
  explicit WaveSystem(const Background& bg) : bg_(bg) {}
  virtual ~WaveSystem() = default;
  virtual int components() const = 0;
  virtual int parity(int comp) const = 0;
  /// Power p of sin(theta) factored out of a component before differencing.
  virtual int axis_power(int) const { return 0; }
  /// Writes (du/dt, dv/dt) into out.
  virtual void rhs(const StateVector& s, StateVector& out) const = 0;
  const Background& background() const { return bg_; }

 protected:
  const Background& bg_;
};

/// box_g u = f for a single azimuthal mode.
class ScalarWave : public WaveSystem {
 public:
  explicit ScalarWave(const Background& bg, Forcing forcing = {});
  int components() const override { return 1; }
  int parity(int) const override;
  void rhs(const StateVector& s, StateVector& out) const override;

 private:
  Forcing forcing_;
};

/// Linear system induced pointwise from an operator on jets: the operator is
/// probed once per node with unit jets and the second-time-derivative block
/// inverted. Used for L h = 0 (tensor) and for the constraint propagation
/// operator on one-forms.
class InducedLinearWave : public WaveSystem {
 public:
  enum class Kind { LinearizedEinstein, ConstraintPropagation };
  InducedLinearWave(const Background& bg, Kind kind);
  int components() const override { return ncomp_; }
  int parity(int comp) const override;
  int axis_power(int comp) const override;
  void rhs(const StateVector& s, StateVector& out) const override;
  Kind kind() const { return kind_; }
  /// Coefficient of the d_t^2 slot at a node (ncomp x ncomp).
  Eigen::MatrixXd tt_block(std::size_t node) const { return tt_[node]; }

 private:
  Kind kind_;
  int ncomp_;
  std::vector<std::array<Eigen::MatrixXd, kNumSlots>> coeff_;  // -C_tt^{-1} C_k
  std::vector<Eigen::MatrixXd> tt_;
};

/// Gauge-fixed Einstein equations for g = g_b + h with reference g0 = g_b.
/// The discrete residual E(g_b) of the sampled background is subtracted, so
/// h = 0 is an exact solution.
class NonlinearEinstein : public WaveSystem {
 public:
  explicit NonlinearEinstein(const Background& bg);
  int components() const override { return 10; }
  int parity(int comp) const override;
  int axis_power(int comp) const override;
  void rhs(const StateVector& s, StateVector& out) const override;

 private:
  std::vector<Mat4> background_residual_;
};

/// Guards shared by the tensor systems: SdS background with m = 0.
void require_sds_axisymmetric(const Background& bg);

/// Spatial and time jets of every component at each node; slot kDtt is left
/// zero. jets[node] is a kNumSlots x ncomp real matrix (real parts). With
/// axis_power, component c is differenced as u / sin^p(theta) and the jet of
/// u rebuilt by the product rule.
std::vector<Eigen::MatrixXd> component_jets(const StateVector& s, const Grid2D& g,
                                            const std::function<int(int)>& parity,
                                            const std::function<int(int)>& axis_power = {});

int sym_axis_power(int comp);

SymJet to_symjet(const Eigen::MatrixXd& jet);
OneFormJet to_oneform_jet(const Eigen::MatrixXd& jet);

/// Lorentzian check for g = g_b + h: g^{tt} < 0 and spatial block positive.
bool slices_spacelike(const Mat4& g);

/// Named right-hand sides.
void scalar_wave_rhs(const ScalarWave& sys, const StateVector& s, StateVector& out);
void tensor_wave_rhs(const InducedLinearWave& sys, const StateVector& s, StateVector& out);
void nonlinear_rhs(const NonlinearEinstein& sys, const StateVector& s, StateVector& out);

/// Classic RK4 followed by Kreiss-Oliger filtering of u and v.
StateVector rk4_step(const StateVector& s, const WaveSystem& sys, double dt, double dissipation);

/// cfl * min(spacing / characteristic speed) over the grid.
double courant_dt(const Background& bg, double cfl);

/// Largest characteristic coordinate speed in r and theta.
std::pair<double, double> max_speeds(const Background& bg);

/// Time for the fastest radial characteristic to traverse the grid.
double crossing_time(const Background& bg);

struct EvolutionResult {
  std::vector<StateVector> snapshots;
  double dt = 0.0;
  int steps = 0;
  bool aborted = false;
  std::string abort_reason;
  std::optional<ErrorCode> abort_code;
};

/// Called with the state after each step (and once with the initial state).
using StepObserver = std::function<void(const StateVector&)>;

/// Integrates to config.t_end with dt = t_end / ceil(t_end / courant_dt), or
/// the override. Step errors abort the run and return the partial series.
EvolutionResult evolve(const StateVector& initial, const EvolutionConfig& config,
                       const WaveSystem& sys, const StepObserver& observer = {},
                       std::optional<double> dt_override = {});

}  // namespace kds

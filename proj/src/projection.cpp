#include "kds/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kds/parallel.hpp"

namespace kds {

namespace {

constexpr double kLapseFloor = 1e-8;

MetricJet node_metric(const NodeGeometry& nd) {
  MetricJet m;
  m.g = nd.g;
  m.g_inv = nd.g_inv;
  return m;
}

std::vector<Eigen::MatrixXd> tensor_jets(const StateVector& s, const Background& bg) {
  if (s.ncomp != 10) fail(ErrorCode::InvalidArgument, "slice data must carry the ten tensor components");
  require_sds_axisymmetric(bg);
  return component_jets(s, bg.grid(), sym_slot_parity, sym_axis_power);
}

double floor_of(const Eigen::Matrix4d& A, const Vec4& x, const Vec4& b) {
  const double eps = std::numeric_limits<double>::epsilon();
  return 64.0 * eps * (A.cwiseAbs().rowwise().sum().maxCoeff() * x.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff());
}

void check_lapse(const NodeGeometry& nd) {
  if (!(std::abs(nd.g_inv(kT, kT)) > kLapseFloor))
    fail(ErrorCode::DegenerateLapse, "G(dt*, dt*) is too small for the slice projection");
}

// Affine map x -> f(x) for the four d_t h_{t* mu} slots, returned as (A, b).
template <class F>
std::pair<Eigen::Matrix4d, Vec4> affine_probe(Eigen::MatrixXd jet, F&& f) {
  for (int c = 0; c < 4; ++c) jet(kDt, c) = 0.0;
  const Vec4 b = f(jet);
  Eigen::Matrix4d A;
  for (int c = 0; c < 4; ++c) {
    Eigen::MatrixXd probe = jet;
    probe(kDt, c) = 1.0;
    A.col(c) = f(probe) - b;
  }
  return {A, b};
}

}  // namespace

int sym_slot_parity(int comp) { return tensor_parity(kSymPairs[comp].first, kSymPairs[comp].second); }

ConstraintResidual linearized_constraint_residual(const StateVector& pair, const Background& bg) {
  const auto jets = tensor_jets(pair, bg);
  ConstraintResidual res;
  for (std::size_t k = 0; k < jets.size(); ++k) {
    const NodeGeometry& nd = bg.node(k);
    const MetricJet g = node_metric(nd);
    auto f = [&](const Eigen::MatrixXd& j) { return linearized_constraint(to_symjet(j), g, nd.gamma); };
    const auto [A, b] = affine_probe(jets[k], f);
    Vec4 x;
    for (int c = 0; c < 4; ++c) x(c) = jets[k](kDt, c);
    const double r = (A * x + b).cwiseAbs().maxCoeff();
    const double fl = floor_of(A, x, b);
    res.max_residual = std::max(res.max_residual, r);
    res.max_floor = std::max(res.max_floor, fl);
    if (fl > 0.0) res.max_ratio = std::max(res.max_ratio, r / fl);
  }
  return res;
}

double nonlinear_constraint_max(const StateVector& pair, const Background& bg) {
  const auto jets = tensor_jets(pair, bg);
  const Grid2D& grid = bg.grid();
  std::vector<double> per_node(grid.size());
  parallel_for(grid.size(), [&](std::size_t k) {
    const auto i = static_cast<int>(k / grid.n_theta), j = static_cast<int>(k % grid.n_theta);
    const MetricJet full = perturbed(metric_kerr_star(bg.profile(), bg.point(i, j)), to_symjet(jets[k]), 1.0);
    per_node[k] = constraint_op(full, bg.node(k).gamma).cwiseAbs().maxCoeff();
  });
  return *std::max_element(per_node.begin(), per_node.end());
}

StateVector gauge_project_slice(const StateVector& pair, const Background& bg, ConstraintResidual* residual) {
  const auto jets = tensor_jets(pair, bg);
  StateVector out = pair;
  parallel_for(jets.size(), [&](std::size_t k) {
    const NodeGeometry& nd = bg.node(k);
    check_lapse(nd);
    const MetricJet g = node_metric(nd);
    auto f = [&](const Eigen::MatrixXd& j) { return linearized_constraint(to_symjet(j), g, nd.gamma); };
    const auto [A, b] = affine_probe(jets[k], f);
    const Vec4 x = A.partialPivLu().solve(-b);
    if (!x.allFinite()) fail(ErrorCode::DegenerateLapse, "singular constraint system in the slice projection");
    for (int c = 0; c < 4; ++c) out.v_comp(c)[k] = x(c);
  });
  if (residual) *residual = linearized_constraint_residual(out, bg);
  return out;
}

StateVector gauge_project_slice_nonlinear(const StateVector& pair, const Background& bg) {
  const auto jets = tensor_jets(pair, bg);
  const Grid2D& grid = bg.grid();
  StateVector out = pair;
  parallel_for(grid.size(), [&](std::size_t k) {
    const auto i = static_cast<int>(k / grid.n_theta), j = static_cast<int>(k % grid.n_theta);
    const NodeGeometry& nd = bg.node(k);
    check_lapse(nd);
    const MetricJet gb = metric_kerr_star(bg.profile(), bg.point(i, j));
    auto f = [&](const Eigen::MatrixXd& jet) {
      return constraint_op(perturbed(gb, to_symjet(jet), 1.0), nd.gamma);
    };
    const auto [A, b] = affine_probe(jets[k], f);
    const Vec4 x = A.partialPivLu().solve(-b);
    if (!x.allFinite()) fail(ErrorCode::DegenerateLapse, "singular constraint system in the slice projection");
    for (int c = 0; c < 4; ++c) out.v_comp(c)[k] = x(c);
  });
  return out;
}

StateVector pure_gauge_data(const Background& bg, const PureGaugeSpec& sp) {
  const Grid2D& grid = bg.grid();
  if (sp.center - 4.0 * sp.width < grid.r_min || sp.center + 4.0 * sp.width > grid.r_max)
    fail(ErrorCode::InvalidArgument, "pure-gauge bump must lie inside the slice");
  StateVector out(10, grid.size());
  auto bump = [&](double r) { return std::exp(-std::pow((r - sp.center) / sp.width, 2)); };
  auto bump_prime = [&](double r) { return -2.0 * (r - sp.center) / (sp.width * sp.width) * bump(r); };
  for (int i = 0; i < grid.n_r; ++i)
    for (int j = 0; j < grid.n_theta; ++j) {
      const double r = grid.r(i), th = grid.theta(j);
      const double A = sp.a_weight * bump(r), Ap = sp.a_weight * bump_prime(r);
      const double B = sp.b_weight * bump(r), Bp = sp.b_weight * bump_prime(r);
      const double amp = sp.amplitude, beta = sp.beta;
      // M(a, mu) = d_mu phi^a at t* = 0 and its t*-derivative.
      Mat4 M = Mat4::Identity(), Mdot = Mat4::Zero();
      M(kT, kT) += amp * A * beta;
      M(kT, kR) += amp * Ap;
      M(kR, kT) += amp * B * beta;
      M(kR, kR) += amp * Bp;
      Mdot(kT, kR) = amp * Ap * beta;
      Mdot(kR, kR) = amp * Bp * beta;
      // Bump tails at the caps are negligible; keep the image on the grid.
      const double r_img = std::clamp(r + amp * B, grid.r_min, grid.r_max), r_dot = amp * B * beta;
      const MetricJet img = metric_kerr_star(bg.profile(), SpacetimePoint{0.0, r_img, th, 0.0, Chart::KerrStar});
      const Mat4 gb = bg.node(grid.index(i, j)).g;
      const Mat4 h = M.transpose() * img.g * M - gb;
      const Mat4 hdot = Mdot.transpose() * img.g * M + M.transpose() * img.g * Mdot +
                        M.transpose() * img.dg[kR] * M * r_dot;
      const std::size_t k = grid.index(i, j);
      for (int c = 0; c < 10; ++c) {
        const auto [a, b] = kSymPairs[c];
        out.u_comp(c)[k] = h(a, b);
        out.v_comp(c)[k] = hdot(a, b);
      }
    }
  return out;
}

}  // namespace kds

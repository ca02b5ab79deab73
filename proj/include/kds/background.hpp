#pragma once

#include <vector>

#include "kds/geometry.hpp"
#include "kds/grid.hpp"

namespace kds {

/// Per-node geometric data of the stationary background.
struct NodeGeometry {
  Mat4 g;
  Mat4 g_inv;
  Christoffel gamma;
  Vec4 W;  // -G^{ab} Gamma^c_{ab}, the first-order part of the wave operator
  double sqrt_det = 0.0;
};

/// Background metric sampled once on a grid. The heavy second-order jets are
/// only built when requested (tensor and nonlinear evolution).
class Background {
 public:
  Background(const ChartProfile& prof, const Grid2D& grid, bool with_second = false,
             double fd_spacing = 1e-3);

  const Grid2D& grid() const { return grid_; }
  const ChartProfile& profile() const { return prof_; }
  const BlackHoleParams& params() const { return prof_.params(); }
  double lambda() const { return prof_.params().lambda; }
  bool has_second() const { return !jets_.empty(); }

  const NodeGeometry& node(std::size_t k) const { return nodes_[k]; }
  const MetricJet& jet(std::size_t k) const { return jets_[k]; }
  const ChristoffelJet& ref(std::size_t k) const { return refs_[k]; }
  SpacetimePoint point(int i, int j) const;

 private:
  ChartProfile prof_;
  Grid2D grid_;
  std::vector<NodeGeometry> nodes_;
  std::vector<MetricJet> jets_;
  std::vector<ChristoffelJet> refs_;
};

}  // namespace kds

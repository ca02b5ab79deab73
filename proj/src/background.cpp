#include "kds/background.hpp"

#include <cmath>

#include "kds/parallel.hpp"

namespace kds {

Background::Background(const ChartProfile& prof, const Grid2D& grid, bool with_second,
                       double fd_spacing)
    : prof_(prof), grid_(grid) {
  const std::size_t n = grid.size();
  nodes_.resize(n);
  if (with_second) {
    jets_.resize(n);
    refs_.resize(n);
  }
  parallel_for(n, [&](std::size_t k) {
    const SpacetimePoint x = point(static_cast<int>(k / grid.n_theta), static_cast<int>(k % grid.n_theta));
    MetricJet jet = with_second ? metric_second_jet(prof, x, fd_spacing) : metric_kerr_star(prof, x);
    NodeGeometry& nd = nodes_[k];
    nd.g = jet.g;
    nd.g_inv = jet.g_inv;
    nd.gamma = christoffel(jet);
    for (int c = 0; c < 4; ++c) nd.W(c) = -(jet.g_inv.array() * nd.gamma[c].array()).sum();
    nd.sqrt_det = std::sqrt(std::abs(jet.g.determinant()));
    if (with_second) {
      refs_[k] = christoffel_jet(jet);
      jets_[k] = std::move(jet);
    }
  });
}

SpacetimePoint Background::point(int i, int j) const {
  return SpacetimePoint{0.0, grid_.r(i), grid_.theta(j), 0.0, Chart::KerrStar};
}

}  // namespace kds

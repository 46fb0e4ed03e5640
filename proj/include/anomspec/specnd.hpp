#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "anomspec/dataset.hpp"
#include "anomspec/forest.hpp"

namespace anomspec {

/// Axis-aligned box, half-open [lo_k, hi_k) on every dimension; bounds may be infinite.
struct HyperRect {
  std::vector<double> lo;
  std::vector<double> hi;
  Depth depth = 0;

  std::size_t dims() const noexcept { return lo.size(); }
  bool contains(std::span<const double> p) const noexcept;
  friend bool operator==(const HyperRect&, const HyperRect&) = default;
};

using RegionSet = std::vector<HyperRect>;

/// Non-empty common interior.
bool intersects(const HyperRect& a, const HyperRect& b) noexcept;

/// One box per leaf carrying the leaf depth; the boxes tile the whole space.
RegionSet tree_to_rects(const Tree& tree);

/// Collapses uniform-depth subtrees, then collapses any node whose own depth plus
/// the smallest depths other trees reach over the node's box exceeds depth_bound.
/// For every cutoff <= depth_bound the set {p : depth(p) <= cutoff} is unchanged.
Forest prune_forest(const Forest& forest, Depth depth_bound);

/// Mean cumulative depth over the rows of data; the default pruning bound.
double average_cumulative_depth(const Forest& forest, const Dataset& data);

/// Cells formed by every split boundary of a forest, per dimension.
/// Flat cell indices are row-major: the last dimension varies fastest.
class PixelGrid {
 public:
  PixelGrid() = default;
  /// Each boundary vector must be strictly increasing and finite.
  PixelGrid(std::vector<std::vector<double>> boundaries, bool thin_cells_merged);

  std::size_t dims() const noexcept { return boundaries_.size(); }
  const std::vector<double>& boundaries(std::size_t k) const { return boundaries_[k]; }
  std::size_t cells_along(std::size_t k) const { return boundaries_[k].size() + 1; }
  /// Saturates at UINT64_MAX.
  std::uint64_t cell_count() const noexcept;
  bool thin_cells_merged() const noexcept { return merged_; }

  double cell_lo(std::size_t k, std::size_t i) const;
  double cell_hi(std::size_t k, std::size_t i) const;
  HyperRect cell_rect(std::span<const std::size_t> cell) const;

  /// Midpoint of finite bounds; one unit beyond the finite bound of an unbounded side.
  std::vector<double> representative(std::span<const std::size_t> cell) const;

  std::vector<std::size_t> locate(std::span<const double> p) const;
  std::uint64_t flatten(std::span<const std::size_t> cell) const;
  std::vector<std::size_t> unflatten(std::uint64_t flat) const;

  bool has_depths() const noexcept { return !depths_.empty(); }
  const std::vector<Depth>& depths() const noexcept { return depths_; }
  void set_depths(std::vector<Depth> depths);

 private:
  std::vector<std::vector<double>> boundaries_;
  std::vector<Depth> depths_;
  bool merged_ = false;
};

/// Distinct split keys per dimension. Consecutive keys closer than min_cell[k]
/// are merged into the following cell; an empty min_cell disables merging.
PixelGrid build_pixel_grid(const Forest& forest, std::span<const double> min_cell = {});

/// Assigns every cell the cumulative depth of its representative point.
PixelGrid compute_cell_depths(PixelGrid grid, const Forest& forest);

/// Cells with depth <= cutoff. Requires computed depths.
RegionSet extract_anomalous_cells(const PixelGrid& grid, Depth cutoff);

/// Same cell set as extract_anomalous_cells(compute_cell_depths(grid), cutoff),
/// found by bisecting index boxes and discarding or accepting a box whole when
/// depth bounds over it settle the answer. Does not need materialised depths.
RegionSet extract_anomalous_boxes(const PixelGrid& grid, const Forest& forest, Depth cutoff);

/// Greedy cover of grid-aligned cells by hypercubes grown from the smallest
/// free cell, followed by merge_adjacent_boxes. The covered set is unchanged.
RegionSet consolidate_rects(const RegionSet& cells);

/// Repeatedly joins pairs of boxes that share a complete face.
RegionSet merge_adjacent_boxes(RegionSet boxes);

}  // namespace anomspec

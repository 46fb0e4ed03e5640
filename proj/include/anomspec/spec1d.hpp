#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "anomspec/dataset.hpp"
#include "anomspec/forest.hpp"

namespace anomspec {

/// Half-open interval [from, to) with a search path depth. from may be -inf, to may be +inf.
struct Range {
  double from;
  double to;
  Depth depth;

  bool contains(double x) const noexcept { return from <= x && x < to; }
  friend bool operator==(const Range&, const Range&) = default;
};

/// Ordered ranges covering the whole real line without overlap.
using RangeList = std::vector<Range>;

/// True when list starts at -inf, ends at +inf, and each range starts where the previous ended.
bool is_contiguous_cover(const RangeList& list);

/// Depth of the range containing x (binary search).
Depth depth_at(const RangeList& list, double x);

/// One range per leaf, in key order. Throws InvalidArgument for a tree with dims != 1.
RangeList tree_to_ranges(const Tree& tree);

/// Intersects all lists in one sweep: the boundaries of the result are the
/// union of input boundaries, each range carrying the summed depth.
RangeList merge_range_lists(std::span<const RangeList> lists);

/// merge_range_lists over every tree of a 1-D forest.
RangeList forest_ranges(const Forest& forest);

/// Disjoint anomalous ranges; each carries the smallest depth among the merged pieces.
struct AnomalyRangeSet {
  std::vector<Range> ranges;
  Depth cutoff_depth = 0;
};

/// Ranges with depth <= cutoff; neighbours in the merged list are coalesced.
AnomalyRangeSet extract_anomalous_ranges(const RangeList& merged, Depth cutoff);

/// Balanced search tree over disjoint ordered ranges.
class RangeSearchTree {
 public:
  RangeSearchTree() = default;
  /// ranges must be ordered and disjoint.
  explicit RangeSearchTree(std::span<const Range> ranges);

  bool contains(double x) const noexcept;
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    double from;
    double to;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };
  std::int32_t build(std::span<const Range> ranges);

  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

}  // namespace anomspec

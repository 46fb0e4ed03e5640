#include "anomspec/spec1d.hpp"

#include <algorithm>
#include <limits>
#include <utility>

#include "anomspec/errors.hpp"

namespace anomspec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void collect_ranges(const Tree& tree, std::uint32_t i, double from, double to, RangeList& out) {
  const Tree::Node& n = tree.nodes()[i];
  if (n.is_leaf()) {
    out.push_back({from, to, n.depth});
    return;
  }
  collect_ranges(tree, i + 1, from, n.split, out);
  collect_ranges(tree, n.right, n.split, to, out);
}

}  // namespace

bool is_contiguous_cover(const RangeList& list) {
  if (list.empty() || list.front().from != -kInf || list.back().to != kInf) return false;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (!(list[i].from < list[i].to)) return false;
    if (i > 0 && list[i].from != list[i - 1].to) return false;
  }
  return true;
}

Depth depth_at(const RangeList& list, double x) {
  auto it = std::upper_bound(list.begin(), list.end(), x,
                             [](double v, const Range& r) { return v < r.to; });
  if (it == list.end()) throw InvalidArgument("point outside range list");
  return it->depth;
}

RangeList tree_to_ranges(const Tree& tree) {
  if (tree.dims() != 1)
    throw InvalidArgument("range lists need a 1-dimensional tree, got " +
                          std::to_string(tree.dims()) + " dimensions");
  RangeList out;
  out.reserve(tree.leaf_count());
  collect_ranges(tree, 0, -kInf, kInf, out);
  return out;
}

RangeList merge_range_lists(std::span<const RangeList> lists) {
  if (lists.empty()) throw InvalidArgument("no range lists to merge");

  // Sweep over boundary events; each event carries the depth step of one list.
  Depth depth = 0;
  std::vector<std::pair<double, Depth>> events;
  for (const RangeList& list : lists) {
    if (!is_contiguous_cover(list)) throw InvalidArgument("range list is not a contiguous cover");
    depth += list.front().depth;
    for (std::size_t i = 1; i < list.size(); ++i)
      events.emplace_back(list[i].from, list[i].depth - list[i - 1].depth);
  }
  std::sort(events.begin(), events.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  RangeList out;
  out.reserve(events.size() + 1);
  double from = -kInf;
  for (std::size_t i = 0; i < events.size();) {
    const double at = events[i].first;
    Depth step = 0;
    for (; i < events.size() && events[i].first == at; ++i) step += events[i].second;
    out.push_back({from, at, depth});
    from = at;
    depth += step;
  }
  out.push_back({from, kInf, depth});
  return out;
}

RangeList forest_ranges(const Forest& forest) {
  std::vector<RangeList> lists;
  lists.reserve(forest.tree_count());
  for (const Tree& t : forest.trees()) lists.push_back(tree_to_ranges(t));
  return merge_range_lists(lists);
}

AnomalyRangeSet extract_anomalous_ranges(const RangeList& merged, Depth cutoff) {
  AnomalyRangeSet out;
  out.cutoff_depth = cutoff;
  std::size_t last_taken = merged.size();
  for (std::size_t i = 0; i < merged.size(); ++i) {
    const Range& r = merged[i];
    if (r.depth > cutoff) continue;
    if (!out.ranges.empty() && last_taken + 1 == i) {
      out.ranges.back().to = r.to;
      out.ranges.back().depth = std::min(out.ranges.back().depth, r.depth);
    } else {
      out.ranges.push_back(r);
    }
    last_taken = i;
  }
  return out;
}

RangeSearchTree::RangeSearchTree(std::span<const Range> ranges) {
  nodes_.reserve(ranges.size());
  root_ = build(ranges);
}

std::int32_t RangeSearchTree::build(std::span<const Range> ranges) {
  if (ranges.empty()) return -1;
  const std::size_t half = ranges.size() / 2;
  const auto self = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({ranges[half].from, ranges[half].to});
  const std::int32_t left = build(ranges.first(half));
  const std::int32_t right = build(ranges.subspan(half + 1));
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

bool RangeSearchTree::contains(double x) const noexcept {
  std::int32_t i = root_;
  while (i >= 0) {
    const Node& n = nodes_[i];
    if (x < n.from)
      i = n.left;
    else if (x >= n.to)
      i = n.right;
    else
      return true;
  }
  return false;
}

}  // namespace anomspec

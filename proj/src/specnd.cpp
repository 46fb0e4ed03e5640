#include "anomspec/specnd.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <utility>

#include "anomspec/errors.hpp"

namespace anomspec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Smallest and largest leaf depth below every node.
struct SubtreeDepths {
  std::vector<Depth> min;
  std::vector<Depth> max;
};

SubtreeDepths subtree_depths(const Tree& tree) {
  const auto nodes = tree.nodes();
  SubtreeDepths out{std::vector<Depth>(nodes.size()), std::vector<Depth>(nodes.size())};
  // Children follow their parent in preorder, so a reverse scan sees them first.
  for (std::size_t i = nodes.size(); i-- > 0;) {
    const Tree::Node& n = nodes[i];
    if (n.is_leaf()) {
      out.min[i] = out.max[i] = n.depth;
    } else {
      out.min[i] = std::min(out.min[i + 1], out.min[n.right]);
      out.max[i] = std::max(out.max[i + 1], out.max[n.right]);
    }
  }
  return out;
}

// Range of leaf depths over the leaves of one tree whose boxes meet a query box.
class LeafDepthQuery {
 public:
  explicit LeafDepthQuery(const Tree& tree)
      : tree_(&tree),
        sub_(subtree_depths(tree)),
        region_lo_(tree.dims(), -kInf),
        region_hi_(tree.dims(), kInf) {}

  std::pair<Depth, Depth> range(std::span<const double> lo, std::span<const double> hi) {
    lo_ = lo;
    hi_ = hi;
    min_ = std::numeric_limits<Depth>::max();
    max_ = std::numeric_limits<Depth>::min();
    visit(0);
    return {min_, max_};
  }

 private:
  bool region_inside_query() const {
    for (std::size_t k = 0; k < lo_.size(); ++k)
      if (region_lo_[k] < lo_[k] || region_hi_[k] > hi_[k]) return false;
    return true;
  }

  void visit(std::uint32_t i) {
    const Tree::Node& n = tree_->nodes()[i];
    if (n.is_leaf() || region_inside_query()) {
      min_ = std::min(min_, sub_.min[i]);
      max_ = std::max(max_, sub_.max[i]);
      return;
    }
    const auto k = static_cast<std::size_t>(n.dim);
    if (lo_[k] < n.split) {
      const double saved = region_hi_[k];
      region_hi_[k] = n.split;
      visit(i + 1);
      region_hi_[k] = saved;
    }
    if (hi_[k] > n.split) {
      const double saved = region_lo_[k];
      region_lo_[k] = n.split;
      visit(n.right);
      region_lo_[k] = saved;
    }
  }

  const Tree* tree_;
  SubtreeDepths sub_;
  std::vector<double> region_lo_, region_hi_;
  std::span<const double> lo_, hi_;
  Depth min_ = 0, max_ = 0;
};

void collect_rects(const Tree& tree, std::uint32_t i, std::vector<double>& lo,
                   std::vector<double>& hi, RegionSet& out) {
  const Tree::Node& n = tree.nodes()[i];
  if (n.is_leaf()) {
    out.push_back({lo, hi, n.depth});
    return;
  }
  const auto k = static_cast<std::size_t>(n.dim);
  const double saved_hi = hi[k];
  hi[k] = n.split;
  collect_rects(tree, i + 1, lo, hi, out);
  hi[k] = saved_hi;
  const double saved_lo = lo[k];
  lo[k] = n.split;
  collect_rects(tree, n.right, lo, hi, out);
  lo[k] = saved_lo;
}

// Box of grid cells, [lo, hi) in cell indices per dimension.
struct CellBox {
  std::vector<std::uint32_t> lo;
  std::vector<std::uint32_t> hi;
  Depth depth = 0;
};

// Joins boxes sharing a full face until no pair remains.
std::vector<CellBox> merge_cell_boxes(std::vector<CellBox> boxes) {
  if (boxes.empty()) return boxes;
  const std::size_t dims = boxes.front().lo.size();
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t k = 0; k < dims; ++k) {
      auto same_face = [&](const CellBox& a, const CellBox& b) {
        for (std::size_t j = 0; j < dims; ++j)
          if (j != k && (a.lo[j] != b.lo[j] || a.hi[j] != b.hi[j])) return false;
        return true;
      };
      std::sort(boxes.begin(), boxes.end(), [&](const CellBox& a, const CellBox& b) {
        for (std::size_t j = 0; j < dims; ++j) {
          if (j == k) continue;
          if (a.lo[j] != b.lo[j]) return a.lo[j] < b.lo[j];
          if (a.hi[j] != b.hi[j]) return a.hi[j] < b.hi[j];
        }
        return a.lo[k] < b.lo[k];
      });
      std::vector<CellBox> merged;
      merged.reserve(boxes.size());
      for (CellBox& b : boxes) {
        if (!merged.empty() && same_face(merged.back(), b) && merged.back().hi[k] == b.lo[k]) {
          merged.back().hi[k] = b.hi[k];
          merged.back().depth = std::min(merged.back().depth, b.depth);
          changed = true;
        } else {
          merged.push_back(std::move(b));
        }
      }
      boxes = std::move(merged);
    }
  }
  // Lexicographic by lower corner, so output order does not depend on the merge passes.
  std::sort(boxes.begin(), boxes.end(),
            [](const CellBox& a, const CellBox& b) { return a.lo < b.lo; });
  return boxes;
}

// Coordinate axes spanned by a set of boxes: sorted distinct bounds per dimension.
struct Axes {
  std::vector<std::vector<double>> coords;

  explicit Axes(const RegionSet& boxes) {
    const std::size_t dims = boxes.front().dims();
    coords.resize(dims);
    for (const HyperRect& r : boxes) {
      if (r.dims() != dims) throw InvalidArgument("boxes differ in dimensionality");
      for (std::size_t k = 0; k < dims; ++k) {
        coords[k].push_back(r.lo[k]);
        coords[k].push_back(r.hi[k]);
      }
    }
    for (auto& c : coords) {
      std::sort(c.begin(), c.end());
      c.erase(std::unique(c.begin(), c.end()), c.end());
    }
  }

  std::uint32_t index(std::size_t k, double v) const {
    return static_cast<std::uint32_t>(std::lower_bound(coords[k].begin(), coords[k].end(), v) -
                                      coords[k].begin());
  }

  CellBox to_cells(const HyperRect& r) const {
    CellBox b;
    for (std::size_t k = 0; k < coords.size(); ++k) {
      b.lo.push_back(index(k, r.lo[k]));
      b.hi.push_back(index(k, r.hi[k]));
    }
    b.depth = r.depth;
    return b;
  }

  HyperRect to_rect(const CellBox& b) const {
    HyperRect r;
    for (std::size_t k = 0; k < coords.size(); ++k) {
      r.lo.push_back(coords[k][b.lo[k]]);
      r.hi.push_back(coords[k][b.hi[k]]);
    }
    r.depth = b.depth;
    return r;
  }
};

std::uint64_t saturating_product(const std::vector<std::uint64_t>& sizes) {
  std::uint64_t total = 1;
  for (std::uint64_t s : sizes) {
    if (s != 0 && total > std::numeric_limits<std::uint64_t>::max() / s)
      return std::numeric_limits<std::uint64_t>::max();
    total *= s;
  }
  return total;
}

}  // namespace

bool HyperRect::contains(std::span<const double> p) const noexcept {
  if (p.size() != lo.size()) return false;
  for (std::size_t k = 0; k < p.size(); ++k)
    if (!(lo[k] <= p[k] && p[k] < hi[k])) return false;
  return true;
}

bool intersects(const HyperRect& a, const HyperRect& b) noexcept {
  if (a.dims() != b.dims()) return false;
  for (std::size_t k = 0; k < a.dims(); ++k)
    if (!(std::max(a.lo[k], b.lo[k]) < std::min(a.hi[k], b.hi[k]))) return false;
  return true;
}

RegionSet tree_to_rects(const Tree& tree) {
  std::vector<double> lo(tree.dims(), -kInf);
  std::vector<double> hi(tree.dims(), kInf);
  RegionSet out;
  out.reserve(tree.leaf_count());
  collect_rects(tree, 0, lo, hi, out);
  return out;
}

Forest prune_forest(const Forest& forest, Depth depth_bound) {
  if (depth_bound < 0) throw InvalidArgument("depth bound must be non-negative");
  std::vector<Tree> trees = forest.trees();
  const std::size_t dims = forest.dims();

  std::vector<LeafDepthQuery> queries;
  queries.reserve(trees.size());
  for (const Tree& t : trees) queries.emplace_back(t);

  for (std::size_t t = 0; t < trees.size(); ++t) {
    const Tree& tree = trees[t];
    const SubtreeDepths sub = subtree_depths(tree);
    std::vector<Tree::Node> kept;
    std::vector<double> lo(dims, -kInf), hi(dims, kInf);

    std::function<void(std::uint32_t)> emit = [&](std::uint32_t i) {
      const Tree::Node& n = tree.nodes()[i];
      if (n.is_leaf() || sub.min[i] == sub.max[i]) {
        kept.push_back({-1, 0, 0.0, sub.min[i]});
        return;
      }
      // Cheapest depth any point of this node's box can reach in the other trees.
      Depth floor = n.depth;
      for (std::size_t u = 0; u < trees.size() && floor <= depth_bound; ++u)
        if (u != t) floor += queries[u].range(lo, hi).first;
      if (floor > depth_bound) {
        kept.push_back({-1, 0, 0.0, n.depth});
        return;
      }
      const std::size_t self = kept.size();
      kept.push_back(n);
      const auto k = static_cast<std::size_t>(n.dim);
      const double saved_hi = hi[k];
      hi[k] = n.split;
      emit(i + 1);
      hi[k] = saved_hi;
      kept[self].right = static_cast<std::uint32_t>(kept.size());
      const double saved_lo = lo[k];
      lo[k] = n.split;
      emit(n.right);
      lo[k] = saved_lo;
    };
    emit(0);

    trees[t] = Tree(dims, std::move(kept));
    queries[t] = LeafDepthQuery(trees[t]);
  }
  return Forest(std::move(trees), forest.config());
}

double average_cumulative_depth(const Forest& forest, const Dataset& data) {
  if (data.empty()) throw InvalidArgument("empty input");
  const auto depths = forest.cumulative_depths(data);
  double sum = 0.0;
  for (Depth d : depths) sum += static_cast<double>(d);
  return sum / static_cast<double>(depths.size());
}

PixelGrid::PixelGrid(std::vector<std::vector<double>> boundaries, bool thin_cells_merged)
    : boundaries_(std::move(boundaries)), merged_(thin_cells_merged) {
  if (boundaries_.empty()) throw InvalidArgument("grid needs at least one dimension");
  for (const auto& b : boundaries_)
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (!std::isfinite(b[i])) throw InvalidArgument("grid boundary is not finite");
      if (i > 0 && !(b[i - 1] < b[i])) throw InvalidArgument("grid boundaries must increase");
    }
}

std::uint64_t PixelGrid::cell_count() const noexcept {
  std::vector<std::uint64_t> sizes;
  for (const auto& b : boundaries_) sizes.push_back(b.size() + 1);
  return saturating_product(sizes);
}

double PixelGrid::cell_lo(std::size_t k, std::size_t i) const {
  return i == 0 ? -kInf : boundaries_[k][i - 1];
}

double PixelGrid::cell_hi(std::size_t k, std::size_t i) const {
  return i == boundaries_[k].size() ? kInf : boundaries_[k][i];
}

HyperRect PixelGrid::cell_rect(std::span<const std::size_t> cell) const {
  HyperRect r;
  for (std::size_t k = 0; k < dims(); ++k) {
    r.lo.push_back(cell_lo(k, cell[k]));
    r.hi.push_back(cell_hi(k, cell[k]));
  }
  return r;
}

std::vector<double> PixelGrid::representative(std::span<const std::size_t> cell) const {
  std::vector<double> p(dims());
  for (std::size_t k = 0; k < dims(); ++k) {
    const double lo = cell_lo(k, cell[k]);
    const double hi = cell_hi(k, cell[k]);
    if (std::isfinite(lo) && std::isfinite(hi)) {
      const double mid = 0.5 * lo + 0.5 * hi;
      p[k] = mid < hi ? mid : lo;  // adjacent doubles can round the midpoint up to hi
    } else if (std::isfinite(hi)) {
      p[k] = std::min(hi - 1.0, std::nextafter(hi, -kInf));
    } else if (std::isfinite(lo)) {
      p[k] = lo + 1.0;
    } else {
      p[k] = 0.0;
    }
  }
  return p;
}

std::vector<std::size_t> PixelGrid::locate(std::span<const double> p) const {
  if (p.size() != dims()) throw InvalidArgument("point dimensionality does not match grid");
  std::vector<std::size_t> cell(dims());
  for (std::size_t k = 0; k < dims(); ++k)
    cell[k] = static_cast<std::size_t>(
        std::upper_bound(boundaries_[k].begin(), boundaries_[k].end(), p[k]) -
        boundaries_[k].begin());
  return cell;
}

std::uint64_t PixelGrid::flatten(std::span<const std::size_t> cell) const {
  std::uint64_t flat = 0;
  for (std::size_t k = 0; k < dims(); ++k) flat = flat * cells_along(k) + cell[k];
  return flat;
}

std::vector<std::size_t> PixelGrid::unflatten(std::uint64_t flat) const {
  std::vector<std::size_t> cell(dims());
  for (std::size_t k = dims(); k-- > 0;) {
    cell[k] = static_cast<std::size_t>(flat % cells_along(k));
    flat /= cells_along(k);
  }
  return cell;
}

void PixelGrid::set_depths(std::vector<Depth> depths) {
  if (depths.size() != cell_count()) throw InvalidArgument("depth count does not match grid");
  depths_ = std::move(depths);
}

PixelGrid build_pixel_grid(const Forest& forest, std::span<const double> min_cell) {
  const std::size_t dims = forest.dims();
  if (!min_cell.empty() && min_cell.size() != 1 && min_cell.size() != dims)
    throw InvalidArgument("min_cell needs one value or one per dimension");

  std::vector<std::vector<double>> keys(dims);
  for (const Tree& t : forest.trees())
    for (const Tree::Node& n : t.nodes())
      if (!n.is_leaf()) keys[static_cast<std::size_t>(n.dim)].push_back(n.split);

  bool merged = false;
  for (std::size_t k = 0; k < dims; ++k) {
    auto& b = keys[k];
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    if (min_cell.empty()) continue;
    const double width = min_cell.size() == 1 ? min_cell[0] : min_cell[k];
    if (!(width > 0.0)) continue;
    std::vector<double> kept;
    for (double v : b) {
      if (!kept.empty() && v - kept.back() < width) {
        merged = true;  // the thin cell [kept.back(), v) joins the next one
        continue;
      }
      kept.push_back(v);
    }
    b = std::move(kept);
  }
  return PixelGrid(std::move(keys), merged);
}

PixelGrid compute_cell_depths(PixelGrid grid, const Forest& forest) {
  if (grid.dims() != forest.dims()) throw InvalidArgument("grid and forest dimensionality differ");
  const std::uint64_t count = grid.cell_count();
  if (count > (std::uint64_t{1} << 32)) throw InvalidArgument("grid too large to materialise");
  std::vector<Depth> depths(count);
  std::vector<std::size_t> cell(grid.dims(), 0);
  for (std::uint64_t flat = 0; flat < count; ++flat) {
    depths[flat] = forest.cumulative_depth(grid.representative(cell));
    for (std::size_t k = grid.dims(); k-- > 0;) {
      if (++cell[k] < grid.cells_along(k)) break;
      cell[k] = 0;
    }
  }
  grid.set_depths(std::move(depths));
  return grid;
}

RegionSet extract_anomalous_cells(const PixelGrid& grid, Depth cutoff) {
  if (!grid.has_depths()) throw InvalidArgument("grid has no cell depths");
  RegionSet out;
  const auto& depths = grid.depths();
  for (std::uint64_t flat = 0; flat < depths.size(); ++flat) {
    if (depths[flat] > cutoff) continue;
    HyperRect r = grid.cell_rect(grid.unflatten(flat));
    r.depth = depths[flat];
    out.push_back(std::move(r));
  }
  return out;
}

RegionSet extract_anomalous_boxes(const PixelGrid& grid, const Forest& forest, Depth cutoff) {
  const std::size_t dims = grid.dims();
  if (dims != forest.dims()) throw InvalidArgument("grid and forest dimensionality differ");

  std::vector<LeafDepthQuery> queries;
  queries.reserve(forest.tree_count());
  for (const Tree& t : forest.trees()) queries.emplace_back(t);

  std::vector<CellBox> found;
  std::vector<double> lo(dims), hi(dims);
  std::vector<std::size_t> cell(dims);

  std::function<void(std::vector<std::uint32_t>&, std::vector<std::uint32_t>&)> bisect =
      [&](std::vector<std::uint32_t>& ilo, std::vector<std::uint32_t>& ihi) {
        for (std::size_t k = 0; k < dims; ++k) {
          lo[k] = grid.cell_lo(k, ilo[k]);
          hi[k] = grid.cell_hi(k, ihi[k] - 1);
        }
        Depth floor = 0, ceiling = 0;
        for (auto& q : queries) {
          const auto [mn, mx] = q.range(lo, hi);
          floor += mn;
          ceiling += mx;
          if (floor > cutoff) return;
        }
        if (ceiling <= cutoff) {
          found.push_back({ilo, ihi, floor});
          return;
        }
        std::size_t widest = 0;
        for (std::size_t k = 1; k < dims; ++k)
          if (ihi[k] - ilo[k] > ihi[widest] - ilo[widest]) widest = k;
        if (ihi[widest] - ilo[widest] == 1) {
          // A single cell that still straddles leaves: only possible after thin-cell merging.
          for (std::size_t k = 0; k < dims; ++k) cell[k] = ilo[k];
          const Depth d = forest.cumulative_depth(grid.representative(cell));
          if (d <= cutoff) found.push_back({ilo, ihi, d});
          return;
        }
        const std::uint32_t mid = ilo[widest] + (ihi[widest] - ilo[widest]) / 2;
        const std::uint32_t saved_hi = ihi[widest];
        ihi[widest] = mid;
        bisect(ilo, ihi);
        ihi[widest] = saved_hi;
        const std::uint32_t saved_lo = ilo[widest];
        ilo[widest] = mid;
        bisect(ilo, ihi);
        ilo[widest] = saved_lo;
      };

  std::vector<std::uint32_t> ilo(dims, 0), ihi(dims);
  for (std::size_t k = 0; k < dims; ++k) ihi[k] = static_cast<std::uint32_t>(grid.cells_along(k));
  bisect(ilo, ihi);

  RegionSet out;
  for (const CellBox& b : merge_cell_boxes(std::move(found))) {
    HyperRect r;
    for (std::size_t k = 0; k < dims; ++k) {
      r.lo.push_back(grid.cell_lo(k, b.lo[k]));
      r.hi.push_back(grid.cell_hi(k, b.hi[k] - 1));
    }
    r.depth = b.depth;
    out.push_back(std::move(r));
  }
  return out;
}

RegionSet merge_adjacent_boxes(RegionSet boxes) {
  if (boxes.empty()) return boxes;
  const Axes axes(boxes);
  std::vector<CellBox> cells;
  cells.reserve(boxes.size());
  for (const HyperRect& r : boxes) cells.push_back(axes.to_cells(r));
  RegionSet out;
  for (const CellBox& b : merge_cell_boxes(std::move(cells))) out.push_back(axes.to_rect(b));
  return out;
}

RegionSet consolidate_rects(const RegionSet& cells) {
  if (cells.empty()) return {};
  const Axes axes(cells);
  const std::size_t dims = axes.coords.size();

  std::vector<std::uint64_t> extent(dims);
  for (std::size_t k = 0; k < dims; ++k) extent[k] = axes.coords[k].size() - 1;
  const std::uint64_t total = saturating_product(extent);
  if (total > (std::uint64_t{1} << 28)) return merge_adjacent_boxes(cells);

  // Mask over the elementary cells spanned by the input; depth < 0 marks "not anomalous".
  std::vector<std::uint64_t> stride(dims, 1);
  for (std::size_t k = dims - 1; k-- > 0;) stride[k] = stride[k + 1] * extent[k + 1];
  std::vector<Depth> depth(total, -1);
  std::vector<std::uint8_t> consumed(total, 0);

  auto for_each_cell = [&](const std::vector<std::uint32_t>& lo,
                           const std::vector<std::uint32_t>& hi, auto&& fn) {
    std::vector<std::uint32_t> at = lo;
    for (;;) {
      std::uint64_t flat = 0;
      for (std::size_t k = 0; k < dims; ++k) flat += at[k] * stride[k];
      if (!fn(flat)) return false;
      std::size_t k = dims;
      while (k-- > 0) {
        if (++at[k] < hi[k]) break;
        at[k] = lo[k];
      }
      if (k == static_cast<std::size_t>(-1)) return true;
    }
  };

  for (const HyperRect& r : cells) {
    const CellBox b = axes.to_cells(r);
    for_each_cell(b.lo, b.hi, [&](std::uint64_t flat) {
      depth[flat] = depth[flat] < 0 ? r.depth : std::min(depth[flat], r.depth);
      return true;
    });
  }

  auto usable = [&](std::uint64_t flat) { return depth[flat] >= 0 && !consumed[flat]; };

  std::vector<CellBox> squares;
  std::vector<std::uint32_t> origin(dims, 0);
  for (std::uint64_t flat = 0; flat < total; ++flat) {
    if (usable(flat)) {
      for (std::uint64_t rest = flat, k = 0; k < dims; ++k) {
        origin[k] = static_cast<std::uint32_t>(rest / stride[k]);
        rest %= stride[k];
      }
      // Grow side s -> s + 1 while the new shell {offset : max offset == s} is usable.
      std::uint32_t side = 1;
      for (;;) {
        bool fits = true;
        for (std::size_t k = 0; k < dims; ++k)
          if (origin[k] + side >= extent[k]) fits = false;
        if (!fits) break;
        bool ok = true;
        for (std::size_t j = 0; j < dims && ok; ++j) {
          std::vector<std::uint32_t> lo(dims), hi(dims);
          for (std::size_t k = 0; k < dims; ++k) {
            lo[k] = origin[k];
            hi[k] = origin[k] + (k < j ? side : side + 1);
          }
          lo[j] = origin[j] + side;
          hi[j] = origin[j] + side + 1;
          ok = for_each_cell(lo, hi, usable);
        }
        if (!ok) break;
        ++side;
      }
      CellBox sq{origin, origin, std::numeric_limits<Depth>::max()};
      for (std::size_t k = 0; k < dims; ++k) sq.hi[k] += side;
      for_each_cell(sq.lo, sq.hi, [&](std::uint64_t f) {
        consumed[f] = 1;
        sq.depth = std::min(sq.depth, depth[f]);
        return true;
      });
      squares.push_back(std::move(sq));
    }
  }

  RegionSet out;
  for (const CellBox& b : merge_cell_boxes(std::move(squares))) out.push_back(axes.to_rect(b));
  return out;
}

}  // namespace anomspec

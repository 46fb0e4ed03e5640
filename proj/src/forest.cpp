#include "anomspec/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <unordered_set>

#include "anomspec/errors.hpp"

namespace anomspec {

namespace {

// Returns one past the last node of the subtree rooted at i, or 0 when malformed.
std::size_t subtree_end(const std::vector<Tree::Node>& nodes, std::size_t dims, std::size_t i) {
  if (i >= nodes.size()) return 0;
  const Tree::Node& n = nodes[i];
  if (n.is_leaf()) return i + 1;
  if (static_cast<std::size_t>(n.dim) >= dims) return 0;
  const std::size_t left_end = subtree_end(nodes, dims, i + 1);
  if (left_end == 0 || n.right != left_end) return 0;
  return subtree_end(nodes, dims, n.right);
}

// Uniform on the open interval (lo, hi); lo < hi.
double draw_split(Rng& rng, double lo, double hi) {
  if (std::nextafter(lo, hi) == hi) return hi;  // no double strictly inside
  for (;;) {
    const double u = uniform01(rng);
    const double s = lo * (1.0 - u) + hi * u;
    if (lo < s && s < hi) return s;
  }
}

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& sample, Rng& rng) : sample_(sample), rng_(rng) {
    rows_.resize(sample.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) rows_[i] = static_cast<std::uint32_t>(i);
  }

  std::vector<Tree::Node> build() {
    grow(0, rows_.size(), 0, 0);
    return std::move(nodes_);
  }

 private:
  void grow(std::size_t first, std::size_t last, std::size_t next_dim, Depth depth) {
    const std::size_t dims = sample_.dims();
    for (std::size_t t = 0; t < dims; ++t) {
      const std::size_t k = (next_dim + t) % dims;
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t i = first; i < last; ++i) {
        const double v = sample_.point(rows_[i])[k];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (!(lo < hi)) continue;

      const double split = draw_split(rng_, lo, hi);
      auto mid_it = std::partition(rows_.begin() + first, rows_.begin() + last,
                                   [&](std::uint32_t r) { return sample_.point(r)[k] < split; });
      const auto mid = static_cast<std::size_t>(mid_it - rows_.begin());

      const std::size_t self = nodes_.size();
      nodes_.push_back({static_cast<std::int32_t>(k), 0, split, depth});
      grow(first, mid, k + 1, depth + 1);
      nodes_[self].right = static_cast<std::uint32_t>(nodes_.size());
      grow(mid, last, k + 1, depth + 1);
      return;
    }
    nodes_.push_back({-1, 0, 0.0, depth});
  }

  const Dataset& sample_;
  Rng& rng_;
  std::vector<std::uint32_t> rows_;
  std::vector<Tree::Node> nodes_;
};

}  // namespace

Tree::Tree(std::size_t dims, std::vector<Node> nodes) : dims_(dims), nodes_(std::move(nodes)) {
  if (dims_ == 0) throw InvalidArgument("tree dimensionality must be at least 1");
  if (nodes_.empty() || subtree_end(nodes_, dims_, 0) != nodes_.size())
    throw InvalidArgument("malformed preorder node list");
  for (const Node& n : nodes_) {
    if (n.depth < 0) throw InvalidArgument("negative node depth");
    if (!n.is_leaf() && !std::isfinite(n.split)) throw InvalidArgument("non-finite split key");
  }
}

std::size_t Tree::leaf_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

Depth Tree::path_depth(std::span<const double> p) const {
  if (p.size() != dims_)
    throw InvalidArgument("point has " + std::to_string(p.size()) +
                          " coordinates, tree expects " + std::to_string(dims_));
  return path_depth_unchecked(p.data());
}

Forest::Forest(std::vector<Tree> trees, ForestConfig config)
    : trees_(std::move(trees)), config_(config) {
  if (trees_.empty()) throw InvalidArgument("forest needs at least one tree");
  for (const Tree& t : trees_)
    if (t.dims() != trees_.front().dims())
      throw InvalidArgument("trees of a forest must share dimensionality");
  config_.tree_count = trees_.size();
}

Depth Forest::cumulative_depth(std::span<const double> p) const {
  if (p.size() != dims())
    throw InvalidArgument("point has " + std::to_string(p.size()) +
                          " coordinates, forest expects " + std::to_string(dims()));
  Depth sum = 0;
  for (const Tree& t : trees_) sum += t.path_depth_unchecked(p.data());
  return sum;
}

std::vector<Depth> Forest::cumulative_depths(const Dataset& data) const {
  if (data.dims() != dims())
    throw InvalidArgument("dataset has " + std::to_string(data.dims()) +
                          " dimensions, forest expects " + std::to_string(dims()));
  std::vector<Depth> out(data.size(), 0);
  const double* base = data.values().data();
  const std::size_t d = data.dims();
  // Tree-major keeps one tree hot in cache while streaming the points.
  for (const Tree& t : trees_)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += t.path_depth_unchecked(base + i * d);
  return out;
}

std::vector<std::size_t> sample_indices(const Dataset& data, std::size_t n, Rng& rng) {
  if (data.empty()) throw InvalidArgument("empty input");
  if (n == 0) throw InvalidArgument("sample size must be at least 1");
  const std::size_t total = data.size();
  std::vector<std::size_t> out;
  if (n >= total) {
    out.resize(total);
    for (std::size_t i = 0; i < total; ++i) out[i] = i;
    return out;
  }
  // Floyd's algorithm: n distinct indices in O(n).
  std::unordered_set<std::size_t> seen;
  seen.reserve(n * 2);
  out.reserve(n);
  for (std::size_t j = total - n; j < total; ++j) {
    const auto t = static_cast<std::size_t>(uniform_index(rng, j + 1));
    const std::size_t pick = seen.insert(t).second ? t : j;
    if (pick == j) seen.insert(j);
    out.push_back(pick);
  }
  return out;
}

Dataset sample_without_replacement(const Dataset& data, std::size_t n, Rng& rng) {
  const auto rows = sample_indices(data, n, rng);
  return data.select(rows);
}

Tree build_tree(const Dataset& sample, Rng& rng) {
  if (sample.empty()) throw InvalidArgument("empty input");
  TreeBuilder builder(sample, rng);
  return Tree(sample.dims(), builder.build());
}

Forest build_forest(const Dataset& data, const ForestConfig& config) {
  if (data.empty()) throw InvalidArgument("empty input");
  if (config.tree_count < 1) throw InvalidArgument("tree_count must be at least 1");
  if (config.sample_size < 2) throw InvalidArgument("sample_size must be at least 2");

  std::vector<Tree> trees(config.tree_count);
  auto build_one = [&](std::size_t t) {
    Rng rng = make_rng(config.seed, t);
    const auto rows = sample_indices(data, config.sample_size, rng);
    Tree tree = build_tree(data.select(rows), rng);
    trees[t] = config.integer_key_mode ? normalize_integer_keys(tree) : std::move(tree);
  };

  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), config.tree_count);
  if (workers <= 1) {
    for (std::size_t t = 0; t < config.tree_count; ++t) build_one(t);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < config.tree_count; t += workers) build_one(t);
      });
    for (auto& th : pool) th.join();
  }
  return Forest(std::move(trees), config);
}

Tree normalize_integer_keys(const Tree& tree) {
  std::vector<Tree::Node> nodes(tree.nodes().begin(), tree.nodes().end());
  for (Tree::Node& n : nodes)
    if (!n.is_leaf()) n.split = std::ceil(n.split) - 0.5;
  return Tree(tree.dims(), std::move(nodes));
}

}  // namespace anomspec

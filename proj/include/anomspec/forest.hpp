#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "anomspec/dataset.hpp"
#include "anomspec/rng.hpp"

namespace anomspec {

struct ForestConfig {
  std::size_t tree_count = 100;
  std::size_t sample_size = 256;
  std::uint64_t seed = 0;
  // Data is known integral: split keys are moved to ceil(key) - 0.5 after construction.
  bool integer_key_mode = false;

  friend bool operator==(const ForestConfig&, const ForestConfig&) = default;
};

/// Random partitioning tree stored as a preorder node array.
///
/// An internal node splits on `dim` at `split`: points with coordinate < split
/// descend into the left child (the next node in the array), all others into
/// the node at index `right`. Every node records its depth; for a leaf this is
/// the depth reported by path_depth. Trees produced by prune_forest may carry
/// leaves whose depth exceeds their position in the tree.
class Tree {
 public:
  struct Node {
    std::int32_t dim = -1;  // -1 marks a leaf
    std::uint32_t right = 0;
    double split = 0.0;
    Depth depth = 0;

    bool is_leaf() const noexcept { return dim < 0; }
    friend bool operator==(const Node&, const Node&) = default;
  };

  Tree() = default;
  /// Validates the preorder layout; throws InvalidArgument when malformed.
  Tree(std::size_t dims, std::vector<Node> nodes);

  std::size_t dims() const noexcept { return dims_; }
  std::span<const Node> nodes() const noexcept { return nodes_; }
  std::size_t leaf_count() const noexcept;

  /// Depth of the leaf reached by p. Throws InvalidArgument on dimension mismatch.
  Depth path_depth(std::span<const double> p) const;

  /// path_depth without the dimension check; p must hold dims() values.
  Depth path_depth_unchecked(const double* p) const noexcept {
    std::uint32_t i = 0;
    while (nodes_[i].dim >= 0) {
      const Node& n = nodes_[i];
      i = p[n.dim] < n.split ? i + 1 : n.right;
    }
    return nodes_[i].depth;
  }

  friend bool operator==(const Tree&, const Tree&) = default;

 private:
  std::size_t dims_ = 0;
  std::vector<Node> nodes_;
};

class Forest {
 public:
  Forest() = default;
  /// All trees must share dimensionality; at least one tree is required.
  Forest(std::vector<Tree> trees, ForestConfig config);

  std::size_t dims() const noexcept { return trees_.front().dims(); }
  std::size_t tree_count() const noexcept { return trees_.size(); }
  const std::vector<Tree>& trees() const noexcept { return trees_; }
  const ForestConfig& config() const noexcept { return config_; }

  /// Sum of path depths over all trees.
  Depth cumulative_depth(std::span<const double> p) const;
  /// cumulative_depth for every row of data.
  std::vector<Depth> cumulative_depths(const Dataset& data) const;

  friend bool operator==(const Forest&, const Forest&) = default;

 private:
  std::vector<Tree> trees_;
  ForestConfig config_;
};

/// Row indices of min(n, |data|) distinct rows. Throws InvalidArgument("empty input").
std::vector<std::size_t> sample_indices(const Dataset& data, std::size_t n, Rng& rng);
Dataset sample_without_replacement(const Dataset& data, std::size_t n, Rng& rng);

/// Isolates every distinct point of the sample. Split dimensions cycle in order,
/// skipping dimensions without spread in the current partition.
Tree build_tree(const Dataset& sample, Rng& rng);

/// Trees are built from independent samples with RNG stream (seed, tree index),
/// so the result depends only on data and config.
Forest build_forest(const Dataset& data, const ForestConfig& config);

/// Moves every split key to ceil(key) - 0.5. Partition membership of integer
/// points is unchanged.
Tree normalize_integer_keys(const Tree& tree);

}  // namespace anomspec

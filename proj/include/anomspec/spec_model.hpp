#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "anomspec/dataset.hpp"
#include "anomspec/forest.hpp"
#include "anomspec/spec1d.hpp"
#include "anomspec/specnd.hpp"

namespace anomspec {

struct Provenance {
  std::uint64_t seed = 0;
  std::size_t tree_count = 0;
  std::size_t sample_size = 0;
  std::string source_fingerprint;
  std::vector<std::pair<std::string, std::string>> params;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Point location over disjoint boxes: a bounding volume hierarchy split at
/// the median box centre.
class BoxIndex {
 public:
  BoxIndex() = default;
  explicit BoxIndex(const RegionSet& boxes);

  /// Index of a box containing p, or -1. boxes must be the set the index was built from.
  std::int64_t find(const RegionSet& boxes, std::span<const double> p) const;

 private:
  struct Node {
    std::vector<double> lo, hi;  // bounding box
    std::int32_t left = -1, right = -1;
    std::uint32_t first = 0, count = 0;  // leaf payload in order_
  };
  std::int32_t build(const RegionSet& boxes, std::uint32_t first, std::uint32_t count,
                     std::vector<double>& centres);

  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

/// Compiled anomalous-space specification. Immutable; safe to query concurrently.
class AnomalySpec {
 public:
  AnomalySpec(std::size_t dims, Depth cutoff, RegionSet regions, Provenance provenance = {});

  std::size_t dims() const noexcept { return dims_; }
  Depth cutoff_depth() const noexcept { return cutoff_; }
  const RegionSet& regions() const noexcept { return regions_; }
  const Provenance& provenance() const noexcept { return provenance_; }

  /// True when p lies in an anomalous region. Throws InvalidArgument on dimension mismatch.
  bool classify(std::span<const double> p) const;
  std::vector<std::uint8_t> classify_all(const Dataset& data) const;

  friend bool operator==(const AnomalySpec& a, const AnomalySpec& b) {
    return a.dims_ == b.dims_ && a.cutoff_ == b.cutoff_ && a.regions_ == b.regions_ &&
           a.provenance_ == b.provenance_;
  }

 private:
  std::size_t dims_;
  Depth cutoff_;
  RegionSet regions_;
  Provenance provenance_;
  RangeSearchTree ranges_;
  BoxIndex boxes_;
};

struct CompileOptions {
  /// Per-dimension thin-cell width; empty keeps every boundary (exact).
  std::vector<double> min_cell;
  bool prune = false;
  /// Pruning bound; raised to the cutoff when lower.
  Depth prune_bound = std::numeric_limits<Depth>::max();
  /// Allow more than three dimensions.
  bool force = false;
  /// Grids up to this many cells take the dense pixel route; larger ones are bisected.
  std::uint64_t dense_cell_limit = std::uint64_t{1} << 22;
  std::string source_fingerprint;
  std::vector<std::pair<std::string, std::string>> params;
};

/// Regions of the space whose cumulative depth is <= cutoff. Without thin-cell
/// merging the result classifies every point exactly as the forest does.
/// Throws IntractableDimensionality for dims > 3 unless options.force.
AnomalySpec compile_spec(const Forest& forest, Depth cutoff, const CompileOptions& options = {});

/// Line-oriented text; doubles use the shortest representation that round-trips.
std::string serialize_spec(const AnomalySpec& spec);
/// Throws FormatError carrying the offending line number.
AnomalySpec parse_spec(std::string_view text);

}  // namespace anomspec

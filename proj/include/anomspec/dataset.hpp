#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace anomspec {

/// Cumulative or per-tree search path depth. Root has depth 0.
using Depth = std::int64_t;

/// Row-major table of points sharing one dimensionality.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::size_t dims);
  Dataset(std::size_t dims, std::vector<double> values);

  std::size_t dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return dims_ ? values_.size() / dims_ : 0; }
  bool empty() const noexcept { return values_.empty(); }

  std::span<const double> point(std::size_t i) const {
    return {values_.data() + i * dims_, dims_};
  }
  std::span<double> point(std::size_t i) { return {values_.data() + i * dims_, dims_}; }

  /// Appends a point; throws InvalidArgument on dimension mismatch or a non-finite value.
  void push_back(std::span<const double> p);
  void reserve(std::size_t n) { values_.reserve(n * dims_); }

  const std::vector<double>& values() const noexcept { return values_; }

  /// Subset by row index, in the given order.
  Dataset select(std::span<const std::size_t> rows) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::size_t dims_ = 0;
  std::vector<double> values_;
};

/// FNV-1a over the raw coordinate bytes; identifies a dataset in provenance records.
std::uint64_t fingerprint(const Dataset& data);

}  // namespace anomspec

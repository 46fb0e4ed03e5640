#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "anomspec/dataset.hpp"
#include "anomspec/forest.hpp"

namespace anomspec {

enum class ProfileSource { data_points, ranges };

/// Sorted multiset of cumulative depths.
class DepthProfile {
 public:
  /// Sorts depths. Throws InvalidArgument when empty.
  DepthProfile(std::vector<Depth> depths, ProfileSource source);

  std::span<const Depth> depths() const noexcept { return depths_; }
  std::size_t size() const noexcept { return depths_.size(); }
  ProfileSource source() const noexcept { return source_; }

 private:
  std::vector<Depth> depths_;
  ProfileSource source_;
};

struct CutoffEstimate {
  Depth cutoff_depth = 0;
  /// Profile entries up to and including the low cursor.
  std::size_t anomaly_count = 0;
  /// Final position of the low cursor.
  std::size_t meeting_index = 0;
  /// Set when no adjacent gap exceeds twice the median adjacent gap.
  bool low_confidence = false;
};

/// Two cursors start at both ends and walk inwards, each step advancing the one
/// whose next adjacent gap is smaller (both on ties), until low + 1 >= high.
/// Throws InvalidArgument("insufficient data") when the profile has < 2 entries.
CutoffEstimate greedy_gap_cutoff(const DepthProfile& profile);

/// Depth of the count-th shallowest profile entry; one below the shallowest when
/// count is 0. count is capped at the profile size.
Depth cutoff_for_count(const DepthProfile& profile, std::size_t count);

/// Drops the value farthest from the mean (first one on ties) and rounds the mean of the rest.
std::size_t mean_without_farthest(std::span<const std::size_t> estimates);

/// Repeats the data-point cutoff estimate with seeds config.seed + r for r < runs
/// and combines them with mean_without_farthest. runs >= 2.
std::size_t estimate_anomaly_count_repeated(const Dataset& data, const ForestConfig& config,
                                            std::size_t runs);

}  // namespace anomspec

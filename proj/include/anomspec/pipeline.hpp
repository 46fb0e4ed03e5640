#pragma once

#include <cstdint>
#include <vector>

#include "anomspec/cutoff.hpp"
#include "anomspec/dataset.hpp"
#include "anomspec/forest.hpp"
#include "anomspec/spec1d.hpp"

namespace anomspec {

/// Cumulative depths of the data rows, as a profile.
DepthProfile profile_from_points(const Forest& forest, const Dataset& data);
/// Depths of the merged range list of a 1-D forest.
DepthProfile profile_from_ranges(const Forest& forest);

/// One unsupervised detection: forest, per-point depths, cutoff from the
/// data-point profile, and labels (depth <= cutoff).
struct DetectionRun {
  Forest forest;
  std::vector<Depth> depths;
  CutoffEstimate estimate;
  std::vector<std::uint8_t> labels;
};

DetectionRun run_detection(const Dataset& data, const ForestConfig& config);

/// Labels from depths for a given cutoff.
std::vector<std::uint8_t> threshold_depths(const std::vector<Depth>& depths, Depth cutoff);

}  // namespace anomspec

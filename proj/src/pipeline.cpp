#include "anomspec/pipeline.hpp"

#include "anomspec/errors.hpp"

namespace anomspec {

DepthProfile profile_from_points(const Forest& forest, const Dataset& data) {
  return DepthProfile(forest.cumulative_depths(data), ProfileSource::data_points);
}

DepthProfile profile_from_ranges(const Forest& forest) {
  if (forest.dims() != 1) throw InvalidArgument("range profiles need a 1-dimensional forest");
  const RangeList merged = forest_ranges(forest);
  std::vector<Depth> depths;
  depths.reserve(merged.size());
  for (const Range& r : merged) depths.push_back(r.depth);
  return DepthProfile(std::move(depths), ProfileSource::ranges);
}

std::vector<std::uint8_t> threshold_depths(const std::vector<Depth>& depths, Depth cutoff) {
  std::vector<std::uint8_t> labels(depths.size());
  for (std::size_t i = 0; i < depths.size(); ++i) labels[i] = depths[i] <= cutoff ? 1 : 0;
  return labels;
}

DetectionRun run_detection(const Dataset& data, const ForestConfig& config) {
  DetectionRun run;
  run.forest = build_forest(data, config);
  run.depths = run.forest.cumulative_depths(data);
  run.estimate = greedy_gap_cutoff(DepthProfile(run.depths, ProfileSource::data_points));
  run.labels = threshold_depths(run.depths, run.estimate.cutoff_depth);
  return run;
}

}  // namespace anomspec

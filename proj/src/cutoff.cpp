#include "anomspec/cutoff.hpp"

#include <algorithm>
#include <cmath>

#include "anomspec/errors.hpp"
#include "anomspec/pipeline.hpp"

namespace anomspec {

DepthProfile::DepthProfile(std::vector<Depth> depths, ProfileSource source)
    : depths_(std::move(depths)), source_(source) {
  if (depths_.empty()) throw InvalidArgument("empty depth profile");
  std::sort(depths_.begin(), depths_.end());
}

CutoffEstimate greedy_gap_cutoff(const DepthProfile& profile) {
  const auto d = profile.depths();
  if (d.size() < 2) throw InvalidArgument("insufficient data");

  std::size_t low = 0;
  std::size_t high = d.size() - 1;
  while (low + 1 < high) {
    const Depth low_gap = d[low + 1] - d[low];
    const Depth high_gap = d[high] - d[high - 1];
    if (low_gap < high_gap) {
      ++low;
    } else if (high_gap < low_gap) {
      --high;
    } else {
      ++low;
      --high;
    }
  }

  CutoffEstimate est;
  est.cutoff_depth = d[low];
  est.anomaly_count = low + 1;
  est.meeting_index = low;

  std::vector<Depth> gaps(d.size() - 1);
  for (std::size_t i = 0; i + 1 < d.size(); ++i) gaps[i] = d[i + 1] - d[i];
  const Depth largest = *std::max_element(gaps.begin(), gaps.end());
  std::sort(gaps.begin(), gaps.end());
  const std::size_t m = gaps.size();
  const double median =
      m % 2 ? static_cast<double>(gaps[m / 2]) : 0.5 * static_cast<double>(gaps[m / 2 - 1] + gaps[m / 2]);
  est.low_confidence = static_cast<double>(largest) <= 2.0 * median;
  return est;
}

Depth cutoff_for_count(const DepthProfile& profile, std::size_t count) {
  const auto d = profile.depths();
  if (count == 0) return d.front() - 1;
  return d[std::min(count, d.size()) - 1];
}

std::size_t mean_without_farthest(std::span<const std::size_t> estimates) {
  if (estimates.empty()) throw InvalidArgument("no estimates");
  if (estimates.size() == 1) return estimates.front();

  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  std::vector<double> values(estimates.begin(), estimates.end());
  const double mean = mean_of(values);
  std::size_t farthest = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (std::abs(values[i] - mean) > std::abs(values[farthest] - mean)) farthest = i;
  values.erase(values.begin() + static_cast<std::ptrdiff_t>(farthest));
  return static_cast<std::size_t>(std::llround(mean_of(values)));
}

std::size_t estimate_anomaly_count_repeated(const Dataset& data, const ForestConfig& config,
                                            std::size_t runs) {
  if (runs < 2) throw InvalidArgument("repeated estimation needs at least 2 runs");
  std::vector<std::size_t> counts;
  counts.reserve(runs);
  for (std::size_t r = 0; r < runs; ++r) {
    ForestConfig cfg = config;
    cfg.seed = config.seed + r;
    counts.push_back(run_detection(data, cfg).estimate.anomaly_count);
  }
  return mean_without_farthest(counts);
}

}  // namespace anomspec

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "anomspec/dataset.hpp"
#include "anomspec/forest.hpp"

namespace anomspec {

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  double spearman_rho = 0.0;
  double pearson_r = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

/// Confusion-matrix metrics; precision (recall) is 0 when nothing is predicted (present).
EvalReport eval_labels(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth);

/// Ranks starting at 1; tied values share their average rank.
std::vector<double> average_ranks(std::span<const double> values);
double pearson_r(std::span<const double> a, std::span<const double> b);
double spearman_rho(std::span<const double> a, std::span<const double> b);

struct DepthStats {
  double mean = 0.0;
  double variance = 0.0;
};

/// Depth of the last key inserted into a random binary search tree of n keys:
/// mean sum_{i=2..n} 2/i, variance sum_{i=2..n} (2 - 4/i)/i.
DepthStats depth_distribution_stats(std::size_t n);

enum class KeyDistribution { permutation, uniform, exponential };

struct MonteCarloDepth {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  std::vector<std::size_t> histogram;  // histogram[d] = trials whose last key landed at depth d
};

/// Inserts n keys into an unbalanced binary search tree per trial and records
/// the depth of the last insertion.
MonteCarloDepth monte_carlo_last_depth(std::size_t n, std::size_t trials, std::uint64_t seed,
                                       KeyDistribution keys = KeyDistribution::permutation);

struct SelfCheckReport {
  EvalReport report;  // run b evaluated against run a
  std::size_t control_anomalies = 0;
  std::size_t trial_anomalies = 0;
  bool low_confidence = false;
};

/// Two independent detection runs on the same data; the first labels the data,
/// the second is scored against those labels. spearman_rho compares the two
/// per-point depth rankings.
SelfCheckReport self_validate(const Dataset& data, const ForestConfig& config,
                              std::uint64_t seed_a, std::uint64_t seed_b);

/// Row-major height x width matrix over the data bounding box widened by 10% on
/// every side; row 0 is the top (largest y). Each value is the fraction of data
/// points whose cumulative depth is strictly below the depth at the cell centre.
std::vector<std::vector<double>> contour_grid(const Forest& forest, const Dataset& data,
                                              std::size_t width, std::size_t height);

/// 0-based index i minimising the summed squared residuals of independent line
/// fits to series[0..i) and series(i..n). Ties go to the smallest i.
std::size_t least_smooth_split(std::span<const double> series);

/// Share of the k points farthest from the global least-squares line that are flagged anomalous.
double anomaly_outlier_overlap(std::span<const double> series,
                               std::span<const std::uint8_t> anomalous, std::size_t k);

}  // namespace anomspec

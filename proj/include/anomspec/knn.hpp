#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "anomspec/dataset.hpp"

namespace anomspec {

struct KnnRanking {
  std::vector<double> score;         // max over k of d_k^2 / k
  std::vector<std::size_t> best_k;   // k attaining the maximum (smallest such k)
  std::vector<std::size_t> order;    // descending score, ties by index
  std::size_t max_k = 0;
};

/// Exact nearest-neighbour outlier scores for 2-D data; d_k excludes the point itself.
/// Throws InvalidArgument unless 1 <= max_k < |data| and dims == 2.
KnnRanking knn_rank(const Dataset& data, std::size_t max_k);

struct RankingComparison {
  double pearson_r = 0.0;       // between the two rank vectors
  double best_f_measure = 0.0;
  std::size_t best_m = 0;       // top-m NN-outliers attaining best_f_measure
  std::size_t matched = 0;      // of those, flagged by the forest
};

/// iforest points ranked by ascending depth, kNN by descending score. The
/// top-m NN-outliers are swept against the iforest anomaly set.
RankingComparison compare_rankings(std::span<const Depth> iforest_depths,
                                   std::span<const std::uint8_t> iforest_anomalous,
                                   const KnnRanking& knn);

}  // namespace anomspec

#include "anomspec/knn.hpp"

#include <algorithm>
#include <numeric>

#include "anomspec/analysis.hpp"
#include "anomspec/errors.hpp"

namespace anomspec {

KnnRanking knn_rank(const Dataset& data, std::size_t max_k) {
  if (data.dims() != 2) throw InvalidArgument("nearest-neighbour ranking needs 2-D data");
  if (max_k == 0 || max_k >= data.size())
    throw InvalidArgument("max_k must satisfy 1 <= max_k < point count");

  const std::size_t n = data.size();
  const double* v = data.values().data();
  KnnRanking out;
  out.max_k = max_k;
  out.score.assign(n, 0.0);
  out.best_k.assign(n, 1);

  std::vector<double> dist(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = v[2 * i], y = v[2 * i + 1];
    std::size_t m = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = v[2 * j] - x, dy = v[2 * j + 1] - y;
      dist[m++] = dx * dx + dy * dy;
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(max_k), dist.end());
    for (std::size_t k = 1; k <= max_k; ++k) {
      const double s = dist[k - 1] / static_cast<double>(k);
      if (s > out.score[i]) {
        out.score[i] = s;
        out.best_k[i] = k;
      }
    }
  }

  out.order.resize(n);
  std::iota(out.order.begin(), out.order.end(), 0);
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::size_t a, std::size_t b) { return out.score[a] > out.score[b]; });
  return out;
}

RankingComparison compare_rankings(std::span<const Depth> iforest_depths,
                                   std::span<const std::uint8_t> iforest_anomalous,
                                   const KnnRanking& knn) {
  const std::size_t n = knn.score.size();
  if (iforest_depths.size() != n || iforest_anomalous.size() != n)
    throw InvalidArgument("rankings cover different point counts");

  RankingComparison out;
  if (n >= 2) {
    // Rank 1 is the most anomalous on both sides.
    const std::vector<double> depth(iforest_depths.begin(), iforest_depths.end());
    std::vector<double> neg_score(n);
    for (std::size_t i = 0; i < n; ++i) neg_score[i] = -knn.score[i];
    out.pearson_r = pearson_r(average_ranks(depth), average_ranks(neg_score));
  }

  const auto flagged = static_cast<std::size_t>(
      std::count_if(iforest_anomalous.begin(), iforest_anomalous.end(), [](std::uint8_t l) { return l != 0; }));
  if (flagged == 0) return out;
  std::size_t matched = 0;
  for (std::size_t m = 1; m <= knn.order.size(); ++m) {
    matched += iforest_anomalous[knn.order[m - 1]] ? 1 : 0;
    const double p = static_cast<double>(matched) / static_cast<double>(m);
    const double r = static_cast<double>(matched) / static_cast<double>(flagged);
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    if (f > out.best_f_measure) {
      out.best_f_measure = f;
      out.best_m = m;
      out.matched = matched;
    }
  }
  return out;
}

}  // namespace anomspec

#include "anomspec/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "anomspec/errors.hpp"
#include "anomspec/pipeline.hpp"
#include "anomspec/rng.hpp"

namespace anomspec {

namespace {

void require_same_length(std::size_t a, std::size_t b) {
  if (a != b) throw InvalidArgument("length mismatch");
}

// Least-squares line fit over x = 0..n-1, accumulated incrementally.
struct LineFit {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;

  void add(double x, double y) {
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  LineFit minus(const LineFit& o) const {
    return {n - o.n, sx - o.sx, sy - o.sy, sxx - o.sxx, sxy - o.sxy, syy - o.syy};
  }
  double residual_sum() const {
    if (n < 3) return 0.0;
    const double cxx = sxx - sx * sx / n;
    const double cxy = sxy - sx * sy / n;
    const double cyy = syy - sy * sy / n;
    return std::max(0.0, cyy - cxy * cxy / cxx);
  }
  double slope() const { return (sxy - sx * sy / n) / (sxx - sx * sx / n); }
  double intercept() const { return (sy - slope() * sx) / n; }
};

}  // namespace

EvalReport eval_labels(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth) {
  require_same_length(predicted.size(), truth.size());
  EvalReport r;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] != 0, t = truth[i] != 0;
    if (p && t) ++r.tp;
    else if (p) ++r.fp;
    else if (t) ++r.fn;
    else ++r.tn;
  }
  if (r.tp + r.fp) r.precision = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
  if (r.tp + r.fn) r.recall = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
  if (r.precision + r.recall > 0)
    r.f_measure = 2 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

// Zero when either side has no variance.
double pearson_r(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size());
  if (a.size() < 2) throw InvalidArgument("correlation needs at least 2 values");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0 || sbb == 0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double spearman_rho(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size());
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson_r(ra, rb);
}

DepthStats depth_distribution_stats(std::size_t n) {
  if (n < 2) throw InvalidArgument("n must be at least 2");
  DepthStats s;
  // Smallest terms first for accuracy.
  for (std::size_t i = n; i >= 2; --i) {
    const double x = static_cast<double>(i);
    s.mean += 2.0 / x;
    s.variance += (2.0 - 4.0 / x) / x;
  }
  return s;
}

MonteCarloDepth monte_carlo_last_depth(std::size_t n, std::size_t trials, std::uint64_t seed,
                                       KeyDistribution keys) {
  if (n < 2) throw InvalidArgument("n must be at least 2");
  if (trials == 0) throw InvalidArgument("trials must be at least 1");

  Rng rng = make_rng(seed, 0x6d63);
  std::vector<double> key(n);
  std::vector<std::int32_t> left(n), right(n);
  std::vector<std::size_t> depths(trials);

  for (std::size_t t = 0; t < trials; ++t) {
    switch (keys) {
      case KeyDistribution::permutation:
        std::iota(key.begin(), key.end(), 1.0);
        for (std::size_t i = n - 1; i > 0; --i)
          std::swap(key[i], key[uniform_index(rng, i + 1)]);
        break;
      case KeyDistribution::uniform:
        for (double& k : key) k = uniform01(rng);
        break;
      case KeyDistribution::exponential:
        for (double& k : key) k = -std::log1p(-uniform01(rng));
        break;
    }
    std::fill(left.begin(), left.end(), -1);
    std::fill(right.begin(), right.end(), -1);
    std::size_t depth = 0;
    for (std::size_t i = 1; i < n; ++i) {
      std::int32_t node = 0;
      depth = 1;
      for (;;) {
        std::vector<std::int32_t>& side = key[i] < key[static_cast<std::size_t>(node)] ? left : right;
        const std::int32_t next = side[static_cast<std::size_t>(node)];
        if (next < 0) {
          side[static_cast<std::size_t>(node)] = static_cast<std::int32_t>(i);
          break;
        }
        node = next;
        ++depth;
      }
    }
    depths[t] = depth;
  }

  MonteCarloDepth out;
  const double m = static_cast<double>(trials);
  for (std::size_t d : depths) {
    if (d >= out.histogram.size()) out.histogram.resize(d + 1, 0);
    ++out.histogram[d];
    out.mean += static_cast<double>(d);
  }
  out.mean /= m;
  double m2 = 0, m3 = 0;
  for (std::size_t d : depths) {
    const double e = static_cast<double>(d) - out.mean;
    m2 += e * e;
    m3 += e * e * e;
  }
  m2 /= m;
  m3 /= m;
  out.variance = trials > 1 ? m2 * m / (m - 1) : 0.0;
  out.skewness = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
  return out;
}

SelfCheckReport self_validate(const Dataset& data, const ForestConfig& config,
                              std::uint64_t seed_a, std::uint64_t seed_b) {
  if (data.empty()) throw InvalidArgument("empty input");
  ForestConfig ca = config, cb = config;
  ca.seed = seed_a;
  cb.seed = seed_b;
  const DetectionRun a = run_detection(data, ca);
  const DetectionRun b = run_detection(data, cb);

  SelfCheckReport out;
  out.report = eval_labels(b.labels, a.labels);
  if (data.size() >= 2) {
    const std::vector<double> da(a.depths.begin(), a.depths.end());
    const std::vector<double> db(b.depths.begin(), b.depths.end());
    out.report.spearman_rho = spearman_rho(da, db);
    out.report.pearson_r = pearson_r(da, db);
  }
  out.control_anomalies = out.report.tp + out.report.fn;
  out.trial_anomalies = out.report.tp + out.report.fp;
  out.low_confidence = a.estimate.low_confidence || b.estimate.low_confidence;
  return out;
}

std::vector<std::vector<double>> contour_grid(const Forest& forest, const Dataset& data,
                                              std::size_t width, std::size_t height) {
  if (forest.dims() != 2 || data.dims() != 2) throw InvalidArgument("contours need 2-D data");
  if (data.empty()) throw InvalidArgument("empty input");
  if (width == 0 || height == 0) throw InvalidArgument("grid size must be at least 1x1");

  double lo[2], hi[2];
  for (std::size_t k = 0; k < 2; ++k) {
    lo[k] = hi[k] = data.point(0)[k];
    for (std::size_t i = 1; i < data.size(); ++i) {
      lo[k] = std::min(lo[k], data.point(i)[k]);
      hi[k] = std::max(hi[k], data.point(i)[k]);
    }
    const double margin = hi[k] > lo[k] ? 0.1 * (hi[k] - lo[k]) : 0.5;
    lo[k] -= margin;
    hi[k] += margin;
  }

  std::vector<Depth> observed = forest.cumulative_depths(data);
  std::sort(observed.begin(), observed.end());
  const double n = static_cast<double>(observed.size());
  const double cw = (hi[0] - lo[0]) / static_cast<double>(width);
  const double ch = (hi[1] - lo[1]) / static_cast<double>(height);

  std::vector<std::vector<double>> grid(height, std::vector<double>(width));
  for (std::size_t r = 0; r < height; ++r) {
    const double y = hi[1] - (static_cast<double>(r) + 0.5) * ch;
    for (std::size_t c = 0; c < width; ++c) {
      const double p[2] = {lo[0] + (static_cast<double>(c) + 0.5) * cw, y};
      const Depth d = forest.cumulative_depth(p);
      const auto below = std::lower_bound(observed.begin(), observed.end(), d) - observed.begin();
      grid[r][c] = static_cast<double>(below) / n;
    }
  }
  return grid;
}

std::size_t least_smooth_split(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 5) throw InvalidArgument("series too short: need at least 5 values");

  std::vector<LineFit> prefix(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i];
    prefix[i + 1].add(static_cast<double>(i), series[i]);
  }
  // Differences below this are rounding noise in the prefix sums.
  const double tolerance = 1e-9 * (prefix[n].residual_sum() + 1.0);

  std::size_t best = 2;
  double best_cost = 0;
  for (std::size_t i = 2; i + 3 <= n; ++i) {
    const double cost =
        prefix[i].residual_sum() + prefix[n].minus(prefix[i + 1]).residual_sum();
    if (i == 2 || cost < best_cost - tolerance) {
      best = i;
      best_cost = cost;
    }
  }
  return best;
}

double anomaly_outlier_overlap(std::span<const double> series,
                               std::span<const std::uint8_t> anomalous, std::size_t k) {
  require_same_length(series.size(), anomalous.size());
  if (series.size() < 2) throw InvalidArgument("series too short: need at least 2 values");
  if (k == 0 || k > series.size()) throw InvalidArgument("k must lie in [1, series length]");

  LineFit fit;
  for (std::size_t i = 0; i < series.size(); ++i) fit.add(static_cast<double>(i), series[i]);
  const double slope = fit.slope(), intercept = fit.intercept();

  std::vector<double> residual(series.size());
  for (std::size_t i = 0; i < series.size(); ++i)
    residual[i] = std::abs(series[i] - (intercept + slope * static_cast<double>(i)));
  std::vector<std::size_t> order(series.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return residual[a] > residual[b]; });

  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) hits += anomalous[order[i]] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(k);
}

}  // namespace anomspec

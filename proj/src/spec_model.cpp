#include "anomspec/spec_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "anomspec/errors.hpp"
#include "anomspec/io.hpp"

namespace anomspec {

namespace {

constexpr std::uint32_t kLeafBoxes = 4;

double centre(const HyperRect& r, std::size_t k) {
  const bool lo_finite = std::isfinite(r.lo[k]);
  const bool hi_finite = std::isfinite(r.hi[k]);
  if (lo_finite && hi_finite) return 0.5 * r.lo[k] + 0.5 * r.hi[k];
  if (lo_finite) return r.lo[k];
  if (hi_finite) return r.hi[k];
  return 0.0;
}

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename Int>
Int parse_int(std::string_view token, std::size_t line) {
  Int value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw FormatError("expected an integer, got '" + std::string(token) + "'", line);
  return value;
}

}  // namespace

BoxIndex::BoxIndex(const RegionSet& boxes) {
  if (boxes.empty()) return;
  const std::size_t dims = boxes.front().dims();
  order_.resize(boxes.size());
  std::vector<double> centres(boxes.size() * dims);
  for (std::uint32_t i = 0; i < boxes.size(); ++i) {
    order_[i] = i;
    for (std::size_t k = 0; k < dims; ++k) centres[i * dims + k] = centre(boxes[i], k);
  }
  nodes_.reserve(2 * boxes.size() / kLeafBoxes + 1);
  build(boxes, 0, static_cast<std::uint32_t>(boxes.size()), centres);
}

std::int32_t BoxIndex::build(const RegionSet& boxes, std::uint32_t first, std::uint32_t count,
                             std::vector<double>& centres) {
  const std::size_t dims = boxes.front().dims();
  Node node;
  node.lo.assign(dims, std::numeric_limits<double>::infinity());
  node.hi.assign(dims, -std::numeric_limits<double>::infinity());
  for (std::uint32_t i = first; i < first + count; ++i)
    for (std::size_t k = 0; k < dims; ++k) {
      node.lo[k] = std::min(node.lo[k], boxes[order_[i]].lo[k]);
      node.hi[k] = std::max(node.hi[k], boxes[order_[i]].hi[k]);
    }
  const auto self = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(std::move(node));
  if (count <= kLeafBoxes) {
    nodes_[self].first = first;
    nodes_[self].count = count;
    return self;
  }

  std::size_t axis = 0;
  double widest = -1.0;
  for (std::size_t k = 0; k < dims; ++k) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::uint32_t i = first; i < first + count; ++i) {
      lo = std::min(lo, centres[order_[i] * dims + k]);
      hi = std::max(hi, centres[order_[i] * dims + k]);
    }
    if (hi - lo > widest) {
      widest = hi - lo;
      axis = k;
    }
  }
  const std::uint32_t half = count / 2;
  std::nth_element(order_.begin() + first, order_.begin() + first + half,
                   order_.begin() + first + count, [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = centres[a * dims + axis], cb = centres[b * dims + axis];
                     return ca != cb ? ca < cb : a < b;
                   });
  const std::int32_t left = build(boxes, first, half, centres);
  const std::int32_t right = build(boxes, first + half, count - half, centres);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

std::int64_t BoxIndex::find(const RegionSet& boxes, std::span<const double> p) const {
  if (nodes_.empty()) return -1;
  std::int32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& n = nodes_[stack[--top]];
    bool inside = true;
    for (std::size_t k = 0; k < p.size() && inside; ++k)
      inside = n.lo[k] <= p[k] && p[k] < n.hi[k];
    if (!inside) continue;
    if (n.left < 0) {
      for (std::uint32_t i = n.first; i < n.first + n.count; ++i)
        if (boxes[order_[i]].contains(p)) return order_[i];
      continue;
    }
    stack[top++] = n.right;
    stack[top++] = n.left;
  }
  return -1;
}

AnomalySpec::AnomalySpec(std::size_t dims, Depth cutoff, RegionSet regions, Provenance provenance)
    : dims_(dims), cutoff_(cutoff), regions_(std::move(regions)), provenance_(std::move(provenance)) {
  if (dims_ == 0) throw InvalidArgument("specification needs at least one dimension");
  for (const HyperRect& r : regions_) {
    if (r.dims() != dims_ || r.hi.size() != dims_)
      throw InvalidArgument("region dimensionality does not match specification");
    for (std::size_t k = 0; k < dims_; ++k)
      if (!(r.lo[k] < r.hi[k])) throw InvalidArgument("region is empty on some dimension");
  }
  if (dims_ == 1) {
    std::vector<Range> ranges;
    ranges.reserve(regions_.size());
    for (const HyperRect& r : regions_) ranges.push_back({r.lo[0], r.hi[0], r.depth});
    std::sort(ranges.begin(), ranges.end(),
              [](const Range& a, const Range& b) { return a.from < b.from; });
    for (std::size_t i = 1; i < ranges.size(); ++i)
      if (ranges[i].from < ranges[i - 1].to) throw InvalidArgument("regions overlap");
    ranges_ = RangeSearchTree(ranges);
  } else {
    boxes_ = BoxIndex(regions_);
  }
}

bool AnomalySpec::classify(std::span<const double> p) const {
  if (p.size() != dims_)
    throw InvalidArgument("point has " + std::to_string(p.size()) +
                          " coordinates, specification expects " + std::to_string(dims_));
  if (dims_ == 1) return ranges_.contains(p[0]);
  return boxes_.find(regions_, p) >= 0;
}

std::vector<std::uint8_t> AnomalySpec::classify_all(const Dataset& data) const {
  if (data.dims() != dims_)
    throw InvalidArgument("dataset has " + std::to_string(data.dims()) +
                          " dimensions, specification expects " + std::to_string(dims_));
  std::vector<std::uint8_t> out(data.size());
  if (dims_ == 1) {
    const auto& v = data.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = ranges_.contains(v[i]) ? 1 : 0;
  } else {
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = boxes_.find(regions_, data.point(i)) >= 0 ? 1 : 0;
  }
  return out;
}

AnomalySpec compile_spec(const Forest& forest, Depth cutoff, const CompileOptions& options) {
  const std::size_t dims = forest.dims();
  if (dims > 3 && !options.force)
    throw IntractableDimensionality("intractable dimensionality: " + std::to_string(dims) +
                                    " dimensions (more than 3 needs force)");

  const Forest pruned =
      options.prune ? prune_forest(forest, std::max(options.prune_bound, cutoff)) : Forest{};
  const Forest& source = options.prune ? pruned : forest;

  RegionSet regions;
  if (dims == 1) {
    const AnomalyRangeSet anomalies = extract_anomalous_ranges(forest_ranges(source), cutoff);
    for (const Range& r : anomalies.ranges) regions.push_back({{r.from}, {r.to}, r.depth});
  } else {
    PixelGrid grid = build_pixel_grid(source, options.min_cell);
    if (grid.cell_count() <= options.dense_cell_limit) {
      grid = compute_cell_depths(std::move(grid), source);
      regions = consolidate_rects(extract_anomalous_cells(grid, cutoff));
    } else {
      regions = extract_anomalous_boxes(grid, source, cutoff);
    }
  }

  Provenance provenance;
  provenance.seed = forest.config().seed;
  provenance.tree_count = forest.tree_count();
  provenance.sample_size = forest.config().sample_size;
  provenance.source_fingerprint = options.source_fingerprint;
  provenance.params = options.params;
  return AnomalySpec(dims, cutoff, std::move(regions), std::move(provenance));
}

std::string serialize_spec(const AnomalySpec& spec) {
  std::ostringstream out;
  const Provenance& p = spec.provenance();
  auto check_token = [](const std::string& t, bool allow_empty) {
    if (t.empty() && !allow_empty) throw InvalidArgument("empty provenance token");
    if (t.find_first_of(" \t\r\n#") != std::string::npos)
      throw InvalidArgument("provenance token '" + t + "' contains whitespace or '#'");
  };
  check_token(p.source_fingerprint, true);
  for (const auto& [key, value] : p.params) {
    check_token(key, false);
    check_token(value, false);
  }
  out << "# anomalous regions: lo hi per dimension, then the shallowest cumulative depth\n";
  out << "dims " << spec.dims() << '\n';
  out << "cutoff " << spec.cutoff_depth() << '\n';
  out << "seed " << p.seed << '\n';
  out << "trees " << p.tree_count << '\n';
  out << "sample " << p.sample_size << '\n';
  if (!p.source_fingerprint.empty()) out << "source " << p.source_fingerprint << '\n';
  for (const auto& [key, value] : p.params) out << "param " << key << ' ' << value << '\n';
  out << "regions " << spec.regions().size() << '\n';
  for (const HyperRect& r : spec.regions()) {
    for (std::size_t k = 0; k < r.dims(); ++k)
      out << format_double(r.lo[k]) << ' ' << format_double(r.hi[k]) << ' ';
    out << r.depth << '\n';
  }
  return out.str();
}

AnomalySpec parse_spec(std::string_view text) {
  std::size_t dims = 0;
  bool have_dims = false, have_cutoff = false;
  Depth cutoff = 0;
  Provenance provenance;
  RegionSet regions;
  std::size_t declared_regions = 0;
  bool have_declared = false;
  std::vector<std::size_t> implicit_depth;  // regions that take the cutoff as depth

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tokens = split_tokens(line);
    if (tokens.empty()) continue;
    const std::string_view key = tokens[0];

    auto expect_args = [&](std::size_t n) {
      if (tokens.size() != n + 1)
        throw FormatError("'" + std::string(key) + "' expects " + std::to_string(n) + " value(s)",
                          line_no);
    };

    if (key == "dims") {
      expect_args(1);
      dims = parse_int<std::size_t>(tokens[1], line_no);
      if (dims == 0) throw FormatError("dims must be at least 1", line_no);
      have_dims = true;
    } else if (key == "cutoff") {
      expect_args(1);
      cutoff = parse_int<Depth>(tokens[1], line_no);
      have_cutoff = true;
    } else if (key == "seed") {
      expect_args(1);
      provenance.seed = parse_int<std::uint64_t>(tokens[1], line_no);
    } else if (key == "trees") {
      expect_args(1);
      provenance.tree_count = parse_int<std::size_t>(tokens[1], line_no);
    } else if (key == "sample") {
      expect_args(1);
      provenance.sample_size = parse_int<std::size_t>(tokens[1], line_no);
    } else if (key == "source") {
      expect_args(1);
      provenance.source_fingerprint = std::string(tokens[1]);
    } else if (key == "param") {
      expect_args(2);
      provenance.params.emplace_back(std::string(tokens[1]), std::string(tokens[2]));
    } else if (key == "regions") {
      expect_args(1);
      declared_regions = parse_int<std::size_t>(tokens[1], line_no);
      have_declared = true;
    } else {
      if (!have_dims) throw FormatError("region before 'dims'", line_no);
      if (tokens.size() != 2 * dims && tokens.size() != 2 * dims + 1)
        throw FormatError("region needs " + std::to_string(2 * dims) + " bounds", line_no);
      HyperRect r;
      for (std::size_t k = 0; k < dims; ++k) {
        r.lo.push_back(parse_double(tokens[2 * k], line_no));
        r.hi.push_back(parse_double(tokens[2 * k + 1], line_no));
        if (!(r.lo[k] < r.hi[k])) throw FormatError("region bound lo >= hi", line_no);
      }
      if (tokens.size() == 2 * dims + 1) r.depth = parse_int<Depth>(tokens.back(), line_no);
      else implicit_depth.push_back(regions.size());
      regions.push_back(std::move(r));
    }
  }
  if (!have_dims) throw FormatError("missing 'dims'");
  if (!have_cutoff) throw FormatError("missing 'cutoff'");
  for (std::size_t i : implicit_depth) regions[i].depth = cutoff;
  if (have_declared && declared_regions != regions.size())
    throw FormatError("declared " + std::to_string(declared_regions) + " regions, found " +
                      std::to_string(regions.size()));
  try {
    return AnomalySpec(dims, cutoff, std::move(regions), std::move(provenance));
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
}

}  // namespace anomspec

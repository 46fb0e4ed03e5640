#include "anomspec/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "anomspec/errors.hpp"

namespace anomspec {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits text into lines, numbering from 1 and skipping blank ones.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    while (pos_ < text_.size()) {
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      line = trim(text_.substr(pos_, end - pos_));
      pos_ = end + 1;
      ++number_;
      if (!line.empty()) return true;
    }
    return false;
  }
  std::size_t number() const { return number_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t number_ = 0;
};

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t at = s.find(sep, start);
    out.push_back(trim(s.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start)));
    if (at == std::string_view::npos) return out;
    start = at + 1;
  }
}

template <typename Int>
Int to_int(std::string_view token, std::size_t line) {
  Int value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw FormatError("expected an integer, got '" + std::string(token) + "'", line);
  return value;
}

std::uint8_t to_label(std::string_view token, std::size_t line) {
  if (token == "0") return 0;
  if (token == "1") return 1;
  throw FormatError("label must be 0 or 1, got '" + std::string(token) + "'", line);
}

std::size_t parse_dims_header(std::string_view line, std::size_t number) {
  if (line.substr(0, 5) != "dims=") throw FormatError("expected header 'dims=<d>'", number);
  const auto d = to_int<std::size_t>(trim(line.substr(5)), number);
  if (d == 0) throw FormatError("dims must be at least 1", number);
  return d;
}

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("cannot format double");
  return std::string(buf, ptr);
}

double parse_double(std::string_view token, std::size_t line) {
  if (token == "inf" || token == "+inf") return std::numeric_limits<double>::infinity();
  if (token == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || std::isnan(value))
    throw FormatError("expected a number, got '" + std::string(token) + "'", line);
  return value;
}

std::string write_csv(const Dataset& data, std::span<const std::uint8_t> labels) {
  if (!labels.empty() && labels.size() != data.size())
    throw InvalidArgument("label count does not match point count");
  std::string out = "dims=" + std::to_string(data.dims()) + "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = data.point(i);
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (k) out += ',';
      out += format_double(p[k]);
    }
    if (!labels.empty()) {
      out += ',';
      out += labels[i] ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

LabeledDataset parse_csv(std::string_view text) {
  LineReader reader(text);
  std::string_view line;
  if (!reader.next(line)) throw FormatError("empty input");
  const std::size_t dims = parse_dims_header(line, reader.number());

  LabeledDataset out;
  out.points = Dataset(dims);
  std::vector<double> row(dims);
  bool first = true, labelled = false;
  while (reader.next(line)) {
    const auto fields = split(line, ',');
    if (first) {
      labelled = fields.size() == dims + 1;
      first = false;
    }
    if (fields.size() != dims + (labelled ? 1 : 0))
      throw FormatError("expected " + std::to_string(dims + (labelled ? 1 : 0)) + " fields, got " +
                            std::to_string(fields.size()),
                        reader.number());
    for (std::size_t k = 0; k < dims; ++k) {
      row[k] = parse_double(fields[k], reader.number());
      if (!std::isfinite(row[k])) throw FormatError("coordinate is not finite", reader.number());
    }
    out.points.push_back(row);
    if (labelled) out.labels.push_back(to_label(fields[dims], reader.number()));
  }
  return out;
}

std::string write_labels(std::span<const std::uint8_t> labels) {
  std::string out = "label\n";
  out.reserve(out.size() + 2 * labels.size());
  for (std::uint8_t l : labels) {
    out += l ? '1' : '0';
    out += '\n';
  }
  return out;
}

std::vector<std::uint8_t> parse_labels(std::string_view text) {
  LineReader reader(text);
  std::string_view line;
  if (!reader.next(line)) throw FormatError("empty input");
  if (line == "label") {
    std::vector<std::uint8_t> out;
    while (reader.next(line)) out.push_back(to_label(line, reader.number()));
    return out;
  }
  if (line.substr(0, 5) == "dims=") {
    LabeledDataset data = parse_csv(text);
    if (data.labels.size() != data.points.size())
      throw FormatError("dataset has no label column");
    return data.labels;
  }
  throw FormatError("expected header 'label' or 'dims=<d>'", reader.number());
}

std::string write_depths(std::span<const Depth> depths) {
  std::string out = "depth\n";
  for (Depth d : depths) {
    out += std::to_string(d);
    out += '\n';
  }
  return out;
}

std::string serialize_forest(const Forest& forest) {
  std::ostringstream out;
  const ForestConfig& c = forest.config();
  out << "anomspec-forest 1\n";
  out << "dims " << forest.dims() << '\n';
  out << "trees " << forest.tree_count() << '\n';
  out << "sample " << c.sample_size << '\n';
  out << "seed " << c.seed << '\n';
  out << "integer_keys " << (c.integer_key_mode ? 1 : 0) << '\n';
  for (const Tree& t : forest.trees()) {
    out << "tree " << t.nodes().size() << '\n';
    for (const Tree::Node& n : t.nodes()) {
      if (n.is_leaf())
        out << "L " << n.depth << '\n';
      else
        out << "I " << n.dim << ' ' << format_double(n.split) << '\n';
    }
  }
  return out.str();
}

Forest parse_forest(std::string_view text) {
  LineReader reader(text);
  std::string_view line;
  auto next = [&]() -> std::vector<std::string_view> {
    if (!reader.next(line)) throw FormatError("unexpected end of model", reader.number());
    auto tokens = split(line, ' ');
    std::erase_if(tokens, [](std::string_view t) { return t.empty(); });
    return tokens;
  };
  auto header = [&](std::string_view key) {
    const auto tokens = next();
    if (tokens.size() != 2 || tokens[0] != key)
      throw FormatError("expected '" + std::string(key) + " <value>'", reader.number());
    return tokens[1];
  };

  if (header("anomspec-forest") != "1") throw FormatError("unsupported model version", reader.number());
  ForestConfig config;
  const auto dims = to_int<std::size_t>(header("dims"), reader.number());
  if (dims == 0) throw FormatError("dims must be at least 1", reader.number());
  config.tree_count = to_int<std::size_t>(header("trees"), reader.number());
  config.sample_size = to_int<std::size_t>(header("sample"), reader.number());
  config.seed = to_int<std::uint64_t>(header("seed"), reader.number());
  config.integer_key_mode = to_int<int>(header("integer_keys"), reader.number()) != 0;
  if (config.tree_count == 0) throw FormatError("model has no trees", reader.number());

  std::vector<Tree> trees;
  trees.reserve(config.tree_count);
  for (std::size_t t = 0; t < config.tree_count; ++t) {
    const auto count = to_int<std::size_t>(header("tree"), reader.number());
    std::vector<Tree::Node> nodes;
    nodes.reserve(count);
    // Preorder: the right child of an internal node starts where its left subtree ends.
    auto read_node = [&](auto&& self, Depth depth) -> void {
      if (nodes.size() >= count) throw FormatError("tree has more nodes than declared", reader.number());
      const auto tokens = next();
      if (tokens.size() == 2 && tokens[0] == "L") {
        nodes.push_back({-1, 0, 0.0, to_int<Depth>(tokens[1], reader.number())});
        return;
      }
      if (tokens.size() != 3 || tokens[0] != "I")
        throw FormatError("expected 'I <dim> <split>' or 'L <depth>'", reader.number());
      const auto dim = to_int<std::int32_t>(tokens[1], reader.number());
      if (dim < 0 || static_cast<std::size_t>(dim) >= dims)
        throw FormatError("split dimension out of range", reader.number());
      const double split = parse_double(tokens[2], reader.number());
      if (!std::isfinite(split)) throw FormatError("split key is not finite", reader.number());
      const std::size_t self_index = nodes.size();
      nodes.push_back({dim, 0, split, depth});
      self(self, depth + 1);
      nodes[self_index].right = static_cast<std::uint32_t>(nodes.size());
      self(self, depth + 1);
    };
    read_node(read_node, 0);
    if (nodes.size() != count) throw FormatError("tree has fewer nodes than declared", reader.number());
    trees.emplace_back(dims, std::move(nodes));
  }
  if (reader.next(line)) throw FormatError("trailing content after last tree", reader.number());
  return Forest(std::move(trees), config);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw InvalidArgument("write failed for " + path.string());
}

}  // namespace anomspec

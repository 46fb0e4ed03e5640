#include "anomspec/datagen.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include "anomspec/errors.hpp"
#include "anomspec/io.hpp"
#include "anomspec/rng.hpp"

namespace anomspec {

namespace {

constexpr double kDiagonal = std::numbers::sqrt2 / 2.0;  // cos 45 = sin 45

std::size_t dims_of(int id) { return id <= 2 ? 1 : 2; }

double signed_magnitude(Rng& rng, double lo, double hi) {
  const double m = uniform(rng, lo, hi);
  return bernoulli(rng, 0.5) ? -m : m;
}

double radius(std::span<const double> p) { return std::hypot(p[0], p[1]); }

std::array<double, 2> polar(Rng& rng, double r_lo, double r_hi) {
  // Uniform in area: r^2 is uniform.
  const double r = std::sqrt(uniform(rng, r_lo * r_lo, r_hi * r_hi));
  const double t = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  return {r * std::cos(t), r * std::sin(t)};
}

void draw(int id, bool anomalous, Rng& rng, double* p) {
  switch (id) {
    case 1:
      p[0] = anomalous ? uniform(rng, -1.5, 1.5) : signed_magnitude(rng, 0.5, 1.0);
      return;
    case 2:
      p[0] = anomalous ? signed_magnitude(rng, 2.0, 100.0) : signed_magnitude(rng, 0.5, 1.0);
      return;
    case 3:
    case 5: {
      const double r = anomalous ? 2.0 : 1.0;
      p[0] = uniform(rng, -r, r);
      p[1] = uniform(rng, -r, r);
      return;
    }
    case 4: {
      draw(3, anomalous, rng, p);
      const double x = p[0], y = p[1];
      p[0] = kDiagonal * (x - y);
      p[1] = kDiagonal * (x + y);
      return;
    }
    case 6:
    case 7:
    case 8: {
      const double lo = id == 6 ? 0.0 : 0.5;
      const double sign = bernoulli(rng, 0.5) ? -1.0 : 1.0;
      p[0] = sign * uniform(rng, lo, 2.0);
      p[1] = sign * uniform(rng, lo, 2.0);
      if (anomalous) p[bernoulli(rng, 0.5) ? 0 : 1] *= -1.0;
      if (id == 8) {
        p[0] = 1.0 / p[0];
        p[1] = 1.0 / p[1];
      }
      return;
    }
    case 9: {
      std::array<double, 2> q;
      if (!anomalous)
        q = polar(rng, 1.0, 2.0);
      else if (bernoulli(rng, 0.5))
        q = polar(rng, 0.0, 1.0);
      else
        q = polar(rng, 2.0, 2.5);
      p[0] = q[0];
      p[1] = q[1];
      return;
    }
    default:
      throw InvalidArgument("unknown experiment id " + std::to_string(id));
  }
}

}  // namespace

bool is_anomalous_by_rule(int id, std::span<const double> p) {
  if (id < 1 || id > 9) throw InvalidArgument("unknown experiment id " + std::to_string(id));
  if (p.size() != dims_of(id)) throw InvalidArgument("point dimension does not match experiment");
  switch (id) {
    case 1:
    case 2:
      return !(std::abs(p[0]) > 0.5 && std::abs(p[0]) < 1.0);
    case 3:
    case 5:
      return std::max(std::abs(p[0]), std::abs(p[1])) > 1.0;
    case 4: {
      const double x = kDiagonal * (p[0] + p[1]);
      const double y = kDiagonal * (p[1] - p[0]);
      return std::max(std::abs(x), std::abs(y)) > 1.0;
    }
    case 6:
    case 7:
    case 8:
      return (p[0] < 0.0) != (p[1] < 0.0);
    default: {
      const double r = radius(p);
      return r < 1.0 || r > 2.0;
    }
  }
}

LabeledDataset generate_experiment(int id, std::size_t n, double anomaly_rate, std::uint64_t seed) {
  if (id < 1 || id > 9) throw InvalidArgument("unknown experiment id " + std::to_string(id));
  if (n == 0) throw InvalidArgument("n must be at least 1");
  if (!(anomaly_rate >= 0.0 && anomaly_rate < 1.0))
    throw InvalidArgument("anomaly rate must lie in [0, 1)");

  Rng rng = make_rng(seed, static_cast<std::uint64_t>(id));
  const std::size_t dims = dims_of(id);
  LabeledDataset out;
  out.points = Dataset(dims);
  out.points.reserve(n);
  out.labels.reserve(n);
  out.generator_id = id;
  out.seed = seed;

  std::array<double, 2> p{};
  const std::span<const double> view(p.data(), dims);
  for (std::size_t i = 0; i < n; ++i) {
    const bool anomalous = bernoulli(rng, anomaly_rate);
    // Redraw until the point lands strictly inside its class: interval
    // endpoints and rounding must not contradict the label.
    do draw(id, anomalous, rng, p.data());
    while (is_anomalous_by_rule(id, view) != anomalous);
    out.points.push_back(view);
    out.labels.push_back(anomalous ? 1 : 0);
  }
  return out;
}

Dataset rotate(const Dataset& data, std::span<const PlaneRotation> rotations) {
  for (const PlaneRotation& r : rotations) {
    if (r.axis_a >= data.dims() || r.axis_b >= data.dims() || r.axis_a == r.axis_b)
      throw InvalidArgument("rotation axes must be two distinct dimensions of the data");
    if (!std::isfinite(r.degrees)) throw InvalidArgument("rotation angle is not finite");
  }
  Dataset out = data;
  for (const PlaneRotation& r : rotations) {
    const double rad = r.degrees * std::numbers::pi / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    for (std::size_t i = 0; i < out.size(); ++i) {
      auto p = out.point(i);
      const double a = p[r.axis_a], b = p[r.axis_b];
      p[r.axis_a] = c * a - s * b;
      p[r.axis_b] = s * a + c * b;
    }
  }
  return out;
}

LabeledDataset parse_ppm(std::string_view bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        return;
      }
    }
  };
  auto next_uint = [&](const char* what) -> std::size_t {
    skip_space();
    std::size_t start = pos, value = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
      if (value > (1u << 30)) throw FormatError(std::string("ppm ") + what + " too large");
      ++pos;
    }
    if (pos == start) throw FormatError(std::string("ppm: expected ") + what);
    return value;
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '3' && bytes[1] != '6'))
    throw FormatError("ppm: magic must be P3 or P6");
  const bool binary = bytes[1] == '6';
  pos = 2;
  const std::size_t width = next_uint("width");
  const std::size_t height = next_uint("height");
  const std::size_t maxval = next_uint("maxval");
  if (width == 0 || height == 0) throw FormatError("ppm: empty image");
  if (maxval == 0 || maxval > 255) throw FormatError("ppm: only 8-bit images are supported");

  const std::size_t pixels = width * height;
  LabeledDataset out;
  out.points = Dataset(3);
  out.points.reserve(pixels);
  std::array<double, 3> rgb{};
  if (binary) {
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
      throw FormatError("ppm: missing separator before pixel data");
    ++pos;
    if (bytes.size() - pos < pixels * 3) throw FormatError("ppm: truncated pixel data");
    for (std::size_t i = 0; i < pixels; ++i) {
      for (std::size_t c = 0; c < 3; ++c) {
        const auto v = static_cast<unsigned char>(bytes[pos++]);
        if (v > maxval) throw FormatError("ppm: sample exceeds maxval");
        rgb[c] = v;
      }
      out.points.push_back(rgb);
    }
  } else {
    for (std::size_t i = 0; i < pixels; ++i) {
      for (std::size_t c = 0; c < 3; ++c) {
        skip_space();
        if (pos >= bytes.size()) throw FormatError("ppm: truncated pixel data");
        const std::size_t v = next_uint("sample");
        if (v > maxval) throw FormatError("ppm: sample exceeds maxval");
        rgb[c] = static_cast<double>(v);
      }
      out.points.push_back(rgb);
    }
  }
  return out;
}

LabeledDataset ingest_ppm(const std::filesystem::path& path) { return parse_ppm(read_file(path)); }

void write_ppm(const std::filesystem::path& path, std::size_t width, std::size_t height,
               std::span<const std::uint8_t> rgb) {
  if (width == 0 || height == 0 || rgb.size() != width * height * 3)
    throw InvalidArgument("pixel buffer does not match image size");
  std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(rgb.data()), rgb.size());
  write_file(path, out);
}

}  // namespace anomspec

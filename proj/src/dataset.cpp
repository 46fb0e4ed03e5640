#include "anomspec/dataset.hpp"

#include <cmath>
#include <cstring>

#include "anomspec/errors.hpp"

namespace anomspec {

Dataset::Dataset(std::size_t dims) : dims_(dims) {
  if (dims == 0) throw InvalidArgument("dataset dimensionality must be at least 1");
}

Dataset::Dataset(std::size_t dims, std::vector<double> values)
    : dims_(dims), values_(std::move(values)) {
  if (dims == 0) throw InvalidArgument("dataset dimensionality must be at least 1");
  if (values_.size() % dims != 0)
    throw InvalidArgument("value count is not a multiple of the dimensionality");
  for (double v : values_)
    if (!std::isfinite(v)) throw InvalidArgument("non-finite coordinate");
}

void Dataset::push_back(std::span<const double> p) {
  if (p.size() != dims_)
    throw InvalidArgument("point has " + std::to_string(p.size()) + " coordinates, expected " +
                          std::to_string(dims_));
  for (double v : p)
    if (!std::isfinite(v)) throw InvalidArgument("non-finite coordinate");
  values_.insert(values_.end(), p.begin(), p.end());
}

Dataset Dataset::select(std::span<const std::size_t> rows) const {
  Dataset out(dims_);
  out.values_.reserve(rows.size() * dims_);
  for (std::size_t r : rows) {
    auto p = point(r);
    out.values_.insert(out.values_.end(), p.begin(), p.end());
  }
  return out;
}

std::uint64_t fingerprint(const Dataset& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* bytes, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t dims = data.dims();
  mix(&dims, sizeof dims);
  mix(data.values().data(), data.values().size() * sizeof(double));
  return h;
}

}  // namespace anomspec

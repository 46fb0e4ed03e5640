#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "anomspec/dataset.hpp"

namespace anomspec {

struct LabeledDataset {
  Dataset points;
  std::vector<std::uint8_t> labels;  // 1 = injected anomaly; empty when unlabeled
  int generator_id = 0;
  std::uint64_t seed = 0;
};

/// Synthetic experiments 1..9. Each point is independently anomalous with
/// probability anomaly_rate.
///   1  normal U(-1,-0.5) or U(0.5,1); anomalies uniform on [-1.5,1.5] outside those
///   2  normal U(+-(0.5,1)); anomalies U(+-(2,100))
///   3  normal U([-1,1]^2); anomalies uniform on [-2,2]^2 outside [-1,1]^2
///   4  experiment 3 rotated by 45 degrees
///   5  experiment 3 (regions are unioned over repeated runs by the caller)
///   6  normal: both coordinates share a sign, magnitudes U(0,2); anomalies: one sign flipped
///   7  experiment 6 with magnitudes U(0.5,2)
///   8  experiment 7 with every coordinate v replaced by 1/v
///   9  normal: uniform on the annulus 1 <= r <= 2; anomalies: half inside r < 1,
///      half on 2 < r < 2.5
/// Throws InvalidArgument for an unknown id, n == 0, or a rate outside [0, 1).
LabeledDataset generate_experiment(int id, std::size_t n, double anomaly_rate, std::uint64_t seed);

/// Ground-truth anomaly predicate of experiment id.
bool is_anomalous_by_rule(int id, std::span<const double> p);

/// Rotation in the plane of two axes.
struct PlaneRotation {
  std::size_t axis_a;
  std::size_t axis_b;
  double degrees;
};

/// Applies the plane rotations in order to every point.
Dataset rotate(const Dataset& data, std::span<const PlaneRotation> rotations);

/// 8-bit P3 or P6 image as {R,G,B} points in row-major order, unlabeled.
LabeledDataset parse_ppm(std::string_view bytes);
LabeledDataset ingest_ppm(const std::filesystem::path& path);
/// Writes binary P6.
void write_ppm(const std::filesystem::path& path, std::size_t width, std::size_t height,
               std::span<const std::uint8_t> rgb);

}  // namespace anomspec

#pragma once

// Datasets of unit-norm inputs with one-hot or scalar labels, synthetic
// generators and the MNIST IDX reader.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "rlab/mathcore.hpp"

namespace rlab {

struct Dataset {
  Matrix inputs;  // n x d
  Matrix labels;  // n x o
  bool unit_norm = true;

  std::size_t n() const noexcept { return inputs.rows(); }
  std::size_t d() const noexcept { return inputs.cols(); }
  std::size_t o() const noexcept { return labels.cols(); }

  std::span<const double> x(std::size_t i) const { return inputs.row(i); }
  std::span<const double> y(std::size_t i) const { return labels.row(i); }

  /// First k points.
  Dataset subset(std::size_t k) const;
  /// Points [begin, begin + count).
  Dataset slice(std::size_t begin, std::size_t count) const;
  /// Points at the given indices, in order.
  Dataset select(std::span<const std::size_t> idx) const;

  /// Throws invalid-input if shapes, finiteness or (when unit_norm) the
  /// 1e-10 norm tolerance are violated.
  void validate() const;
};

enum class SyntheticTask { TwoClassHalfspace, ScalarRegression };

SyntheticTask parse_task(std::string_view name);

/// Inputs uniform on the unit sphere of R^d. Halfspace labels are
/// sign(v . x) in {-1, +1} for a random v; regression labels are uniform in
/// [0.5, 1.5]. Both have o = 1.
Dataset generate_sphere_dataset(std::size_t n, std::size_t d, SyntheticTask task, RngStream& rng);

/// Divides every row by its l2 norm; zero rows raise invalid-input.
void normalize_rows(Matrix& m);

/// Reads an IDX image file (magic 0x803) and label file (magic 0x801).
/// Pixels are scaled to [0, 1]; unless raw_scale, each image is then
/// projected onto the unit sphere. Labels become one-hot rows with o = 10.
Dataset load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                       bool raw_scale = false);

/// Inverse of the reader, for fixtures: images are n x (rows*cols) bytes.
void write_idx_images(const std::filesystem::path& path, std::size_t rows, std::size_t cols,
                      std::span<const std::uint8_t> pixels);
void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels);

/// Fraction of rows whose prediction matches: argmax for o > 1, sign for o = 1.
double accuracy(const Matrix& outputs, const Matrix& labels);

}  // namespace rlab

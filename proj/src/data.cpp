#include "rlab/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "rlab/error.hpp"

namespace rlab {

Dataset Dataset::slice(std::size_t begin, std::size_t count) const {
  require(begin <= n() && count <= n() - begin, ErrorKind::InvalidParameter,
          "slice [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
              ") exceeds dataset of " + std::to_string(n()));
  Dataset out;
  out.unit_norm = unit_norm;
  out.inputs = Matrix(count, d());
  out.labels = Matrix(count, o());
  std::copy_n(inputs.data() + begin * d(), count * d(), out.inputs.data());
  std::copy_n(labels.data() + begin * o(), count * o(), out.labels.data());
  return out;
}

Dataset Dataset::subset(std::size_t k) const { return slice(0, k); }

Dataset Dataset::select(std::span<const std::size_t> idx) const {
  Dataset out;
  out.unit_norm = unit_norm;
  out.inputs = Matrix(idx.size(), d());
  out.labels = Matrix(idx.size(), o());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    require(idx[r] < n(), ErrorKind::InvalidParameter, "index out of range");
    std::copy_n(inputs.row(idx[r]).begin(), d(), out.inputs.row(r).begin());
    std::copy_n(labels.row(idx[r]).begin(), o(), out.labels.row(r).begin());
  }
  return out;
}

void Dataset::validate() const {
  require(inputs.rows() == labels.rows(), ErrorKind::InvalidInput, "inputs and labels differ in count");
  require(inputs.all_finite() && labels.all_finite(), ErrorKind::InvalidInput, "dataset has non-finite values");
  if (!unit_norm) return;
  for (std::size_t i = 0; i < n(); ++i)
    require(std::abs(norm2(x(i)) - 1.0) <= 1e-10, ErrorKind::InvalidInput,
            "input " + std::to_string(i) + " is not unit norm");
}

SyntheticTask parse_task(std::string_view name) {
  if (name == "two-class-halfspace" || name == "halfspace") return SyntheticTask::TwoClassHalfspace;
  if (name == "scalar-regression" || name == "regression") return SyntheticTask::ScalarRegression;
  fail(ErrorKind::InvalidParameter, "unknown synthetic task '" + std::string(name) + "'");
}

void normalize_rows(Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    const double nrm = norm2(r);
    require(nrm > 0.0, ErrorKind::InvalidInput, "row " + std::to_string(i) + " has zero norm");
    // Rows already on the sphere (to rounding) are left bit-identical, so
    // normalizing twice is a no-op.
    if (std::abs(nrm - 1.0) <= 8.0 * std::numeric_limits<double>::epsilon()) continue;
    for (double& v : r) v /= nrm;
  }
}

Dataset generate_sphere_dataset(std::size_t n, std::size_t d, SyntheticTask task, RngStream& rng) {
  require(n >= 1, ErrorKind::InvalidParameter, "dataset needs n >= 1");
  require(d >= 2, ErrorKind::InvalidParameter, "dataset needs d >= 2");
  RngStream xs = rng.substream(1);
  RngStream ys = rng.substream(2);
  Dataset ds;
  ds.inputs = sample_gaussian_matrix(n, d, 1.0, xs);
  for (std::size_t i = 0; i < n; ++i)
    while (norm2(ds.inputs.row(i)) == 0.0)
      for (double& v : ds.inputs.row(i)) v = xs.normal();
  normalize_rows(ds.inputs);
  ds.labels = Matrix(n, 1);
  if (task == SyntheticTask::TwoClassHalfspace) {
    Vector v(d);
    for (double& c : v) c = ys.normal();
    for (std::size_t i = 0; i < n; ++i) ds.labels(i, 0) = dot(v, ds.x(i)) >= 0.0 ? 1.0 : -1.0;
  } else {
    for (std::size_t i = 0; i < n; ++i) ds.labels(i, 0) = 0.5 + ys.uniform();
  }
  return ds;
}

// ---------------------------------------------------------------------------
// IDX
// ---------------------------------------------------------------------------

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::InvalidInput, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t off, const std::string& name) {
  require(b.size() >= off + 4, ErrorKind::FormatError, name + ": truncated header");
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

void put_be32(std::ofstream& f, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                     static_cast<char>(v)};
  f.write(b, 4);
}

}  // namespace

Dataset load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                       bool raw_scale) {
  const auto img = read_file(images);
  const auto lab = read_file(labels);
  const std::string in = images.filename().string();
  const std::string ln = labels.filename().string();

  const std::uint32_t im = be32(img, 0, in);
  require(im == 0x00000803u, ErrorKind::FormatError, in + ": bad magic for an IDX image file");
  const std::size_t n = be32(img, 4, in);
  const std::size_t rows = be32(img, 8, in);
  const std::size_t cols = be32(img, 12, in);
  const std::size_t d = rows * cols;
  require(d > 0, ErrorKind::FormatError, in + ": empty image dimensions");
  require(img.size() - 16 == n * d, ErrorKind::FormatError,
          in + ": payload has " + std::to_string(img.size() - 16) + " bytes, header promises " +
              std::to_string(n * d));

  const std::uint32_t lm = be32(lab, 0, ln);
  require(lm == 0x00000801u, ErrorKind::FormatError, ln + ": bad magic for an IDX label file");
  const std::size_t nl = be32(lab, 4, ln);
  require(lab.size() - 8 == nl, ErrorKind::FormatError, ln + ": payload length does not match header");
  require(nl == n, ErrorKind::FormatError,
          "image file has " + std::to_string(n) + " items, label file " + std::to_string(nl));

  Dataset ds;
  ds.unit_norm = !raw_scale;
  ds.inputs = Matrix(n, d);
  ds.labels = Matrix(n, 10);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = ds.inputs.row(i);
    bool any = false;
    for (std::size_t k = 0; k < d; ++k) {
      const std::uint8_t p = img[16 + i * d + k];
      any |= p != 0;
      r[k] = static_cast<double>(p) / 255.0;
    }
    require(any, ErrorKind::FormatError, in + ": image " + std::to_string(i) + " is all zero");
    const std::uint8_t y = lab[8 + i];
    require(y < 10, ErrorKind::FormatError, ln + ": label " + std::to_string(y) + " out of range");
    ds.labels(i, y) = 1.0;
  }
  if (!raw_scale) normalize_rows(ds.inputs);
  return ds;
}

void write_idx_images(const std::filesystem::path& path, std::size_t rows, std::size_t cols,
                      std::span<const std::uint8_t> pixels) {
  require(rows * cols > 0 && pixels.size() % (rows * cols) == 0, ErrorKind::InvalidParameter,
          "pixel count is not a multiple of the image size");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(f), ErrorKind::InvalidInput, "cannot open " + path.string());
  put_be32(f, 0x00000803u);
  put_be32(f, static_cast<std::uint32_t>(pixels.size() / (rows * cols)));
  put_be32(f, static_cast<std::uint32_t>(rows));
  put_be32(f, static_cast<std::uint32_t>(cols));
  f.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(f), ErrorKind::InvalidInput, "cannot open " + path.string());
  put_be32(f, 0x00000801u);
  put_be32(f, static_cast<std::uint32_t>(labels.size()));
  f.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

double accuracy(const Matrix& outputs, const Matrix& labels) {
  require(outputs.rows() == labels.rows() && outputs.cols() == labels.cols(), ErrorKind::InvalidInput,
          "outputs and labels differ in shape");
  if (outputs.rows() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < outputs.rows(); ++i) {
    const auto f = outputs.row(i);
    const auto y = labels.row(i);
    if (f.size() == 1) {
      hits += (f[0] >= 0.0) == (y[0] >= 0.0);
    } else {
      const auto pf = std::max_element(f.begin(), f.end()) - f.begin();
      const auto py = std::max_element(y.begin(), y.end()) - y.begin();
      hits += pf == py;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(outputs.rows());
}

}  // namespace rlab

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "rlab/data.hpp"
#include "rlab/error.hpp"

using namespace rlab;

namespace {

namespace fs = std::filesystem;

fs::path temp_file(const char* name) { return fs::temp_directory_path() / name; }

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& b) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

bool throws_format_error(const fs::path& images, const fs::path& labels) {
  try {
    load_mnist_idx(images, labels);
  } catch (const Error& e) {
    return e.kind() == ErrorKind::FormatError;
  }
  return false;
}

struct Fixture {
  fs::path images = temp_file("rlab_test_images.idx");
  fs::path labels = temp_file("rlab_test_labels.idx");
  std::vector<std::uint8_t> pixels;
  std::vector<std::uint8_t> digits;

  Fixture() {
    RngStream rng(77);
    const std::size_t n = 12;
    pixels.resize(n * 28 * 28);
    for (auto& p : pixels) p = static_cast<std::uint8_t>(rng.below(256));
    for (std::size_t i = 0; i < n; ++i) digits.push_back(static_cast<std::uint8_t>(i % 10));
    write_idx_images(images, 28, 28, pixels);
    write_idx_labels(labels, digits);
  }
  ~Fixture() {
    fs::remove(images);
    fs::remove(labels);
  }
};

}  // namespace

TEST_CASE("sphere datasets") {
  for (SyntheticTask task : {SyntheticTask::TwoClassHalfspace, SyntheticTask::ScalarRegression}) {
    RngStream rng(5);
    const Dataset ds = generate_sphere_dataset(4000, 12, task, rng);
    CHECK(ds.n() == 4000);
    CHECK(ds.d() == 12);
    CHECK(ds.o() == 1);
    CHECK_NOTHROW(ds.validate());
    for (std::size_t i = 0; i < ds.n(); ++i) CHECK(std::abs(norm2(ds.x(i)) - 1.0) <= 1e-10);
    RngStream again(5);
    const Dataset twin = generate_sphere_dataset(4000, 12, task, again);
    CHECK(twin.inputs == ds.inputs);
    CHECK(twin.labels == ds.labels);
  }
  RngStream rng(6);
  const Dataset hs = generate_sphere_dataset(4000, 12, SyntheticTask::TwoClassHalfspace, rng);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < hs.n(); ++i) {
    CHECK(std::abs(hs.y(i)[0]) == 1.0);
    pos += hs.y(i)[0] > 0;
  }
  CHECK(std::abs(static_cast<double>(pos) - 2000.0) <= 4.0 * std::sqrt(4000.0));

  const Dataset reg = generate_sphere_dataset(500, 3, SyntheticTask::ScalarRegression, rng);
  double mx = 0.0;
  for (std::size_t i = 0; i < reg.n(); ++i) {
    CHECK(reg.y(i)[0] >= 0.5);
    CHECK(reg.y(i)[0] <= 1.5);
    mx = std::max(mx, reg.y(i)[0]);
  }
  CHECK(mx >= 0.5);
  CHECK_THROWS_AS(generate_sphere_dataset(0, 3, SyntheticTask::ScalarRegression, rng), Error);
  CHECK_THROWS_AS(generate_sphere_dataset(5, 1, SyntheticTask::ScalarRegression, rng), Error);
  CHECK(parse_task("halfspace") == SyntheticTask::TwoClassHalfspace);
  CHECK(parse_task("regression") == SyntheticTask::ScalarRegression);
  CHECK_THROWS_AS(parse_task("spiral"), Error);
}

TEST_CASE("normalization is idempotent and rejects zero rows") {
  RngStream rng(3);
  Matrix m = sample_gaussian_matrix(50, 9, 3.0, rng);
  normalize_rows(m);
  for (std::size_t i = 0; i < m.rows(); ++i) CHECK(std::abs(norm2(m.row(i)) - 1.0) <= 1e-12);
  const Matrix once = m;
  normalize_rows(m);
  CHECK(m == once);
  Matrix z(2, 3);
  z(0, 0) = 1.0;
  CHECK_THROWS_AS(normalize_rows(z), Error);
}

TEST_CASE("subset, slice and select") {
  RngStream rng(2);
  const Dataset ds = generate_sphere_dataset(10, 4, SyntheticTask::ScalarRegression, rng);
  const Dataset s = ds.subset(3);
  CHECK(s.n() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::equal(s.x(i).begin(), s.x(i).end(), ds.x(i).begin()));
    CHECK(s.y(i)[0] == ds.y(i)[0]);
  }
  CHECK_NOTHROW(s.validate());
  const Dataset sl = ds.slice(4, 2);
  CHECK(sl.y(1)[0] == ds.y(5)[0]);
  const std::vector<std::size_t> idx{9, 0, 9};
  const Dataset se = ds.select(idx);
  CHECK(se.n() == 3);
  CHECK(se.y(0)[0] == ds.y(9)[0]);
  CHECK(se.y(1)[0] == ds.y(0)[0]);
  CHECK_THROWS_AS(ds.subset(11), Error);
  CHECK_THROWS_AS(ds.slice(9, 2), Error);

  Dataset broken = ds;
  broken.inputs(0, 0) += 0.1;
  CHECK_THROWS_AS(broken.validate(), Error);
  broken.unit_norm = false;
  CHECK_NOTHROW(broken.validate());
  broken.labels(1, 0) = std::nan("");
  CHECK_THROWS_AS(broken.validate(), Error);
}

TEST_CASE("IDX round trip") {
  Fixture fx;
  const Dataset raw = load_mnist_idx(fx.images, fx.labels, true);
  CHECK(raw.n() == 12);
  CHECK(raw.d() == 784);
  CHECK(raw.o() == 10);
  CHECK_FALSE(raw.unit_norm);
  for (std::size_t i = 0; i < raw.n(); ++i) {
    for (std::size_t k = 0; k < 784; ++k) CHECK(raw.x(i)[k] == fx.pixels[i * 784 + k] / 255.0);
    for (std::size_t c = 0; c < 10; ++c) CHECK(raw.y(i)[c] == (c == fx.digits[i] ? 1.0 : 0.0));
  }
  const Dataset unit = load_mnist_idx(fx.images, fx.labels);
  CHECK(unit.unit_norm);
  CHECK_NOTHROW(unit.validate());
  for (std::size_t i = 0; i < unit.n(); ++i) {
    const double nrm = norm2(raw.x(i));
    CHECK(unit.x(i)[100] == doctest::Approx(raw.x(i)[100] / nrm).epsilon(1e-15));
  }

  // Writing back what was read reproduces the files byte for byte.
  const fs::path img2 = temp_file("rlab_test_images2.idx");
  const fs::path lab2 = temp_file("rlab_test_labels2.idx");
  std::vector<std::uint8_t> px;
  for (double v : raw.inputs.values()) px.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
  std::vector<std::uint8_t> dg;
  for (std::size_t i = 0; i < raw.n(); ++i)
    for (std::size_t c = 0; c < 10; ++c)
      if (raw.y(i)[c] == 1.0) dg.push_back(static_cast<std::uint8_t>(c));
  write_idx_images(img2, 28, 28, px);
  write_idx_labels(lab2, dg);
  CHECK(read_bytes(img2) == read_bytes(fx.images));
  CHECK(read_bytes(lab2) == read_bytes(fx.labels));
  fs::remove(img2);
  fs::remove(lab2);

  const Dataset sub = unit.subset(5);
  CHECK(sub.n() == 5);
  CHECK_NOTHROW(sub.validate());
}

TEST_CASE("IDX corruption is a format error") {
  Fixture fx;
  const auto img = read_bytes(fx.images);
  const auto lab = read_bytes(fx.labels);
  const fs::path bad = temp_file("rlab_test_bad.idx");

  auto swapped = img;
  std::swap(swapped[0], swapped[3]);
  std::swap(swapped[1], swapped[2]);
  write_bytes(bad, swapped);
  CHECK(throws_format_error(bad, fx.labels));

  write_bytes(bad, std::vector<std::uint8_t>(img.begin(), img.end() - 1));
  CHECK(throws_format_error(bad, fx.labels));
  write_bytes(bad, std::vector<std::uint8_t>(img.begin(), img.begin() + 6));
  CHECK(throws_format_error(bad, fx.labels));

  write_bytes(bad, std::vector<std::uint8_t>(lab.begin(), lab.end() - 2));
  CHECK(throws_format_error(fx.images, bad));

  // Label count disagrees with image count.
  const std::vector<std::uint8_t> fewer(11, 1);
  write_idx_labels(bad, fewer);
  CHECK(throws_format_error(fx.images, bad));

  auto digit = lab;
  digit.back() = 10;
  write_bytes(bad, digit);
  CHECK(throws_format_error(fx.images, bad));

  // An all-zero image cannot be projected.
  auto blank = img;
  std::fill(blank.begin() + 16, blank.begin() + 16 + 784, 0);
  write_bytes(bad, blank);
  CHECK(throws_format_error(bad, fx.labels));
  fs::remove(bad);
  CHECK_THROWS_AS(load_mnist_idx(temp_file("rlab_missing.idx"), fx.labels), Error);
}

TEST_CASE("bundled MNIST subset loads") {
  const fs::path root = RLAB_SOURCE_DIR;
  const Dataset ds = load_mnist_idx(root / "data/mnist5k/images-idx3-ubyte", root / "data/mnist5k/labels-idx1-ubyte");
  CHECK(ds.n() == 5000);
  CHECK(ds.d() == 784);
  CHECK(ds.o() == 10);
  CHECK_NOTHROW(ds.validate());
  std::vector<std::size_t> counts(10, 0);
  for (std::size_t i = 0; i < ds.n(); ++i)
    for (std::size_t c = 0; c < 10; ++c) counts[c] += ds.y(i)[c] == 1.0;
  for (auto c : counts) CHECK(c > 300);
}

TEST_CASE("accuracy") {
  const Matrix f = Matrix::from_rows({{0.1, 0.9}, {2.0, -1.0}, {0.0, 0.5}});
  const Matrix y = Matrix::from_rows({{0, 1}, {0, 1}, {0, 1}});
  CHECK(accuracy(f, y) == doctest::Approx(2.0 / 3.0));
  const Matrix s = Matrix::from_rows({{0.3}, {-0.2}, {0.1}, {-4.0}});
  const Matrix sy = Matrix::from_rows({{1}, {-1}, {-1}, {-1}});
  CHECK(accuracy(s, sy) == 0.75);
  CHECK_THROWS_AS(accuracy(f, sy), Error);
}

#include "rlab/mathcore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "eigen_view.hpp"
#include "rlab/error.hpp"

namespace rlab {

// ---------------------------------------------------------------------------
// Matrix
// ---------------------------------------------------------------------------

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    require(row.size() == c, ErrorKind::InvalidInput, "ragged initializer rows");
    std::copy(row.begin(), row.end(), m.row(i++).begin());
  }
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::frobenius_norm() const { return norm2(data_); }

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, ErrorKind::InvalidInput,
          "matrix shape mismatch in +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, ErrorKind::InvalidInput,
          "matrix shape mismatch in -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), ErrorKind::InvalidInput, "matmul shape mismatch");
  Matrix c(a.rows(), b.cols());
  detail::view(c).noalias() = detail::view(a) * detail::view(b);
  return c;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  require(a.cols() == x.size(), ErrorKind::InvalidInput, "matvec shape mismatch");
  Vector y(a.rows());
  detail::view(std::span<double>(y)).noalias() = detail::view(a) * detail::view(x);
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorKind::InvalidInput, "dot size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// RngStream
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : key_(mix64(seed ^ 0x5DEECE66DULL)) {}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phase = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(phase);
  has_spare_ = true;
  return r * std::cos(phase);
}

std::uint64_t RngStream::below(std::uint64_t n) {
  require(n > 0, ErrorKind::InvalidParameter, "below(0)");
  // Lemire's multiply-shift with rejection.
  while (true) {
    const std::uint64_t x = next_u64();
    const unsigned __int128 prod = static_cast<unsigned __int128>(x) * n;
    const auto low = static_cast<std::uint64_t>(prod);
    if (low >= n || low >= (-n) % n) return static_cast<std::uint64_t>(prod >> 64);
  }
}

RngStream RngStream::substream(std::uint64_t id) const {
  return RngStream(mix64(key_ ^ mix64(id + kGolden)) + kGolden, true);
}

RngStream RngStream::substream(std::initializer_list<std::uint64_t> path) const {
  RngStream s = *this;
  for (std::uint64_t id : path) s = s.substream(id);
  return s;
}

std::uint64_t hash_name(std::string_view name) {
  // FNV-1a followed by a finalizer.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return mix64(h);
}

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

Matrix sample_gaussian_matrix(std::size_t rows, std::size_t cols, double std, RngStream& rng) {
  require(std::isfinite(std) && std >= 0.0, ErrorKind::InvalidParameter,
          "gaussian std must be finite and >= 0, got " + std::to_string(std));
  Matrix m(rows, cols);
  for (double& v : m.values()) v = std * rng.normal();
  return m;
}

Vector sample_ball_offset(std::size_t d, double eps, RngStream& rng) {
  require(d >= 1, ErrorKind::InvalidParameter, "ball dimension must be >= 1");
  require(std::isfinite(eps) && eps > 0.0, ErrorKind::InvalidParameter,
          "ball radius must be > 0, got " + std::to_string(eps));
  Vector u(d);
  double n = 0.0;
  do {
    for (double& v : u) v = rng.normal();
    n = norm2(u);
  } while (n == 0.0);
  const double r = std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
  const double scale = eps * r;
  for (double& v : u) v = scale * (v / n);
  return u;
}

Vector sample_in_ball(std::span<const double> center, double eps, RngStream& rng) {
  Vector x = sample_ball_offset(center.size(), eps, rng);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += center[i];
  return x;
}

std::vector<std::size_t> random_permutation(std::size_t n, RngStream& rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Jacobi eigensolver
// ---------------------------------------------------------------------------

namespace {

void check_symmetric(const Matrix& m) {
  require(m.rows() == m.cols(), ErrorKind::InvalidInput, "eigensolver needs a square matrix");
  require(m.all_finite(), ErrorKind::InvalidInput, "eigensolver input has non-finite entries");
  const double tol = 1e-12 * std::max(1.0, m.max_abs());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      require(std::abs(m(i, j) - m(j, i)) <= tol, ErrorKind::InvalidInput,
              "matrix is not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
}

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

SymEigen sym_eigen(const Matrix& m) {
  check_symmetric(m);
  const std::size_t n = m.rows();
  Matrix a = m;
  // Symmetrize exactly so rotations act on a symmetric array.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (m(i, j) + m(j, i));
  Matrix v = Matrix::identity(n);

  const double target = 1e-12 * m.frobenius_norm();
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= target) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = a(p, k) = c * akp - s * akq;
          a(k, q) = a(q, k) = s * akp + c * akq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymEigen out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

Vector sym_eigenvalues(const Matrix& m) { return sym_eigen(m).values; }

double spectral_norm_sym(const Matrix& m) {
  const Vector ev = sym_eigenvalues(m);
  if (ev.empty()) return 0.0;
  return std::max(std::abs(ev.front()), std::abs(ev.back()));
}

double min_eigenvalue(const Matrix& m) {
  const Vector ev = sym_eigenvalues(m);
  require(!ev.empty(), ErrorKind::InvalidInput, "empty matrix has no eigenvalues");
  return ev.front();
}

}  // namespace rlab

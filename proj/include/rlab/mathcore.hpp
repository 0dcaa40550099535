#pragma once

// Dense linear algebra, reproducible sampling and the two-sample tests used
// by the rest of the library. Everything is 64-bit floating point.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace rlab {

using Vector = std::vector<double>;

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  Matrix transposed() const;
  double frobenius_norm() const;
  double max_abs() const;
  bool all_finite() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);

/// C = A B.
Matrix matmul(const Matrix& a, const Matrix& b);
/// y = A x.
Vector matvec(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

/// Counter-based 64-bit generator. The n-th output is a bijective mix of
/// (key, n), so a stream is fully described by its key and counter.
/// Substreams derive a fresh key from (key, id) and do not depend on how far
/// the parent has advanced.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard normal (Box-Muller, pairs cached).
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  RngStream substream(std::uint64_t id) const;
  RngStream substream(std::initializer_list<std::uint64_t> path) const;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  RngStream(std::uint64_t key, bool /*raw*/) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Stable 64-bit hash of a string, for keying substreams by names.
std::uint64_t hash_name(std::string_view name);

/// Matrix with i.i.d. N(0, std^2) entries.
Matrix sample_gaussian_matrix(std::size_t rows, std::size_t cols, double std, RngStream& rng);

/// eps * r * u with u a uniform direction and r = U^(1/d): the offset of a
/// uniform point in the radius-eps ball from its center.
Vector sample_ball_offset(std::size_t d, double eps, RngStream& rng);

/// Uniform point in the l2 ball of radius eps around center.
Vector sample_in_ball(std::span<const double> center, double eps, RngStream& rng);

/// Uniform random permutation of [0, n) (Fisher-Yates).
std::vector<std::size_t> random_permutation(std::size_t n, RngStream& rng);

// ---------------------------------------------------------------------------
// Symmetric eigenproblems
// ---------------------------------------------------------------------------

struct SymEigen {
  Vector values;   // ascending
  Matrix vectors;  // column k pairs with values[k]
};

/// Full eigendecomposition by cyclic Jacobi rotations.
SymEigen sym_eigen(const Matrix& m);
/// Ascending spectrum of a symmetric matrix.
Vector sym_eigenvalues(const Matrix& m);
/// Largest absolute eigenvalue of a symmetric matrix.
double spectral_norm_sym(const Matrix& m);
/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& m);

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

struct Summary {
  double mean = 0.0;
  double std_dev = 0.0;    // sample standard deviation (n - 1)
  double std_error = 0.0;  // std_dev / sqrt(n)
  std::size_t n = 0;
};

Summary summarize(std::span<const double> xs);

struct KsResult {
  double statistic = 0.0;
  double critical = 0.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  bool pass = false;
};

/// Asymptotic critical coefficient c(alpha) = sqrt(-ln(alpha/2)/2).
double ks_critical_coefficient(double alpha);

/// Two-sample Kolmogorov-Smirnov test at significance alpha.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b, double alpha);

/// Exact two-sided binomial test p-value for k successes in n trials.
double binomial_two_sided_p(std::size_t k, std::size_t n, double p);

/// Two-sample comparison of distributions with an atom at zero: the zero
/// counts are compared by an exact conditional binomial test, the strictly
/// positive parts by KS. Each sub-test runs at level alpha.
struct AtomKsResult {
  std::size_t zeros_a = 0;
  std::size_t zeros_b = 0;
  double zero_p_value = 1.0;
  KsResult positive;
  bool pass = false;
  /// max(D / D_crit, alpha / p): pass iff <= 1.
  double normalized_statistic = 0.0;
};

AtomKsResult compare_with_zero_atom(std::span<const double> a, std::span<const double> b,
                                    double alpha);

}  // namespace rlab

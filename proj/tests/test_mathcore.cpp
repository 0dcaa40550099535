#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>

#include "rlab/error.hpp"
#include "rlab/mathcore.hpp"

using namespace rlab;

namespace {

Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

Matrix random_symmetric(std::size_t n, RngStream& rng) {
  Matrix a = sample_gaussian_matrix(n, n, 1.0, rng);
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s(i, j) = a(i, j) + a(j, i);
  return s;
}

}  // namespace

TEST_CASE("matrix arithmetic and products") {
  const Matrix a = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  const Matrix b = Matrix::from_rows({{7, 8}, {9, 10}, {11, 12}});
  const Matrix c = matmul(a, b);
  CHECK(c == Matrix::from_rows({{58, 64}, {139, 154}}));
  CHECK(a.transposed().rows() == 3);
  CHECK(a.transposed()(2, 1) == 6);
  CHECK(matvec(a, std::vector<double>{1, 0, -1}) == std::vector<double>{-2, -2});
  CHECK((a + a) == 2.0 * a);
  CHECK((a - a).max_abs() == 0.0);
  CHECK(Matrix::identity(3).frobenius_norm() == doctest::Approx(std::sqrt(3.0)));
  CHECK_THROWS_AS(matmul(a, a), Error);

  RngStream rng(7);
  const Matrix x = sample_gaussian_matrix(13, 29, 1.0, rng);
  const Matrix y = sample_gaussian_matrix(29, 5, 1.0, rng);
  const Matrix ref = naive_matmul(x, y);
  const Matrix got = matmul(x, y);
  for (std::size_t i = 0; i < ref.size(); ++i) CHECK(got.data()[i] == doctest::Approx(ref.data()[i]).epsilon(1e-12));
}

TEST_CASE("rng streams are reproducible and substreams ignore parent progress") {
  RngStream a(42);
  RngStream b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream fresh(42);
  RngStream advanced(42);
  for (int i = 0; i < 17; ++i) advanced.normal();
  RngStream s1 = fresh.substream(5);
  RngStream s2 = advanced.substream(5);
  for (int i = 0; i < 10; ++i) CHECK(s1.next_u64() == s2.next_u64());

  RngStream c1 = fresh.substream({1, 2});
  RngStream c2 = fresh.substream({2, 1});
  CHECK(c1.next_u64() != c2.next_u64());
  CHECK(RngStream(1).next_u64() != RngStream(2).next_u64());
}

TEST_CASE("uniform, normal and below have the right moments") {
  RngStream rng(3);
  const std::size_t n = 200000;
  std::vector<double> u(n);
  std::vector<double> z(n);
  for (auto& v : u) {
    v = rng.uniform();
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
  }
  for (auto& v : z) v = rng.normal();
  const Summary su = summarize(u);
  const Summary sz = summarize(z);
  CHECK(std::abs(su.mean - 0.5) < 4 * su.std_error);
  CHECK(std::abs(sz.mean) < 4 * sz.std_error);
  CHECK(sz.std_dev == doctest::Approx(1.0).epsilon(0.01));

  std::vector<std::size_t> counts(7, 0);
  for (std::size_t i = 0; i < 70000; ++i) ++counts[rng.below(7)];
  for (auto c : counts) CHECK(std::abs(static_cast<double>(c) - 10000.0) < 5.0 * std::sqrt(10000.0));
  CHECK_THROWS_AS(rng.below(0), Error);
}

TEST_CASE("permutations are permutations") {
  RngStream rng(9);
  auto p = random_permutation(100, rng);
  std::sort(p.begin(), p.end());
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i] == i);
}

TEST_CASE("ball sampling: radius law, containment and exact linearity in eps") {
  const std::size_t d = 5;
  RngStream rng(11);
  std::size_t inner = 0;
  const std::size_t n = 40000;
  for (std::size_t i = 0; i < n; ++i) {
    const Vector v = sample_ball_offset(d, 0.3, rng);
    const double r = norm2(v);
    REQUIRE(r <= 0.3 * (1 + 1e-12));
    inner += r <= 0.3 * 0.8;
  }
  // P(r <= 0.8 eps) = 0.8^d for a uniform ball point.
  const double p = std::pow(0.8, 5.0);
  CHECK(std::abs(static_cast<double>(inner) / n - p) < 4.0 * std::sqrt(p * (1 - p) / n));

  RngStream r1(12);
  RngStream r2(12);
  for (int i = 0; i < 50; ++i) {
    const Vector a = sample_ball_offset(d, 0.1, r1);
    const Vector b = sample_ball_offset(d, 0.2, r2);
    for (std::size_t k = 0; k < d; ++k) CHECK(b[k] == 2.0 * a[k]);
  }
  const Vector c{1.0, 2.0, 3.0};
  const Vector x = sample_in_ball(c, 0.5, r1);
  CHECK(norm2(std::vector<double>{x[0] - 1, x[1] - 2, x[2] - 3}) <= 0.5);
  CHECK_THROWS_AS(sample_ball_offset(d, 0.0, r1), Error);
  CHECK_THROWS_AS(sample_gaussian_matrix(2, 2, -1.0, r1), Error);
}

TEST_CASE("jacobi eigensolver matches closed forms and an independent solver") {
  const Matrix two = Matrix::from_rows({{2, 1}, {1, 2}});
  const Vector ev = sym_eigenvalues(two);
  CHECK(ev[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ev[1] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(min_eigenvalue(Matrix::diagonal(std::vector<double>{3, -1, 2})) == -1.0);
  CHECK(spectral_norm_sym(Matrix::diagonal(std::vector<double>{3, -5, 2})) == 5.0);

  RngStream rng(5);
  for (std::size_t n : {1u, 3u, 8u, 25u}) {
    const Matrix s = random_symmetric(n, rng);
    const SymEigen e = sym_eigen(s);
    Eigen::MatrixXd em(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) em(i, j) = s(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(em);
    const double scale = s.frobenius_norm();
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(e.values[k] - solver.eigenvalues()(k)) <= 1e-11 * scale);
    // V diag(values) V^T reconstructs the input.
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double r = 0.0;
        for (std::size_t k = 0; k < n; ++k) r += e.vectors(i, k) * e.values[k] * e.vectors(j, k);
        CHECK(std::abs(r - s(i, j)) <= 1e-11 * scale);
      }
    for (std::size_t k = 1; k < n; ++k) CHECK(e.values[k - 1] <= e.values[k]);
  }
  CHECK_THROWS_AS(sym_eigen(Matrix::from_rows({{1, 2}, {0, 1}})), Error);
  CHECK_THROWS_AS(sym_eigen(Matrix(2, 3)), Error);
}

TEST_CASE("summary statistics") {
  const std::vector<double> xs{1, 2, 3, 4};
  const Summary s = summarize(xs);
  CHECK(s.mean == 2.5);
  CHECK(s.std_dev == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(s.std_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(summarize(std::vector<double>{}).n == 0);
}

TEST_CASE("two-sample KS statistic and critical value") {
  CHECK(ks_critical_coefficient(0.05) == doctest::Approx(1.3581).epsilon(1e-4));
  CHECK(ks_critical_coefficient(0.01) == doctest::Approx(1.6276).epsilon(1e-4));
  const std::vector<double> a{1, 2, 3, 4};
  CHECK(ks_two_sample(a, a, 0.05).statistic == 0.0);
  // Hand value: ECDFs of {1,2,3,4} and {3,4,5,6} differ by 1/2 at x in [2,3).
  const std::vector<double> b{3, 4, 5, 6};
  const KsResult r = ks_two_sample(a, b, 0.05);
  CHECK(r.statistic == doctest::Approx(0.5));
  CHECK(r.critical == doctest::Approx(1.3581 * std::sqrt(0.5)).epsilon(1e-4));
  // Ties across samples are resolved before comparing.
  const std::vector<double> c{1, 1, 2};
  const std::vector<double> e{1, 2, 2};
  CHECK(ks_two_sample(c, e, 0.05).statistic == doctest::Approx(1.0 / 3.0));
  const std::vector<double> far{100, 101, 102, 103};
  CHECK(ks_two_sample(a, far, 0.05).statistic == 1.0);
}

TEST_CASE("exact binomial two-sided p-values") {
  CHECK(binomial_two_sided_p(5, 10, 0.5) == doctest::Approx(1.0));
  CHECK(binomial_two_sided_p(0, 10, 0.5) == doctest::Approx(2.0 / 1024.0).epsilon(1e-10));
  // P(X <= 2) + P(X >= 8) for Bin(10, 1/2) = 2 * 56 / 1024.
  CHECK(binomial_two_sided_p(8, 10, 0.5) == doctest::Approx(112.0 / 1024.0).epsilon(1e-10));
  CHECK(binomial_two_sided_p(0, 0, 0.3) == doctest::Approx(1.0));
  CHECK(binomial_two_sided_p(3, 3, 1.0) == 1.0);
  CHECK(binomial_two_sided_p(2, 3, 1.0) == 0.0);
}

TEST_CASE("atom-aware comparison") {
  RngStream rng(1);
  std::vector<double> a(5000);
  std::vector<double> b(5000);
  for (auto& v : a) v = rng.uniform() < 0.5 ? 0.0 : rng.uniform();
  for (auto& v : b) v = rng.uniform() < 0.5 ? 0.0 : rng.uniform();
  const AtomKsResult same = compare_with_zero_atom(a, b, 0.01);
  CHECK(same.pass);
  CHECK(same.normalized_statistic <= 1.0);

  std::vector<double> no_atom(5000);
  for (auto& v : no_atom) v = rng.uniform();
  const AtomKsResult diff = compare_with_zero_atom(a, no_atom, 0.01);
  CHECK_FALSE(diff.pass);
  CHECK(diff.normalized_statistic > 1.0);

  const std::vector<double> zeros(100, 0.0);
  const AtomKsResult degenerate = compare_with_zero_atom(zeros, zeros, 0.01);
  CHECK(degenerate.pass);
  CHECK(degenerate.normalized_statistic <= 1.0);
  const std::vector<double> ones(100, 1.0);
  CHECK_FALSE(compare_with_zero_atom(zeros, ones, 0.01).pass);
}

TEST_CASE("gaussian matrix examples") {
  RngStream r0(1);
  CHECK(sample_gaussian_matrix(2, 2, 0.0, r0).max_abs() == 0.0);
  RngStream r7(7);
  const Matrix g = sample_gaussian_matrix(10000, 1, 1.0, r7);
  const Summary s = summarize(g.values());
  CHECK(std::abs(s.mean) <= 4.0 / 100.0);
  CHECK(s.std_dev * s.std_dev >= 0.94);
  CHECK(s.std_dev * s.std_dev <= 1.06);
  RngStream a(3);
  RngStream b(3);
  CHECK(sample_gaussian_matrix(3, 5, 2.0, a) == sample_gaussian_matrix(3, 5, 2.0, b));
  CHECK_THROWS_AS(sample_gaussian_matrix(1, 1, std::numeric_limits<double>::infinity(), a), Error);
}

TEST_CASE("ball sampler moments and radial CDF") {
  RngStream rng(21);
  const std::size_t n = 100000;
  std::vector<double> abs1(n);
  for (auto& v : abs1) v = std::abs(sample_in_ball(std::vector<double>{0.0}, 1.0, rng)[0]);
  const Summary s1 = summarize(abs1);
  CHECK(std::abs(s1.mean - 0.5) < 3.0 * s1.std_error);

  std::vector<double> r3(n);
  const std::vector<double> c3{0.5, -1.0, 2.0};
  for (auto& v : r3) {
    const Vector x = sample_in_ball(c3, 1.0, rng);
    v = norm2(std::vector<double>{x[0] - c3[0], x[1] - c3[1], x[2] - c3[2]});
  }
  const Summary s3 = summarize(r3);
  CHECK(std::abs(s3.mean - 0.75) < 3.0 * s3.std_error);

  // One-sample KS of r/eps against r^d.
  for (std::size_t d : {2u, 7u}) {
    std::vector<double> r(n);
    for (auto& v : r) v = norm2(sample_ball_offset(d, 0.25, rng)) / 0.25;
    std::sort(r.begin(), r.end());
    double sup = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = std::pow(r[i], static_cast<double>(d));
      sup = std::max({sup, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
    }
    CHECK(sup < ks_critical_coefficient(0.01) / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("eigensolver spec examples and 20x20 reconstruction") {
  CHECK(sym_eigenvalues(Matrix::identity(3)) == Vector{1, 1, 1});
  CHECK(sym_eigenvalues(Matrix::diagonal(std::vector<double>{5, -2, 0})) == Vector{-2, 0, 5});
  CHECK(spectral_norm_sym(Matrix::identity(4)) == 1.0);
  CHECK(spectral_norm_sym(Matrix::diagonal(std::vector<double>{-4, 3})) == 4.0);
  CHECK(spectral_norm_sym(Matrix::from_rows({{2, 1}, {1, 2}})) == doctest::Approx(3.0).epsilon(1e-14));
  RngStream rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix s = random_symmetric(20, rng);
    const SymEigen e = sym_eigen(s);
    double err = 0.0;
    for (std::size_t i = 0; i < 20; ++i)
      for (std::size_t j = 0; j < 20; ++j) {
        double r = 0.0;
        for (std::size_t k = 0; k < 20; ++k) r += e.vectors(i, k) * e.values[k] * e.vectors(j, k);
        err += (r - s(i, j)) * (r - s(i, j));
      }
    CHECK(std::sqrt(err) <= 1e-9 * s.frobenius_norm());
  }
}

TEST_CASE("KS examples and null calibration") {
  const std::vector<double> zeros(1000, 0.0);
  const std::vector<double> ones(1000, 1.0);
  const KsResult r = ks_two_sample(zeros, ones, 0.05);
  CHECK(r.statistic == 1.0);
  CHECK_FALSE(r.pass);
  CHECK(ks_two_sample(zeros, zeros, 0.05).pass);
  CHECK_THROWS_AS(ks_two_sample(std::vector<double>{}, ones, 0.05), Error);

  int passes = 0;
  const int runs = 100;
  for (int k = 0; k < runs; ++k) {
    RngStream ra = RngStream(1000).substream({static_cast<std::uint64_t>(k), 0});
    RngStream rb = RngStream(1000).substream({static_cast<std::uint64_t>(k), 1});
    std::vector<double> a(100000);
    std::vector<double> b(100000);
    for (auto& v : a) v = ra.normal();
    for (auto& v : b) v = rb.normal();
    passes += ks_two_sample(a, b, 0.01).pass;
  }
  // Expected pass count 99; 96 is more than 3 binomial sds below.
  CHECK(passes >= 96);
}

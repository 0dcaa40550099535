#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "rlab/data.hpp"
#include "rlab/error.hpp"
#include "rlab/network.hpp"
#include "rlab/theory.hpp"

using namespace rlab;

namespace {

// Frozen reference values below were computed independently at 40 digits.
constexpr double kTol = 1e-12;

bool rel_close(double got, double want, double tol = kTol) {
  return std::abs(got - want) <= tol * std::abs(want);
}

NetworkConfig custom(std::size_t d, std::size_t m, std::size_t depth, double alpha, std::vector<double> betas) {
  NetworkConfig cfg;
  cfg.d = d;
  cfg.m = m;
  cfg.o = 1;
  cfg.depth = depth;
  cfg.alpha = alpha;
  cfg.betas = std::move(betas);
  cfg.scheme = InitScheme::Custom;
  cfg.validate();
  return cfg;
}

Dataset unit_pair(double cos_theta) {
  Dataset ds;
  ds.inputs = Matrix::from_rows({{1.0, 0.0, 0.0}, {cos_theta, std::sqrt(1.0 - cos_theta * cos_theta), 0.0}});
  ds.labels = Matrix(2, 1);
  return ds;
}

Dataset sphere(std::size_t n, std::size_t d, std::uint64_t seed) {
  RngStream rng(seed);
  return generate_sphere_dataset(n, d, SyntheticTask::ScalarRegression, rng);
}

double min_eig_over_trace(const Matrix& m) {
  double tr = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) tr += m(i, i);
  return min_eigenvalue(m) / std::max(tr, 1e-300);
}

}  // namespace

TEST_CASE("gains are exact per scheme") {
  CHECK(gain(NetworkConfig::make(InitScheme::He, 784, 256, 10, 4)) == 1.0);
  CHECK(gain(NetworkConfig::make(InitScheme::NTK, 784, 256, 10, 4)) == 1.0);
  CHECK(gain(NetworkConfig::make(InitScheme::LeCun, 784, 256, 10, 4)) == std::numbers::sqrt2 / 2.0);
  CHECK(rel_close(gain(NetworkConfig::make(InitScheme::NonLazy, 16, 100, 1, 2, 1.0, 2.0)), 1e-4 / std::sqrt(0.02)));
  CHECK(rel_close(gain(custom(3, 50, 3, 1.0, {0.1, 0.4, 0.2})), 0.4 / 0.2));
}

TEST_CASE("width-depth bound and its scheme forms against frozen values") {
  const BoundReport he2 = thm1_bound(NetworkConfig::make(InitScheme::He, 784, 16, 10, 2));
  CHECK(rel_close(he2.thm1, 1.06853586969603511278));
  CHECK(rel_close(he2.table1, 1.06853586969603511278));
  CHECK(he2.gamma == 1.0);

  const BoundReport he4 = thm1_bound(NetworkConfig::make(InitScheme::He, 784, 256, 10, 4));
  CHECK(rel_close(he4.thm1, 1.10493828184327363139));
  CHECK(rel_close(he4.table1, 1.10493828184327363139));
  CHECK(rel_close(he4.wu, 271.234804267387642066));
  CHECK(rel_close(he4.huang, 181.019335983756166247));

  const BoundReport lc3 = thm1_bound(NetworkConfig::make(InitScheme::LeCun, 784, 64, 10, 3));
  CHECK(rel_close(lc3.thm1, 0.768580574248723708711));
  CHECK(rel_close(lc3.table1, 0.768580574248723708711));
  const BoundReport lc6 = thm1_bound(NetworkConfig::make(InitScheme::LeCun, 784, 128, 10, 6));
  CHECK(rel_close(lc6.table1, 0.764380015977879386986));
  CHECK(rel_close(lc6.thm1, 0.764380015977879386986));

  const BoundReport ntk = thm1_bound(NetworkConfig::make(InitScheme::NTK, 784, 256, 10, 4));
  CHECK(rel_close(ntk.thm1, 1.65701756860205696170));
  CHECK(rel_close(ntk.table1, 1.65701756860205696170));

  const BoundReport nl = thm1_bound(NetworkConfig::make(InitScheme::NonLazy, 16, 100, 1, 3, 1.0, 2.0));
  CHECK(nl.table1 == nl.thm1);
  CHECK(nl.thm1 >= 0.0);
}

TEST_CASE("width-depth bound limits and shape") {
  // Large width: the exponential vanishes and only gamma^(L-2) survives.
  CHECK(thm1_bound(NetworkConfig::make(InitScheme::He, 784, 1 << 14, 10, 4)).thm1 == 1.0);
  CHECK(rel_close(thm1_bound(NetworkConfig::make(InitScheme::LeCun, 784, 1 << 14, 10, 5)).thm1,
                  std::pow(std::numbers::sqrt2 / 2.0, 3.0)));

  // He: up then down in width, one sign change of the discrete difference
  // (flat steps, where the exponential has underflowed, carry no sign).
  for (std::size_t depth : {4u, 5u, 6u}) {
    std::vector<double> v;
    for (std::size_t m = 16; m <= (1u << 14); m *= 2)
      v.push_back(thm1_bound(NetworkConfig::make(InitScheme::He, 784, m, 10, depth)).thm1);
    int changes = 0;
    int last = 0;
    for (std::size_t k = 1; k < v.size(); ++k) {
      const int sign = (v[k] > v[k - 1]) - (v[k] < v[k - 1]);
      if (sign == 0) continue;
      changes += last != 0 && sign != last;
      last = sign;
    }
    CHECK(changes == 1);
    CHECK(v[1] > v[0]);
    CHECK(v.back() < v[1]);
  }
  // At large width LeCun falls with depth and He rises with depth.
  double prev_lc = INFINITY;
  double first_he = 0.0;
  double prev_he = 0.0;
  for (std::size_t depth = 2; depth <= 10; ++depth) {
    const double lc = thm1_bound(NetworkConfig::make(InitScheme::LeCun, 784, 1 << 14, 10, depth)).thm1;
    const double he = thm1_bound(NetworkConfig::make(InitScheme::He, 784, 1 << 14, 10, depth)).thm1;
    CHECK(lc < prev_lc);
    CHECK(he >= prev_he);
    if (depth == 2) first_he = he;
    prev_lc = lc;
    prev_he = he;
  }
  CHECK(prev_he > first_he);
}

TEST_CASE("non-lazy two-layer bound") {
  CHECK(rel_close(thm3_bound(4, 256, 2.0), 2.74103281948130282606e-4));
  CHECK(rel_close(thm3_bound(8, 4096, 1.5), 2.35966427249657138046e-4));
  try {
    thm3_bound(4, 256, 1.4);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfRegime);
  }
  // c = 2 splits into n^-1.5 (sqrt(n log m) + n) / m^1.5 plus (sqrt(n log m) + n) / m^2.5.
  for (std::size_t m : {1u << 10, 1u << 14, 1u << 18}) {
    const double n = 4.0;
    const double mm = static_cast<double>(m);
    const double head = std::sqrt(n * std::log(mm)) + n;
    const double order = head / std::pow(mm, 2.5);
    const double first = head / (std::pow(n, 1.5) * std::pow(mm, 1.5));
    CHECK(rel_close(thm3_bound(4, m, 2.0), first + order));
  }
  for (double c : {1.5, 2.0, 3.0}) {
    double prev = INFINITY;
    for (std::size_t m = 16; m <= 100000; m = m * 5 / 4) {
      const double v = thm3_bound(4, m, c);
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("non-lazy predicate") {
  const auto nl = nonlazy_predicate(NetworkConfig::make(InitScheme::NonLazy, 784, 128, 10, 2, 1.0, 2.0));
  CHECK(rel_close(nl.rho, 32.0));
  CHECK(nl.cls == LazyClass::NonLazyCandidate);
  const auto he = nonlazy_predicate(NetworkConfig::make(InitScheme::He, 784, 128, 10, 2));
  CHECK(rel_close(he.rho, 1.54802546807921890004e-5));
  CHECK(he.cls == LazyClass::Lazy);
  const auto he10 = nonlazy_predicate(NetworkConfig::make(InitScheme::He, 784, 128, 10, 2, 10.0));
  CHECK(rel_close(he10.rho, 10.0 * he.rho, 1e-14));
  CHECK(nonlazy_predicate(NetworkConfig::make(InitScheme::He, 784, 256, 10, 4)).rho ==
        doctest::Approx(3.58e-13).epsilon(0.01));

  for (std::size_t m = 64; m <= 4096; m *= 2)
    for (std::size_t depth : {2u, 3u}) {
      for (InitScheme s : {InitScheme::LeCun, InitScheme::He, InitScheme::NTK})
        CHECK(nonlazy_predicate(NetworkConfig::make(s, 784, m, 10, depth)).cls == LazyClass::Lazy);
      CHECK(nonlazy_predicate(NetworkConfig::make(InitScheme::NonLazy, 784, m, 10, depth, 1.0, 2.0)).cls ==
            LazyClass::NonLazyCandidate);
    }
  const auto mid = nonlazy_predicate(custom(3, 4, 2, 5.0, {0.125, 0.125}));
  CHECK(mid.rho == doctest::Approx(1.25));
  CHECK(mid.cls == LazyClass::Indeterminate);
  CHECK(to_string(LazyClass::Lazy) == "lazy");
  CHECK(to_string(LazyClass::NonLazyCandidate) == "nonlazy-candidate");
}

TEST_CASE("H-infinity closed form") {
  const auto cfg = custom(3, 50, 2, 2.0, {0.3, 0.2});
  const double diag = 50.0 * 0.04 / (2.0 * 4.0);
  const Matrix perp = gram_h_infinity(unit_pair(0.0), cfg);
  CHECK(perp(0, 1) == 0.0);
  CHECK(rel_close(perp(0, 0), diag));
  CHECK(rel_close(perp(1, 1), diag));
  CHECK(std::abs(gram_h_infinity(unit_pair(-1.0), cfg)(0, 1)) <= 1e-15);
  // cos = 1/2: theta = pi/3, factor (pi - pi/3)/(2 pi) = 1/3.
  CHECK(rel_close(gram_h_infinity(unit_pair(0.5), cfg)(0, 1), 50.0 * 0.04 / 4.0 * 0.5 / 3.0));

  Dataset off = unit_pair(0.5);
  off.inputs(1, 0) *= 1.01;
  CHECK_THROWS_AS(gram_h_infinity(off, cfg), Error);
  CHECK_THROWS_AS(gram_h_infinity(unit_pair(0.5), custom(3, 50, 3, 1.0, {0.1, 0.1, 0.1})), Error);
}

TEST_CASE("H-infinity matches Monte Carlo over (w, a)") {
  const auto cfg = custom(3, 64, 2, 1.5, {0.7, 0.4});
  RngStream rng(17);
  for (double c : {0.9, -0.3}) {
    const Dataset ds = unit_pair(c);
    const Matrix h = gram_h_infinity(ds, cfg);
    const std::size_t n = 1000000;
    double s = 0.0;
    double ss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double w0 = 0.7 * rng.normal();
      const double w1 = 0.7 * rng.normal();
      const double a = 0.4 * rng.normal();
      const bool i = w0 >= 0.0;
      const bool j = w0 * ds.inputs(1, 0) + w1 * ds.inputs(1, 1) >= 0.0;
      const double v = (i && j) ? 64.0 / (1.5 * 1.5) * a * a * c : 0.0;
      s += v;
      ss += v * v;
    }
    const double mean = s / n;
    const double se = std::sqrt((ss / n - mean * mean) / (n - 1));
    CHECK(std::abs(mean - h(0, 1)) <= 3.0 * se);
  }
}

TEST_CASE("finite gram matrices") {
  RngStream rng(18);
  const Dataset ds = sphere(6, 4, 18);
  const auto cfg = NetworkConfig::make(InitScheme::NTK, 4, 40, 1, 2, 1.7);
  Network net = init_network(cfg, rng);

  const Matrix h0 = gram_h(net, ds);
  CHECK(gram_h_hat(net, ds) == h0);
  const Matrix& w = net.weight(0);
  const Matrix& a = net.weight(1);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      double h = 0.0;
      double g = 0.0;
      for (std::size_t r = 0; r < 40; ++r) {
        const double pi = dot(w.row(r), ds.x(i));
        const double pj = dot(w.row(r), ds.x(j));
        if (pi >= 0 && pj >= 0) h += a(0, r) * a(0, r) * dot(ds.x(i), ds.x(j));
        g += std::max(pi, 0.0) * std::max(pj, 0.0);
      }
      CHECK(h0(i, j) == doctest::Approx(h / (1.7 * 1.7)).epsilon(1e-12));
      CHECK(gram_g(net, ds)(i, j) == doctest::Approx(g / (1.7 * 1.7)).epsilon(1e-12));
    }

  // Moving the hidden layer changes H but not the init sign patterns of H-hat.
  Network moved = net;
  for (auto& v : moved.mutable_weight(0).values()) v += 0.5 * rng.normal();
  for (auto& v : moved.mutable_weight(1).values()) v *= 1.3;
  const Matrix hh = gram_h_hat(moved, ds);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      double h = 0.0;
      for (std::size_t r = 0; r < 40; ++r) {
        const double pi = dot(net.weight(0).row(r), ds.x(i));
        const double pj = dot(net.weight(0).row(r), ds.x(j));
        if (pi >= 0 && pj >= 0) h += moved.weight(1)(0, r) * moved.weight(1)(0, r) * dot(ds.x(i), ds.x(j));
      }
      CHECK(hh(i, j) == doctest::Approx(h / (1.7 * 1.7)).epsilon(1e-12));
    }

  Network silent = net;
  silent.mutable_weight(1) = Matrix(1, 40);
  CHECK(gram_h(silent, ds).max_abs() == 0.0);

  Dataset one = ds.subset(1);
  double h11 = 0.0;
  for (std::size_t r = 0; r < 40; ++r)
    if (dot(w.row(r), one.x(0)) >= 0) h11 += a(0, r) * a(0, r);
  CHECK(gram_h(net, one)(0, 0) == doctest::Approx(h11 / (1.7 * 1.7)).epsilon(1e-12));

  const GramSet gs = gram_set(moved, ds);
  for (const Matrix* m : {&gs.h_inf, &gs.h_t, &gs.h_hat, &gs.g_t}) {
    for (std::size_t i = 0; i < m->rows(); ++i)
      for (std::size_t j = 0; j < m->cols(); ++j) CHECK((*m)(i, j) == doctest::Approx((*m)(j, i)).epsilon(1e-14));
    CHECK(min_eig_over_trace(*m) >= -1e-10);
  }
  CHECK(gs.lambda0 == doctest::Approx(min_eigenvalue(gs.h_inf)).epsilon(1e-14));
  CHECK(gs.lambda0 > 0.0);

  const Network deep = init_network(NetworkConfig::make(InitScheme::NTK, 4, 8, 1, 3), rng);
  CHECK_THROWS_AS(gram_h(deep, ds), Error);
}

TEST_CASE("lambda0 and degenerate kernels") {
  const auto cfg = custom(3, 10, 2, 1.0, {1.0, 1.0});
  CHECK(kernel_lambda0(gram_h_infinity(unit_pair(0.3), cfg)) > 0.0);
  Dataset twin = unit_pair(1.0);
  try {
    kernel_lambda0(gram_h_infinity(twin, cfg));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateKernel);
  }
}

TEST_CASE("radii and times against frozen values") {
  const auto cfg = custom(3, 100, 2, 100.0, {0.02, 0.01});
  const EarlyTrainingRadii r = radii_and_times(cfg, 0.4, 2, 1.5);
  CHECK(rel_close(r.r_a, 0.782590569434066179441));
  CHECK(r.r_a == doctest::Approx(0.78259).epsilon(1e-5));
  CHECK(rel_close(r.r_w, 0.0125324127281966096313));
  CHECK(rel_close(r.t1_star, 0.802613919565840698537));
  CHECK(r.t2_star == std::numeric_limits<double>::infinity());
  CHECK(r.t_star == r.t1_star);
  CHECK(r.valid);
  CHECK(rel_close(movement_bound_w(r, 0.7), 0.0110400475508351995327));
  CHECK(rel_close(movement_bound_a(r, 0.7), 0.00220871178685412178788));
  CHECK(movement_bound_w(r, 0.0) == 0.0);

  const EarlyTrainingRadii big = radii_and_times(cfg, 0.4, 2, 500.0);
  CHECK(rel_close(big.t1_star, 0.00222501872248239034269));
  CHECK(rel_close(big.t2_star, 0.747531204422281433681));
  CHECK(big.t_star == big.t1_star);

  // R_a grows linearly with alpha once the subtracted term is negligible.
  const EarlyTrainingRadii a1 = radii_and_times(custom(3, 100, 2, 1e6, {0.02, 0.01}), 0.4, 2, 1.5);
  const EarlyTrainingRadii a2 = radii_and_times(custom(3, 100, 2, 2e6, {0.02, 0.01}), 0.4, 2, 1.5);
  CHECK(a2.r_a / a1.r_a == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(std::isfinite(a2.t_star));
  CHECK(a2.t_star > 0.0);

  const EarlyTrainingRadii neg = radii_and_times(custom(3, 100, 2, 100.0, {0.02, 10.0}), 0.4, 2, 1.5);
  CHECK(neg.r_a < 0.0);
  CHECK_FALSE(neg.valid);
  CHECK(neg.r_w > 0.0);

  try {
    radii_and_times(cfg, 0.0, 2, 1.5);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateKernel);
  }
  CHECK_THROWS_AS(radii_and_times(custom(3, 10, 3, 1.0, {1, 1, 1}), 0.4, 2, 1.5), Error);
}

TEST_CASE("concentration alpha is a fixed point") {
  CHECK(rel_close(concentration_alpha(4, 0.05, 0.3, 10.0), 0.00425607748365510089656));
  // lambda0 at alpha is lambda0(1) / alpha^2.
  const double a = concentration_alpha(4, 0.05, 0.3, 10.0);
  const double lam = 0.3 / (a * a);
  CHECK(rel_close(a, 10.0 * 16.0 * 4.0 * 0.05 * std::sqrt(std::log(128.0)) / lam));
}

#include <algorithm>
#include <cmath>
#include <limits>

#include "rlab/error.hpp"
#include "rlab/mathcore.hpp"

namespace rlab {

Summary summarize(std::span<const double> xs) {
  Summary s;
  s.n = xs.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std_dev = std::sqrt(ss / static_cast<double>(s.n - 1));
    s.std_error = s.std_dev / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

double ks_critical_coefficient(double alpha) {
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::InvalidParameter, "KS alpha must lie in (0,1)");
  return std::sqrt(-std::log(alpha / 2.0) / 2.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b, double alpha) {
  require(!a.empty() && !b.empty(), ErrorKind::InvalidInput, "KS test needs non-empty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());

  const double n1 = static_cast<double>(x.size());
  const double n2 = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
  }

  KsResult r;
  r.statistic = d;
  r.n1 = x.size();
  r.n2 = y.size();
  r.critical = ks_critical_coefficient(alpha) * std::sqrt((n1 + n2) / (n1 * n2));
  r.pass = d < r.critical;
  return r;
}

double binomial_two_sided_p(std::size_t k, std::size_t n, double p) {
  require(k <= n, ErrorKind::InvalidParameter, "binomial test needs k <= n");
  require(p >= 0.0 && p <= 1.0, ErrorKind::InvalidParameter, "binomial p must lie in [0,1]");
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == n ? 1.0 : 0.0;
  const double nn = static_cast<double>(n);
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  const double lgn = std::lgamma(nn + 1.0);
  auto log_pmf = [&](std::size_t i) {
    const double ii = static_cast<double>(i);
    return lgn - std::lgamma(ii + 1.0) - std::lgamma(nn - ii + 1.0) + ii * lp + (nn - ii) * lq;
  };
  // Sum of all outcomes no more likely than the observed one (relative
  // slack guards against rounding in the log-pmf).
  const double cutoff = log_pmf(k) + 1e-7;
  double total = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double l = log_pmf(i);
    if (l <= cutoff) total += std::exp(l);
  }
  return std::min(1.0, total);
}

AtomKsResult compare_with_zero_atom(std::span<const double> a, std::span<const double> b,
                                    double alpha) {
  require(!a.empty() && !b.empty(), ErrorKind::InvalidInput, "comparison needs non-empty samples");
  std::vector<double> pa;
  std::vector<double> pb;
  AtomKsResult r;
  for (double v : a) {
    if (v == 0.0)
      ++r.zeros_a;
    else
      pa.push_back(v);
  }
  for (double v : b) {
    if (v == 0.0)
      ++r.zeros_b;
    else
      pb.push_back(v);
  }

  const std::size_t zeros = r.zeros_a + r.zeros_b;
  if (zeros > 0) {
    const double share = static_cast<double>(a.size()) / static_cast<double>(a.size() + b.size());
    r.zero_p_value = binomial_two_sided_p(r.zeros_a, zeros, share);
  }

  if (pa.empty() && pb.empty()) {
    r.positive = KsResult{0.0, 1.0, 0, 0, true};
  } else if (pa.empty() || pb.empty()) {
    r.positive = KsResult{1.0, 0.0, pa.size(), pb.size(), false};
  } else {
    r.positive = ks_two_sample(pa, pb, alpha);
  }

  const double ks_ratio = r.positive.critical > 0.0 ? r.positive.statistic / r.positive.critical
                                                    : std::numeric_limits<double>::infinity();
  const double zero_ratio =
      r.zero_p_value > 0.0 ? alpha / r.zero_p_value : std::numeric_limits<double>::infinity();
  r.normalized_statistic = std::max(r.positive.statistic == 0.0 ? 0.0 : ks_ratio, zero_ratio);
  r.pass = r.positive.pass && r.zero_p_value >= alpha;
  return r;
}

}  // namespace rlab

#include "rlab/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rlab/error.hpp"

namespace rlab {

double gain(const NetworkConfig& cfg) {
  switch (cfg.scheme) {
    case InitScheme::He:
    case InitScheme::NTK: return 1.0;
    case InitScheme::LeCun: return std::numbers::sqrt2 / 2.0;
    default: break;
  }
  const double m = static_cast<double>(cfg.m);
  const double beta = cfg.scheme == InitScheme::NonLazy ? std::pow(m, -cfg.c) : cfg.hidden_beta();
  return beta / std::sqrt(2.0 / m);
}

BoundReport thm1_bound(const NetworkConfig& cfg) {
  cfg.validate();
  const double L = static_cast<double>(cfg.depth);
  const double m = static_cast<double>(cfg.m);
  const double d = static_cast<double>(cfg.d);
  const double o = static_cast<double>(cfg.o);
  const double L3 = L * L * L;
  const double decay = std::exp(-m / L3);
  const double b1 = cfg.betas.front();
  const double bl = cfg.betas.back();

  BoundReport r;
  r.gamma = gain(cfg);
  const double depth_factor = std::pow(r.gamma, L - 2.0);
  r.thm1 = (std::sqrt(std::numbers::pi * L3 * m * m * b1 * b1 * bl * bl / 8.0) * decay + 1.0) * depth_factor;
  switch (cfg.scheme) {
    case InitScheme::LeCun:
      r.table1 = (std::sqrt(std::numbers::pi * L3 * m / (8.0 * d)) * decay + 1.0) *
                 std::pow(std::numbers::sqrt2 / 2.0, L - 2.0);
      break;
    case InitScheme::He: r.table1 = std::sqrt(std::numbers::pi * L3 * m / (2.0 * d)) * decay + 1.0; break;
    case InitScheme::NTK: r.table1 = std::sqrt(std::numbers::pi * L3 * m / (4.0 * o)) * decay + 1.0; break;
    default: r.table1 = r.thm1; break;
  }
  r.wu = L * L * std::cbrt(m) * std::sqrt(std::log(m)) + std::sqrt(m * L);
  r.huang = std::pow(2.0, (3.0 * L - 5.0) / 2.0) * std::sqrt(m);
  return r;
}

double thm3_bound(std::size_t n, std::size_t m, double c) {
  require(c >= 1.5, ErrorKind::OutOfRegime, "the two-layer non-lazy bound needs c >= 1.5");
  require(n >= 1 && m >= 2, ErrorKind::InvalidParameter, "need n >= 1 and m >= 2");
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  const double lead = (std::sqrt(nn * std::log(mm)) + nn) / std::pow(mm, c - 1.0);
  return lead * (1.0 / std::sqrt(nn * nn * nn * mm) + 1.0 / std::pow(mm, c - 0.5));
}

std::string_view to_string(LazyClass c) {
  switch (c) {
    case LazyClass::Lazy: return "lazy";
    case LazyClass::Indeterminate: return "indeterminate";
    case LazyClass::NonLazyCandidate: return "nonlazy-candidate";
  }
  return "indeterminate";
}

NonLazyVerdict nonlazy_predicate(const NetworkConfig& cfg) {
  cfg.validate();
  double sum = 0.0;
  for (double b : cfg.betas) sum += b;
  const double base = std::pow(static_cast<double>(cfg.m), 1.5) * sum;
  NonLazyVerdict v;
  v.rho = cfg.alpha / std::pow(base, static_cast<double>(cfg.depth));
  v.cls = v.rho >= 10.0 ? LazyClass::NonLazyCandidate : v.rho <= 1.0 ? LazyClass::Lazy : LazyClass::Indeterminate;
  return v;
}

// ---------------------------------------------------------------------------
// Radii
// ---------------------------------------------------------------------------

namespace {

double star_time(double lambda0, double ratio) {
  const double arg = 1.0 - ratio;
  if (arg <= 0.0) return std::numeric_limits<double>::infinity();
  return -(2.0 / lambda0) * std::log(arg);
}

}  // namespace

EarlyTrainingRadii radii_and_times(const NetworkConfig& cfg, double lambda0, std::size_t n, double residual0) {
  require(cfg.depth == 2, ErrorKind::InvalidParameter, "radii are defined for two-layer networks");
  require(std::isfinite(lambda0) && lambda0 > 0.0, ErrorKind::DegenerateKernel, "lambda0 must be > 0");
  require(n >= 1, ErrorKind::InvalidParameter, "need n >= 1");
  require(std::isfinite(residual0) && residual0 >= 0.0, ErrorKind::InvalidParameter,
          "initial residual must be finite and >= 0");
  EarlyTrainingRadii r;
  r.alpha = cfg.alpha;
  r.beta1 = cfg.betas[0];
  r.beta2 = cfg.betas[1];
  r.lambda0 = lambda0;
  r.n = n;
  r.m = cfg.m;
  r.residual0 = residual0;

  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(cfg.m);
  const double sn = std::sqrt(nn);
  const double a = r.alpha;
  r.r_a = (a / nn) * std::sqrt(lambda0 / (8.0 * nn * mm)) - std::sqrt(2.0 / std::numbers::pi) * r.beta2;
  const double mass = r.r_a * (r.r_a + std::sqrt(8.0 / std::numbers::pi) * r.beta2) + r.beta2 * r.beta2;
  r.r_w = a * a * lambda0 * std::sqrt(2.0 * std::numbers::pi) * r.beta1 / (32.0 * nn * nn * nn * mm * mass);

  r.t1_star = star_time(lambda0, r.r_w * lambda0 * a / (2.0 * sn * (sn * r.beta2 + r.r_a) * residual0));
  r.t2_star = star_time(
      lambda0, r.r_a * lambda0 * a / (2.0 * sn * (3.0 * r.beta1 * std::sqrt(std::log(mm * nn * nn)) + r.r_w) * residual0));
  r.t_star = std::min(r.t1_star, r.t2_star);
  r.valid = r.r_a > 0.0 && r.r_w > 0.0 && r.t1_star > 0.0 && r.t2_star > 0.0;
  return r;
}

double movement_bound_w(const EarlyTrainingRadii& r, double t) {
  const double sn = std::sqrt(static_cast<double>(r.n));
  return (2.0 * sn / (r.lambda0 * r.alpha)) * (sn * r.beta2 + r.r_a) * r.residual0 *
         -std::expm1(-r.lambda0 * t / 2.0);
}

double movement_bound_a(const EarlyTrainingRadii& r, double t) {
  const double nn = static_cast<double>(r.n);
  const double sn = std::sqrt(nn);
  const double mm = static_cast<double>(r.m);
  return (2.0 * sn / (r.lambda0 * r.alpha)) * (3.0 * r.beta1 * std::sqrt(std::log(mm * nn * nn)) + r.r_w) *
         r.residual0 * -std::expm1(-r.lambda0 * t / 2.0);
}

double concentration_alpha(std::size_t n, double beta2, double lambda0_at_unit_alpha, double alpha_scale) {
  require(alpha_scale > 0.0, ErrorKind::InvalidParameter, "alpha_scale must be > 0");
  require(lambda0_at_unit_alpha > 0.0, ErrorKind::DegenerateKernel, "lambda0 must be > 0");
  const double nn = static_cast<double>(n);
  return lambda0_at_unit_alpha / (alpha_scale * 16.0 * nn * beta2 * std::sqrt(std::log(2.0 * nn * nn * nn)));
}

}  // namespace rlab

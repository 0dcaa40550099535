#pragma once

// Closed-form stability bounds, the non-lazy regime predicate and the
// two-layer gram-matrix machinery (H-infinity, H(t), H-hat, G(t), radii).
// Suppressed constants are set to 1, so values are orders, not certificates.

#include <limits>
#include <string_view>

#include "rlab/data.hpp"
#include "rlab/network.hpp"

namespace rlab {

struct BoundReport {
  double gamma = 0.0;   // beta / sqrt(2/m) of the hidden layers
  double thm1 = 0.0;    // general depth-L bound on P/eps
  double table1 = 0.0;  // scheme-specialized closed form (equals thm1 for NonLazy/Custom)
  double wu = 0.0;      // L^2 m^(1/3) sqrt(log m) + sqrt(m L)
  double huang = 0.0;   // 2^((3L-5)/2) sqrt(m)
};

/// Hidden-layer gain; exactly 1 for He and NTK and sqrt(2)/2 for LeCun.
double gain(const NetworkConfig& cfg);

BoundReport thm1_bound(const NetworkConfig& cfg);

/// Two-layer non-lazy bound ((sqrt(n ln m) + n) / m^(c-1)) (1/sqrt(n^3 m) + 1/m^(c-1/2)).
/// Throws out-of-regime for c < 1.5.
double thm3_bound(std::size_t n, std::size_t m, double c);

enum class LazyClass { Lazy, Indeterminate, NonLazyCandidate };
std::string_view to_string(LazyClass c);

struct NonLazyVerdict {
  double rho = 0.0;  // alpha / (m^(3/2) sum beta)^L
  LazyClass cls = LazyClass::Indeterminate;
};

NonLazyVerdict nonlazy_predicate(const NetworkConfig& cfg);

// ---------------------------------------------------------------------------
// Gram matrices of f(x) = (1/alpha) sum_r a_r relu(w_r . x)
// ---------------------------------------------------------------------------

/// (m beta_2^2 / alpha^2) x_i.x_j (pi - arccos(x_i.x_j)) / (2 pi), with
/// w ~ N(0, beta_1^2 I), a ~ N(0, beta_2^2). Inputs must be unit norm (1e-8).
Matrix gram_h_infinity(const Dataset& data, const NetworkConfig& cfg);

/// (1/alpha^2) sum_r a_r^2 x_i.x_j 1{w_r.x_i >= 0, w_r.x_j >= 0}.
Matrix gram_h(const Network& net, const Dataset& data);
/// As gram_h but with the sign patterns of the initial hidden weights.
Matrix gram_h_hat(const Network& net, const Dataset& data);
/// (1/alpha^2) sum_r relu(w_r.x_i) relu(w_r.x_j).
Matrix gram_g(const Network& net, const Dataset& data);

/// Smallest eigenvalue of H-infinity. Raises degenerate-kernel when it is
/// below 1e-10 times the mean diagonal entry.
double kernel_lambda0(const Matrix& h_inf);

struct GramSet {
  Matrix h_inf;
  Matrix h_t;
  Matrix h_hat;
  Matrix g_t;
  double lambda0 = 0.0;
};

GramSet gram_set(const Network& net, const Dataset& data);

// ---------------------------------------------------------------------------
// Early-training radii
// ---------------------------------------------------------------------------

struct EarlyTrainingRadii {
  double r_a = 0.0;
  double r_w = 0.0;
  double t1_star = 0.0;  // +inf when the log argument is <= 0
  double t2_star = 0.0;
  double t_star = 0.0;   // min(t1_star, t2_star)
  double residual0 = 0.0;
  /// R_a > 0, R_w > 0 and both times positive.
  bool valid = false;

  // Inputs, kept for the movement bounds.
  double alpha = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double lambda0 = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
};

/// Literal evaluation for a two-layer config; lambda0 <= 0 raises degenerate-kernel.
EarlyTrainingRadii radii_and_times(const NetworkConfig& cfg, double lambda0, std::size_t n, double residual0);

/// (2 sqrt(n) / (lambda0 alpha)) (sqrt(n) beta_2 + R_a) ||y - f(0)|| (1 - e^(-lambda0 t / 2)).
double movement_bound_w(const EarlyTrainingRadii& r, double t);
/// (2 sqrt(n) / (lambda0 alpha)) (3 beta_1 sqrt(log(m n^2)) + R_w) ||y - f(0)|| (1 - e^(-lambda0 t / 2)).
double movement_bound_a(const EarlyTrainingRadii& r, double t);

/// The alpha with alpha = alpha_scale * 16 n beta_2 sqrt(log(2 n^3)) / lambda0(alpha).
/// lambda0 scales as 1/alpha^2, so this is lambda0(1) / (alpha_scale * 16 n beta_2 sqrt(log(2 n^3))).
double concentration_alpha(std::size_t n, double beta2, double lambda0_at_unit_alpha, double alpha_scale);

}  // namespace rlab

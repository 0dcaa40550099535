#pragma once

// Monte-Carlo and numerical checks of the supporting lemmas. Each check
// reports a statistic against a threshold (pass iff statistic <= threshold)
// and has a deliberately broken variant that must fail.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rlab/data.hpp"
#include "rlab/network.hpp"
#include "rlab/theory.hpp"

namespace rlab {

struct LemmaVerdict {
  std::string id;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::size_t n_samples = 0;
  std::string details;
};

/// X = (w 1{w >= 0})^2 against Y = s w'^2, s ~ Bernoulli(1/2), w, w' ~ N(0, sigma^2).
/// Statistic: max(D / D_crit, alpha / p_zero) of the atom-aware KS comparison.
/// The control drops the Bernoulli mask.
LemmaVerdict validate_relu_square_law(std::size_t n_samples, double sigma, double alpha, std::uint64_t seed,
                                      bool control = false);

/// q ||relu(W h)||^2 / (2 ||h||^2) with W ~ N(0, 2/q) against chi^2(rho),
/// rho ~ Binomial(q, 1/2). The control mixes with Binomial(q, 0.7).
LemmaVerdict validate_chi_square_mixture(std::size_t q, std::size_t n_samples, double alpha, std::uint64_t seed,
                                         bool control = false);

/// Mean of ||D W t||^2 / ||t||^2 over fresh m x m layers, D the sign mask of
/// W h, against gamma^2 = m beta^2 / 2. Statistic |mean - gamma^2| / stderr,
/// threshold 4. The control samples with 2 beta.
LemmaVerdict validate_layer_norm_ratio(const NetworkConfig& cfg, std::size_t n_samples, std::uint64_t seed,
                                       bool control = false);

enum class FlowControl { None, SignFlipped, WithoutG };

/// One Euler step of the flow against (H + G)(y - f). Statistic: relative
/// error of the finite-difference output velocity; threshold 0.05.
/// eta = 0 selects 1e-4 alpha^2 / n.
LemmaVerdict validate_flow_dynamics(const Network& net, const Dataset& data, double eta = 0.0,
                                    FlowControl control = FlowControl::None);

struct MovementOptions {
  double t_end = 0.0;
  double eta = 0.0;     // 0 selects the integrator default
  double slack = 1.1;
  /// Evaluate the bounds with lambda0 multiplied by this factor (control).
  double lambda0_factor = 1.0;
};

/// Integrates the flow to t_end and checks, at every step, the hidden and
/// output weight movement against the radius bounds and the residual against
/// e^(-lambda0 t) ||y - f(0)||^2. Statistic: worst ratio; threshold: slack.
LemmaVerdict validate_weight_movement(const Network& net, const Dataset& data, const EarlyTrainingRadii& radii,
                                      const MovementOptions& opt);

/// min(t1*, t2*) when the radii are valid and finite, else 2 / lambda0.
double movement_horizon(const EarlyTrainingRadii& radii);

struct ConcentrationOptions {
  std::size_t n = 4;
  std::size_t d = 16;
  std::vector<std::size_t> widths{4096};
  InitScheme scheme = InitScheme::NTK;
  double c = 0.0;
  double alpha_scale = 10.0;
  std::size_t seeds = 20;
  double required_rate = 0.9;
  /// Compare against H-infinity of twice the output-weight variance.
  bool control = false;
};

/// Fraction of fresh inits with ||H(0) - Hinf||_2 <= lambda0/4 and
/// lambda_min(H(0)) >= 3 lambda0 / 4. Statistic: 1 - worst per-width rate,
/// threshold 1 - required_rate.
LemmaVerdict validate_gram_concentration(const ConcentrationOptions& opt, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Named runs with default parameters, for the command line.
// ---------------------------------------------------------------------------

const std::vector<std::string>& lemma_ids();

struct LemmaRequest {
  std::string id;
  std::uint64_t seed = 0;
  std::optional<std::size_t> n_samples;
  bool control = false;
};

LemmaVerdict run_lemma(const LemmaRequest& req);

/// Setup shared by the flow-based lemmas: a two-layer scalar network and a
/// unit-sphere regression set.
struct TwoLayerProblem {
  Network net;
  Dataset data;
};

TwoLayerProblem make_two_layer_problem(const NetworkConfig& cfg, std::size_t n, std::uint64_t seed);

}  // namespace rlab

#pragma once

// Monte-Carlo perturbation stability E ||J_f(x) (x - x_hat)||, x_hat uniform
// in the eps-ball around x, and the trained-vs-initial gradient drift.

#include <cstdint>

#include "rlab/data.hpp"
#include "rlab/network.hpp"

namespace rlab {

struct StabilityConfig {
  double eps = 0.1;
  std::size_t n_points = 512;
  std::size_t n_dirs = 16;
  std::uint64_t seed = 0;

  void validate() const;
};

struct StabilityEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_total = 0;
};

/// Points are drawn without replacement (all points when n_points >= n).
/// Every point has its own substream, so the offsets do not depend on the
/// network and are reused exactly across calls with the same seed.
StabilityEstimate perturbation_stability(const Network& net, const Dataset& data, const StabilityConfig& cfg);

/// Mean over sampled points and random unit directions u of
/// ||J_trained(x) u - J_init(x) u||, where J_init uses the initial weights
/// and their own sign masks.
double gradient_drift(const Network& net, const Dataset& data, std::size_t n_points, std::uint64_t seed,
                      std::size_t n_dirs = 4);

/// Dense o x d input Jacobian at the trace's activation pattern.
Matrix input_jacobian(const Network& net, const ForwardTrace& trace);

}  // namespace rlab

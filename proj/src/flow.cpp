#include <cmath>
#include <string>

#include "rlab/training.hpp"

namespace rlab {

void require_two_layer_scalar(const Network& net, const Dataset& data) {
  require(net.depth() == 2, ErrorKind::InvalidInput, "expected a two-layer network");
  require(net.config().o == 1, ErrorKind::InvalidInput, "expected a scalar-output network");
  require(data.d() == net.config().d && data.o() == 1, ErrorKind::InvalidInput,
          "dataset does not match the two-layer scalar network");
}

double default_flow_eta(const Network& net, std::size_t n) {
  require(n > 0, ErrorKind::InvalidInput, "empty dataset");
  return 1e-3 * net.alpha() * net.alpha() / static_cast<double>(n);
}

Vector flow_residual(const Network& net, const Dataset& data) {
  const Matrix f = forward_batch(net, data.inputs);
  Vector r(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) r[i] = data.labels(i, 0) - f(i, 0);
  return r;
}

namespace {

FlowSnapshot snapshot(double t, const Network& net, const Vector& residual) {
  return FlowSnapshot{t, net.weight(0), Vector(net.weight(1).values().begin(), net.weight(1).values().end()),
                      residual};
}

bool finite(const Network& net) {
  for (const auto& w : net.weights())
    if (!w.all_finite()) return false;
  return true;
}

}  // namespace

FlowTrajectory integrate_gradient_flow(const Network& start, const Dataset& data, const FlowOptions& opt,
                                       Network* final_net) {
  require_two_layer_scalar(start, data);
  require(std::isfinite(opt.t_max) && opt.t_max >= 0.0, ErrorKind::InvalidParameter, "t_max must be >= 0");
  const double eta = opt.eta > 0.0 ? opt.eta : default_flow_eta(start, data.n());
  require(std::isfinite(eta), ErrorKind::InvalidParameter, "step size must be finite");

  Network net = start;
  const auto n = static_cast<double>(data.n());
  FlowTrajectory traj;
  double t = 0.0;
  Vector res = flow_residual(net, data);
  traj.snapshots.push_back(snapshot(t, net, res));
  if (opt.observer) opt.observer(t, net, res);

  // The batch-mean squared-loss gradient times n is the gradient of the
  // summed loss sum_i (f_i - y_i)^2 / 2.
  while (t < opt.t_max) {
    const double h = std::min(eta, opt.t_max - t);
    GradientResult g = weight_gradients(net, data.inputs, data.labels, Loss::Squared);
    for (std::size_t l = 0; l < 2; ++l) {
      Matrix& w = net.mutable_weight(l);
      const Matrix& gl = g.grads[l];
      for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] -= h * n * gl.data()[i];
    }
    ++traj.steps;
    // Avoid drift from repeated summation: time is step count times eta
    // except for the final, shortened step.
    t = h < eta ? opt.t_max : static_cast<double>(traj.steps) * eta;
    if (t > opt.t_max) t = opt.t_max;
    res = flow_residual(net, data);
    bool ok = finite(net);
    for (double v : res) ok = ok && std::isfinite(v);
    require(ok, ErrorKind::IntegrationDiverged, "state became non-finite at t = " + std::to_string(t));
    const bool last = t >= opt.t_max;
    if (last || (opt.snapshot_every > 0 && traj.steps % opt.snapshot_every == 0))
      traj.snapshots.push_back(snapshot(t, net, res));
    if (opt.observer) opt.observer(t, net, res);
  }
  if (final_net) *final_net = std::move(net);
  return traj;
}

}  // namespace rlab

#pragma once

// Minibatch SGD, the lazy-training ratio and an explicit-Euler gradient-flow
// integrator for two-layer scalar networks.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rlab/data.hpp"
#include "rlab/error.hpp"
#include "rlab/network.hpp"

namespace rlab {

/// Step decay: the rate is multiplied by factor at the start of epochs
/// after_epoch + 1, after_epoch + 1 + every, ...
struct LrSchedule {
  std::size_t after_epoch = 25;
  double factor = 0.1;
  std::size_t every = 10;
};

struct TrainHyper {
  std::size_t epochs = 20;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  LrSchedule schedule;
  Loss loss = Loss::CrossEntropy;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Learning rate used during the given 1-based epoch.
double lr_at_epoch(const TrainHyper& hyper, std::size_t epoch);

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;      // mean minibatch loss over the epoch (full-data loss for epoch 0)
  double accuracy = 0.0;  // same convention
  double kappa = 0.0;
  double elapsed_s = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> records;

  /// epoch,loss,accuracy,kappa,elapsed_s
  std::string to_csv() const;
};

/// Thrown on divergence; carries the log up to the failing epoch.
class TrainingDivergedError : public Error {
 public:
  TrainingDivergedError(const std::string& what, TrainLog log)
      : Error(ErrorKind::TrainingDiverged, what), log_(std::move(log)) {}
  const TrainLog& log() const noexcept { return log_; }

 private:
  TrainLog log_;
};

struct TrainCallbacks {
  /// Called after every record, including the pre-training one.
  std::function<void(const EpochRecord&, const Network&)> on_epoch;
};

TrainLog sgd_train(Network& net, const Dataset& data, const TrainHyper& hyper,
                   const TrainCallbacks& callbacks = {});

/// One full-batch gradient-descent step on the batch-mean loss; returns the
/// loss before the step.
double gd_step(Network& net, const Matrix& inputs, const Matrix& labels, Loss loss, double lr);

/// sum_l ||W_l - W_l(0)||_F / sum_l ||W_l(0)||_F.
double lazy_ratio(const Network& net);

// ---------------------------------------------------------------------------
// Gradient flow
// ---------------------------------------------------------------------------

struct FlowSnapshot {
  double t = 0.0;
  Matrix w;       // m x d hidden weights
  Vector a;       // output weights
  Vector residual;  // y - f(t)
};

struct FlowTrajectory {
  std::vector<FlowSnapshot> snapshots;
  std::size_t steps = 0;
};

struct FlowOptions {
  double eta = 0.0;  // 0 selects 1e-3 * alpha^2 / n
  double t_max = 0.0;
  std::size_t snapshot_every = 1;  // steps between stored snapshots; 0 stores only the ends
  /// Called at every step, including t = 0 and the final time.
  std::function<void(double t, const Network& net, const Vector& residual)> observer;
};

double default_flow_eta(const Network& net, std::size_t n);

/// y - f over the dataset for a two-layer scalar network.
Vector flow_residual(const Network& net, const Dataset& data);

/// Explicit Euler on the full-batch flow of sum_i (f_i - y_i)^2 / 2. Works on
/// a copy; the final network state is returned through final_net if given.
FlowTrajectory integrate_gradient_flow(const Network& net, const Dataset& data, const FlowOptions& opt,
                                       Network* final_net = nullptr);

/// Throws invalid-input unless net is two-layer with scalar output and
/// matches the dataset.
void require_two_layer_scalar(const Network& net, const Dataset& data);

}  // namespace rlab

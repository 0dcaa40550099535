#include "rlab/training.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace rlab {

void TrainHyper::validate() const {
  require(epochs >= 1, ErrorKind::InvalidParameter, "epochs must be >= 1");
  require(batch_size >= 1, ErrorKind::InvalidParameter, "batch size must be >= 1");
  require(std::isfinite(lr) && lr >= 0.0, ErrorKind::InvalidParameter, "learning rate must be >= 0");
  require(schedule.factor > 0.0 && schedule.factor <= 1.0, ErrorKind::InvalidParameter,
          "lr decay factor must lie in (0, 1]");
  require(schedule.every >= 1, ErrorKind::InvalidParameter, "lr decay period must be >= 1");
}

double lr_at_epoch(const TrainHyper& hyper, std::size_t epoch) {
  const LrSchedule& s = hyper.schedule;
  if (epoch <= s.after_epoch) return hyper.lr;
  const std::size_t k = (epoch - s.after_epoch - 1) / s.every + 1;
  return hyper.lr * std::pow(s.factor, static_cast<double>(k));
}

std::string TrainLog::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,loss,accuracy,kappa,elapsed_s\n";
  for (const auto& r : records)
    os << r.epoch << ',' << r.loss << ',' << r.accuracy << ',' << r.kappa << ',' << r.elapsed_s << '\n';
  return os.str();
}

double lazy_ratio(const Network& net) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t l = 0; l < net.depth(); ++l) {
    num += (net.weight(l) - net.init_weights()[l]).frobenius_norm();
    den += net.init_weights()[l].frobenius_norm();
  }
  require(den > 0.0, ErrorKind::UndefinedRatio, "initial weights have zero norm");
  return num / den;
}

double gd_step(Network& net, const Matrix& inputs, const Matrix& labels, Loss loss, double lr) {
  GradientResult g = weight_gradients(net, inputs, labels, loss);
  if (lr != 0.0) {
    for (std::size_t l = 0; l < net.depth(); ++l) {
      Matrix& w = net.mutable_weight(l);
      const Matrix& gl = g.grads[l];
      for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] -= lr * gl.data()[i];
    }
  }
  return g.loss;
}

namespace {

bool diverged(double loss) { return !std::isfinite(loss) || loss > 1e12; }

void gather(const Dataset& data, const std::vector<std::size_t>& perm, std::size_t begin,
            std::size_t count, Matrix& x, Matrix& y) {
  if (x.rows() != count) {
    x = Matrix(count, data.d());
    y = Matrix(count, data.o());
  }
  for (std::size_t r = 0; r < count; ++r) {
    const std::size_t i = perm[begin + r];
    std::copy_n(data.x(i).begin(), data.d(), x.row(r).begin());
    std::copy_n(data.y(i).begin(), data.o(), y.row(r).begin());
  }
}

}  // namespace

TrainLog sgd_train(Network& net, const Dataset& data, const TrainHyper& hyper,
                   const TrainCallbacks& callbacks) {
  hyper.validate();
  require(data.n() > 0, ErrorKind::InvalidInput, "training set is empty");
  require(data.d() == net.config().d && data.o() == net.config().o, ErrorKind::InvalidInput,
          "dataset dimensions do not match the network");

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto seconds = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  TrainLog log;
  {
    const Matrix out = forward_batch(net, data.inputs);
    EpochRecord r0;
    r0.loss = batch_loss(out, data.labels, hyper.loss);
    r0.accuracy = accuracy(out, data.labels);
    r0.elapsed_s = seconds();
    log.records.push_back(r0);
    if (callbacks.on_epoch) callbacks.on_epoch(r0, net);
    if (diverged(r0.loss)) throw TrainingDivergedError("non-finite loss at initialization", log);
  }

  RngStream shuffle = RngStream(hyper.seed).substream(hash_name("sgd-shuffle"));
  Matrix xb;
  Matrix yb;
  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    const double lr = lr_at_epoch(hyper, epoch);
    const auto perm = random_permutation(data.n(), shuffle);
    double loss_sum = 0.0;
    double hits = 0.0;
    for (std::size_t begin = 0; begin < data.n(); begin += hyper.batch_size) {
      const std::size_t count = std::min(hyper.batch_size, data.n() - begin);
      gather(data, perm, begin, count, xb, yb);
      GradientResult g = weight_gradients(net, xb, yb, hyper.loss);
      const auto b = static_cast<double>(count);
      if (diverged(g.loss)) {
        throw TrainingDivergedError("loss " + std::to_string(g.loss) + " in epoch " + std::to_string(epoch),
                                    log);
      }
      loss_sum += g.loss * b;
      hits += accuracy(g.outputs, yb) * b;
      if (lr != 0.0) {
        for (std::size_t l = 0; l < net.depth(); ++l) {
          Matrix& w = net.mutable_weight(l);
          const Matrix& gl = g.grads[l];
          for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] -= lr * gl.data()[i];
        }
      }
    }
    EpochRecord r;
    r.epoch = epoch;
    r.loss = loss_sum / static_cast<double>(data.n());
    r.accuracy = hits / static_cast<double>(data.n());
    r.kappa = lazy_ratio(net);
    r.elapsed_s = seconds();
    if (!std::isfinite(r.kappa))
      throw TrainingDivergedError("non-finite weights after epoch " + std::to_string(epoch), log);
    log.records.push_back(r);
    if (callbacks.on_epoch) callbacks.on_epoch(r, net);
  }
  return log;
}

}  // namespace rlab

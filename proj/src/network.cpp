#include "rlab/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "eigen_view.hpp"
#include "rlab/error.hpp"

namespace rlab {

std::vector<double> scheme_betas(InitScheme scheme, std::size_t d, std::size_t m, std::size_t o,
                                 std::size_t depth, double c) {
  std::vector<double> b(depth);
  const auto dd = static_cast<double>(d);
  const auto mm = static_cast<double>(m);
  const auto oo = static_cast<double>(o);
  for (std::size_t l = 0; l < depth; ++l) {
    const double fan_in = l == 0 ? dd : mm;
    switch (scheme) {
      case InitScheme::LeCun: b[l] = std::sqrt(1.0 / fan_in); break;
      case InitScheme::He: b[l] = std::sqrt(2.0 / fan_in); break;
      case InitScheme::NTK: b[l] = l + 1 == depth ? std::sqrt(1.0 / oo) : std::sqrt(2.0 / mm); break;
      case InitScheme::NonLazy: b[l] = std::pow(mm, -c); break;
      case InitScheme::Custom:
        fail(ErrorKind::InvalidParameter, "custom scheme has no prescribed betas");
    }
  }
  return b;
}

NetworkConfig NetworkConfig::make(InitScheme scheme, std::size_t d, std::size_t m, std::size_t o,
                                  std::size_t depth, double alpha, double c) {
  NetworkConfig cfg;
  cfg.d = d;
  cfg.m = m;
  cfg.o = o;
  cfg.depth = depth;
  cfg.alpha = alpha;
  cfg.scheme = scheme;
  cfg.c = scheme == InitScheme::NonLazy ? c : 0.0;
  require(depth >= 2, ErrorKind::InvalidParameter, "depth must be >= 2");
  require(d > 0 && m > 0 && o > 0, ErrorKind::InvalidParameter, "dimensions must be positive");
  require(scheme != InitScheme::NonLazy || c >= 1.5, ErrorKind::InvalidParameter,
          "non-lazy exponent c must be >= 1.5");
  cfg.betas = scheme_betas(scheme, d, m, o, depth, cfg.c);
  cfg.validate();
  return cfg;
}

void NetworkConfig::validate() const {
  require(depth >= 2, ErrorKind::InvalidParameter, "depth must be >= 2");
  require(d > 0 && m > 0 && o > 0, ErrorKind::InvalidParameter, "dimensions must be positive");
  require(std::isfinite(alpha) && alpha > 0.0, ErrorKind::InvalidParameter, "alpha must be > 0");
  require(betas.size() == depth, ErrorKind::InvalidParameter, "need one beta per layer");
  for (double b : betas)
    require(std::isfinite(b) && b > 0.0, ErrorKind::InvalidParameter, "betas must be > 0");
  if (scheme == InitScheme::Custom) return;
  require(scheme != InitScheme::NonLazy || c >= 1.5, ErrorKind::InvalidParameter,
          "non-lazy exponent c must be >= 1.5");
  const auto expected = scheme_betas(scheme, d, m, o, depth, c);
  for (std::size_t l = 0; l < depth; ++l)
    require(std::abs(betas[l] - expected[l]) <= 1e-12 * expected[l], ErrorKind::InvalidParameter,
            "beta of layer " + std::to_string(l + 1) + " is inconsistent with scheme " +
                scheme_name(scheme, c));
}

std::string scheme_name(InitScheme scheme, double c) {
  switch (scheme) {
    case InitScheme::LeCun: return "lecun";
    case InitScheme::He: return "he";
    case InitScheme::NTK: return "ntk";
    case InitScheme::NonLazy: {
      std::ostringstream os;
      os << "nonlazy:" << c;
      return os.str();
    }
    case InitScheme::Custom: return "custom";
  }
  return "custom";
}

ParsedScheme parse_scheme(std::string_view name) {
  if (name == "lecun") return {InitScheme::LeCun};
  if (name == "he") return {InitScheme::He};
  if (name == "ntk") return {InitScheme::NTK};
  if (name == "custom") return {InitScheme::Custom};
  if (name == "nonlazy") return {InitScheme::NonLazy, 2.0};
  constexpr std::string_view prefix = "nonlazy:";
  if (name.starts_with(prefix)) {
    const std::string rest(name.substr(prefix.size()));
    std::size_t used = 0;
    double c = 0.0;
    try {
      c = std::stod(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == rest.size() && used > 0, ErrorKind::InvalidParameter,
            "bad non-lazy exponent in '" + std::string(name) + "'");
    require(c >= 1.5, ErrorKind::InvalidParameter, "non-lazy exponent c must be >= 1.5");
    return {InitScheme::NonLazy, c};
  }
  fail(ErrorKind::InvalidParameter, "unknown initialization scheme '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

namespace {

void check_shapes(const NetworkConfig& cfg, const std::vector<Matrix>& w, const char* what) {
  require(w.size() == cfg.depth, ErrorKind::InvalidInput,
          std::string(what) + ": expected " + std::to_string(cfg.depth) + " layers");
  for (std::size_t l = 0; l < w.size(); ++l)
    require(w[l].rows() == cfg.fan_out(l) && w[l].cols() == cfg.fan_in(l), ErrorKind::InvalidInput,
            std::string(what) + ": layer " + std::to_string(l + 1) + " has the wrong shape");
}

}  // namespace

Network::Network(NetworkConfig config, std::vector<Matrix> weights)
    : config_(std::move(config)), weights_(std::move(weights)), init_weights_(weights_) {
  config_.validate();
  check_shapes(config_, weights_, "weights");
}

Network::Network(NetworkConfig config, std::vector<Matrix> weights, std::vector<Matrix> init_weights)
    : config_(std::move(config)), weights_(std::move(weights)), init_weights_(std::move(init_weights)) {
  config_.validate();
  check_shapes(config_, weights_, "weights");
  check_shapes(config_, init_weights_, "init weights");
}

void Network::set_alpha(double alpha) {
  require(std::isfinite(alpha) && alpha > 0.0, ErrorKind::InvalidParameter, "alpha must be > 0");
  config_.alpha = alpha;
}

Network init_network(const NetworkConfig& config, RngStream& rng) {
  config.validate();
  std::vector<Matrix> w;
  w.reserve(config.depth);
  for (std::size_t l = 0; l < config.depth; ++l)
    w.push_back(sample_gaussian_matrix(config.fan_out(l), config.fan_in(l), config.betas[l], rng));
  return Network(config, std::move(w));
}

// ---------------------------------------------------------------------------
// Single-input evaluation
// ---------------------------------------------------------------------------

ForwardTrace forward(std::span<const Matrix> weights, double alpha, std::span<const double> x) {
  require(!weights.empty(), ErrorKind::InvalidInput, "network has no layers");
  require(x.size() == weights.front().cols(), ErrorKind::InvalidInput,
          "input has dimension " + std::to_string(x.size()) + ", network expects " +
              std::to_string(weights.front().cols()));
  const std::size_t depth = weights.size();
  ForwardTrace t;
  t.activations.reserve(depth);
  t.signs.reserve(depth - 1);
  t.activations.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l + 1 < depth; ++l) {
    Vector pre = matvec(weights[l], t.activations.back());
    std::vector<std::uint8_t> mask(pre.size());
    for (std::size_t k = 0; k < pre.size(); ++k) {
      mask[k] = pre[k] >= 0.0 ? 1 : 0;
      if (!mask[k]) pre[k] = 0.0;
    }
    t.signs.push_back(std::move(mask));
    t.activations.push_back(std::move(pre));
  }
  t.output = matvec(weights.back(), t.activations.back());
  for (double& v : t.output) v /= alpha;
  return t;
}

ForwardTrace forward(const Network& net, std::span<const double> x) {
  return forward(net.weights(), net.alpha(), x);
}

Vector input_jvp(std::span<const Matrix> weights, double alpha, const ForwardTrace& trace,
                 std::span<const double> delta) {
  require(trace.signs.size() + 1 == weights.size(), ErrorKind::InvalidInput,
          "trace does not belong to this network");
  require(delta.size() == weights.front().cols(), ErrorKind::InvalidInput,
          "tangent has the wrong dimension");
  Vector t(delta.begin(), delta.end());
  for (std::size_t l = 0; l + 1 < weights.size(); ++l) {
    t = matvec(weights[l], t);
    const auto& mask = trace.signs[l];
    require(mask.size() == t.size(), ErrorKind::InvalidInput, "trace mask has the wrong size");
    for (std::size_t k = 0; k < t.size(); ++k)
      if (!mask[k]) t[k] = 0.0;
  }
  Vector out = matvec(weights.back(), t);
  for (double& v : out) v /= alpha;
  return out;
}

Vector input_jvp(const Network& net, const ForwardTrace& trace, std::span<const double> delta) {
  return input_jvp(net.weights(), net.alpha(), trace, delta);
}

Matrix input_jvp_columns(std::span<const Matrix> weights, double alpha, const ForwardTrace& trace,
                         const Matrix& deltas) {
  require(trace.signs.size() + 1 == weights.size(), ErrorKind::InvalidInput,
          "trace does not belong to this network");
  require(deltas.rows() == weights.front().cols(), ErrorKind::InvalidInput,
          "tangents have the wrong dimension");
  Matrix t = deltas;
  for (std::size_t l = 0; l + 1 < weights.size(); ++l) {
    t = matmul(weights[l], t);
    const auto& mask = trace.signs[l];
    for (std::size_t k = 0; k < t.rows(); ++k)
      if (!mask[k]) std::fill(t.row(k).begin(), t.row(k).end(), 0.0);
  }
  Matrix out = matmul(weights.back(), t);
  for (double& v : out.values()) v /= alpha;
  return out;
}

// ---------------------------------------------------------------------------
// Batched evaluation and backpropagation
// ---------------------------------------------------------------------------

Loss parse_loss(std::string_view name) {
  if (name == "squared" || name == "mse") return Loss::Squared;
  if (name == "cross-entropy" || name == "ce") return Loss::CrossEntropy;
  fail(ErrorKind::InvalidParameter, "unknown loss '" + std::string(name) + "'");
}

std::string_view loss_name(Loss loss) {
  return loss == Loss::Squared ? "squared" : "cross-entropy";
}

namespace {

struct BatchTrace {
  std::vector<Matrix> activations;  // B x fan_in per layer, h_0..h_{L-1}
  std::vector<std::vector<std::uint8_t>> masks;  // 1{pre >= 0}, same layout as activations[1..]
  Matrix outputs;
};

BatchTrace forward_batch_trace(const Network& net, const Matrix& inputs) {
  require(inputs.cols() == net.config().d, ErrorKind::InvalidInput, "batch has the wrong input dimension");
  BatchTrace bt;
  bt.activations.reserve(net.depth());
  bt.activations.push_back(inputs);
  for (std::size_t l = 0; l + 1 < net.depth(); ++l) {
    const Matrix& w = net.weight(l);
    Matrix h(inputs.rows(), w.rows());
    detail::view(h).noalias() = detail::view(bt.activations.back()) * detail::view(w).transpose();
    std::vector<std::uint8_t> mask(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
      mask[i] = h.data()[i] >= 0.0 ? 1 : 0;
      if (!mask[i]) h.data()[i] = 0.0;
    }
    bt.masks.push_back(std::move(mask));
    bt.activations.push_back(std::move(h));
  }
  const Matrix& wl = net.weights().back();
  bt.outputs = Matrix(inputs.rows(), wl.rows());
  detail::view(bt.outputs).noalias() = detail::view(bt.activations.back()) * detail::view(wl).transpose();
  for (double& v : bt.outputs.values()) v /= net.alpha();
  return bt;
}

// Gradient of the batch-mean loss with respect to the outputs.
Matrix output_gradient(const Matrix& outputs, const Matrix& labels, Loss loss) {
  const auto b = static_cast<double>(outputs.rows());
  Matrix g(outputs.rows(), outputs.cols());
  if (loss == Loss::Squared) {
    for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] = (outputs.data()[i] - labels.data()[i]) / b;
    return g;
  }
  for (std::size_t r = 0; r < outputs.rows(); ++r) {
    const auto f = outputs.row(r);
    const double mx = *std::max_element(f.begin(), f.end());
    double z = 0.0;
    for (double v : f) z += std::exp(v - mx);
    const auto y = labels.row(r);
    double ysum = 0.0;
    for (double v : y) ysum += v;
    for (std::size_t k = 0; k < f.size(); ++k) g(r, k) = (ysum * std::exp(f[k] - mx) / z - y[k]) / b;
  }
  return g;
}

}  // namespace

Matrix forward_batch(const Network& net, const Matrix& inputs) {
  return forward_batch_trace(net, inputs).outputs;
}

double batch_loss(const Matrix& outputs, const Matrix& labels, Loss loss) {
  require(outputs.rows() == labels.rows() && outputs.cols() == labels.cols(), ErrorKind::InvalidInput,
          "outputs and labels differ in shape");
  require(outputs.rows() > 0, ErrorKind::InvalidInput, "empty batch");
  const auto b = static_cast<double>(outputs.rows());
  double total = 0.0;
  if (loss == Loss::Squared) {
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      const double e = outputs.data()[i] - labels.data()[i];
      total += 0.5 * e * e;
    }
    return total / b;
  }
  require(outputs.cols() >= 2, ErrorKind::InvalidParameter, "cross-entropy needs o >= 2");
  for (std::size_t r = 0; r < outputs.rows(); ++r) {
    const auto f = outputs.row(r);
    const double mx = *std::max_element(f.begin(), f.end());
    double z = 0.0;
    for (double v : f) z += std::exp(v - mx);
    const double lse = mx + std::log(z);
    const auto y = labels.row(r);
    for (std::size_t k = 0; k < f.size(); ++k) total -= y[k] * (f[k] - lse);
  }
  return total / b;
}

GradientResult weight_gradients(const Network& net, const Matrix& inputs, const Matrix& labels,
                                Loss loss) {
  require(inputs.rows() > 0, ErrorKind::InvalidInput, "empty batch");
  require(labels.rows() == inputs.rows() && labels.cols() == net.config().o, ErrorKind::InvalidInput,
          "labels do not match the batch");
  BatchTrace bt = forward_batch_trace(net, inputs);
  GradientResult res;
  res.loss = batch_loss(bt.outputs, labels, loss);
  Matrix delta = output_gradient(bt.outputs, labels, loss);
  delta *= 1.0 / net.alpha();

  const std::size_t depth = net.depth();
  res.grads.resize(depth);
  for (std::size_t l = depth; l-- > 0;) {
    const Matrix& h = bt.activations[l];
    const Matrix& w = net.weight(l);
    Matrix g(w.rows(), w.cols());
    detail::view(g).noalias() = detail::view(delta).transpose() * detail::view(h);
    res.grads[l] = std::move(g);
    if (l == 0) break;
    Matrix back(delta.rows(), w.cols());
    detail::view(back).noalias() = detail::view(delta) * detail::view(w);
    const auto& mask = bt.masks[l - 1];
    for (std::size_t i = 0; i < back.size(); ++i)
      if (!mask[i]) back.data()[i] = 0.0;
    delta = std::move(back);
  }
  res.outputs = std::move(bt.outputs);
  return res;
}

}  // namespace rlab

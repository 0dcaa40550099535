#include <algorithm>
#include <cmath>
#include <numbers>

#include "eigen_view.hpp"
#include "rlab/error.hpp"
#include "rlab/theory.hpp"
#include "rlab/training.hpp"

namespace rlab {

namespace {

Matrix inner_products(const Dataset& data) {
  Matrix k(data.n(), data.n());
  detail::view(k).noalias() = detail::view(data.inputs) * detail::view(data.inputs).transpose();
  for (std::size_t i = 0; i < k.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j) k(j, i) = k(i, j);
  return k;
}

// n x m pre-activations X W^T.
Matrix preactivations(const Matrix& w, const Dataset& data) {
  Matrix s(data.n(), w.rows());
  detail::view(s).noalias() = detail::view(data.inputs) * detail::view(w).transpose();
  return s;
}

Matrix sign_gram(const Matrix& pre, std::span<const double> a, const Dataset& data, double alpha) {
  Matrix masked(pre.rows(), pre.cols());
  for (std::size_t i = 0; i < pre.rows(); ++i)
    for (std::size_t r = 0; r < pre.cols(); ++r) masked(i, r) = pre(i, r) >= 0.0 ? a[r] : 0.0;
  Matrix h(pre.rows(), pre.rows());
  detail::view(h).noalias() = detail::view(masked) * detail::view(masked).transpose();
  const Matrix k = inner_products(data);
  const double s = 1.0 / (alpha * alpha);
  for (std::size_t i = 0; i < h.rows(); ++i)
    for (std::size_t j = 0; j <= i; ++j) h(i, j) = h(j, i) = s * k(i, j) * h(i, j);
  return h;
}

}  // namespace

Matrix gram_h_infinity(const Dataset& data, const NetworkConfig& cfg) {
  require(cfg.depth == 2, ErrorKind::InvalidInput, "H-infinity is defined for two-layer networks");
  for (std::size_t i = 0; i < data.n(); ++i)
    require(std::abs(norm2(data.x(i)) - 1.0) <= 1e-8, ErrorKind::InvalidInput,
            "input " + std::to_string(i) + " is not unit norm");
  const double scale = static_cast<double>(cfg.m) * cfg.betas[1] * cfg.betas[1] / (cfg.alpha * cfg.alpha);
  const Matrix k = inner_products(data);
  Matrix h(data.n(), data.n());
  for (std::size_t i = 0; i < h.rows(); ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double c = std::clamp(k(i, j), -1.0, 1.0);
      const double v = i == j ? scale * 0.5 : scale * c * (std::numbers::pi - std::acos(c)) / (2.0 * std::numbers::pi);
      h(i, j) = h(j, i) = v;
    }
  return h;
}

Matrix gram_h(const Network& net, const Dataset& data) {
  require_two_layer_scalar(net, data);
  return sign_gram(preactivations(net.weight(0), data), net.weight(1).values(), data, net.alpha());
}

Matrix gram_h_hat(const Network& net, const Dataset& data) {
  require_two_layer_scalar(net, data);
  return sign_gram(preactivations(net.init_weights()[0], data), net.weight(1).values(), data, net.alpha());
}

Matrix gram_g(const Network& net, const Dataset& data) {
  require_two_layer_scalar(net, data);
  Matrix s = preactivations(net.weight(0), data);
  for (double& v : s.values()) v = std::max(v, 0.0);
  Matrix g(data.n(), data.n());
  detail::view(g).noalias() = detail::view(s) * detail::view(s).transpose();
  const double sc = 1.0 / (net.alpha() * net.alpha());
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j <= i; ++j) g(i, j) = g(j, i) = sc * g(i, j);
  return g;
}

double kernel_lambda0(const Matrix& h_inf) {
  require(h_inf.rows() > 0, ErrorKind::InvalidInput, "empty kernel");
  double trace = 0.0;
  for (std::size_t i = 0; i < h_inf.rows(); ++i) trace += h_inf(i, i);
  const double lambda0 = min_eigenvalue(h_inf);
  const double floor = 1e-10 * trace / static_cast<double>(h_inf.rows());
  require(lambda0 > floor, ErrorKind::DegenerateKernel,
          "lambda0 = " + std::to_string(lambda0) + " is degenerate relative to the kernel scale");
  return lambda0;
}

GramSet gram_set(const Network& net, const Dataset& data) {
  GramSet g;
  g.h_inf = gram_h_infinity(data, net.config());
  g.h_t = gram_h(net, data);
  g.h_hat = gram_h_hat(net, data);
  g.g_t = gram_g(net, data);
  g.lambda0 = kernel_lambda0(g.h_inf);
  return g;
}

}  // namespace rlab

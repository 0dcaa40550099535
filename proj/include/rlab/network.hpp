#pragma once

// Bias-free depth-L fully-connected ReLU network
//
//   h_0 = x,   h_l = relu(W_l h_{l-1})  (l < L),   f(x) = (1/alpha) W_L h_{L-1}
//
// with W_1: m x d, W_2..W_{L-1}: m x m, W_L: o x m. The ReLU derivative at 0
// is taken as 1, so the sign mask of layer l is 1{W_l h_{l-1} >= 0}.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rlab/mathcore.hpp"

namespace rlab {

enum class InitScheme : std::uint8_t { LeCun = 0, He = 1, NTK = 2, NonLazy = 3, Custom = 4 };

struct NetworkConfig {
  std::size_t d = 0;      // input dimension
  std::size_t m = 0;      // hidden width
  std::size_t o = 0;      // output dimension
  std::size_t depth = 2;  // number of weight layers L
  double alpha = 1.0;     // output scale
  std::vector<double> betas;  // per-layer Gaussian std, size L
  InitScheme scheme = InitScheme::Custom;
  double c = 0.0;  // exponent of the NonLazy scheme (beta = m^-c), 0 otherwise

  /// Config with the betas the scheme prescribes.
  static NetworkConfig make(InitScheme scheme, std::size_t d, std::size_t m, std::size_t o,
                            std::size_t depth, double alpha = 1.0, double c = 0.0);

  /// Throws invalid-parameter when an invariant is broken.
  void validate() const;

  std::size_t fan_in(std::size_t layer) const { return layer == 0 ? d : m; }
  std::size_t fan_out(std::size_t layer) const { return layer + 1 == depth ? o : m; }

  /// Std of the hidden m x m layers (beta_2), or of the output layer when L = 2.
  double hidden_beta() const { return depth > 2 ? betas[1] : betas.back(); }

  bool operator==(const NetworkConfig&) const = default;
};

/// Scheme prescribed betas, in layer order.
std::vector<double> scheme_betas(InitScheme scheme, std::size_t d, std::size_t m, std::size_t o,
                                 std::size_t depth, double c);

/// "lecun", "he", "ntk", "nonlazy:<c>", "custom".
std::string scheme_name(InitScheme scheme, double c);
inline std::string scheme_name(const NetworkConfig& cfg) { return scheme_name(cfg.scheme, cfg.c); }

struct ParsedScheme {
  InitScheme scheme;
  double c = 0.0;
};
/// Inverse of scheme_name; "nonlazy" alone means c = 2.
ParsedScheme parse_scheme(std::string_view name);

class Network {
 public:
  Network(NetworkConfig config, std::vector<Matrix> weights);
  Network(NetworkConfig config, std::vector<Matrix> weights, std::vector<Matrix> init_weights);

  const NetworkConfig& config() const noexcept { return config_; }
  std::size_t depth() const noexcept { return weights_.size(); }
  double alpha() const noexcept { return config_.alpha; }

  const std::vector<Matrix>& weights() const noexcept { return weights_; }
  const Matrix& weight(std::size_t l) const { return weights_.at(l); }
  Matrix& mutable_weight(std::size_t l) { return weights_.at(l); }
  /// Frozen copy taken at construction.
  const std::vector<Matrix>& init_weights() const noexcept { return init_weights_; }

  /// Rescales the output factor; weights are untouched.
  void set_alpha(double alpha);

 private:
  NetworkConfig config_;
  std::vector<Matrix> weights_;
  std::vector<Matrix> init_weights_;
};

Network init_network(const NetworkConfig& config, RngStream& rng);

struct ForwardTrace {
  std::vector<Vector> activations;           // h_0 .. h_{L-1}
  std::vector<std::vector<std::uint8_t>> signs;  // masks of layers 1 .. L-1
  Vector output;
};

ForwardTrace forward(const Network& net, std::span<const double> x);
ForwardTrace forward(std::span<const Matrix> weights, double alpha, std::span<const double> x);

/// (1/alpha) W_L D_{L-1} W_{L-1} ... D_1 W_1 delta with the masks of trace.
Vector input_jvp(const Network& net, const ForwardTrace& trace, std::span<const double> delta);
Vector input_jvp(std::span<const Matrix> weights, double alpha, const ForwardTrace& trace,
                 std::span<const double> delta);

/// Tangent propagation of k directions at once: deltas is d x k, result o x k.
Matrix input_jvp_columns(std::span<const Matrix> weights, double alpha, const ForwardTrace& trace,
                         const Matrix& deltas);

enum class Loss { Squared, CrossEntropy };

/// "squared" | "cross-entropy" (also "mse", "ce").
Loss parse_loss(std::string_view name);
std::string_view loss_name(Loss loss);

/// Rows of inputs are samples; returns the B x o output matrix.
Matrix forward_batch(const Network& net, const Matrix& inputs);

/// Batch-mean loss. Squared: (1/2B) sum ||f - y||^2. Cross-entropy: softmax
/// of f against (one-hot) label rows.
double batch_loss(const Matrix& outputs, const Matrix& labels, Loss loss);

struct GradientResult {
  double loss = 0.0;
  Matrix outputs;              // B x o
  std::vector<Matrix> grads;   // same shapes as the weights
};

/// Exact backpropagation gradients of the batch-mean loss.
GradientResult weight_gradients(const Network& net, const Matrix& inputs, const Matrix& labels,
                                Loss loss);

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const Network& net, const std::filesystem::path& path);
Network load_checkpoint(const std::filesystem::path& path);

/// In-memory form of the checkpoint file.
std::vector<std::uint8_t> encode_checkpoint(const Network& net);
Network decode_checkpoint(std::span<const std::uint8_t> bytes);

}  // namespace rlab

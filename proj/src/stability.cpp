#include "rlab/stability.hpp"

#include <cmath>

#include "rlab/error.hpp"

namespace rlab {

void StabilityConfig::validate() const {
  require(std::isfinite(eps) && eps > 0.0, ErrorKind::InvalidParameter, "eps must be > 0");
  require(n_points >= 1 && n_dirs >= 1, ErrorKind::InvalidParameter, "sample counts must be >= 1");
}

namespace {

std::vector<std::size_t> pick_points(std::size_t n, std::size_t k, RngStream rng) {
  auto perm = random_permutation(n, rng);
  perm.resize(std::min(k, n));
  return perm;
}

}  // namespace

StabilityEstimate perturbation_stability(const Network& net, const Dataset& data, const StabilityConfig& cfg) {
  cfg.validate();
  require(data.n() > 0, ErrorKind::InvalidInput, "dataset is empty");
  require(data.d() == net.config().d, ErrorKind::InvalidInput, "dataset dimension does not match the network");
  const RngStream root(cfg.seed);
  const auto points = pick_points(data.n(), cfg.n_points, root.substream(hash_name("stability-points")));
  const RngStream dirs_root = root.substream(hash_name("stability-offsets"));

  std::vector<double> samples;
  samples.reserve(points.size() * cfg.n_dirs);
  Matrix deltas(data.d(), cfg.n_dirs);
  for (std::size_t k = 0; k < points.size(); ++k) {
    RngStream rng = dirs_root.substream(k);
    for (std::size_t j = 0; j < cfg.n_dirs; ++j) {
      const Vector off = sample_ball_offset(data.d(), cfg.eps, rng);
      for (std::size_t r = 0; r < data.d(); ++r) deltas(r, j) = off[r];
    }
    const ForwardTrace tr = forward(net, data.x(points[k]));
    const Matrix jd = input_jvp_columns(net.weights(), net.alpha(), tr, deltas);
    for (std::size_t j = 0; j < cfg.n_dirs; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < jd.rows(); ++r) s += jd(r, j) * jd(r, j);
      samples.push_back(std::sqrt(s));
    }
  }
  const Summary sm = summarize(samples);
  return {sm.mean, sm.std_error, sm.n};
}

double gradient_drift(const Network& net, const Dataset& data, std::size_t n_points, std::uint64_t seed,
                      std::size_t n_dirs) {
  require(n_points >= 1 && n_dirs >= 1, ErrorKind::InvalidParameter, "sample counts must be >= 1");
  require(data.n() > 0, ErrorKind::InvalidInput, "dataset is empty");
  const RngStream root(seed);
  const auto points = pick_points(data.n(), n_points, root.substream(hash_name("drift-points")));
  const RngStream dirs_root = root.substream(hash_name("drift-directions"));
  const auto& w0 = net.init_weights();

  double total = 0.0;
  std::size_t count = 0;
  Matrix u(data.d(), n_dirs);
  for (std::size_t k = 0; k < points.size(); ++k) {
    RngStream rng = dirs_root.substream(k);
    for (std::size_t j = 0; j < n_dirs; ++j) {
      Vector v(data.d());
      double nv = 0.0;
      while (nv == 0.0) {
        for (double& c : v) c = rng.normal();
        nv = norm2(v);
      }
      for (std::size_t r = 0; r < data.d(); ++r) u(r, j) = v[r] / nv;
    }
    const auto x = data.x(points[k]);
    const Matrix jt = input_jvp_columns(net.weights(), net.alpha(), forward(net, x), u);
    const Matrix j0 = input_jvp_columns(w0, net.alpha(), forward(w0, net.alpha(), x), u);
    for (std::size_t j = 0; j < n_dirs; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < jt.rows(); ++r) {
        const double e = jt(r, j) - j0(r, j);
        s += e * e;
      }
      total += std::sqrt(s);
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

Matrix input_jacobian(const Network& net, const ForwardTrace& trace) {
  return input_jvp_columns(net.weights(), net.alpha(), trace, Matrix::identity(net.config().d));
}

}  // namespace rlab

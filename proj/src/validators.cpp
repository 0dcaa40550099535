#include "rlab/validators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rlab/error.hpp"
#include "rlab/training.hpp"

namespace rlab {

namespace {

LemmaVerdict verdict(std::string id, double statistic, double threshold, std::size_t n, std::string details) {
  LemmaVerdict v;
  v.id = std::move(id);
  v.statistic = statistic;
  v.threshold = threshold;
  v.pass = statistic <= threshold;
  v.n_samples = n;
  v.details = std::move(details);
  return v;
}

std::string describe(const AtomKsResult& r) {
  std::ostringstream os;
  os << "D=" << r.positive.statistic << " crit=" << r.positive.critical << " zeros=" << r.zeros_a << "/"
     << r.zeros_b << " p_zero=" << r.zero_p_value;
  return os.str();
}

double chi_square(std::size_t dof, RngStream& rng) {
  double s = 0.0;
  for (std::size_t k = 0; k < dof; ++k) {
    const double z = rng.normal();
    s += z * z;
  }
  return s;
}

}  // namespace

LemmaVerdict validate_relu_square_law(std::size_t n_samples, double sigma, double alpha, std::uint64_t seed,
                                      bool control) {
  require(n_samples >= 10000, ErrorKind::InvalidParameter, "relu-square law needs at least 1e4 samples");
  require(std::isfinite(sigma) && sigma >= 0.0, ErrorKind::InvalidParameter, "sigma must be >= 0");
  const RngStream root(seed);
  RngStream rx = root.substream(1);
  RngStream ry = root.substream(2);
  std::vector<double> x(n_samples);
  std::vector<double> y(n_samples);
  for (auto& v : x) {
    const double w = sigma * rx.normal();
    v = w >= 0.0 ? w * w : 0.0;
  }
  for (auto& v : y) {
    const double w = sigma * ry.normal();
    const bool keep = control || ry.uniform() < 0.5;
    v = keep ? w * w : 0.0;
  }
  const AtomKsResult r = compare_with_zero_atom(x, y, alpha);
  return verdict(control ? "relu-square/control" : "relu-square", r.normalized_statistic, 1.0, 2 * n_samples,
                 describe(r));
}

LemmaVerdict validate_chi_square_mixture(std::size_t q, std::size_t n_samples, double alpha, std::uint64_t seed,
                                         bool control) {
  require(q >= 2, ErrorKind::InvalidParameter, "chi-square mixture needs q >= 2");
  require(n_samples >= 1, ErrorKind::InvalidParameter, "need at least one sample");
  constexpr std::size_t p = 3;
  const RngStream root(seed);
  RngStream rh = root.substream(0);
  RngStream ra = root.substream(1);
  RngStream rb = root.substream(2);
  Vector h(p);
  double hn = 0.0;
  while (hn == 0.0) {
    for (double& v : h) v = rh.normal();
    hn = dot(h, h);
  }
  const double wstd = std::sqrt(2.0 / static_cast<double>(q));
  const double qd = static_cast<double>(q);

  std::vector<double> a(n_samples);
  for (auto& v : a) {
    double s = 0.0;
    for (std::size_t k = 0; k < q; ++k) {
      double z = 0.0;
      for (std::size_t j = 0; j < p; ++j) z += wstd * ra.normal() * h[j];
      if (z > 0.0) s += z * z;
    }
    v = qd * s / (2.0 * hn);
  }
  const double pmix = control ? 0.7 : 0.5;
  std::vector<double> b(n_samples);
  for (auto& v : b) {
    std::size_t rho = 0;
    for (std::size_t k = 0; k < q; ++k) rho += rb.uniform() < pmix;
    v = chi_square(rho, rb);
  }
  const AtomKsResult r = compare_with_zero_atom(a, b, alpha);
  const Summary sa = summarize(a);
  std::ostringstream os;
  os << describe(r) << " mean=" << sa.mean << " (q/2=" << qd / 2.0 << ")";
  return verdict(control ? "chi-square-mixture/control" : "chi-square-mixture", r.normalized_statistic, 1.0,
                 2 * n_samples, os.str());
}

LemmaVerdict validate_layer_norm_ratio(const NetworkConfig& cfg, std::size_t n_samples, std::uint64_t seed,
                                       bool control) {
  cfg.validate();
  require(n_samples >= 2, ErrorKind::InvalidParameter, "need at least two samples");
  const std::size_t m = cfg.m;
  const double g = gain(cfg);
  const double target = g * g;
  const double beta = g * std::sqrt(2.0 / static_cast<double>(m)) * (control ? 2.0 : 1.0);

  const RngStream root(seed);
  RngStream rv = root.substream(0);
  RngStream rw = root.substream(1);
  Vector h(m);
  Vector t(m);
  for (double& v : h) v = std::abs(rv.normal());  // post-ReLU layer input
  for (double& v : t) v = rv.normal();
  const double tn = dot(t, t);

  std::vector<double> ratios(n_samples);
  for (auto& ratio : ratios) {
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      double zh = 0.0;
      double zt = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double w = beta * rw.normal();
        zh += w * h[j];
        zt += w * t[j];
      }
      if (zh >= 0.0) s += zt * zt;
    }
    ratio = s / tn;
  }
  const Summary sm = summarize(ratios);
  const double stat = std::abs(sm.mean - target) / sm.std_error;
  std::ostringstream os;
  os << "mean=" << sm.mean << " gamma^2=" << target << " stderr=" << sm.std_error << " scheme=" << scheme_name(cfg);
  return verdict(control ? "layer-norm-ratio/control" : "layer-norm-ratio", stat, 4.0, n_samples, os.str());
}

LemmaVerdict validate_flow_dynamics(const Network& net, const Dataset& data, double eta, FlowControl control) {
  require_two_layer_scalar(net, data);
  const double n = static_cast<double>(data.n());
  const double h = eta > 0.0 ? eta : 1e-4 * net.alpha() * net.alpha() / n;

  const Vector res = flow_residual(net, data);
  Matrix k = gram_h(net, data);
  if (control != FlowControl::WithoutG) k += gram_g(net, data);
  Vector predicted = matvec(k, res);
  if (control == FlowControl::SignFlipped)
    for (double& v : predicted) v = -v;

  Network next = net;
  GradientResult g = weight_gradients(net, data.inputs, data.labels, Loss::Squared);
  for (std::size_t l = 0; l < 2; ++l) {
    Matrix& w = next.mutable_weight(l);
    for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] -= h * n * g.grads[l].data()[i];
  }
  const Vector res1 = flow_residual(next, data);
  // f(t+h) - f(t) = res(t) - res(t+h).
  Vector err(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) err[i] = (res[i] - res1[i]) / h - predicted[i];
  const double scale = std::max(norm2(predicted), 1e-12);
  const double stat = norm2(err) / scale;
  std::ostringstream os;
  os << "eta=" << h << " |(H+G)(y-f)|=" << norm2(predicted) << " |y-f|=" << norm2(res);
  const char* id = control == FlowControl::None          ? "flow-dynamics"
                   : control == FlowControl::SignFlipped ? "flow-dynamics/control"
                                                         : "flow-dynamics/without-g";
  return verdict(id, stat, 0.05, data.n(), os.str());
}

double movement_horizon(const EarlyTrainingRadii& radii) {
  if (radii.valid && std::isfinite(radii.t_star)) return radii.t_star;
  return 2.0 / radii.lambda0;
}

LemmaVerdict validate_weight_movement(const Network& net, const Dataset& data, const EarlyTrainingRadii& radii,
                                      const MovementOptions& opt) {
  require_two_layer_scalar(net, data);
  require(radii.lambda0 > 0.0, ErrorKind::DegenerateKernel, "lambda0 must be > 0");
  require(opt.t_end >= 0.0 && opt.slack > 0.0 && opt.lambda0_factor > 0.0, ErrorKind::InvalidParameter,
          "bad movement options");
  const EarlyTrainingRadii rad =
      opt.lambda0_factor == 1.0
          ? radii
          : radii_and_times(net.config(), radii.lambda0 * opt.lambda0_factor, radii.n, radii.residual0);

  const Matrix w0 = net.weight(0);
  const Matrix a0 = net.weight(1);
  const double r0sq = radii.residual0 * radii.residual0;
  double worst_w = 0.0;
  double worst_a = 0.0;
  double worst_res = 0.0;
  std::size_t checks = 0;
  std::vector<double> neuron_w(w0.rows(), 0.0);

  FlowOptions fo;
  fo.eta = opt.eta;
  fo.t_max = opt.t_end;
  fo.snapshot_every = 0;
  fo.observer = [&](double t, const Network& cur, const Vector& res) {
    if (t <= 0.0) return;
    const Matrix& w = cur.weight(0);
    const double bw = movement_bound_w(rad, t);
    double mw = 0.0;
    for (std::size_t r = 0; r < w.rows(); ++r) {
      double s = 0.0;
      for (std::size_t j = 0; j < w.cols(); ++j) {
        const double e = w(r, j) - w0(r, j);
        s += e * e;
      }
      mw = std::max(mw, s);
      neuron_w[r] = std::max(neuron_w[r], std::sqrt(s) / bw);
    }
    mw = std::sqrt(mw);
    double ma = 0.0;
    const Matrix& a = cur.weight(1);
    for (std::size_t r = 0; r < a.size(); ++r) ma = std::max(ma, std::abs(a.data()[r] - a0.data()[r]));
    worst_w = std::max(worst_w, mw / bw);
    worst_a = std::max(worst_a, ma / movement_bound_a(rad, t));
    worst_res = std::max(worst_res, dot(res, res) / (std::exp(-rad.lambda0 * t) * r0sq));
    ++checks;
  };
  integrate_gradient_flow(net, data, fo);

  const double stat = std::max({worst_w, worst_a, worst_res});
  const auto violators = std::count_if(neuron_w.begin(), neuron_w.end(), [&](double v) { return v > opt.slack; });
  std::ostringstream os;
  os << "t_end=" << opt.t_end << " steps=" << checks << " w_ratio=" << worst_w << " a_ratio=" << worst_a
     << " residual_ratio=" << worst_res << " w_violators=" << violators << "/" << neuron_w.size() << " R_a=" << rad.r_a << " R_w=" << rad.r_w
     << " radii_valid=" << (rad.valid ? "yes" : "no");
  return verdict(opt.lambda0_factor == 1.0 ? "weight-movement" : "weight-movement/control", stat, opt.slack,
                 checks, os.str());
}

LemmaVerdict validate_gram_concentration(const ConcentrationOptions& opt, std::uint64_t seed) {
  require(opt.n >= 1 && opt.seeds >= 1 && !opt.widths.empty(), ErrorKind::InvalidParameter,
          "bad concentration options");
  const RngStream root(seed);
  RngStream rd = root.substream(0);
  const Dataset data = generate_sphere_dataset(opt.n, opt.d, SyntheticTask::ScalarRegression, rd);

  double worst_rate = 1.0;
  double worst_gap = 0.0;
  std::ostringstream os;
  for (std::size_t m : opt.widths) {
    const NetworkConfig unit = NetworkConfig::make(opt.scheme, opt.d, m, 1, 2, 1.0, opt.c);
    const double lambda_unit = kernel_lambda0(gram_h_infinity(data, unit));
    const double alpha = concentration_alpha(opt.n, unit.betas[1], lambda_unit, opt.alpha_scale);
    NetworkConfig cfg = unit;
    cfg.alpha = alpha;
    const Matrix h_inf = gram_h_infinity(data, cfg);
    const double lambda0 = kernel_lambda0(h_inf);
    Matrix reference = h_inf;
    if (opt.control) reference *= 2.0;

    std::size_t ok = 0;
    for (std::size_t s = 0; s < opt.seeds; ++s) {
      RngStream rw = root.substream({1, m, s});
      const Network net = init_network(cfg, rw);
      const Matrix h0 = gram_h(net, data);
      const double gap = spectral_norm_sym(h0 - reference);
      const double lmin = min_eigenvalue(h0);
      worst_gap = std::max(worst_gap, gap / lambda0);
      ok += gap <= lambda0 / 4.0 && lmin >= 0.75 * lambda0;
    }
    const double rate = static_cast<double>(ok) / static_cast<double>(opt.seeds);
    worst_rate = std::min(worst_rate, rate);
    os << "m=" << m << " alpha=" << alpha << " rate=" << rate << "; ";
  }
  os << "max gap/lambda0=" << worst_gap;
  return verdict(opt.control ? "gram-concentration/control" : "gram-concentration", 1.0 - worst_rate,
                 1.0 - opt.required_rate, opt.seeds * opt.widths.size(), os.str());
}

TwoLayerProblem make_two_layer_problem(const NetworkConfig& cfg, std::size_t n, std::uint64_t seed) {
  require(cfg.depth == 2 && cfg.o == 1, ErrorKind::InvalidParameter, "expected a two-layer scalar config");
  const RngStream root(seed);
  RngStream rd = root.substream(hash_name("problem-data"));
  RngStream rw = root.substream(hash_name("problem-init"));
  Dataset data = generate_sphere_dataset(n, cfg.d, SyntheticTask::ScalarRegression, rd);
  Network net = init_network(cfg, rw);
  return {std::move(net), std::move(data)};
}

// ---------------------------------------------------------------------------
// Named runs
// ---------------------------------------------------------------------------

const std::vector<std::string>& lemma_ids() {
  static const std::vector<std::string> ids{"relu-square",   "chi-square-mixture", "layer-norm-ratio",
                                            "flow-dynamics", "weight-movement",    "gram-concentration"};
  return ids;
}

namespace {

// Two-layer NTK net at unit output scale for the weight-movement run.
NetworkConfig movement_config(std::size_t m) { return NetworkConfig::make(InitScheme::NTK, 16, m, 1, 2, 1.0); }

}  // namespace

LemmaVerdict run_lemma(const LemmaRequest& req) {
  const bool c = req.control;
  if (req.id == "relu-square") return validate_relu_square_law(req.n_samples.value_or(100000), 1.0, 0.01, req.seed, c);
  if (req.id == "chi-square-mixture")
    return validate_chi_square_mixture(64, req.n_samples.value_or(100000), 0.01, req.seed, c);
  if (req.id == "layer-norm-ratio")
    return validate_layer_norm_ratio(NetworkConfig::make(InitScheme::He, 16, 256, 1, 3),
                                     req.n_samples.value_or(2000), req.seed, c);
  if (req.id == "flow-dynamics") {
    auto p = make_two_layer_problem(NetworkConfig::make(InitScheme::NTK, 16, 512, 1, 2), req.n_samples.value_or(8),
                                    req.seed);
    return validate_flow_dynamics(p.net, p.data, 0.0, c ? FlowControl::SignFlipped : FlowControl::None);
  }
  if (req.id == "weight-movement") {
    auto p = make_two_layer_problem(movement_config(2048), req.n_samples.value_or(4), req.seed);
    const double lambda0 = kernel_lambda0(gram_h_infinity(p.data, p.net.config()));
    const auto radii =
        radii_and_times(p.net.config(), lambda0, p.data.n(), norm2(flow_residual(p.net, p.data)));
    MovementOptions mo;
    mo.t_end = movement_horizon(radii);
    if (c) mo.lambda0_factor = 4.0;
    return validate_weight_movement(p.net, p.data, radii, mo);
  }
  if (req.id == "gram-concentration") {
    ConcentrationOptions co;
    co.n = req.n_samples.value_or(4);
    co.control = c;
    return validate_gram_concentration(co, req.seed);
  }
  fail(ErrorKind::InvalidParameter, "unknown lemma '" + req.id + "'");
}

}  // namespace rlab

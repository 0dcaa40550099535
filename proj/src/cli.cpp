#include "rlab/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include "rlab/config.hpp"
#include "rlab/error.hpp"
#include "rlab/stability.hpp"
#include "rlab/sweep.hpp"
#include "rlab/theory.hpp"
#include "rlab/training.hpp"
#include "rlab/validators.hpp"

namespace rlab {

namespace {

struct NetOpts {
  std::string scheme = "he";
  std::size_t d = 784;
  std::size_t width = 128;
  std::size_t o = 10;
  std::size_t depth = 2;
  double alpha = 1.0;

  void add(CLI::App* app) {
    app->add_option("--scheme", scheme, "lecun | he | ntk | nonlazy[:c]")->capture_default_str();
    app->add_option("--d", d, "input dimension")->capture_default_str();
    app->add_option("--width", width, "hidden width m")->capture_default_str();
    app->add_option("--o", o, "output dimension")->capture_default_str();
    app->add_option("--depth", depth, "number of weight layers L")->capture_default_str();
    app->add_option("--alpha", alpha, "output scale")->capture_default_str();
  }

  NetworkConfig config() const {
    const auto p = parse_scheme(scheme);
    require(p.scheme != InitScheme::Custom, ErrorKind::InvalidParameter, "a named scheme is required");
    return NetworkConfig::make(p.scheme, d, width, o, depth, alpha, p.c);
  }
};

struct DataOpts {
  std::string images;
  std::string labels;
  std::size_t subset = 2048;
  std::size_t eval = 512;
  bool raw_scale = false;
  std::string synthetic;
  std::size_t synthetic_d = 16;
  std::uint64_t data_seed = 0;

  void add(CLI::App* app) {
    app->add_option("--mnist-images", images, "IDX image file (default: bundled subset)");
    app->add_option("--mnist-labels", labels, "IDX label file (default: bundled subset)");
    app->add_option("--subset", subset, "training points")->capture_default_str();
    app->add_option("--eval-subset", eval, "held-out points after the training points")->capture_default_str();
    app->add_flag("--raw-scale", raw_scale, "keep pixels in [0,1] without projecting to the sphere");
    app->add_option("--synthetic", synthetic, "two-class-halfspace | scalar-regression instead of MNIST");
    app->add_option("--synthetic-d", synthetic_d, "input dimension of synthetic data")->capture_default_str();
    app->add_option("--data-seed", data_seed, "seed of synthetic data")->capture_default_str();
  }

  DatasetSpec spec() const {
    DatasetSpec s = default_mnist_spec();
    if (!synthetic.empty()) {
      s.kind = DatasetSpec::Kind::Sphere;
      s.task = parse_task(synthetic);
      s.d = synthetic_d;
      s.seed = data_seed;
    }
    if (!images.empty()) s.images = images;
    if (!labels.empty()) s.labels = labels;
    s.train = subset;
    s.eval = eval;
    s.raw_scale = raw_scale;
    return s;
  }

  Loss default_loss() const { return synthetic.empty() ? Loss::CrossEntropy : Loss::Squared; }
};

struct HyperOpts {
  TrainHyper h;
  std::string loss;

  void add(CLI::App* app) {
    app->add_option("--epochs", h.epochs)->capture_default_str();
    app->add_option("--batch-size", h.batch_size)->capture_default_str();
    app->add_option("--lr", h.lr)->capture_default_str();
    app->add_option("--loss", loss, "squared | cross-entropy (default by dataset)");
    app->add_option("--lr-after", h.schedule.after_epoch, "epochs before the first decay")->capture_default_str();
    app->add_option("--lr-factor", h.schedule.factor)->capture_default_str();
    app->add_option("--lr-every", h.schedule.every)->capture_default_str();
  }

  TrainHyper resolve(const DataOpts& d, std::uint64_t seed) const {
    TrainHyper out = h;
    out.loss = loss.empty() ? d.default_loss() : parse_loss(loss);
    out.seed = seed;
    return out;
  }
};

struct StabOpts {
  StabilityConfig s;
  bool heldout = false;

  void add(CLI::App* app) {
    app->add_option("--eps", s.eps, "perturbation radius")->capture_default_str();
    app->add_option("--points", s.n_points, "data points")->capture_default_str();
    app->add_option("--dirs", s.n_dirs, "perturbations per point")->capture_default_str();
    app->add_flag("--heldout", heldout, "evaluate on the held-out split");
  }
};

void print_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "  " : "") << std::setw(12) << cells[i];
  out << '\n';
}

std::string g(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

Dataset two_layer_data(std::size_t n, std::size_t d, std::uint64_t seed) {
  RngStream rng = RngStream(seed).substream(hash_name("cli-data"));
  return generate_sphere_dataset(n, d, SyntheticTask::ScalarRegression, rng);
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"rlab: robustness laboratory for deep ReLU networks", "rlab"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  auto common = [&](CLI::App* sub, bool stochastic) {
    sub->add_option("--config", config_path, "key = value file; flags override it");
    auto* s = sub->add_option("--seed", seed, "random seed");
    if (stochastic) s->required();
  };

  // train
  NetOpts net;
  DataOpts data;
  HyperOpts hyper;
  StabOpts stab;
  std::string log_path;
  std::string checkpoint;
  auto* train = app.add_subcommand("train", "train a network with SGD and save a checkpoint");
  common(train, true);
  net.add(train);
  data.add(train);
  hyper.add(train);
  train->add_option("--out", out_path, "checkpoint path")->required();
  train->add_option("--log", log_path, "per-epoch CSV log");

  auto* stability = app.add_subcommand("stability", "estimate perturbation stability of a checkpoint");
  common(stability, true);
  data.add(stability);
  stab.add(stability);
  stability->add_option("--checkpoint", checkpoint)->required();

  auto* kappa = app.add_subcommand("kappa", "lazy training ratio of a checkpoint");
  common(kappa, false);
  kappa->add_option("--checkpoint", checkpoint)->required();

  std::optional<std::size_t> n_points;
  auto* bounds = app.add_subcommand("bounds", "closed-form bounds and the non-lazy predicate");
  common(bounds, false);
  net.add(bounds);
  bounds->add_option("--n", n_points, "sample count for the two-layer non-lazy bound");

  std::size_t gram_n = 4;
  auto* gram = app.add_subcommand("gram", "gram matrices, lambda0 and early-training radii of a two-layer net");
  common(gram, true);
  net.add(gram);
  gram->add_option("--n", gram_n, "synthetic points")->capture_default_str();

  double t_max = 1.0;
  double eta = 0.0;
  std::size_t every = 100;
  auto* flow = app.add_subcommand("flow", "integrate gradient flow of a two-layer scalar net");
  common(flow, true);
  net.add(flow);
  flow->add_option("--n", gram_n, "synthetic points")->capture_default_str();
  flow->add_option("--t-max", t_max)->capture_default_str();
  flow->add_option("--eta", eta, "Euler step (0: 1e-3 alpha^2/n)")->capture_default_str();
  flow->add_option("--every", every, "steps between CSV rows")->capture_default_str();
  flow->add_option("--out", out_path, "CSV of t,residual_norm");

  SweepSpec sweep_spec;
  std::size_t max_width = 1024;
  bool replot_only = false;
  std::vector<std::size_t> widths;
  auto* sweep = app.add_subcommand("sweep", "width x depth x scheme x seed experiment grid");
  sweep->add_option("--config", config_path, "key = value file; flags override it");
  sweep->add_option("--widths", widths, "widths (default 16 .. max-width, doubling)")->delimiter(',');
  sweep->add_option("--max-width", max_width)->capture_default_str();
  sweep->add_option("--depths", sweep_spec.depths)->delimiter(',')->capture_default_str();
  sweep->add_option("--schemes", sweep_spec.schemes)->delimiter(',')->capture_default_str();
  sweep->add_option("--seeds", sweep_spec.seeds)->delimiter(',')->capture_default_str();
  sweep->add_option("--alpha", sweep_spec.alpha)->capture_default_str();
  sweep->add_option("--threads", sweep_spec.threads)->capture_default_str();
  sweep->add_option("--out", out_path, "output directory")->required();
  sweep->add_flag("--replot", replot_only, "rebuild figures from the CSVs in --out");
  data.add(sweep);
  hyper.add(sweep);
  stab.add(sweep);

  std::vector<std::string> lemmas;
  std::optional<std::size_t> lemma_n;
  bool control = false;
  auto* validate = app.add_subcommand("validate", "run lemma checks");
  common(validate, true);
  validate->add_option("--lemma", lemmas, "lemma id (repeatable; default all)");
  validate->add_option("--n", lemma_n, "sample count override");
  validate->add_flag("--control", control, "run the negative controls instead");

  // Apply a --config file before parsing, so that flags win.
  std::vector<std::string> args = raw_args;
  try {
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
      if (args[i] == "--config") {
        args = merge_config(args, read_key_values(args[i + 1]));
        break;
      }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*train) {
      const DatasetSpec ds = data.spec();
      const LoadedData ld = load_dataset(ds);
      NetOpts n2 = net;
      n2.d = ld.train.d();
      n2.o = ld.train.o();
      RngStream rng = RngStream(*seed).substream(hash_name("cli-init"));
      Network model = init_network(n2.config(), rng);
      const TrainLog log = sgd_train(model, ld.train, hyper.resolve(data, *seed));
      save_checkpoint(model, out_path);
      if (!log_path.empty()) std::ofstream(log_path) << log.to_csv();
      const auto& last = log.records.back();
      out << "epochs=" << last.epoch << " loss=" << g(last.loss) << " accuracy=" << g(last.accuracy)
          << " kappa=" << g(last.kappa) << '\n';
      if (ld.eval.n() > 0)
        out << "eval_accuracy=" << g(accuracy(forward_batch(model, ld.eval.inputs), ld.eval.labels)) << '\n';
      return 0;
    }
    if (*stability) {
      const Network model = load_checkpoint(checkpoint);
      const LoadedData ld = load_dataset(data.spec());
      StabilityConfig sc = stab.s;
      sc.seed = *seed;
      const auto est = perturbation_stability(model, stab.heldout && ld.eval.n() ? ld.eval : ld.train, sc);
      out << "mean=" << g(est.mean) << " std_error=" << g(est.std_error) << " n=" << est.n_total << '\n';
      return 0;
    }
    if (*kappa) {
      out << "kappa=" << g(lazy_ratio(load_checkpoint(checkpoint))) << '\n';
      return 0;
    }
    if (*bounds) {
      const NetworkConfig cfg = net.config();
      const BoundReport r = thm1_bound(cfg);
      const NonLazyVerdict v = nonlazy_predicate(cfg);
      std::string thm3 = "-";
      if (cfg.scheme == InitScheme::NonLazy && cfg.depth == 2) thm3 = g(thm3_bound(n_points.value_or(4), cfg.m, cfg.c));
      print_row(out, {"scheme", "L", "m", "gamma", "thm1", "table1", "wu", "huang", "thm3", "rho", "class"});
      print_row(out, {scheme_name(cfg), std::to_string(cfg.depth), std::to_string(cfg.m), g(r.gamma), g(r.thm1),
                      g(r.table1), g(r.wu), g(r.huang), thm3, g(v.rho), std::string(to_string(v.cls))});
      return 0;
    }
    if (*gram) {
      NetOpts n2 = net;
      n2.o = 1;
      n2.depth = 2;
      const NetworkConfig cfg = n2.config();
      const Dataset ds = two_layer_data(gram_n, cfg.d, *seed);
      RngStream rng = RngStream(*seed).substream(hash_name("cli-init"));
      const Network model = init_network(cfg, rng);
      const GramSet gs = gram_set(model, ds);
      const double r0 = norm2(flow_residual(model, ds));
      const auto radii = radii_and_times(cfg, gs.lambda0, ds.n(), r0);
      out << "lambda0=" << g(gs.lambda0) << " lambda_min(H0)=" << g(min_eigenvalue(gs.h_t))
          << " |H0-Hinf|=" << g(spectral_norm_sym(gs.h_t - gs.h_inf)) << " |G0|=" << g(spectral_norm_sym(gs.g_t))
          << '\n';
      out << "R_a=" << g(radii.r_a) << " R_w=" << g(radii.r_w) << " t1*=" << g(radii.t1_star)
          << " t2*=" << g(radii.t2_star) << " valid=" << (radii.valid ? "yes" : "no") << '\n';
      return 0;
    }
    if (*flow) {
      NetOpts n2 = net;
      n2.o = 1;
      n2.depth = 2;
      const NetworkConfig cfg = n2.config();
      const Dataset ds = two_layer_data(gram_n, cfg.d, *seed);
      RngStream rng = RngStream(*seed).substream(hash_name("cli-init"));
      const Network model = init_network(cfg, rng);
      FlowOptions fo;
      fo.eta = eta;
      fo.t_max = t_max;
      fo.snapshot_every = every;
      const FlowTrajectory tr = integrate_gradient_flow(model, ds, fo);
      std::ostringstream csv;
      csv << std::setprecision(17) << "t,residual_norm\n";
      for (const auto& s : tr.snapshots) csv << s.t << ',' << norm2(s.residual) << '\n';
      if (!out_path.empty())
        std::ofstream(out_path) << csv.str();
      else
        out << csv.str();
      out << "steps=" << tr.steps << " residual=" << g(norm2(tr.snapshots.back().residual)) << '\n';
      return 0;
    }
    if (*sweep) {
      if (replot_only) {
        for (const auto& p : replot(out_path)) out << p.string() << '\n';
        return 0;
      }
      sweep_spec.widths = widths.empty() ? default_widths(max_width) : widths;
      sweep_spec.data = data.spec();
      sweep_spec.hyper = hyper.resolve(data, 0);
      sweep_spec.stability = stab.s;
      sweep_spec.stability_on_eval = stab.heldout;
      const std::size_t failed = run_sweep(sweep_spec, out_path);
      const std::size_t total = sweep_spec.widths.size() * sweep_spec.depths.size() * sweep_spec.schemes.size() *
                                sweep_spec.seeds.size();
      out << "runs=" << total << " failed=" << failed << " out=" << out_path << '\n';
      return failed == total ? 1 : 0;
    }
    if (*validate) {
      const auto ids = lemmas.empty() ? lemma_ids() : lemmas;
      bool all = true;
      print_row(out, {"lemma", "statistic", "threshold", "pass"});
      for (const auto& id : ids) {
        const LemmaVerdict v = run_lemma({id, *seed, lemma_n, control});
        all = all && v.pass;
        print_row(out, {v.id, g(v.statistic), g(v.threshold), v.pass ? "pass" : "FAIL"});
        out << "    " << v.details << '\n';
      }
      return all ? 0 : 1;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::InvalidParameter ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_dispatch(args, std::cout, std::cerr);
}

}  // namespace rlab

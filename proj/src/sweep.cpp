#include "rlab/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

#include "rlab/error.hpp"
#include "rlab/svg.hpp"
#include "rlab/theory.hpp"

namespace rlab {

DatasetSpec default_mnist_spec() {
  DatasetSpec s;
  const std::filesystem::path root = RLAB_SOURCE_DIR;
  s.images = root / "data" / "mnist5k" / "images-idx3-ubyte";
  s.labels = root / "data" / "mnist5k" / "labels-idx1-ubyte";
  return s;
}

LoadedData load_dataset(const DatasetSpec& spec) {
  require(spec.train >= 1, ErrorKind::InvalidParameter, "training split must be non-empty");
  Dataset all;
  if (spec.kind == DatasetSpec::Kind::Mnist) {
    all = load_mnist_idx(spec.images, spec.labels, spec.raw_scale);
  } else {
    RngStream rng(spec.seed);
    all = generate_sphere_dataset(spec.train + spec.eval, spec.d, spec.task, rng);
  }
  require(spec.train + spec.eval <= all.n(), ErrorKind::InvalidParameter,
          "dataset has " + std::to_string(all.n()) + " points, split needs " +
              std::to_string(spec.train + spec.eval));
  return {all.slice(0, spec.train), all.slice(spec.train, spec.eval)};
}

std::vector<std::size_t> default_widths(std::size_t max_width) {
  std::vector<std::size_t> w;
  for (std::size_t m = 16; m <= std::min<std::size_t>(max_width, 16384); m *= 2) w.push_back(m);
  return w;
}

void SweepSpec::validate() const {
  require(!widths.empty() && !depths.empty() && !schemes.empty() && !seeds.empty(), ErrorKind::InvalidParameter,
          "sweep lists must be non-empty");
  for (const auto& s : schemes) {
    const auto p = parse_scheme(s);
    require(p.scheme != InitScheme::Custom, ErrorKind::InvalidParameter, "sweeps need a named scheme");
  }
  for (auto d : depths) require(d >= 2, ErrorKind::InvalidParameter, "depths must be >= 2");
  for (auto w : widths) require(w >= 1, ErrorKind::InvalidParameter, "widths must be >= 1");
  hyper.validate();
  stability.validate();
  require(threads >= 1, ErrorKind::InvalidParameter, "threads must be >= 1");
}

NetworkConfig sweep_config(const SweepSpec& spec, const LoadedData& data, std::size_t width, std::size_t depth,
                           const std::string& scheme) {
  const auto p = parse_scheme(scheme);
  return NetworkConfig::make(p.scheme, data.train.d(), width, data.train.o(), depth, spec.alpha, p.c);
}

SweepRow run_single(const SweepSpec& spec, const LoadedData& data, std::size_t width, std::size_t depth,
                    const std::string& scheme, std::uint64_t seed) {
  SweepRow row;
  row.width = width;
  row.depth = depth;
  row.scheme = scheme;
  row.seed = seed;
  row.thm1_order = std::nan("");
  const RngStream base(seed);
  try {
    const NetworkConfig cfg = sweep_config(spec, data, width, depth, scheme);
    row.thm1_order = thm1_bound(cfg).thm1;
    RngStream init = base.substream({hash_name(scheme), width, depth});
    Network net = init_network(cfg, init);

    TrainHyper hyper = spec.hyper;
    hyper.seed = base.substream(hash_name("shuffle")).key();
    TrainLog log;
    try {
      log = sgd_train(net, data.train, hyper);
    } catch (const TrainingDivergedError& e) {
      row.epochs = e.log().records;
      throw;
    }
    row.epochs = log.records;
    const EpochRecord& last = log.records.back();
    row.loss = last.loss;
    row.kappa = last.kappa;
    row.accuracy =
        data.eval.n() > 0 ? accuracy(forward_batch(net, data.eval.inputs), data.eval.labels) : last.accuracy;

    StabilityConfig sc = spec.stability;
    sc.seed = base.substream(hash_name("stability")).key();
    const Dataset& target = spec.stability_on_eval && data.eval.n() > 0 ? data.eval : data.train;
    const StabilityEstimate est = perturbation_stability(net, target, sc);
    row.stability_mean = est.mean;
    row.stability_stderr = est.std_error;
  } catch (const Error& e) {
    const double nan = std::nan("");
    row.loss = row.accuracy = row.kappa = row.stability_mean = row.stability_stderr = nan;
    row.status = std::string(to_string(e.kind()));
  }
  return row;
}

std::vector<SweepRow> run_sweep_rows(const SweepSpec& spec, const LoadedData& data) {
  spec.validate();
  struct Cell {
    std::size_t width, depth;
    const std::string* scheme;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& s : spec.schemes)
    for (auto d : spec.depths)
      for (auto w : spec.widths)
        for (auto sd : spec.seeds) cells.push_back({w, d, &s, sd});

  std::vector<SweepRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++)
      rows[i] = run_single(spec, data, cells[i].width, cells[i].depth, *cells[i].scheme, cells[i].seed);
  };
  const std::size_t n_threads = std::min(spec.threads, std::max<std::size_t>(cells.size(), 1));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_num(const std::string& s) {
  if (s == "nan") return std::nan("");
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == s.size() && !s.empty(), ErrorKind::FormatError, "bad number '" + s + "' in CSV");
  return v;
}

std::uint64_t parse_uint(const std::string& s) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == s.size() && !s.empty(), ErrorKind::FormatError, "bad integer '" + s + "' in CSV");
  return v;
}

constexpr const char* kSweepHeader =
    "width,depth,scheme,seed,loss,accuracy,kappa,stability_mean,stability_stderr,thm1_order,status";
constexpr const char* kEpochHeader = "width,depth,scheme,seed,epoch,loss,accuracy,kappa";

std::vector<std::string> lines_after_header(const std::string& text, const char* header) {
  std::istringstream is(text);
  std::string line;
  std::vector<std::string> out;
  require(static_cast<bool>(std::getline(is, line)) && line == header, ErrorKind::FormatError,
          std::string("CSV header must be ") + header);
  while (std::getline(is, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

}  // namespace

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = std::string(kSweepHeader) + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.width) + ',' + std::to_string(r.depth) + ',' + r.scheme + ',' + std::to_string(r.seed) +
           ',' + num(r.loss) + ',' + num(r.accuracy) + ',' + num(r.kappa) + ',' + num(r.stability_mean) + ',' +
           num(r.stability_stderr) + ',' + num(r.thm1_order) + ',' + r.status + '\n';
  }
  return out;
}

std::string epochs_csv(const std::vector<SweepRow>& rows) {
  std::string out = std::string(kEpochHeader) + "\n";
  for (const auto& r : rows)
    for (const auto& e : r.epochs)
      out += std::to_string(r.width) + ',' + std::to_string(r.depth) + ',' + r.scheme + ',' +
             std::to_string(r.seed) + ',' + std::to_string(e.epoch) + ',' + num(e.loss) + ',' + num(e.accuracy) +
             ',' + num(e.kappa) + '\n';
  return out;
}

std::vector<SweepRow> parse_sweep_csv(const std::string& sweep, const std::string& epochs) {
  std::vector<SweepRow> rows;
  std::map<std::tuple<std::size_t, std::size_t, std::string, std::uint64_t>, std::size_t> index;
  for (const auto& line : lines_after_header(sweep, kSweepHeader)) {
    const auto f = split(line, ',');
    require(f.size() == 11, ErrorKind::FormatError, "sweep row needs 11 fields: " + line);
    SweepRow r;
    r.width = parse_uint(f[0]);
    r.depth = parse_uint(f[1]);
    r.scheme = f[2];
    r.seed = parse_uint(f[3]);
    r.loss = parse_num(f[4]);
    r.accuracy = parse_num(f[5]);
    r.kappa = parse_num(f[6]);
    r.stability_mean = parse_num(f[7]);
    r.stability_stderr = parse_num(f[8]);
    r.thm1_order = parse_num(f[9]);
    r.status = f[10];
    index[{r.width, r.depth, r.scheme, r.seed}] = rows.size();
    rows.push_back(std::move(r));
  }
  if (epochs.empty()) return rows;
  for (const auto& line : lines_after_header(epochs, kEpochHeader)) {
    const auto f = split(line, ',');
    require(f.size() == 8, ErrorKind::FormatError, "epoch row needs 8 fields: " + line);
    const auto it = index.find({parse_uint(f[0]), parse_uint(f[1]), f[2], parse_uint(f[3])});
    require(it != index.end(), ErrorKind::FormatError, "epoch row without a sweep row: " + line);
    EpochRecord e;
    e.epoch = parse_uint(f[4]);
    e.loss = parse_num(f[5]);
    e.accuracy = parse_num(f[6]);
    e.kappa = parse_num(f[7]);
    rows[it->second].epochs.push_back(e);
  }
  return rows;
}

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(f), ErrorKind::InvalidInput, "cannot write " + p.string());
  f << text;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::InvalidInput, "cannot read " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<std::filesystem::path> replot(const std::filesystem::path& out_dir) {
  const std::string sweep = read_text(out_dir / "sweep.csv");
  const std::string epochs =
      std::filesystem::exists(out_dir / "epochs.csv") ? read_text(out_dir / "epochs.csv") : std::string{};
  std::vector<std::filesystem::path> written;
  for (const auto& fig : sweep_figures(parse_sweep_csv(sweep, epochs))) {
    write_text(out_dir / fig.file_name, fig.svg);
    written.push_back(out_dir / fig.file_name);
  }
  return written;
}

std::size_t run_sweep(const SweepSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  const LoadedData data = load_dataset(spec.data);
  const auto rows = run_sweep_rows(spec, data);
  std::filesystem::create_directories(out_dir);
  write_text(out_dir / "sweep.csv", sweep_csv(rows));
  write_text(out_dir / "epochs.csv", epochs_csv(rows));
  replot(out_dir);
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.status != "ok";
  return failed;
}

}  // namespace rlab

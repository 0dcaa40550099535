#pragma once

// Width x depth x scheme x seed experiment grid: train, measure, tabulate.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rlab/data.hpp"
#include "rlab/network.hpp"
#include "rlab/stability.hpp"
#include "rlab/training.hpp"

namespace rlab {

struct DatasetSpec {
  enum class Kind { Mnist, Sphere } kind = Kind::Mnist;
  std::filesystem::path images;
  std::filesystem::path labels;
  std::size_t train = 2048;
  std::size_t eval = 512;
  bool raw_scale = false;
  // Sphere data.
  std::size_t d = 16;
  SyntheticTask task = SyntheticTask::TwoClassHalfspace;
  std::uint64_t seed = 0;
};

struct LoadedData {
  Dataset train;
  Dataset eval;  // may be empty
};

/// MNIST: the first `train` points train, the next `eval` evaluate.
/// Sphere: n = train + eval points from the dataset seed, split the same way.
LoadedData load_dataset(const DatasetSpec& spec);

/// Bundled MNIST subset, if present in the source tree.
DatasetSpec default_mnist_spec();

std::vector<std::size_t> default_widths(std::size_t max_width = 1024);

struct SweepSpec {
  std::vector<std::size_t> widths = default_widths();
  std::vector<std::size_t> depths{2, 4, 6, 8, 10};
  std::vector<std::string> schemes{"he"};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  DatasetSpec data;
  TrainHyper hyper;
  StabilityConfig stability;
  double alpha = 1.0;
  /// Stability over the held-out split instead of the training split.
  bool stability_on_eval = false;
  std::size_t threads = 1;

  void validate() const;
};

struct SweepRow {
  std::size_t width = 0;
  std::size_t depth = 0;
  std::string scheme;
  std::uint64_t seed = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  double kappa = 0.0;
  double stability_mean = 0.0;
  double stability_stderr = 0.0;
  double thm1_order = 0.0;
  std::string status = "ok";
  std::vector<EpochRecord> epochs;
};

/// Network config of one grid cell.
NetworkConfig sweep_config(const SweepSpec& spec, const LoadedData& data, std::size_t width, std::size_t depth,
                           const std::string& scheme);

/// One training run. Randomness is keyed by (scheme, width, depth, seed)
/// only, so results do not depend on scheduling.
SweepRow run_single(const SweepSpec& spec, const LoadedData& data, std::size_t width, std::size_t depth,
                    const std::string& scheme, std::uint64_t seed);

/// All runs in grid order (scheme, depth, width, seed).
std::vector<SweepRow> run_sweep_rows(const SweepSpec& spec, const LoadedData& data);

/// width,depth,scheme,seed,loss,accuracy,kappa,stability_mean,stability_stderr,thm1_order,status
std::string sweep_csv(const std::vector<SweepRow>& rows);
/// width,depth,scheme,seed,epoch,loss,accuracy,kappa
std::string epochs_csv(const std::vector<SweepRow>& rows);

/// Inverse of sweep_csv / epochs_csv (epochs are attached to their rows).
std::vector<SweepRow> parse_sweep_csv(const std::string& sweep, const std::string& epochs = {});

/// Writes sweep.csv, epochs.csv and the figures. Returns the number of
/// failed runs.
std::size_t run_sweep(const SweepSpec& spec, const std::filesystem::path& out_dir);

/// Rebuilds every figure in out_dir from its CSV files; returns the paths.
std::vector<std::filesystem::path> replot(const std::filesystem::path& out_dir);

}  // namespace rlab

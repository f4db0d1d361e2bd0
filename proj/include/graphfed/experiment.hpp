#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "graphfed/datagen.hpp"
#include "graphfed/trainer.hpp"

namespace graphfed {

namespace fs = std::filesystem;

enum class RunMode : std::uint8_t { kSingle, kDistInproc, kDistTcp };

std::string_view run_mode_name(RunMode m);
RunMode parse_run_mode(std::string_view s);

/// Everything a run, sweep or resilience study needs. Serialized as JSON:
/// {"dataset": {"dir", "sbm": {...}}, "train": {...}, "run": {...},
///  "sweep": {...}, "resilience": {...}}.
struct ExperimentConfig {
  // dataset: a directory, or an SBM generated from `sbm` when dir is empty
  std::string dataset_dir;
  SbmConfig sbm;

  TrainConfig train;

  RunMode mode = RunMode::kSingle;
  std::size_t workers = 2;
  double overlap = 0.0;
  std::uint64_t partition_seed = 1;
  std::uint64_t approx_seed = 1;
  std::string partition_file;  // overrides the built-in partitioner
  bool threads = false;        // dist-inproc: one thread per worker
  std::string bind = "127.0.0.1:0";
  bool external_workers = false;  // dist-tcp: wait for `worker` processes
  std::size_t hello_timeout_ms = 30000;

  std::vector<std::size_t> sweep_workers{1, 3, 5};
  std::vector<double> sweep_overlaps{0.0, 0.10, 0.25, 0.50};
  std::vector<std::uint64_t> seeds{1};
  std::size_t parallel_cells = 1;

  std::vector<double> deletion_fractions{0.0, 0.1, 0.3, 0.5, 0.7, 0.9};

  void validate() const;
  /// Copy with every seed (training, partition, approximation and, for a
  /// generated dataset, the SBM) set to `seed`.
  ExperimentConfig with_seed(std::uint64_t seed) const;
};

std::string experiment_to_json(const ExperimentConfig& cfg);
/// Keys missing from `text` keep their value from `base`.
ExperimentConfig experiment_from_json(const std::string& text, const ExperimentConfig& base = {});

Dataset load_experiment_dataset(const ExperimentConfig& cfg);

struct RunOutcome {
  TrainResult train;
  std::optional<DistributedPlan> plan;
  TransportCounters counters;
  double preprocessing_s = 0.0;
};

/// Trains once according to cfg.mode. dist-tcp binds cfg.bind and, unless
/// external_workers is set, connects cfg.workers local worker threads over
/// loopback. `on_listen` receives the bound port before workers are awaited.
RunOutcome run_training(const Dataset& d, const ExperimentConfig& cfg, const ParamsObserver& observer = {},
                        const std::function<void(std::uint16_t)>& on_listen = {});

std::string epochs_csv(const std::vector<EpochReport>& epochs);

/// config.json, epochs.csv, model.gfpm, result.json and, for distributed
/// runs, partition.txt plus provenance.csv.
void write_run_dir(const fs::path& dir, const ExperimentConfig& cfg, const Dataset& d, const RunOutcome& out);

RunOutcome run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir);

struct SweepCell {
  std::size_t m = 1;
  double overlap = 0.0;
  double overhead = 0.0;
  std::vector<double> test_f1;  // one per seed
  std::vector<std::size_t> epochs_to_converge;
  double mean_test_f1 = 0.0;
  double std_test_f1 = 0.0;
  double mean_epochs_to_converge = 0.0;
};

/// m x overlap x seed cross product; m = 1 is the single-machine baseline.
/// Writes one run directory per triple and summary.csv.
std::vector<SweepCell> run_sweep(const ExperimentConfig& cfg, const fs::path& out_dir);
std::string summary_csv(const std::vector<SweepCell>& cells);

struct ResiliencePoint {
  double fraction = 0.0;
  std::vector<double> test_f1;
  std::vector<std::size_t> remaining_train;
  double mean_test_f1 = 0.0;
  double std_test_f1 = 0.0;
};

/// Single-machine training after deleting each fraction of training
/// vertices. Writes run directories, resilience.csv and resilience.dat.
std::vector<ResiliencePoint> run_resilience(const ExperimentConfig& cfg, const fs::path& out_dir);

/// Renders report.md and gnuplot .dat files from the CSVs found under
/// `dir`. Throws InputError when there is nothing to report.
std::vector<fs::path> write_report(const fs::path& dir);

/// One dataset directory per worker plus provenance.csv
/// (local_id, global_id, source_partition, is_core).
void write_extended_partitions(const fs::path& out_dir, const std::vector<ExtendedPartition>& parts,
                               const OverlapConfig& overlap);

double mean_of(const std::vector<double>& xs);
/// Sample standard deviation (n - 1); 0 for fewer than two values.
double stddev_of(const std::vector<double>& xs);

}  // namespace graphfed

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "graphfed/approx.hpp"
#include "graphfed/dataset.hpp"
#include "graphfed/model.hpp"
#include "graphfed/partition.hpp"

namespace graphfed {

struct TrainConfig {
  ModelConfig model;
  std::size_t max_epochs = 200;
  std::size_t patience = 20;  // evaluations without val-F1 improvement
  std::size_t eval_every = 1;
  std::uint64_t seed = 1;
  bool include_approx_in_loss = false;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

std::string train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const std::string& text);

struct EpochReport {
  std::size_t epoch = 0;
  std::optional<double> train_loss;  // absent when no vertex contributed to the loss
  double val_f1 = 0.0;
  double test_f1 = 0.0;
  double wall_time_s = 0.0;
  std::uint64_t bytes_exchanged = 0;
};

struct TrainResult {
  ModelParams params;  // best-validation parameters
  std::vector<EpochReport> epochs;
  std::size_t best_epoch = 0;
  double best_val_f1 = 0.0;
  double test_f1 = 0.0;  // test F1 of the returned parameters
};

/// Called with (epoch, parameters after that epoch's update/aggregation).
using ParamsObserver = std::function<void(std::size_t, const ModelParams&)>;

/// Full-graph deterministic evaluation (GraphSAGE uses every neighbor).
class GlobalEvaluator {
 public:
  GlobalEvaluator(const Dataset& d, const ModelConfig& model);
  // Returns {val_f1, test_f1}; an empty mask scores 0.
  std::pair<double, double> evaluate(const ModelParams& p) const;

 private:
  const Dataset& data_;
  std::vector<SparseMatrix> ops_;
  std::vector<std::size_t> val_rows_;
  std::vector<std::size_t> test_rows_;
};

std::pair<double, double> evaluate_global(const ModelParams& p, const Dataset& d, const ModelConfig& model);

/// Per-worker training state. The RNG stream is keyed by (seed, worker_id).
struct WorkerState {
  std::uint32_t worker_id = 0;
  ExtendedPartition partition;
  ModelParams params;
  AdamState adam;
  Rng rng;
  NormalizedAdjacency a_hat;           // KW-GCN propagation operator on the local graph
  std::vector<std::size_t> loss_rows;  // local ids contributing to the loss

  static WorkerState create(std::uint32_t worker_id, ExtendedPartition partition, const TrainConfig& cfg,
                            ModelParams initial);
};

struct LocalEpoch {
  std::optional<double> loss;
  std::size_t loss_vertices = 0;
  double wall_time_s = 0.0;
};

/// One local epoch: KW-GCN takes one full-batch step, GraphSAGE one pass
/// over shuffled minibatches. Leaves params untouched without train vertices.
LocalEpoch worker_epoch(WorkerState& w, const TrainConfig& cfg);

/// Unweighted elementwise mean, independent of list order. Throws
/// InputError on an empty list or mismatched shapes.
ModelParams aggregate(const std::vector<ModelParams>& params_list);

/// Early stopping on validation F1 with best-parameter tracking.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}
  // Returns true when training should stop.
  bool observe(std::size_t epoch, double val_f1, double test_f1, const ModelParams& p);
  void finish(TrainResult& r) const;
  bool has_best() const { return has_best_; }

 private:
  std::size_t patience_;
  std::size_t stale_ = 0;
  bool has_best_ = false;
  std::size_t best_epoch_ = 0;
  double best_val_ = 0.0;
  double best_test_ = 0.0;
  ModelParams best_;
};

TrainResult train_single(const Dataset& d, const TrainConfig& cfg, const ParamsObserver& observer = {});

enum class ExecutionMode { kSequential, kThreads };

struct DistributedOptions {
  std::size_t num_workers = 2;
  double overlap = 0.0;
  std::uint64_t partition_seed = 1;
  std::uint64_t approx_seed = 1;
  // Use this assignment instead of running the partitioner.
  std::optional<PartitionAssignment> partition;
  // Give every worker the whole dataset as its partition.
  bool full_replicas = false;
  ExecutionMode mode = ExecutionMode::kSequential;
};

/// Partitioning + approximation output shipped to the workers.
struct DistributedPlan {
  PartitionAssignment partition;
  std::vector<ExtendedPartition> workers;
  double preprocessing_s = 0.0;
};

DistributedPlan prepare_plan(const Dataset& d, const DistributedOptions& opts);

struct TransportCounters {
  std::uint64_t start_epoch_frames = 0;
  std::uint64_t params_frames = 0;
  std::uint64_t frame_bytes_sent = 0;
  std::uint64_t frame_bytes_received = 0;
  std::uint64_t param_bytes = 0;  // parameter blobs inside StartEpoch/Params frames
};

struct DistributedResult {
  TrainResult train;
  DistributedPlan plan;
  TransportCounters counters;
};

/// In-process master/worker run (sequential or one thread per worker).
DistributedResult train_distributed(const Dataset& d, const TrainConfig& cfg, const DistributedOptions& opts,
                                    const ParamsObserver& observer = {});

}  // namespace graphfed

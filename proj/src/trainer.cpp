#include "graphfed/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <json.hpp>

#include "epoch_loop.hpp"
#include "graphfed/error.hpp"
#include "graphfed/transport.hpp"

namespace graphfed {

using internal::EpochLoop;
using internal::seconds_since;

using nlohmann::json;

namespace {

std::vector<std::size_t> rows_with(const SplitMask& split, Role r) {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < split.roles.size(); ++v)
    if (split.roles[v] == r) out.push_back(v);
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  model.validate();
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
}

std::string train_config_to_json(const TrainConfig& cfg) {
  json j = {
      {"model",
       {{"kind", model_kind_name(cfg.model.kind)},
        {"num_layers", cfg.model.num_layers},
        {"hidden_dim", cfg.model.hidden_dim},
        {"learning_rate", cfg.model.learning_rate},
        {"batch_size", cfg.model.batch_size},
        {"neighbor_samples", cfg.model.neighbor_samples}}},
      {"max_epochs", cfg.max_epochs},
      {"patience", cfg.patience},
      {"eval_every", cfg.eval_every},
      {"seed", cfg.seed},
      {"include_approx_in_loss", cfg.include_approx_in_loss},
  };
  return j.dump();
}

TrainConfig train_config_from_json(const std::string& text) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("train config is not a JSON object");
  TrainConfig cfg;
  try {
    if (j.contains("model")) {
      const json& m = j.at("model");
      cfg.model.kind = parse_model_kind(m.value("kind", std::string(model_kind_name(cfg.model.kind))));
      cfg.model.num_layers = m.value("num_layers", cfg.model.num_layers);
      cfg.model.hidden_dim = m.value("hidden_dim", cfg.model.hidden_dim);
      cfg.model.learning_rate = m.value("learning_rate", cfg.model.learning_rate);
      cfg.model.batch_size = m.value("batch_size", cfg.model.batch_size);
      cfg.model.neighbor_samples = m.value("neighbor_samples", cfg.model.neighbor_samples);
    }
    cfg.max_epochs = j.value("max_epochs", cfg.max_epochs);
    cfg.patience = j.value("patience", cfg.patience);
    cfg.eval_every = j.value("eval_every", cfg.eval_every);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.include_approx_in_loss = j.value("include_approx_in_loss", cfg.include_approx_in_loss);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

GlobalEvaluator::GlobalEvaluator(const Dataset& d, const ModelConfig& model)
    : data_(d), val_rows_(rows_with(d.split, Role::kVal)), test_rows_(rows_with(d.split, Role::kTest)) {
  const SparseMatrix op = model.kind == ModelKind::kKwGcn ? normalize_adjacency(d.graph) : mean_adjacency(d.graph);
  ops_.assign(model.num_layers, op);
}

std::pair<double, double> GlobalEvaluator::evaluate(const ModelParams& p) const {
  if (p.weights.size() != ops_.size()) throw InputError("evaluate: layer count differs from model config");
  const Activations act = propagate_forward(ops_, data_.features, p);
  const auto pred = argmax_rows(act.logits());
  auto score = [&](const std::vector<std::size_t>& rows) {
    return rows.empty() ? 0.0 : micro_f1(pred, data_.labels.values, rows);
  };
  return {score(val_rows_), score(test_rows_)};
}

std::pair<double, double> evaluate_global(const ModelParams& p, const Dataset& d, const ModelConfig& model) {
  return GlobalEvaluator(d, model).evaluate(p);
}

WorkerState WorkerState::create(std::uint32_t worker_id, ExtendedPartition partition, const TrainConfig& cfg,
                                ModelParams initial) {
  WorkerState w;
  w.worker_id = worker_id;
  w.partition = std::move(partition);
  w.adam = AdamState::for_params(initial);
  w.params = std::move(initial);
  w.rng = derive_rng(cfg.seed, {0x3e7, worker_id});
  if (cfg.model.kind == ModelKind::kKwGcn) w.a_hat = normalize_adjacency(w.partition.local.graph);
  const auto& roles = w.partition.local.split.roles;
  for (std::size_t v = 0; v < roles.size(); ++v)
    if (roles[v] == Role::kTrain && (cfg.include_approx_in_loss || w.partition.is_core(static_cast<VertexId>(v))))
      w.loss_rows.push_back(v);
  return w;
}

LocalEpoch worker_epoch(WorkerState& w, const TrainConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  LocalEpoch out;
  out.loss_vertices = w.loss_rows.size();
  if (w.loss_rows.empty()) {
    out.wall_time_s = seconds_since(start);
    return out;
  }
  const Dataset& local = w.partition.local;
  const double lr = cfg.model.learning_rate;

  if (cfg.model.kind == ModelKind::kKwGcn) {
    const Activations act = kw_forward(w.a_hat, local.features, w.params);
    const LossResult loss = cross_entropy_loss(act.logits(), local.labels.values, w.loss_rows);
    const ModelParams grads = kw_backward(act, w.a_hat, w.params, loss.grad_logits);
    adam_step(w.params, grads, w.adam, lr);
    round_to_f32(w.params);
    out.loss = loss.loss;
  } else {
    std::vector<VertexId> order(w.loss_rows.begin(), w.loss_rows.end());
    shuffle(order, w.rng);
    double weighted = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.model.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.model.batch_size);
      const std::span<const VertexId> batch(order.data() + begin, end - begin);
      const SageForward fwd = sage_forward(local.graph, local.features, w.params, cfg.model, w.rng, batch);
      std::vector<std::uint32_t> labels(batch.size());
      std::vector<std::size_t> rows(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        labels[i] = local.labels.values[batch[i]];
        rows[i] = i;
      }
      const LossResult loss = cross_entropy_loss(fwd.logits(), labels, rows);
      const ModelParams grads = sage_backward(fwd, w.params, loss.grad_logits);
      adam_step(w.params, grads, w.adam, lr);
      round_to_f32(w.params);
      weighted += loss.loss * static_cast<double>(batch.size());
    }
    out.loss = weighted / static_cast<double>(order.size());
  }
  out.wall_time_s = seconds_since(start);
  return out;
}

ModelParams aggregate(const std::vector<ModelParams>& params_list) {
  if (params_list.empty()) throw InputError("aggregate: empty parameter list");
  ModelParams out = zeros_like(params_list.front());
  for (const auto& p : params_list)
    if (!p.same_shape(out)) throw InputError("aggregate: parameter shapes differ between workers");
  const double inv = static_cast<double>(params_list.size());
  std::vector<double> column(params_list.size());
  for (std::size_t l = 0; l < out.weights.size(); ++l) {
    auto& dst = out.weights[l].data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      for (std::size_t w = 0; w < params_list.size(); ++w) column[w] = params_list[w].weights[l].data()[i];
      // fixed summation order makes the mean independent of worker order
      std::sort(column.begin(), column.end());
      double acc = 0.0;
      for (double x : column) acc += x;
      dst[i] = acc / inv;
    }
  }
  return out;
}

bool EarlyStopper::observe(std::size_t epoch, double val_f1, double test_f1, const ModelParams& p) {
  if (!has_best_ || val_f1 > best_val_) {
    has_best_ = true;
    best_val_ = val_f1;
    best_test_ = test_f1;
    best_epoch_ = epoch;
    best_ = p;
    stale_ = 0;
    return false;
  }
  return ++stale_ >= patience_;
}

void EarlyStopper::finish(TrainResult& r) const {
  r.params = best_;
  r.best_epoch = best_epoch_;
  r.best_val_f1 = best_val_;
  r.test_f1 = best_test_;
}

TrainResult train_single(const Dataset& d, const TrainConfig& cfg, const ParamsObserver& observer) {
  cfg.validate();
  d.validate();
  const GlobalEvaluator evaluator(d, cfg.model);
  WorkerState w = WorkerState::create(0, full_replica(d, 0), cfg,
                                      init_params(cfg.model, d.features.cols(), d.labels.num_classes, cfg.seed));
  EpochLoop loop(cfg, evaluator);
  TrainResult result;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const LocalEpoch local = worker_epoch(w, cfg);
    if (observer) observer(epoch, w.params);
    EpochReport rep;
    rep.epoch = epoch;
    rep.train_loss = local.loss;
    const bool stop = loop.record(rep, w.params);
    rep.wall_time_s = seconds_since(start);
    result.epochs.push_back(rep);
    if (stop) break;
  }
  loop.stopper.finish(result);
  return result;
}

DistributedPlan prepare_plan(const Dataset& d, const DistributedOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  if (opts.num_workers < 2) throw ConfigError("distributed training needs at least 2 workers");
  DistributedPlan plan;
  if (opts.full_replicas) {
    for (std::size_t i = 0; i < opts.num_workers; ++i)
      plan.workers.push_back(full_replica(d, static_cast<PartitionId>(i)));
  } else {
    plan.partition = opts.partition ? *opts.partition : partition_bfs_balanced(d.graph, opts.num_workers, opts.partition_seed);
    plan.partition.validate(d.num_vertices());
    if (plan.partition.num_partitions != opts.num_workers)
      throw ConfigError("partition count differs from the number of workers");
    plan.workers = build_extended_partitions(d, plan.partition, OverlapConfig{opts.overlap, opts.approx_seed});
  }
  plan.preprocessing_s = seconds_since(start);
  return plan;
}

DistributedResult train_distributed(const Dataset& d, const TrainConfig& cfg, const DistributedOptions& opts,
                                    const ParamsObserver& observer) {
  cfg.validate();
  d.validate();
  DistributedPlan plan = prepare_plan(d, opts);
  InProcessCluster cluster(opts.num_workers, opts.mode);
  return run_master_protocol(cluster.take_master_channels(), d, cfg, std::move(plan), observer);
}

}  // namespace graphfed

#include <doctest.h>

#include <random>

#include "graphfed/datagen.hpp"
#include "graphfed/error.hpp"
#include "graphfed/params_io.hpp"
#include "graphfed/trainer.hpp"
#include "oracles.hpp"

using namespace graphfed;

namespace {

Dataset small_sbm(std::uint64_t seed, double sigma = 1.0, double p_out = 0.005) {
  SbmConfig c;
  c.n = 240;
  c.k = 4;
  c.p_in = 0.08;
  c.p_out = p_out;
  c.feature_dim = 8;
  c.noise_sigma = sigma;
  c.seed = seed;
  return generate_sbm(c);
}

TrainConfig quick(std::size_t epochs, ModelKind kind = ModelKind::kKwGcn) {
  TrainConfig cfg;
  cfg.max_epochs = epochs;
  cfg.model.kind = kind;
  cfg.model.hidden_dim = 16;
  cfg.model.batch_size = 64;
  cfg.model.neighbor_samples = {4, 4};
  return cfg;
}

bool same_reports(const std::vector<EpochReport>& a, const std::vector<EpochReport>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].epoch != b[i].epoch || a[i].train_loss != b[i].train_loss || a[i].val_f1 != b[i].val_f1 ||
        a[i].test_f1 != b[i].test_f1 || a[i].bytes_exchanged != b[i].bytes_exchanged)
      return false;
  return true;
}

}  // namespace

TEST_CASE("train config validation and json") {
  TrainConfig cfg;
  cfg.max_epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.patience = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = quick(7, ModelKind::kGraphSage);
  cfg.seed = 99;
  cfg.include_approx_in_loss = true;
  cfg.model.learning_rate = 0.125;
  CHECK(train_config_from_json(train_config_to_json(cfg)) == cfg);
  CHECK_THROWS_AS(train_config_from_json("{\"max_epochs\": \"x\"}"), ConfigError);
}

TEST_CASE("train_single") {
  const Dataset d = small_sbm(1);
  SUBCASE("one epoch gives one report") { CHECK(train_single(d, quick(1)).epochs.size() == 1); }
  SUBCASE("zero epochs rejected") { CHECK_THROWS_AS(train_single(d, quick(0)), ConfigError); }
  SUBCASE("deterministic") {
    for (auto kind : {ModelKind::kKwGcn, ModelKind::kGraphSage}) {
      const auto a = train_single(d, quick(5, kind));
      const auto b = train_single(d, quick(5, kind));
      CHECK(same_reports(a.epochs, b.epochs));
      CHECK(a.params == b.params);
    }
  }
  SUBCASE("separable graph reaches F1 1.0 within 50 epochs") {
    for (auto kind : {ModelKind::kKwGcn, ModelKind::kGraphSage}) {
      const auto r = train_single(small_sbm(2, 0.0, 0.0), quick(50, kind));
      CHECK(r.test_f1 == 1.0);
      CHECK(evaluate_global(r.params, small_sbm(2, 0.0, 0.0), quick(1, kind).model).second == 1.0);
    }
  }
  SUBCASE("early stopping returns the best validation epoch") {
    TrainConfig cfg = quick(300);
    cfg.patience = 3;
    const auto r = train_single(d, cfg);
    CHECK(r.epochs.size() < 300);
    double best = -1;
    for (const auto& e : r.epochs) best = std::max(best, e.val_f1);
    CHECK(r.best_val_f1 == best);
    CHECK(r.epochs[r.best_epoch - 1].val_f1 == best);
    CHECK(r.epochs.size() == r.best_epoch + 3);
    CHECK(evaluate_global(r.params, d, cfg.model).second == r.test_f1);
  }
  SUBCASE("eval_every carries metrics between evaluations") {
    TrainConfig cfg = quick(6);
    cfg.eval_every = 3;
    const auto r = train_single(d, cfg);
    REQUIRE(r.epochs.size() == 6);
    CHECK(r.epochs[0].val_f1 == 0.0);
    CHECK(r.epochs[3].val_f1 == r.epochs[2].val_f1);
  }
}

TEST_CASE("global evaluation") {
  const Dataset d = small_sbm(3);
  const ModelConfig model = quick(1).model;
  const auto p = init_params(model, d.features.cols(), d.labels.num_classes, 5);
  const auto a = evaluate_global(p, d, model), b = evaluate_global(p, d, model);
  CHECK(a == b);

  // chance level over several random inits on a balanced SBM
  double mean = 0.0;
  for (std::uint64_t s = 1; s <= 10; ++s) mean += evaluate_global(init_params(model, 8, 4, s), d, model).second / 10;
  CHECK(std::abs(mean - 0.25) <= 0.1);
}

TEST_CASE("worker epochs") {
  const Dataset d = small_sbm(4);
  const TrainConfig cfg = quick(1);
  const auto init = init_params(cfg.model, d.features.cols(), d.labels.num_classes, cfg.seed);

  SUBCASE("full replica worker equals one single-machine epoch") {
    ModelParams seen;
    train_single(d, cfg, [&](std::size_t, const ModelParams& p) { seen = p; });
    WorkerState w = WorkerState::create(0, full_replica(d, 0), cfg, init);
    worker_epoch(w, cfg);
    CHECK(w.params == seen);
  }
  SUBCASE("no train vertices leaves params unchanged") {
    Dataset no_train = d;
    for (auto& r : no_train.split.roles)
      if (r == Role::kTrain) r = Role::kVal;
    WorkerState w = WorkerState::create(0, full_replica(no_train, 0), cfg, init);
    const LocalEpoch e = worker_epoch(w, cfg);
    CHECK_FALSE(e.loss.has_value());
    CHECK(w.params == init);
  }
  SUBCASE("approximated vertices stay out of the loss by default") {
    PartitionAssignment a{std::vector<PartitionId>(d.num_vertices()), 2};
    for (VertexId v = 0; v < d.num_vertices(); ++v) a.assignment[v] = v % 2;
    const auto eps = build_extended_partitions(d, a, {0.5, 1});
    const WorkerState w = WorkerState::create(0, eps[0], cfg, init);
    REQUIRE(eps[0].num_approx() > 0);
    for (auto r : w.loss_rows) CHECK(eps[0].is_core(static_cast<VertexId>(r)));
    TrainConfig incl = cfg;
    incl.include_approx_in_loss = true;
    CHECK(WorkerState::create(0, eps[0], incl, init).loss_rows.size() > w.loss_rows.size());

    const auto eps0 = build_extended_partitions(d, a, {0.0, 1});
    const WorkerState w0 = WorkerState::create(0, eps0[0], incl, init);
    CHECK(w0.loss_rows.size() == eps0[0].local.split.count(Role::kTrain));
  }
}

TEST_CASE("aggregate") {
  std::mt19937_64 rng(6);
  ModelParams a, b, c;
  a.weights = {oracle::random_matrix(3, 2, rng), oracle::random_matrix(2, 2, rng)};
  b.weights = {oracle::random_matrix(3, 2, rng), oracle::random_matrix(2, 2, rng)};
  c.weights = {oracle::random_matrix(3, 2, rng), oracle::random_matrix(2, 2, rng)};
  // workers always exchange f32-representable values
  for (auto* p : {&a, &b, &c}) round_to_f32(*p);
  CHECK(aggregate({a, a, a}) == a);
  const auto mean = aggregate({a, b});
  for (std::size_t l = 0; l < 2; ++l)
    for (std::size_t i = 0; i < a.weights[l].size(); ++i)
      CHECK(mean.weights[l].data()[i] == doctest::Approx((a.weights[l].data()[i] + b.weights[l].data()[i]) / 2));
  CHECK(aggregate({a, b, c}) == aggregate({c, a, b}));
  CHECK(aggregate({b, c, a}) == aggregate({c, b, a}));

  ModelParams s1, s2, s3;
  s1.weights = {Matrix(1, 1, 1.0)};
  s2.weights = {Matrix(1, 1, 2.0)};
  s3.weights = {Matrix(1, 1, 3.0)};
  CHECK(aggregate({s1, s2, s3}).weights[0](0, 0) == 2.0);
  CHECK_THROWS_AS(aggregate({}), InputError);
  CHECK_THROWS_AS(aggregate({a, s1}), InputError);
}

TEST_CASE("distributed with full replicas equals single machine") {
  const Dataset d = small_sbm(5);
  TrainConfig cfg = quick(10);
  cfg.patience = 100;
  std::vector<ModelParams> single;
  train_single(d, cfg, [&](std::size_t, const ModelParams& p) { single.push_back(p); });
  for (std::size_t m : {2, 3, 5}) {
    DistributedOptions o;
    o.num_workers = m;
    o.full_replicas = true;
    std::vector<ModelParams> dist;
    train_distributed(d, cfg, o, [&](std::size_t, const ModelParams& p) { dist.push_back(p); });
    REQUIRE(dist.size() == single.size());
    for (std::size_t e = 0; e < dist.size(); ++e) CHECK(max_abs_diff(dist[e], single[e]) <= 1e-6);
  }
}

TEST_CASE("distributed protocol accounting and replay") {
  const Dataset d = small_sbm(6);
  for (auto kind : {ModelKind::kKwGcn, ModelKind::kGraphSage}) {
    TrainConfig cfg = quick(1, kind);
    DistributedOptions o;
    o.num_workers = 2;
    o.overlap = 0.25;
    const auto r = train_distributed(d, cfg, o);
    CHECK(r.counters.start_epoch_frames == 2);
    CHECK(r.counters.params_frames == 2);
    const std::size_t blob = serialize_params(r.train.params).size();
    REQUIRE(r.train.epochs.size() == 1);
    CHECK(r.train.epochs[0].bytes_exchanged == 2 * 2 * blob);

    cfg.max_epochs = 4;
    o.num_workers = 3;
    const auto seq = train_distributed(d, cfg, o);
    o.mode = ExecutionMode::kThreads;
    const auto thr = train_distributed(d, cfg, o);
    o.mode = ExecutionMode::kSequential;
    const auto again = train_distributed(d, cfg, o);
    CHECK(same_reports(seq.train.epochs, again.train.epochs));
    CHECK(same_reports(seq.train.epochs, thr.train.epochs));
    CHECK(seq.train.params == thr.train.params);
    for (const auto& e : seq.train.epochs) CHECK(e.bytes_exchanged == 2 * 3 * blob);
  }
}

TEST_CASE("distributed option errors") {
  const Dataset d = small_sbm(7);
  DistributedOptions o;
  o.num_workers = 1;
  CHECK_THROWS_AS(train_distributed(d, quick(1), o), ConfigError);
  o.num_workers = 3;
  o.partition = PartitionAssignment{std::vector<PartitionId>(d.num_vertices(), 0), 2};
  for (VertexId v = 0; v < d.num_vertices(); v += 2) o.partition->assignment[v] = 1;
  CHECK_THROWS_AS(train_distributed(d, quick(1), o), ConfigError);
}

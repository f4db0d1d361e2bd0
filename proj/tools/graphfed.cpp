// graphfed command-line tool.
//
// Option precedence: command-line flag > GRAPHFED_* environment variable >
// --config JSON file > built-in default.

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "graphfed/approx.hpp"
#include "graphfed/error.hpp"
#include "graphfed/experiment.hpp"
#include "graphfed/io.hpp"
#include "graphfed/partition.hpp"
#include "graphfed/transport.hpp"

using namespace graphfed;
using json = nlohmann::json;

namespace {

// --config has to be known before the other options are bound, since the
// file only supplies defaults that flags and env vars then override.
std::optional<std::string> find_config(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  if (const char* env = std::getenv("GRAPHFED_CONFIG"); env && *env) return std::string(env);
  return std::nullopt;
}

std::string env_name(const std::string& flag) {
  std::string s = "GRAPHFED_";
  const std::string name = flag.substr(2, flag.find_first_of(",{") - 2);
  for (char c : name) s += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

template <typename T>
CLI::Option* opt(CLI::App* app, const std::string& flag, T& var, const std::string& help) {
  return app->add_option(flag, var, help)->envname(env_name(flag))->capture_default_str();
}

CLI::Option* flag(CLI::App* app, const std::string& name, bool& var, const std::string& help) {
  return app->add_flag(name, var, help)->envname(env_name(name));
}

std::string config_path;  // consumed by find_config; bound so --help lists it

void add_config_flag(CLI::App* app) {
  app->add_option("--config", config_path, "JSON config file (lowest precedence after defaults)")
      ->envname("GRAPHFED_CONFIG");
}

void add_sbm_options(CLI::App* app, SbmConfig& s, const std::string& seed_flag) {
  opt(app, "--n", s.n, "SBM vertex count");
  opt(app, "--k", s.k, "SBM community count");
  opt(app, "--p-in", s.p_in, "intra-community edge probability");
  opt(app, "--p-out", s.p_out, "inter-community edge probability");
  opt(app, "--feature-dim", s.feature_dim, "feature dimension");
  opt(app, "--noise-sigma", s.noise_sigma, "feature noise std");
  opt(app, "--train-fraction", s.train_fraction, "train share of the split");
  opt(app, "--val-fraction", s.val_fraction, "validation share of the split");
  opt(app, "--test-fraction", s.test_fraction, "test share of the split");
  opt(app, seed_flag, s.seed, "SBM seed");
}

void add_dataset_options(CLI::App* app, ExperimentConfig& c) {
  opt(app, "--dataset", c.dataset_dir, "dataset directory (omit to generate an SBM)");
  add_sbm_options(app, c.sbm, "--sbm-seed");
}

void add_train_options(CLI::App* app, ExperimentConfig& c, std::string& model_kind) {
  opt(app, "--model", model_kind, "kw_gcn or graphsage");
  opt(app, "--layers", c.train.model.num_layers, "number of GCN layers (1 or 2)");
  opt(app, "--hidden", c.train.model.hidden_dim, "hidden dimension");
  opt(app, "--lr", c.train.model.learning_rate, "Adam learning rate");
  opt(app, "--batch-size", c.train.model.batch_size, "GraphSAGE minibatch size");
  opt(app, "--neighbor-samples", c.train.model.neighbor_samples, "GraphSAGE samples per layer, bottom first")
      ->delimiter(',');
  opt(app, "--epochs", c.train.max_epochs, "maximum epochs");
  opt(app, "--patience", c.train.patience, "evaluations without val improvement before stopping");
  opt(app, "--eval-every", c.train.eval_every, "evaluate every k epochs");
  opt(app, "--seed", c.train.seed, "training seed");
  flag(app, "--include-approx{true}", c.train.include_approx_in_loss, "train on approximated vertices too");
}

void add_run_options(CLI::App* app, ExperimentConfig& c, std::string& mode) {
  opt(app, "--mode", mode, "single | dist-inproc | dist-tcp");
  opt(app, "--workers,-m", c.workers, "number of workers");
  opt(app, "--overlap", c.overlap, "overlap O in [0,1]");
  opt(app, "--partition-seed", c.partition_seed, "partitioner seed");
  opt(app, "--approx-seed", c.approx_seed, "approximation seed");
  opt(app, "--partition-file", c.partition_file, "use this partition instead of partitioning");
  flag(app, "--threads{true}", c.threads, "dist-inproc: one thread per worker");
  opt(app, "--bind", c.bind, "dist-tcp master address host:port");
  opt(app, "--hello-timeout-ms", c.hello_timeout_ms, "dist-tcp: how long to wait for workers");
}

void finish_config(ExperimentConfig& c, const std::string& model_kind, const std::string& mode) {
  c.train.model.kind = parse_model_kind(model_kind);
  c.mode = parse_run_mode(mode);
  c.validate();
}

void print_outcome(const RunOutcome& o, const std::string& out) {
  std::cout << "test_f1=" << o.train.test_f1 << " best_val_f1=" << o.train.best_val_f1
            << " best_epoch=" << o.train.best_epoch << " epochs=" << o.train.epochs.size() << " out=" << out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graphfed: distributed GCN training simulator"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  ExperimentConfig cfg;
  try {
    if (auto path = find_config(argc, argv)) cfg = experiment_from_json(io::read_file(*path), cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::string model_kind(model_kind_name(cfg.train.model.kind));
  std::string mode(run_mode_name(cfg.mode));
  std::string out;

  // gen
  auto* gen = app.add_subcommand("gen", "generate an SBM dataset directory");
  add_config_flag(gen);
  add_sbm_options(gen, cfg.sbm, "--seed");
  gen->add_option("--out,-o", out, "output directory")->required();

  // partition
  std::optional<std::size_t> slack;
  auto* part = app.add_subcommand("partition", "partition a dataset's graph");
  add_config_flag(part);
  opt(part, "--dataset", cfg.dataset_dir, "dataset directory");
  opt(part, "--workers,-m", cfg.workers, "number of partitions");
  opt(part, "--seed", cfg.partition_seed, "partitioner seed");
  part->add_option("--balance-slack", slack, "max size difference (default ceil(0.02 N/M))");
  part->add_option("--out,-o", out, "partition file to write")->required();

  // approximate
  auto* approx = app.add_subcommand("approximate", "build extended partitions for each worker");
  add_config_flag(approx);
  opt(approx, "--dataset", cfg.dataset_dir, "dataset directory");
  opt(approx, "--partition-file", cfg.partition_file, "partition file (default: run the partitioner)");
  opt(approx, "--workers,-m", cfg.workers, "number of partitions");
  opt(approx, "--partition-seed", cfg.partition_seed, "partitioner seed");
  opt(approx, "--overlap", cfg.overlap, "overlap O in [0,1]");
  opt(approx, "--approx-seed", cfg.approx_seed, "sampling seed");
  approx->add_option("--out,-o", out, "output directory")->required();

  // train
  auto* train = app.add_subcommand("train", "train once and write a run directory");
  add_config_flag(train);
  add_dataset_options(train, cfg);
  add_train_options(train, cfg, model_kind);
  add_run_options(train, cfg, mode);
  train->add_option("--out,-o", out, "run directory")->required();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "m x overlap x seed sweep with summary.csv");
  add_config_flag(sweep);
  add_dataset_options(sweep, cfg);
  add_train_options(sweep, cfg, model_kind);
  add_run_options(sweep, cfg, mode);
  opt(sweep, "--sweep-workers", cfg.sweep_workers, "worker counts (1 = single machine)")->delimiter(',');
  opt(sweep, "--overlaps", cfg.sweep_overlaps, "overlap values")->delimiter(',');
  opt(sweep, "--seeds", cfg.seeds, "seeds")->delimiter(',');
  opt(sweep, "--parallel-cells", cfg.parallel_cells, "runs executed concurrently");
  sweep->add_option("--out,-o", out, "output directory")->required();

  // resilience
  auto* res = app.add_subcommand("resilience", "accuracy after deleting training vertices");
  add_config_flag(res);
  add_dataset_options(res, cfg);
  add_train_options(res, cfg, model_kind);
  opt(res, "--fractions", cfg.deletion_fractions, "deletion fractions")->delimiter(',');
  opt(res, "--seeds", cfg.seeds, "seeds")->delimiter(',');
  res->add_option("--out,-o", out, "output directory")->required();

  // report
  auto* report = app.add_subcommand("report", "render tables and gnuplot .dat files");
  report->add_option("--dir,-d", out, "directory holding sweep/resilience/run outputs")->required();

  // master
  auto* master = app.add_subcommand("master", "dist-tcp master waiting for worker processes");
  add_config_flag(master);
  add_dataset_options(master, cfg);
  add_train_options(master, cfg, model_kind);
  add_run_options(master, cfg, mode);
  master->add_option("--out,-o", out, "run directory")->required();

  // worker
  std::string connect = "127.0.0.1:7070";
  std::uint32_t worker_id = 0;
  std::size_t connect_timeout_ms = 10000;
  auto* worker = app.add_subcommand("worker", "connect to a master and train one partition");
  opt(worker, "--connect", connect, "master address host:port");
  opt(worker, "--id", worker_id, "worker id in [0, m)");
  opt(worker, "--connect-timeout-ms", connect_timeout_ms, "how long to retry connecting");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen->parsed()) {
      const Dataset d = generate_sbm(cfg.sbm);
      json meta = {{"generator", "sbm"},
                   {"config", json::parse(experiment_to_json(cfg)).at("dataset").at("sbm")},
                   {"seed", cfg.sbm.seed}};
      io::save_dataset(out, d, meta.dump());
      std::cout << "wrote " << out << " (" << d.num_vertices() << " vertices, " << d.graph.num_edges()
                << " edges)\n";
    } else if (part->parsed()) {
      if (cfg.dataset_dir.empty()) throw ConfigError("partition needs --dataset");
      const Dataset d = io::load_dataset(cfg.dataset_dir);
      const auto p = partition_bfs_balanced(d.graph, cfg.workers, cfg.partition_seed, slack);
      save_partition_file(out, p);
      const auto st = cut_stats(d.graph, p);
      json j = {{"cut_edges", st.cut_edges},
                {"num_edges", d.graph.num_edges()},
                {"partition_sizes", st.partition_sizes},
                {"avg_vertex_degree", st.avg_vertex_degree},
                {"avg_cross_edges", st.avg_cross_edges},
                {"balance_slack", slack ? *slack : default_balance_slack(d.num_vertices(), cfg.workers)}};
      std::cout << j.dump(2) << "\n";
    } else if (approx->parsed()) {
      if (cfg.dataset_dir.empty()) throw ConfigError("approximate needs --dataset");
      const Dataset d = io::load_dataset(cfg.dataset_dir);
      const PartitionAssignment p =
          cfg.partition_file.empty() ? partition_bfs_balanced(d.graph, cfg.workers, cfg.partition_seed)
                                     : load_partition_file(cfg.partition_file, d.num_vertices());
      const OverlapConfig oc{cfg.overlap, cfg.approx_seed};
      const auto parts = build_extended_partitions(d, p, oc);
      write_extended_partitions(out, parts, oc);
      save_partition_file(fs::path(out) / "partition.txt", p);
      for (const auto& ep : parts)
        std::cout << "worker " << ep.partition_id << ": core=" << ep.num_core() << " approx=" << ep.num_approx()
                  << "\n";
    } else if (train->parsed()) {
      finish_config(cfg, model_kind, mode);
      print_outcome(run_experiment(cfg, out), out);
    } else if (master->parsed()) {
      cfg.mode = RunMode::kDistTcp;
      cfg.external_workers = true;
      cfg.train.model.kind = parse_model_kind(model_kind);
      cfg.validate();
      const Dataset d = load_experiment_dataset(cfg);
      const RunOutcome o = run_training(d, cfg, {}, [](std::uint16_t port) {
        std::cerr << "listening on port " << port << std::endl;
      });
      write_run_dir(out, cfg, d, o);
      print_outcome(o, out);
    } else if (worker->parsed()) {
      if (!run_worker(parse_endpoint(connect), worker_id, std::chrono::milliseconds(connect_timeout_ms))) {
        std::cerr << "error: master rejected worker " << worker_id << "\n";
        return 3;
      }
    } else if (sweep->parsed()) {
      finish_config(cfg, model_kind, mode);
      const auto cells = run_sweep(cfg, out);
      std::cout << summary_csv(cells);
    } else if (res->parsed()) {
      finish_config(cfg, model_kind, mode);
      for (const auto& p : run_resilience(cfg, out))
        std::cout << "fraction=" << p.fraction << " mean_test_f1=" << p.mean_test_f1 << "\n";
    } else if (report->parsed()) {
      for (const auto& f : write_report(out)) std::cout << f.string() << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

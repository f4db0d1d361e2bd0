#include "graphfed/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "graphfed/error.hpp"
#include "graphfed/io.hpp"
#include "graphfed/params_io.hpp"
#include "graphfed/transport.hpp"

namespace graphfed {

using json = nlohmann::json;

std::string_view run_mode_name(RunMode m) {
  switch (m) {
    case RunMode::kSingle: return "single";
    case RunMode::kDistInproc: return "dist-inproc";
    case RunMode::kDistTcp: return "dist-tcp";
  }
  return "?";
}

RunMode parse_run_mode(std::string_view s) {
  if (s == "single") return RunMode::kSingle;
  if (s == "dist-inproc") return RunMode::kDistInproc;
  if (s == "dist-tcp") return RunMode::kDistTcp;
  throw ConfigError("unknown mode '" + std::string(s) + "' (single|dist-inproc|dist-tcp)");
}

void ExperimentConfig::validate() const {
  train.validate();
  if (dataset_dir.empty()) sbm.validate();
  if (mode != RunMode::kSingle && workers < 2) throw ConfigError("distributed modes need workers >= 2");
  if (!(overlap >= 0.0 && overlap <= 1.0)) throw ConfigError("overlap must lie in [0,1]");
  if (sweep_workers.empty() || sweep_overlaps.empty() || seeds.empty())
    throw ConfigError("sweep lists must be non-empty");
  for (auto m : sweep_workers)
    if (m == 0) throw ConfigError("sweep worker counts must be positive");
  for (double o : sweep_overlaps)
    if (!(o >= 0.0 && o <= 1.0)) throw ConfigError("sweep overlaps must lie in [0,1]");
  for (double f : deletion_fractions)
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("deletion fractions must lie in [0,1]");
  if (deletion_fractions.empty()) throw ConfigError("deletion fraction list must be non-empty");
  if (parallel_cells == 0) throw ConfigError("parallel_cells must be >= 1");
}

ExperimentConfig ExperimentConfig::with_seed(std::uint64_t seed) const {
  ExperimentConfig c = *this;
  c.train.seed = seed;
  c.partition_seed = seed;
  c.approx_seed = seed;
  if (c.dataset_dir.empty()) c.sbm.seed = seed;
  return c;
}

namespace {

json sbm_json(const SbmConfig& s) {
  return {{"n", s.n},
          {"k", s.k},
          {"p_in", s.p_in},
          {"p_out", s.p_out},
          {"feature_dim", s.feature_dim},
          {"noise_sigma", s.noise_sigma},
          {"train_fraction", s.train_fraction},
          {"val_fraction", s.val_fraction},
          {"test_fraction", s.test_fraction},
          {"seed", s.seed}};
}

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

std::string num(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string cell_name(std::size_t m, double overlap, std::uint64_t seed) {
  return "m" + std::to_string(m) + "_o" + num(overlap) + "_s" + std::to_string(seed);
}

}  // namespace

std::string experiment_to_json(const ExperimentConfig& c) {
  json j;
  j["dataset"] = {{"dir", c.dataset_dir}, {"sbm", sbm_json(c.sbm)}};
  j["train"] = json::parse(train_config_to_json(c.train));
  j["run"] = {{"mode", run_mode_name(c.mode)},
              {"workers", c.workers},
              {"overlap", c.overlap},
              {"partition_seed", c.partition_seed},
              {"approx_seed", c.approx_seed},
              {"partition_file", c.partition_file},
              {"threads", c.threads},
              {"bind", c.bind},
              {"external_workers", c.external_workers},
              {"hello_timeout_ms", c.hello_timeout_ms}};
  j["sweep"] = {{"workers", c.sweep_workers},
                {"overlaps", c.sweep_overlaps},
                {"seeds", c.seeds},
                {"parallel_cells", c.parallel_cells}};
  j["resilience"] = {{"fractions", c.deletion_fractions}};
  return j.dump(2);
}

ExperimentConfig experiment_from_json(const std::string& text, const ExperimentConfig& base) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("config is not a JSON object");
  ExperimentConfig c = base;
  try {
    if (j.contains("dataset")) {
      const json& d = j.at("dataset");
      take(d, "dir", c.dataset_dir);
      if (d.contains("sbm")) {
        const json& s = d.at("sbm");
        take(s, "n", c.sbm.n);
        take(s, "k", c.sbm.k);
        take(s, "p_in", c.sbm.p_in);
        take(s, "p_out", c.sbm.p_out);
        take(s, "feature_dim", c.sbm.feature_dim);
        take(s, "noise_sigma", c.sbm.noise_sigma);
        take(s, "train_fraction", c.sbm.train_fraction);
        take(s, "val_fraction", c.sbm.val_fraction);
        take(s, "test_fraction", c.sbm.test_fraction);
        take(s, "seed", c.sbm.seed);
      }
    }
    if (j.contains("train")) {
      // merge over the current values so partial train sections work
      json t = json::parse(train_config_to_json(c.train));
      const json& in = j.at("train");
      for (auto it = in.begin(); it != in.end(); ++it) {
        if (it.key() == "model" && it->is_object())
          for (auto m = it->begin(); m != it->end(); ++m) t["model"][m.key()] = *m;
        else
          t[it.key()] = *it;
      }
      c.train = train_config_from_json(t.dump());
    }
    if (j.contains("run")) {
      const json& r = j.at("run");
      if (r.contains("mode")) c.mode = parse_run_mode(r.at("mode").get<std::string>());
      take(r, "workers", c.workers);
      take(r, "overlap", c.overlap);
      take(r, "partition_seed", c.partition_seed);
      take(r, "approx_seed", c.approx_seed);
      take(r, "partition_file", c.partition_file);
      take(r, "threads", c.threads);
      take(r, "bind", c.bind);
      take(r, "external_workers", c.external_workers);
      take(r, "hello_timeout_ms", c.hello_timeout_ms);
    }
    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      take(s, "workers", c.sweep_workers);
      take(s, "overlaps", c.sweep_overlaps);
      take(s, "seeds", c.seeds);
      take(s, "parallel_cells", c.parallel_cells);
    }
    if (j.contains("resilience")) take(j.at("resilience"), "fractions", c.deletion_fractions);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

Dataset load_experiment_dataset(const ExperimentConfig& cfg) {
  if (!cfg.dataset_dir.empty()) return io::load_dataset(cfg.dataset_dir);
  return generate_sbm(cfg.sbm);
}

RunOutcome run_training(const Dataset& d, const ExperimentConfig& cfg, const ParamsObserver& observer,
                        const std::function<void(std::uint16_t)>& on_listen) {
  cfg.validate();
  RunOutcome out;
  if (cfg.mode == RunMode::kSingle) {
    out.train = train_single(d, cfg.train, observer);
    return out;
  }

  DistributedOptions opts;
  opts.num_workers = cfg.workers;
  opts.overlap = cfg.overlap;
  opts.partition_seed = cfg.partition_seed;
  opts.approx_seed = cfg.approx_seed;
  opts.mode = cfg.threads ? ExecutionMode::kThreads : ExecutionMode::kSequential;
  if (!cfg.partition_file.empty())
    opts.partition = load_partition_file(cfg.partition_file, d.num_vertices(), static_cast<std::uint32_t>(cfg.workers));

  if (cfg.mode == RunMode::kDistInproc) {
    DistributedResult r = train_distributed(d, cfg.train, opts, observer);
    out.preprocessing_s = r.plan.preprocessing_s;
    out.train = std::move(r.train);
    out.plan = std::move(r.plan);
    out.counters = r.counters;
    return out;
  }

  DistributedPlan plan = prepare_plan(d, opts);
  const double prep = plan.preprocessing_s;
  TcpMaster master(parse_endpoint(cfg.bind));
  if (on_listen) on_listen(master.port());

  std::vector<std::thread> local;
  std::mutex err_mu;
  std::string worker_error;
  if (!cfg.external_workers) {
    const Endpoint target{"127.0.0.1", master.port()};
    for (std::uint32_t i = 0; i < cfg.workers; ++i)
      local.emplace_back([&, i] {
        try {
          if (!run_worker(target, i)) throw ProtocolError("worker " + std::to_string(i) + " was rejected");
        } catch (const std::exception& e) {
          std::lock_guard lock(err_mu);
          if (worker_error.empty()) worker_error = e.what();
        }
      });
  }
  DistributedResult r;
  try {
    r = master.run(d, cfg.train, std::move(plan), std::chrono::milliseconds(cfg.hello_timeout_ms), observer);
  } catch (...) {
    for (auto& t : local) t.join();
    throw;
  }
  for (auto& t : local) t.join();
  if (!worker_error.empty()) throw ProtocolError("local worker failed: " + worker_error);
  out.preprocessing_s = prep;
  out.train = std::move(r.train);
  out.plan = std::move(r.plan);
  out.counters = r.counters;
  return out;
}

std::string epochs_csv(const std::vector<EpochReport>& epochs) {
  std::string s = "epoch,train_loss,val_f1,test_f1,wall_time_s,bytes_exchanged\n";
  for (const auto& e : epochs) {
    s += std::to_string(e.epoch) + ",";
    if (e.train_loss) s += fmt("%.10g", *e.train_loss);
    s += "," + fmt("%.6f", e.val_f1) + "," + fmt("%.6f", e.test_f1) + "," + fmt("%.6f", e.wall_time_s) + "," +
         std::to_string(e.bytes_exchanged) + "\n";
  }
  return s;
}

void write_run_dir(const fs::path& dir, const ExperimentConfig& cfg, const Dataset& d, const RunOutcome& out) {
  fs::create_directories(dir);
  io::write_file(dir / "config.json", experiment_to_json(cfg) + "\n");
  io::write_file(dir / "epochs.csv", epochs_csv(out.train.epochs));
  save_checkpoint(dir / "model.gfpm", out.train.params);

  json result = {{"test_f1", out.train.test_f1},
                 {"best_val_f1", out.train.best_val_f1},
                 {"best_epoch", out.train.best_epoch},
                 {"epochs_run", out.train.epochs.size()},
                 {"preprocessing_s", out.preprocessing_s},
                 {"num_vertices", d.num_vertices()},
                 {"num_edges", d.graph.num_edges()}};
  if (out.plan) {
    const auto& plan = *out.plan;
    if (!plan.partition.assignment.empty()) {
      save_partition_file(dir / "partition.txt", plan.partition);
      const PartitionStats st = cut_stats(d.graph, plan.partition);
      result["cut_edges"] = st.cut_edges;
      result["partition_sizes"] = st.partition_sizes;
      result["balance_slack"] = default_balance_slack(d.num_vertices(), plan.partition.num_partitions);
    }
    result["overhead"] = overhead_of(cfg.overlap, cfg.workers);
    std::vector<std::size_t> added;
    std::string prov = "worker,local_id,global_id,source_partition,is_core\n";
    for (std::size_t w = 0; w < plan.workers.size(); ++w) {
      const auto& ep = plan.workers[w];
      added.push_back(ep.num_approx());
      for (std::size_t i = 0; i < ep.local_to_global.size(); ++i)
        prov += std::to_string(w) + "," + std::to_string(i) + "," + std::to_string(ep.local_to_global[i]) + "," +
                std::to_string(ep.source_partition[i]) + "," + (ep.is_core(static_cast<VertexId>(i)) ? "1" : "0") + "\n";
    }
    io::write_file(dir / "provenance.csv", prov);
    result["approx_vertices_per_worker"] = added;
    result["param_bytes"] = out.counters.param_bytes;
    result["frame_bytes_sent"] = out.counters.frame_bytes_sent;
    result["frame_bytes_received"] = out.counters.frame_bytes_received;
  }
  io::write_file(dir / "result.json", result.dump(2) + "\n");
}

RunOutcome run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const Dataset d = load_experiment_dataset(cfg);
  RunOutcome out = run_training(d, cfg);
  write_run_dir(out_dir, cfg, d, out);
  return out;
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double stddev_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

namespace {

// Runs jobs[0..n) on up to `width` threads; rethrows the first failure.
void run_jobs(std::size_t n, std::size_t width, const std::function<void(std::size_t)>& job) {
  if (width <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(width, n); ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<SweepCell> run_sweep(const ExperimentConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  if (cfg.mode == RunMode::kDistTcp && cfg.external_workers)
    throw ConfigError("sweep cannot wait for external workers");
  fs::create_directories(out_dir);

  struct Job {
    std::size_t cell;
    std::uint64_t seed;
    ExperimentConfig run;
    fs::path dir;
    double test_f1 = 0.0;
    std::size_t best_epoch = 0;
  };
  std::vector<SweepCell> cells;
  std::vector<Job> jobs;
  for (auto m : cfg.sweep_workers)
    for (double o : cfg.sweep_overlaps) {
      SweepCell c;
      c.m = m;
      c.overlap = o;
      c.overhead = m >= 2 ? overhead_of(o, m) : 0.0;
      for (auto seed : cfg.seeds) {
        ExperimentConfig r = cfg.with_seed(seed);
        r.workers = m;
        r.overlap = m >= 2 ? o : 0.0;
        if (m == 1)
          r.mode = RunMode::kSingle;
        else if (r.mode == RunMode::kSingle)
          r.mode = RunMode::kDistInproc;
        // run ports must not collide when cells run in parallel
        if (r.mode == RunMode::kDistTcp) r.bind = "127.0.0.1:0";
        jobs.push_back({cells.size(), seed, r, out_dir / cell_name(m, o, seed)});
      }
      cells.push_back(c);
    }

  // Datasets are shared between cells with the same seed.
  std::map<std::uint64_t, Dataset> datasets;
  for (auto seed : cfg.seeds) datasets.emplace(seed, load_experiment_dataset(cfg.with_seed(seed)));

  // m = 1 cells differ only in their name; train each seed once.
  std::map<std::uint64_t, std::size_t> single_source;
  std::vector<std::size_t> primary;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (jobs[i].run.mode == RunMode::kSingle) {
      auto [it, fresh] = single_source.emplace(jobs[i].seed, i);
      if (!fresh) continue;
    }
    primary.push_back(i);
  }
  std::map<std::size_t, RunOutcome> outcomes;
  std::mutex mu;
  run_jobs(primary.size(), cfg.parallel_cells, [&](std::size_t k) {
    Job& job = jobs[primary[k]];
    const Dataset& d = datasets.at(job.seed);
    RunOutcome o = run_training(d, job.run);
    write_run_dir(job.dir, job.run, d, o);
    std::lock_guard lock(mu);
    outcomes.emplace(primary[k], std::move(o));
  });
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto it = outcomes.find(i);
    if (it == outcomes.end()) {
      const std::size_t src = single_source.at(jobs[i].seed);
      const RunOutcome& o = outcomes.at(src);
      write_run_dir(jobs[i].dir, jobs[i].run, datasets.at(jobs[i].seed), o);
      it = outcomes.find(src);
    }
    jobs[i].test_f1 = it->second.train.test_f1;
    jobs[i].best_epoch = it->second.train.best_epoch;
  }

  for (const auto& job : jobs) {
    cells[job.cell].test_f1.push_back(job.test_f1);
    cells[job.cell].epochs_to_converge.push_back(job.best_epoch);
  }
  for (auto& c : cells) {
    c.mean_test_f1 = mean_of(c.test_f1);
    c.std_test_f1 = stddev_of(c.test_f1);
    std::vector<double> e(c.epochs_to_converge.begin(), c.epochs_to_converge.end());
    c.mean_epochs_to_converge = mean_of(e);
  }
  io::write_file(out_dir / "summary.csv", summary_csv(cells));
  io::write_file(out_dir / "sweep_config.json", experiment_to_json(cfg) + "\n");
  return cells;
}

std::string summary_csv(const std::vector<SweepCell>& cells) {
  std::string s = "m,overlap,overhead,mean_test_f1,std_test_f1,mean_epochs_to_converge\n";
  for (const auto& c : cells)
    s += std::to_string(c.m) + "," + num(c.overlap) + "," + fmt("%.6g", c.overhead) + "," +
         fmt("%.6f", c.mean_test_f1) + "," + fmt("%.6f", c.std_test_f1) + "," +
         fmt("%.2f", c.mean_epochs_to_converge) + "\n";
  return s;
}

std::vector<ResiliencePoint> run_resilience(const ExperimentConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  std::vector<ResiliencePoint> points;
  for (double f : cfg.deletion_fractions) {
    ResiliencePoint p;
    p.fraction = f;
    points.push_back(p);
  }
  for (auto seed : cfg.seeds) {
    ExperimentConfig r = cfg.with_seed(seed);
    r.mode = RunMode::kSingle;
    const Dataset full = load_experiment_dataset(r);
    for (auto& p : points) {
      const Dataset d = delete_training_vertices(full, p.fraction, seed);
      RunOutcome o = run_training(d, r);
      write_run_dir(out_dir / ("f" + num(p.fraction) + "_s" + std::to_string(seed)), r, d, o);
      p.test_f1.push_back(o.train.test_f1);
      p.remaining_train.push_back(d.split.count(Role::kTrain));
    }
  }
  std::string csv = "fraction,mean_test_f1,std_test_f1,mean_remaining_train\n";
  std::string dat = "# fraction mean_test_f1 std_test_f1\n";
  for (auto& p : points) {
    p.mean_test_f1 = mean_of(p.test_f1);
    p.std_test_f1 = stddev_of(p.test_f1);
    std::vector<double> rem(p.remaining_train.begin(), p.remaining_train.end());
    csv += num(p.fraction) + "," + fmt("%.6f", p.mean_test_f1) + "," + fmt("%.6f", p.std_test_f1) + "," +
           fmt("%.1f", mean_of(rem)) + "\n";
    dat += num(p.fraction) + " " + fmt("%.6f", p.mean_test_f1) + " " + fmt("%.6f", p.std_test_f1) + "\n";
  }
  io::write_file(out_dir / "resilience.csv", csv);
  io::write_file(out_dir / "resilience.dat", dat);
  return points;
}

namespace {

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(io::read_file(p));
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::string markdown_table(const std::vector<std::vector<std::string>>& rows) {
  std::string s;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    s += "|";
    for (const auto& c : rows[r]) s += " " + c + " |";
    s += "\n";
    if (r == 0) {
      s += "|";
      for (std::size_t i = 0; i < rows[0].size(); ++i) s += "---|";
      s += "\n";
    }
  }
  return s;
}

std::string safe_name(const fs::path& rel) {
  std::string s = rel.generic_string();
  std::replace(s.begin(), s.end(), '/', '_');
  return s.empty() ? std::string("root") : s;
}

}  // namespace

std::vector<fs::path> write_report(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("report: not a directory: " + dir.string());
  std::vector<fs::path> summaries, resilience, epochs;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir);
    if (*rel.begin() == "report") continue;
    const auto name = entry.path().filename();
    if (name == "summary.csv") summaries.push_back(entry.path());
    if (name == "resilience.csv") resilience.push_back(entry.path());
    if (name == "epochs.csv") epochs.push_back(entry.path());
  }
  if (summaries.empty() && resilience.empty() && epochs.empty())
    throw InputError("report: no summary.csv, resilience.csv or epochs.csv under " + dir.string());
  std::sort(summaries.begin(), summaries.end());
  std::sort(resilience.begin(), resilience.end());
  std::sort(epochs.begin(), epochs.end());

  const fs::path out = dir / "report";
  fs::create_directories(out);
  std::vector<fs::path> written;
  std::string md = "# Report\n\n";

  for (const auto& p : summaries) {
    const auto rows = read_csv(p);
    const auto rel = fs::relative(p.parent_path(), dir);
    md += "## Sweep " + rel.generic_string() + "\n\n" + markdown_table(rows) + "\n";
    // one curve per worker count: overlap vs mean test F1
    std::map<std::string, std::string> curves;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() < 5) throw InputError("report: malformed summary row in " + p.string());
      curves[rows[r][0]] += rows[r][1] + " " + rows[r][2] + " " + rows[r][3] + " " + rows[r][4] + "\n";
    }
    for (const auto& [m, body] : curves) {
      const fs::path f = out / (safe_name(rel) + "_overlap_m" + m + ".dat");
      io::write_file(f, "# overlap overhead mean_test_f1 std_test_f1\n" + body);
      written.push_back(f);
    }
  }
  for (const auto& p : resilience) {
    const auto rows = read_csv(p);
    const auto rel = fs::relative(p.parent_path(), dir);
    md += "## Deletion resilience " + rel.generic_string() + "\n\n" + markdown_table(rows) + "\n";
    std::string body = "# fraction mean_test_f1 std_test_f1\n";
    for (std::size_t r = 1; r < rows.size(); ++r) body += rows[r][0] + " " + rows[r][1] + " " + rows[r][2] + "\n";
    const fs::path f = out / (safe_name(rel) + "_resilience.dat");
    io::write_file(f, body);
    written.push_back(f);
  }
  if (!epochs.empty()) {
    std::vector<std::vector<std::string>> table{{"run", "epochs", "final_val_f1", "final_test_f1"}};
    for (const auto& p : epochs) {
      const auto rows = read_csv(p);
      const auto rel = fs::relative(p.parent_path(), dir);
      std::string body = "# epoch train_loss val_f1 test_f1\n";
      for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() < 4) throw InputError("report: malformed epochs row in " + p.string());
        body += rows[r][0] + " " + (rows[r][1].empty() ? "NaN" : rows[r][1]) + " " + rows[r][2] + " " + rows[r][3] + "\n";
      }
      const fs::path f = out / (safe_name(rel) + "_epochs.dat");
      io::write_file(f, body);
      written.push_back(f);
      if (rows.size() > 1) table.push_back({rel.generic_string(), rows.back()[0], rows.back()[2], rows.back()[3]});
    }
    md += "## Runs\n\n" + markdown_table(table) + "\n";
  }
  io::write_file(out / "report.md", md);
  written.push_back(out / "report.md");
  return written;
}

void write_extended_partitions(const fs::path& out_dir, const std::vector<ExtendedPartition>& parts,
                               const OverlapConfig& overlap) {
  fs::create_directories(out_dir);
  for (const auto& ep : parts) {
    const fs::path dir = out_dir / ("worker_" + std::to_string(ep.partition_id));
    json meta = {{"partition_id", ep.partition_id},
                 {"num_partitions", parts.size()},
                 {"num_core", ep.num_core()},
                 {"num_approx", ep.num_approx()},
                 {"overlap", overlap.overlap},
                 {"approx_seed", overlap.seed}};
    std::vector<std::size_t> per_source;
    for (const auto& a : ep.approx_vertices) per_source.push_back(a.size());
    meta["approx_per_source"] = per_source;
    io::save_dataset(dir, ep.local, meta.dump());
    std::string prov = "local_id,global_id,source_partition,is_core\n";
    for (std::size_t i = 0; i < ep.local_to_global.size(); ++i)
      prov += std::to_string(i) + "," + std::to_string(ep.local_to_global[i]) + "," +
              std::to_string(ep.source_partition[i]) + "," + (ep.is_core(static_cast<VertexId>(i)) ? "1" : "0") + "\n";
    io::write_file(dir / "provenance.csv", prov);
  }
}

}  // namespace graphfed

#include <doctest.h>

#include <random>
#include <thread>

#include "graphfed/bytes.hpp"
#include "graphfed/datagen.hpp"
#include "graphfed/error.hpp"
#include "graphfed/params_io.hpp"
#include "graphfed/transport.hpp"
#include "oracles.hpp"

using namespace graphfed;

namespace {

std::string random_bytes(std::size_t n, std::mt19937_64& rng) {
  std::string s(n, '\0');
  for (char& c : s) c = static_cast<char>(rng() & 0xff);
  return s;
}

Dataset tiny_sbm() {
  SbmConfig c;
  c.n = 120;
  c.k = 3;
  c.p_in = 0.1;
  c.p_out = 0.01;
  c.feature_dim = 6;
  c.seed = 4;
  return generate_sbm(c);
}

TrainConfig tiny_cfg(std::size_t epochs) {
  TrainConfig cfg;
  cfg.max_epochs = epochs;
  cfg.model.hidden_dim = 8;
  return cfg;
}

DistributedResult run_over_tcp(const Dataset& d, const TrainConfig& cfg, const DistributedOptions& o) {
  TcpMaster master(Endpoint{"127.0.0.1", 0});
  const Endpoint ep{"127.0.0.1", master.port()};
  std::vector<std::thread> workers;
  std::vector<char> ok(o.num_workers, 0);
  for (std::uint32_t i = 0; i < o.num_workers; ++i)
    workers.emplace_back([&, i] { ok[i] = run_worker(ep, i); });
  auto r = master.run(d, cfg, prepare_plan(d, o), std::chrono::seconds(10));
  for (auto& t : workers) t.join();
  for (char x : ok) CHECK(x);
  return r;
}

}  // namespace

TEST_CASE("frame layout") {
  const std::string f = encode_frame(MessageKind::kShutdown, {});
  CHECK(f.size() == 14);
  CHECK(f.substr(0, 4) == "GFED");
  CHECK(f[4] == 1);
  CHECK(f[5] == 5);
  CHECK(f.substr(6) == std::string(8, '\0'));

  const std::string h = encode_frame(MessageKind::kHello, encode_hello(7));
  CHECK(h.size() == 18);
  CHECK(static_cast<unsigned char>(h[6]) == 4);
  CHECK(decode_hello(decode_frame(h).payload) == 7);
}

TEST_CASE("frame round trips") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 200; ++t) {
    const auto kind = static_cast<MessageKind>(1 + rng() % 5);
    const std::string payload = random_bytes(t == 0 ? 1024 : rng() % 3000, rng);
    const std::string bytes = encode_frame(kind, payload);
    CHECK(bytes.size() == kFrameHeaderSize + payload.size());
    const Frame f = decode_frame(bytes);
    CHECK(f.kind == kind);
    CHECK(f.payload == payload);
    CHECK(encode_frame(f.kind, f.payload) == bytes);
  }
}

TEST_CASE("frame errors") {
  const std::string good = encode_frame(MessageKind::kHello, encode_hello(1));
  std::string bad = good;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_frame(bad), ProtocolError);
  bad = good;
  bad[4] = 2;
  CHECK_THROWS_AS(decode_frame(bad), ProtocolError);
  bad = good;
  bad[5] = 9;
  CHECK_THROWS_AS(decode_frame(bad), ProtocolError);
  bad[5] = 0;
  CHECK_THROWS_AS(decode_frame(bad), ProtocolError);
  CHECK_THROWS_AS(decode_frame(good.substr(0, good.size() - 1)), ProtocolError);
  CHECK_THROWS_AS(decode_frame(good.substr(0, 10)), ProtocolError);
  CHECK_THROWS_AS(decode_frame(good + "x"), ProtocolError);

  ByteWriter w;
  w.raw("GFED", 4);
  w.u8(1);
  w.u8(4);
  w.u64(std::uint64_t{1} << 32);
  CHECK_THROWS_AS(decode_frame_header(w.take()), ProtocolError);
}

TEST_CASE("parameter blobs") {
  SUBCASE("empty list is header only") {
    const std::string b = serialize_params(ModelParams{});
    CHECK(b.size() == 12);
    CHECK(b.substr(0, 4) == "GFPM");
    CHECK(deserialize_params(b).weights.empty());
  }
  SUBCASE("random params round trip bit-exactly") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 30; ++t) {
      ModelParams p;
      const std::size_t layers = 1 + rng() % 2;
      for (std::size_t l = 0; l < layers; ++l) p.weights.push_back(oracle::random_matrix(1 + rng() % 9, 1 + rng() % 9, rng));
      round_to_f32(p);
      const std::string b = serialize_params(p);
      CHECK(deserialize_params(b) == p);
      CHECK(serialize_params(deserialize_params(b)) == b);
    }
  }
  SUBCASE("inconsistent headers") {
    ModelParams p;
    p.weights = {Matrix(2, 3, 1.5)};
    const std::string b = serialize_params(p);
    CHECK_THROWS_AS(deserialize_params(b.substr(0, b.size() - 4)), InputError);
    CHECK_THROWS_AS(deserialize_params(b + "abcd"), InputError);
    std::string bad = b;
    bad[0] = 'X';
    CHECK_THROWS_AS(deserialize_params(bad), InputError);
    bad = b;
    bad[12] = 3;  // rank 3
    CHECK_THROWS_AS(deserialize_params(bad), InputError);
    bad = b;
    bad[16] = 9;  // first dim 9, data too short
    CHECK_THROWS_AS(deserialize_params(bad), InputError);
  }
}

TEST_CASE("message codecs") {
  const Dataset d = tiny_sbm();
  PartitionAssignment a{std::vector<PartitionId>(d.num_vertices()), 2};
  for (VertexId v = 0; v < d.num_vertices(); ++v) a.assignment[v] = v % 2;
  const auto eps = build_extended_partitions(d, a, {0.25, 3});

  AssignMessage m;
  m.worker_id = 1;
  m.config = tiny_cfg(9);
  m.config.model.kind = ModelKind::kGraphSage;
  m.partition = eps[1];
  const AssignMessage back = decode_assign(encode_assign(m));
  CHECK(back.worker_id == 1);
  CHECK(back.config == m.config);
  CHECK(back.partition.local == m.partition.local);
  CHECK(back.partition.local_to_global == m.partition.local_to_global);
  CHECK(back.partition.source_partition == m.partition.source_partition);
  CHECK(back.partition.approx_vertices == m.partition.approx_vertices);
  CHECK(back.partition.core_vertices == m.partition.core_vertices);
  CHECK_THROWS_AS(decode_assign(encode_assign(m).substr(0, 20)), ProtocolError);

  const StartEpochMessage s{42, "blob"};
  const auto s2 = decode_start_epoch(encode_start_epoch(s));
  CHECK(s2.epoch == 42);
  CHECK(s2.params == "blob");

  ParamsMessage pm;
  pm.epoch = 3;
  pm.params = "xyz";
  pm.report.loss = 0.75;
  pm.report.loss_vertices = 12;
  const auto pm2 = decode_params_message(encode_params_message(pm));
  CHECK(pm2.epoch == 3);
  CHECK(pm2.params == "xyz");
  CHECK(pm2.report.loss == 0.75);
  CHECK(pm2.report.loss_vertices == 12);
  pm.report.loss.reset();
  CHECK_FALSE(decode_params_message(encode_params_message(pm)).report.loss.has_value());
}

TEST_CASE("worker state machine") {
  const Dataset d = tiny_sbm();
  const TrainConfig cfg = tiny_cfg(3);
  AssignMessage m;
  m.worker_id = 0;
  m.config = cfg;
  m.partition = full_replica(d, 0);
  const std::string assign = encode_frame(MessageKind::kAssign, encode_assign(m));
  const ModelParams init = init_params(cfg.model, 6, 3, 1);
  auto start = [&](std::uint64_t e) {
    return encode_frame(MessageKind::kStartEpoch, encode_start_epoch({e, serialize_params(init)}));
  };

  SUBCASE("happy path") {
    WorkerService w(0);
    CHECK(decode_hello(decode_frame(w.hello()).payload) == 0);
    CHECK_FALSE(w.handle(assign).has_value());
    const auto reply = w.handle(start(1));
    REQUIRE(reply.has_value());
    const Frame f = decode_frame(*reply);
    CHECK(f.kind == MessageKind::kParams);
    CHECK(decode_params_message(f.payload).epoch == 1);
    CHECK(w.handle(start(2)).has_value());
    CHECK_FALSE(w.handle(encode_frame(MessageKind::kShutdown, {})).has_value());
    CHECK(w.finished());
    CHECK(w.epochs_run() == 2);
  }
  SUBCASE("epochs must increase") {
    WorkerService w(0);
    w.handle(assign);
    w.handle(start(2));
    CHECK_THROWS_AS(w.handle(start(2)), ProtocolError);
  }
  SUBCASE("start before assign") {
    WorkerService w(0);
    CHECK_THROWS_AS(w.handle(start(1)), ProtocolError);
  }
  SUBCASE("assign for another worker") {
    WorkerService w(1);
    CHECK_THROWS_AS(w.handle(assign), ProtocolError);
  }
  SUBCASE("shutdown without assign means rejected") {
    WorkerService w(0);
    w.handle(encode_frame(MessageKind::kShutdown, {}));
    CHECK(w.finished());
    CHECK_FALSE(w.assigned());
  }
}

TEST_CASE("tcp loopback equals in-process") {
  const Dataset d = tiny_sbm();
  const TrainConfig cfg = tiny_cfg(5);
  DistributedOptions o;
  o.num_workers = 2;
  o.overlap = 0.25;
  const auto inproc = train_distributed(d, cfg, o);
  const auto tcp = run_over_tcp(d, cfg, o);
  CHECK(max_abs_diff(inproc.train.params, tcp.train.params) <= 1e-6);
  CHECK(inproc.train.params == tcp.train.params);
  REQUIRE(inproc.train.epochs.size() == tcp.train.epochs.size());
  for (std::size_t e = 0; e < tcp.train.epochs.size(); ++e) {
    CHECK(inproc.train.epochs[e].train_loss == tcp.train.epochs[e].train_loss);
    CHECK(inproc.train.epochs[e].val_f1 == tcp.train.epochs[e].val_f1);
    CHECK(inproc.train.epochs[e].bytes_exchanged == tcp.train.epochs[e].bytes_exchanged);
  }
  CHECK(tcp.counters.start_epoch_frames == 2 * 5);
  CHECK(tcp.counters.params_frames == 2 * 5);
}

TEST_CASE("tcp master rejects a duplicate worker id") {
  const Dataset d = tiny_sbm();
  const TrainConfig cfg = tiny_cfg(2);
  DistributedOptions o;
  o.num_workers = 2;
  TcpMaster master(Endpoint{"127.0.0.1", 0});
  const Endpoint ep{"127.0.0.1", master.port()};
  bool first = false, dup = true, second = false;
  std::thread a([&] { first = run_worker(ep, 0); });
  // give the first worker time to say Hello before the duplicate arrives
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  std::thread b([&] { dup = run_worker(ep, 0); });
  std::thread c([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(400));
    second = run_worker(ep, 1);
  });
  master.run(d, cfg, prepare_plan(d, o), std::chrono::seconds(10));
  a.join();
  b.join();
  c.join();
  CHECK(first);
  CHECK_FALSE(dup);
  CHECK(second);
}

TEST_CASE("hello timeout aborts the master") {
  const Dataset d = tiny_sbm();
  DistributedOptions o;
  o.num_workers = 2;
  TcpMaster master(Endpoint{"127.0.0.1", 0});
  CHECK_THROWS_AS(master.run(d, tiny_cfg(1), prepare_plan(d, o), std::chrono::milliseconds(200)), ProtocolError);
}

TEST_CASE("endpoint parsing") {
  const Endpoint e = parse_endpoint("10.0.0.2:7000");
  CHECK(e.host == "10.0.0.2");
  CHECK(e.port == 7000);
  CHECK(parse_endpoint(":81").host == "127.0.0.1");
  CHECK_THROWS_AS(parse_endpoint("nohost"), ConfigError);
  CHECK_THROWS_AS(parse_endpoint("h:99999"), ConfigError);
}

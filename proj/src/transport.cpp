#include "graphfed/transport.hpp"

#include <algorithm>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <set>
#include <thread>

#include "epoch_loop.hpp"
#include "graphfed/bytes.hpp"
#include "graphfed/error.hpp"
#include "graphfed/params_io.hpp"

namespace graphfed {

std::string_view message_kind_name(MessageKind k) {
  switch (k) {
    case MessageKind::kHello: return "Hello";
    case MessageKind::kAssign: return "Assign";
    case MessageKind::kStartEpoch: return "StartEpoch";
    case MessageKind::kParams: return "Params";
    case MessageKind::kShutdown: return "Shutdown";
  }
  return "Unknown";
}

std::string encode_frame(MessageKind kind, std::string_view payload) {
  if (payload.size() >= kMaxPayload) throw ProtocolError("frame payload exceeds 2^32 bytes");
  ByteWriter w;
  w.raw(kFrameMagic, 4);
  w.u8(kFrameVersion);
  w.u8(static_cast<std::uint8_t>(kind));
  w.u64(payload.size());
  w.raw(payload.data(), payload.size());
  return w.take();
}

std::pair<MessageKind, std::uint64_t> decode_frame_header(std::string_view header) {
  if (header.size() < kFrameHeaderSize) throw ProtocolError("truncated frame header");
  if (std::memcmp(header.data(), kFrameMagic, 4) != 0) throw ProtocolError("bad frame magic");
  ByteReader r(header.substr(4, kFrameHeaderSize - 4));
  const std::uint8_t version = r.u8();
  if (version != kFrameVersion) throw ProtocolError("unsupported frame version " + std::to_string(version));
  const std::uint8_t kind = r.u8();
  if (kind < static_cast<std::uint8_t>(MessageKind::kHello) || kind > static_cast<std::uint8_t>(MessageKind::kShutdown))
    throw ProtocolError("unknown frame kind " + std::to_string(kind));
  const std::uint64_t len = r.u64();
  if (len >= kMaxPayload) throw ProtocolError("frame payload length exceeds 2^32");
  return {static_cast<MessageKind>(kind), len};
}

Frame decode_frame(std::string_view bytes) {
  auto [kind, len] = decode_frame_header(bytes);
  const std::size_t available = bytes.size() - kFrameHeaderSize;
  if (available < len) throw ProtocolError("truncated frame payload");
  if (available > len) throw ProtocolError("trailing bytes after frame payload");
  return Frame{kind, std::string(bytes.substr(kFrameHeaderSize))};
}

// ---- payload codecs ----

std::string encode_hello(std::uint32_t worker_id) {
  ByteWriter w;
  w.u32(worker_id);
  return w.take();
}

std::uint32_t decode_hello(std::string_view payload) {
  if (payload.size() != 4) throw ProtocolError("Hello payload must be 4 bytes");
  ByteReader r(payload);
  return r.u32();
}

namespace {

void put_ids(ByteWriter& w, const std::vector<VertexId>& ids) {
  w.u64(ids.size());
  for (auto v : ids) w.u32(v);
}

std::vector<VertexId> get_ids(ByteReader& r) {
  const auto n = r.u64();
  if (n > r.remaining() / 4) throw ProtocolError("id list longer than its payload");
  std::vector<VertexId> ids(n);
  for (auto& v : ids) v = r.u32();
  return ids;
}

void put_dataset(ByteWriter& w, const Dataset& d) {
  w.u64(d.num_vertices());
  const auto edges = d.graph.edges();
  w.u64(edges.size());
  for (auto [u, v] : edges) {
    w.u32(u);
    w.u32(v);
  }
  w.u64(d.features.rows());
  w.u64(d.features.cols());
  for (double x : d.features.data()) w.f64(x);
  w.u32(d.labels.num_classes);
  for (auto c : d.labels.values) w.u32(c);
  for (auto role : d.split.roles) w.u8(static_cast<std::uint8_t>(role));
}

Dataset get_dataset(ByteReader& r) {
  Dataset d;
  const auto n = r.u64();
  const auto e = r.u64();
  if (e > r.remaining() / 8) throw ProtocolError("edge list longer than its payload");
  std::vector<Edge> edges(e);
  for (auto& [u, v] : edges) {
    u = r.u32();
    v = r.u32();
  }
  d.graph = from_edge_list(edges, n);
  const auto rows = r.u64(), cols = r.u64();
  if (rows != n || (cols != 0 && rows > r.remaining() / 8 / cols)) throw ProtocolError("bad feature block");
  d.features = Matrix(rows, cols);
  for (double& x : d.features.data()) x = r.f64();
  d.labels.num_classes = r.u32();
  d.labels.values.resize(n);
  for (auto& c : d.labels.values) c = r.u32();
  d.split.roles.resize(n);
  for (auto& role : d.split.roles) {
    const auto raw = r.u8();
    if (raw > 2) throw ProtocolError("bad split role");
    role = static_cast<Role>(raw);
  }
  d.validate();
  return d;
}

}  // namespace

std::string encode_assign(const AssignMessage& m) {
  ByteWriter w;
  w.u32(m.worker_id);
  w.str(train_config_to_json(m.config));
  const ExtendedPartition& ep = m.partition;
  w.u32(ep.partition_id);
  put_ids(w, ep.core_vertices);
  w.u32(static_cast<std::uint32_t>(ep.approx_vertices.size()));
  for (const auto& ids : ep.approx_vertices) put_ids(w, ids);
  put_ids(w, ep.local_to_global);
  w.u64(ep.source_partition.size());
  for (auto p : ep.source_partition) w.u32(p);
  put_dataset(w, ep.local);
  return w.take();
}

AssignMessage decode_assign(std::string_view payload) {
  try {
    ByteReader r(payload);
    AssignMessage m;
    m.worker_id = r.u32();
    m.config = train_config_from_json(r.str());
    ExtendedPartition& ep = m.partition;
    ep.partition_id = r.u32();
    ep.core_vertices = get_ids(r);
    const auto lists = r.u32();
    for (std::uint32_t i = 0; i < lists; ++i) ep.approx_vertices.push_back(get_ids(r));
    ep.local_to_global = get_ids(r);
    const auto sources = r.u64();
    if (sources != ep.local_to_global.size()) throw ProtocolError("source list length mismatch");
    ep.source_partition.resize(sources);
    for (auto& p : ep.source_partition) p = r.u32();
    ep.local = get_dataset(r);
    if (ep.local.num_vertices() != ep.local_to_global.size()) throw ProtocolError("local dataset size mismatch");
    if (r.remaining() != 0) throw ProtocolError("trailing bytes in Assign payload");
    return m;
  } catch (const InputError& e) {
    throw ProtocolError(std::string("malformed Assign payload: ") + e.what());
  } catch (const ConfigError& e) {
    throw ProtocolError(std::string("malformed Assign config: ") + e.what());
  }
}

std::string encode_start_epoch(const StartEpochMessage& m) {
  ByteWriter w;
  w.u64(m.epoch);
  w.raw(m.params.data(), m.params.size());
  return w.take();
}

StartEpochMessage decode_start_epoch(std::string_view payload) {
  if (payload.size() < 8) throw ProtocolError("StartEpoch payload too short");
  ByteReader r(payload);
  StartEpochMessage m;
  m.epoch = r.u64();
  m.params = std::string(payload.substr(8));
  return m;
}

std::string encode_params_message(const ParamsMessage& m) {
  ByteWriter w;
  w.u64(m.epoch);
  w.str(m.params);
  ByteWriter rep;
  rep.u8(m.report.loss.has_value());
  rep.f64(m.report.loss.value_or(0.0));
  rep.u64(m.report.loss_vertices);
  rep.f64(m.report.wall_time_s);
  w.str(rep.take());
  return w.take();
}

ParamsMessage decode_params_message(std::string_view payload) {
  try {
    ByteReader r(payload);
    ParamsMessage m;
    m.epoch = r.u64();
    m.params = r.str();
    const std::string rep_blob = r.str();
    if (r.remaining() != 0) throw ProtocolError("trailing bytes in Params payload");
    ByteReader rep(rep_blob);
    const bool has_loss = rep.u8() != 0;
    const double loss = rep.f64();
    if (has_loss) m.report.loss = loss;
    m.report.loss_vertices = rep.u64();
    m.report.wall_time_s = rep.f64();
    return m;
  } catch (const InputError& e) {
    throw ProtocolError(std::string("malformed Params payload: ") + e.what());
  }
}

// ---- worker ----

std::string WorkerService::hello() const { return encode_frame(MessageKind::kHello, encode_hello(worker_id_)); }

std::optional<std::string> WorkerService::handle(const std::string& frame_bytes) {
  if (finished_) throw ProtocolError("worker received a frame after Shutdown");
  const Frame frame = decode_frame(frame_bytes);
  switch (frame.kind) {
    case MessageKind::kAssign: {
      if (assigned_msg_) throw ProtocolError("worker assigned twice");
      AssignMessage msg = decode_assign(frame.payload);
      if (msg.worker_id != worker_id_) throw ProtocolError("Assign addressed to a different worker");
      assigned_msg_ = std::move(msg);
      return std::nullopt;
    }
    case MessageKind::kStartEpoch: {
      if (!assigned_msg_) throw ProtocolError("StartEpoch before Assign");
      const StartEpochMessage start = decode_start_epoch(frame.payload);
      if (start.epoch <= last_epoch_) throw ProtocolError("epoch numbers must strictly increase");
      last_epoch_ = start.epoch;
      ModelParams params;
      try {
        params = deserialize_params(start.params);
      } catch (const InputError& e) {
        throw ProtocolError(std::string("bad parameter blob: ") + e.what());
      }
      if (!state_) {
        state_ = WorkerState::create(worker_id_, std::move(assigned_msg_->partition), assigned_msg_->config,
                                     std::move(params));
      } else {
        if (!state_->params.same_shape(params)) throw ProtocolError("broadcast parameters changed shape");
        state_->params = std::move(params);
      }
      ParamsMessage reply;
      reply.epoch = start.epoch;
      reply.report = worker_epoch(*state_, assigned_msg_->config);
      reply.params = serialize_params(state_->params);
      ++epochs_run_;
      return encode_frame(MessageKind::kParams, encode_params_message(reply));
    }
    case MessageKind::kShutdown:
      finished_ = true;
      return std::nullopt;
    default:
      throw ProtocolError("worker received unexpected " + std::string(message_kind_name(frame.kind)));
  }
}

bool serve_worker(Channel& channel, std::uint32_t worker_id) {
  WorkerService service(worker_id);
  channel.send(service.hello());
  while (!service.finished()) {
    if (auto reply = service.handle(channel.recv())) channel.send(*reply);
  }
  return service.assigned();
}

// ---- master ----

DistributedResult run_master_protocol(std::vector<std::unique_ptr<Channel>> channels, const Dataset& d,
                                      const TrainConfig& cfg, DistributedPlan plan, const ParamsObserver& observer,
                                      std::vector<std::uint32_t> hellos) {
  const std::size_t m = channels.size();
  if (m != plan.workers.size()) throw ConfigError("channel count differs from the number of planned workers");
  DistributedResult out;
  TransportCounters& counters = out.counters;

  auto send = [&](std::size_t i, MessageKind kind, const std::string& payload) {
    const std::string bytes = encode_frame(kind, payload);
    channels[i]->send(bytes);
    counters.frame_bytes_sent += bytes.size();
  };
  auto recv = [&](std::size_t i, std::uint32_t who) {
    std::string bytes;
    try {
      bytes = channels[i]->recv();
    } catch (const std::exception& e) {
      throw ProtocolError("worker " + std::to_string(who) + " failed: " + e.what());
    }
    counters.frame_bytes_received += bytes.size();
    return decode_frame(bytes);
  };

  if (hellos.empty()) {
    for (std::size_t i = 0; i < m; ++i) {
      const Frame f = recv(i, static_cast<std::uint32_t>(i));
      if (f.kind != MessageKind::kHello) throw ProtocolError("expected Hello, got " + std::string(message_kind_name(f.kind)));
      hellos.push_back(decode_hello(f.payload));
    }
  }
  if (hellos.size() != m) throw ProtocolError("one Hello per worker required");
  // Worker ids must be exactly 0..m-1; channel i is re-indexed by its id.
  std::vector<std::unique_ptr<Channel>> by_id(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto id = hellos[i];
    if (id >= m) throw ProtocolError("worker id " + std::to_string(id) + " out of range for " + std::to_string(m) + " workers");
    if (by_id[id]) throw ProtocolError("duplicate worker id " + std::to_string(id));
    by_id[id] = std::move(channels[i]);
  }
  channels = std::move(by_id);

  for (std::size_t i = 0; i < m; ++i)
    send(i, MessageKind::kAssign, encode_assign(AssignMessage{static_cast<std::uint32_t>(i), cfg, plan.workers[i]}));

  const GlobalEvaluator evaluator(d, cfg.model);
  internal::EpochLoop loop(cfg, evaluator);
  ModelParams params = init_params(cfg.model, d.features.cols(), d.labels.num_classes, cfg.seed);
  TrainResult& result = out.train;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const std::string blob = serialize_params(params);
    const std::string start_payload = encode_start_epoch({epoch, blob});
    std::uint64_t param_bytes = 0;
    for (std::size_t i = 0; i < m; ++i) {
      send(i, MessageKind::kStartEpoch, start_payload);
      ++counters.start_epoch_frames;
      param_bytes += blob.size();
    }
    std::vector<ModelParams> uploads;
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const Frame f = recv(i, static_cast<std::uint32_t>(i));
      if (f.kind != MessageKind::kParams)
        throw ProtocolError("worker " + std::to_string(i) + " sent " + std::string(message_kind_name(f.kind)) +
                            " instead of Params");
      ++counters.params_frames;
      const ParamsMessage msg = decode_params_message(f.payload);
      if (msg.epoch != epoch) throw ProtocolError("worker " + std::to_string(i) + " answered the wrong epoch");
      param_bytes += msg.params.size();
      try {
        uploads.push_back(deserialize_params(msg.params));
      } catch (const InputError& e) {
        throw ProtocolError("worker " + std::to_string(i) + " sent bad parameters: " + e.what());
      }
      if (!uploads.back().same_shape(params))
        throw ProtocolError("worker " + std::to_string(i) + " returned parameters of a different shape");
      if (msg.report.loss) {
        loss_sum += *msg.report.loss;
        ++loss_count;
      }
    }
    counters.param_bytes += param_bytes;
    params = aggregate(uploads);
    round_to_f32(params);
    if (observer) observer(epoch, params);

    EpochReport rep;
    rep.epoch = epoch;
    if (loss_count) rep.train_loss = loss_sum / static_cast<double>(loss_count);
    rep.bytes_exchanged = param_bytes;
    const bool stop = loop.record(rep, params);
    rep.wall_time_s = internal::seconds_since(start);
    result.epochs.push_back(rep);
    if (stop) break;
  }
  for (std::size_t i = 0; i < m; ++i) send(i, MessageKind::kShutdown, {});
  loop.stopper.finish(result);
  out.plan = std::move(plan);
  return out;
}

// ---- in-process channels ----

namespace {

class FrameQueue {
 public:
  void push(std::string s) {
    {
      std::lock_guard lock(mu_);
      if (closed_) return;
      q_.push_back(std::move(s));
    }
    cv_.notify_one();
  }
  std::string pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !q_.empty() || closed_; });
    if (q_.empty()) throw ProtocolError(reason_.empty() ? "channel closed" : reason_);
    std::string s = std::move(q_.front());
    q_.pop_front();
    return s;
  }
  void close(std::string reason = {}) {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
      if (reason_.empty()) reason_ = std::move(reason);
    }
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> q_;
  bool closed_ = false;
  std::string reason_;
};

struct QueuePair {
  FrameQueue to_worker;
  FrameQueue to_master;
};

class QueueChannel : public Channel {
 public:
  QueueChannel(FrameQueue& out, FrameQueue& in) : out_(out), in_(in) {}
  void send(const std::string& bytes) override { out_.push(bytes); }
  std::string recv() override { return in_.pop(); }

 private:
  FrameQueue& out_;
  FrameQueue& in_;
};

// Runs the worker synchronously inside send().
class DirectChannel : public Channel {
 public:
  explicit DirectChannel(std::uint32_t id) : service_(id) { replies_.push_back(service_.hello()); }
  void send(const std::string& bytes) override {
    if (auto reply = service_.handle(bytes)) replies_.push_back(std::move(*reply));
  }
  std::string recv() override {
    if (replies_.empty()) throw ProtocolError("worker produced no reply");
    std::string s = std::move(replies_.front());
    replies_.pop_front();
    return s;
  }

 private:
  WorkerService service_;
  std::deque<std::string> replies_;
};

}  // namespace

struct InProcessCluster::Impl {
  std::vector<std::unique_ptr<QueuePair>> pairs;
  std::vector<std::thread> threads;
  std::vector<std::unique_ptr<Channel>> master_side;
};

InProcessCluster::InProcessCluster(std::size_t num_workers, ExecutionMode mode) : impl_(std::make_unique<Impl>()) {
  for (std::size_t i = 0; i < num_workers; ++i) {
    const auto id = static_cast<std::uint32_t>(i);
    if (mode == ExecutionMode::kSequential) {
      impl_->master_side.push_back(std::make_unique<DirectChannel>(id));
      continue;
    }
    auto& qp = *impl_->pairs.emplace_back(std::make_unique<QueuePair>());
    impl_->master_side.push_back(std::make_unique<QueueChannel>(qp.to_worker, qp.to_master));
    impl_->threads.emplace_back([&qp, id] {
      QueueChannel channel(qp.to_master, qp.to_worker);
      try {
        serve_worker(channel, id);
      } catch (const std::exception& e) {
        qp.to_master.close(std::string("worker aborted: ") + e.what());
        return;
      }
      qp.to_master.close("worker exited");
    });
  }
}

InProcessCluster::~InProcessCluster() {
  for (auto& qp : impl_->pairs) qp->to_worker.close("master gone");
  for (auto& t : impl_->threads) t.join();
}

std::vector<std::unique_ptr<Channel>> InProcessCluster::take_master_channels() { return std::move(impl_->master_side); }

}  // namespace graphfed

#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "graphfed/trainer.hpp"

namespace graphfed {

// Frame: "GFED", u8 version=1, u8 kind, u64 LE payload_len, payload.
inline constexpr char kFrameMagic[4] = {'G', 'F', 'E', 'D'};
inline constexpr std::uint8_t kFrameVersion = 1;
inline constexpr std::size_t kFrameHeaderSize = 14;
inline constexpr std::uint64_t kMaxPayload = std::uint64_t{1} << 32;

enum class MessageKind : std::uint8_t {
  kHello = 1,       // u32 worker_id
  kAssign = 2,      // extended-partition blob
  kStartEpoch = 3,  // u64 epoch, params blob
  kParams = 4,      // u64 epoch, params blob, local-report blob
  kShutdown = 5,    // empty
};

std::string_view message_kind_name(MessageKind k);

struct Frame {
  MessageKind kind = MessageKind::kShutdown;
  std::string payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

std::string encode_frame(MessageKind kind, std::string_view payload);
/// Exactly one frame. Throws ProtocolError on bad magic/version/kind,
/// oversize or truncated payloads.
Frame decode_frame(std::string_view bytes);
/// Validates a 14-byte header and returns (kind, payload_len).
std::pair<MessageKind, std::uint64_t> decode_frame_header(std::string_view header);

// Message payload codecs.
std::string encode_hello(std::uint32_t worker_id);
std::uint32_t decode_hello(std::string_view payload);

struct AssignMessage {
  std::uint32_t worker_id = 0;
  TrainConfig config;
  ExtendedPartition partition;
};
std::string encode_assign(const AssignMessage& m);
AssignMessage decode_assign(std::string_view payload);

struct StartEpochMessage {
  std::uint64_t epoch = 0;
  std::string params;  // GFPM blob
};
std::string encode_start_epoch(const StartEpochMessage& m);
StartEpochMessage decode_start_epoch(std::string_view payload);

struct ParamsMessage {
  std::uint64_t epoch = 0;
  std::string params;  // GFPM blob
  LocalEpoch report;
};
std::string encode_params_message(const ParamsMessage& m);
ParamsMessage decode_params_message(std::string_view payload);

/// Bidirectional, frame-preserving byte pipe between master and one worker.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual void send(const std::string& frame_bytes) = 0;
  // Blocks until a whole frame is available; throws ProtocolError on loss.
  virtual std::string recv() = 0;
};

/// Worker-side protocol state machine, independent of the byte transport.
class WorkerService {
 public:
  explicit WorkerService(std::uint32_t worker_id) : worker_id_(worker_id) {}

  std::string hello() const;
  // Handles one frame; returns the reply frame, if any.
  std::optional<std::string> handle(const std::string& frame_bytes);

  bool finished() const { return finished_; }
  bool assigned() const { return assigned_msg_.has_value(); }
  std::uint32_t worker_id() const { return worker_id_; }
  std::uint64_t epochs_run() const { return epochs_run_; }

 private:
  std::uint32_t worker_id_;
  std::optional<AssignMessage> assigned_msg_;
  std::optional<WorkerState> state_;
  std::uint64_t last_epoch_ = 0;
  std::uint64_t epochs_run_ = 0;
  bool finished_ = false;
};

/// Runs a worker over a channel until Shutdown. Returns false when the master
/// shut the worker down before assigning it a partition (rejected).
bool serve_worker(Channel& channel, std::uint32_t worker_id);

/// Master side of the protocol over connected channels. `hellos` holds the
/// worker ids already received, or is empty when Hello frames are still
/// pending on each channel.
DistributedResult run_master_protocol(std::vector<std::unique_ptr<Channel>> channels, const Dataset& d,
                                      const TrainConfig& cfg, DistributedPlan plan,
                                      const ParamsObserver& observer = {},
                                      std::vector<std::uint32_t> hellos = {});

/// In-process channels. Sequential mode drives each worker synchronously in
/// the master's thread; threaded mode runs each worker on its own thread.
class InProcessCluster {
 public:
  InProcessCluster(std::size_t num_workers, ExecutionMode mode);
  ~InProcessCluster();
  InProcessCluster(const InProcessCluster&) = delete;
  InProcessCluster& operator=(const InProcessCluster&) = delete;

  std::vector<std::unique_ptr<Channel>> take_master_channels();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// ---- TCP ----

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};
Endpoint parse_endpoint(std::string_view text);

/// Listening socket for the master. Port 0 binds an ephemeral port.
class TcpMaster {
 public:
  explicit TcpMaster(const Endpoint& bind);
  ~TcpMaster();
  TcpMaster(const TcpMaster&) = delete;
  TcpMaster& operator=(const TcpMaster&) = delete;

  std::uint16_t port() const { return port_; }

  /// Accepts connections until `m` distinct worker ids have said Hello.
  /// Duplicate ids receive Shutdown and are closed. Throws ProtocolError on timeout.
  std::vector<std::unique_ptr<Channel>> accept_workers(std::size_t m, std::chrono::milliseconds timeout,
                                                       std::vector<std::uint32_t>& worker_ids);

  /// Full run: accept, assign, train, shut down.
  DistributedResult run(const Dataset& d, const TrainConfig& cfg, DistributedPlan plan,
                        std::chrono::milliseconds hello_timeout, const ParamsObserver& observer = {});

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

/// Connects (retrying until `connect_timeout`) and serves until Shutdown.
/// Returns false when the master rejected this worker.
bool run_worker(const Endpoint& master, std::uint32_t worker_id,
                std::chrono::milliseconds connect_timeout = std::chrono::seconds(10));

}  // namespace graphfed

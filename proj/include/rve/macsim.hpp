#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "rve/airmodel.hpp"
#include "rve/eventheap.hpp"
#include "rve/geokit.hpp"
#include "rve/record.hpp"
#include "rve/rng.hpp"
#include "rve/telemetry.hpp"
#include "rve/ticks.hpp"

/// Event-driven broadcast CSMA/CA engine for N fully connected nodes.
namespace rve::mac {

/// How packet emission times are perturbed.
///  - None: trace timestamps, then exactly one period after each transmission.
///  - Sync: +/-400 us per emission.
///  - Unsync: +/-2 ms per emission.
enum class JitterMode { None, Sync, Unsync };

inline constexpr Ticks kSyncJitter = us(400);
inline constexpr Ticks kUnsyncJitter = ms(2);
/// Minimum spacing between consecutive packets of one node.
inline constexpr Ticks kMinPacketSpacing = ms(100);

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct EngineConfig {
  /// Nodes to emulate; 0 takes every node in the trace.
  std::size_t n_nodes = 0;
  Ticks slot = us(13);
  Ticks sifs = us(32);
  unsigned aifsn = 2;
  unsigned cw = 15;
  /// Propagation delay: arrivals this close to a transmission start collide.
  Ticks pd = us(5);
  Ticks ptxtime = us(900);
  double tx_rate_hz = 5.0;
  double sinr_th_db = 3.0;
  double tx_power_dbm = 20.0;
  double cable_loss_db = 3.0;
  double noise_floor_dbm = -99.0;
  JitterMode jitter_mode = JitterMode::Sync;
  /// Overrides the mode's jitter window when set.
  std::optional<Ticks> jitter;
  /// Jitter draws are whole multiples of this.
  Ticks jitter_step = 1;
  std::uint64_t seed = 1;
  air::LossModel loss_model = air::FreeSpace{};
  bool receiver_model_enabled = false;
  bool log_enabled = false;
  Ticks duration = sec(40);
  /// Where the receiver model evaluates SINR.
  geo::GeodeticCoord observer = geo::kDefaultReference;

  Ticks period() const;
  Ticks jitter_window() const;
  air::RadioParams radio() const;

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;
};

std::string_view to_string(JitterMode m);

enum class Branch { Collision, Backoff, AifsDefer, PostAifs };
std::string_view to_string(Branch b);

/// The busy period being resolved in the current cycle.
struct ChannelContext {
  Ticks curr_start = 0;
  /// Includes any collision extension.
  Ticks curr_end = 0;
  Ticks aifs_end = 0;
  bool damaged = false;
  /// The packet that opened the period, then every packet that collided
  /// with it, in (tx_time, node_id) order.
  std::vector<ScheduledPacket> participants;
};

/// SIFS + AIFSN * slot.
Ticks compute_aifs(const EngineConfig& cfg);

ChannelContext open_context(ScheduledPacket curr, const EngineConfig& cfg);

/// Which look-ahead branch a packet scheduled at `next_tx` falls into.
/// Throws std::logic_error if next_tx precedes the current start.
Branch classify(const ChannelContext& ctx, Ticks next_tx, const EngineConfig& cfg);

/// Joins `next` to the damaged transmission and extends the busy period to
/// the end of the latest colliding packet.
void handle_collision(ChannelContext& ctx, ScheduledPacket next, const EngineConfig& cfg);

/// Whole idle slots a frozen backoff counter observed between `anchor` (its
/// deferral point, busy end + AIFS) and the next busy start. Partial slots do
/// not count.
unsigned idle_slots(Ticks anchor, Ticks busy_start, Ticks slot);

/// Draws a counter in [0, CW] on first deferral, otherwise decrements it by
/// idle_slots(); then reschedules to curr_end + AIFS + counter * slot.
/// Returns true when a fresh counter was drawn.
bool handle_backoff(ScheduledPacket& next, const ChannelContext& ctx, const EngineConfig& cfg,
                    Rng& rng);

/// Pushes a packet that arrived inside the AIFS window back by one AIFS.
void handle_aifs_defer(ScheduledPacket& next, const EngineConfig& cfg);

class Engine {
 public:
  /// Validates the config and trace, then queues the first packet of each
  /// node. Throws ConfigError or std::invalid_argument.
  Engine(EngineConfig cfg, geo::MobilityTrace trace);

  /// Enables the decision log on `out` (observation only).
  void set_event_log(std::ostream* out);

  /// Resolves one busy period. Returns nullopt once the queue has drained.
  std::optional<TransmissionRecord> step();

  bool done() const { return queue_.empty(); }
  const EngineConfig& config() const { return cfg_; }
  const PacketQueue& queue() const { return queue_; }
  const telemetry::ChannelMetrics& metrics() const { return metrics_; }
  std::uint64_t rng_draws() const { return rng_.draws(); }

 private:
  struct NodeState {
    geo::NodeTrack track;
    std::size_t cursor = 0;
  };

  std::int64_t draw_jitter();
  const geo::BsmRecord& bsm_at(NodeState& node, Ticks t);
  NodeState& node(std::uint32_t id);
  TransmissionRecord finalize(const ChannelContext& ctx);
  void schedule_followup(const ScheduledPacket& sent);

  EngineConfig cfg_;
  Ticks aifs_;
  Ticks period_;
  Ticks jitter_;
  Rng rng_;
  PacketQueue queue_;
  std::vector<NodeState> nodes_;
  telemetry::ChannelMetrics metrics_;
  std::optional<telemetry::EventLog> log_;
  geo::EcefCoord observer_;
  std::optional<Ticks> first_start_;
  std::vector<ScheduledPacket> pending_;
};

struct RunResult {
  std::vector<TransmissionRecord> records;
  std::vector<telemetry::MetricsWindow> windows;
  telemetry::RunSummary summary;
};

/// Runs to completion in virtual time.
RunResult run(const EngineConfig& cfg, geo::MobilityTrace trace, std::ostream* log = nullptr);

}  // namespace rve::mac

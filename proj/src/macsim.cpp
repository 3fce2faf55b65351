#include "rve/macsim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

namespace rve::mac {

Ticks EngineConfig::period() const {
  return static_cast<Ticks>(std::llround(1e9 / tx_rate_hz));
}

Ticks EngineConfig::jitter_window() const {
  if (jitter) return *jitter;
  switch (jitter_mode) {
    case JitterMode::Sync: return kSyncJitter;
    case JitterMode::Unsync: return kUnsyncJitter;
    case JitterMode::None: break;
  }
  return 0;
}

air::RadioParams EngineConfig::radio() const {
  air::RadioParams r;
  r.tx_power_dbm = tx_power_dbm;
  r.cable_loss_db = cable_loss_db;
  r.noise_floor_dbm = noise_floor_dbm;
  return r;
}

void EngineConfig::validate() const {
  if (slot == 0) throw ConfigError("slot must be positive");
  if (compute_aifs(*this) == 0) throw ConfigError("AIFS must be positive");
  if (ptxtime == 0) throw ConfigError("ptxtime must be positive");
  if (!(pd < ptxtime)) throw ConfigError("propagation delay must be shorter than ptxtime");
  if (!(tx_rate_hz > 0) || !std::isfinite(tx_rate_hz))
    throw ConfigError("transmission rate must be positive");
  if (period() < kMinPacketSpacing)
    throw ConfigError(fmt::format("transmission rate {} Hz spaces packets under 100 ms", tx_rate_hz));
  if (duration == 0) throw ConfigError("duration must be positive");
  if (jitter_step == 0) throw ConfigError("jitter step must be positive");
  if (2 * jitter_window() >= period()) throw ConfigError("jitter window must be under half a period");
  for (double v : {sinr_th_db, tx_power_dbm, cable_loss_db, noise_floor_dbm})
    if (!std::isfinite(v)) throw ConfigError("radio parameters must be finite");
  if (const auto* ld = std::get_if<air::LogDistance>(&loss_model); ld && !(ld->exponent > 0))
    throw ConfigError("log-distance exponent must be positive");
}

std::string_view to_string(JitterMode m) {
  switch (m) {
    case JitterMode::None: return "none";
    case JitterMode::Sync: return "sync";
    case JitterMode::Unsync: return "unsync";
  }
  return "?";
}

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::Collision: return "collision";
    case Branch::Backoff: return "backoff";
    case Branch::AifsDefer: return "aifs";
    case Branch::PostAifs: return "post-aifs";
  }
  return "?";
}

Ticks compute_aifs(const EngineConfig& cfg) { return cfg.sifs + cfg.aifsn * cfg.slot; }

ChannelContext open_context(ScheduledPacket curr, const EngineConfig& cfg) {
  ChannelContext ctx;
  ctx.curr_start = curr.tx_time;
  ctx.curr_end = curr.tx_time + cfg.ptxtime;
  ctx.aifs_end = ctx.curr_end + compute_aifs(cfg);
  ctx.participants.push_back(std::move(curr));
  return ctx;
}

Branch classify(const ChannelContext& ctx, Ticks next_tx, const EngineConfig& cfg) {
  if (next_tx < ctx.curr_start)
    throw std::logic_error(fmt::format("packet at {} ns precedes transmission start {} ns", next_tx,
                                       ctx.curr_start));
  if (next_tx - ctx.curr_start <= cfg.pd) return Branch::Collision;
  if (next_tx < ctx.curr_end) return Branch::Backoff;
  if (next_tx <= ctx.aifs_end) return Branch::AifsDefer;
  return Branch::PostAifs;
}

void handle_collision(ChannelContext& ctx, ScheduledPacket next, const EngineConfig& cfg) {
  ctx.damaged = true;
  ctx.participants.front().collision_flag = true;
  next.collision_flag = true;
  ctx.curr_end = std::max(ctx.curr_end, next.tx_time + cfg.ptxtime);
  ctx.aifs_end = ctx.curr_end + compute_aifs(cfg);
  ctx.participants.push_back(std::move(next));
}

unsigned idle_slots(Ticks anchor, Ticks busy_start, Ticks slot) {
  if (busy_start < anchor) return 0;
  return static_cast<unsigned>((busy_start - anchor) / slot);
}

bool handle_backoff(ScheduledPacket& next, const ChannelContext& ctx, const EngineConfig& cfg,
                    Rng& rng) {
  bool drew = false;
  if (next.backoff_counter < 0) {
    next.backoff_counter = static_cast<int>(rng.uniform_int(0, cfg.cw));
    drew = true;
  } else {
    const unsigned idle = idle_slots(next.backoff_anchor, ctx.curr_start, cfg.slot);
    next.backoff_counter = std::max(0, next.backoff_counter - static_cast<int>(idle));
  }
  next.backoff_anchor = ctx.curr_end + compute_aifs(cfg);
  next.tx_time = next.backoff_anchor + static_cast<Ticks>(next.backoff_counter) * cfg.slot;
  return drew;
}

void handle_aifs_defer(ScheduledPacket& next, const EngineConfig& cfg) {
  next.tx_time += compute_aifs(cfg);
}

// ---------------------------------------------------------------------------

Engine::Engine(EngineConfig cfg, geo::MobilityTrace trace)
    : cfg_(std::move(cfg)),
      aifs_(0),
      period_(0),
      jitter_(0),
      rng_(cfg_.seed),
      metrics_(cfg_.duration == 0 ? 1 : cfg_.duration) {
  cfg_.validate();
  aifs_ = compute_aifs(cfg_);
  period_ = cfg_.period();
  jitter_ = cfg_.jitter_window();

  if (trace.nodes.empty()) throw std::invalid_argument("mobility trace is empty");
  geo::validate(trace);
  std::sort(trace.nodes.begin(), trace.nodes.end(),
            [](const auto& a, const auto& b) { return a.node_id < b.node_id; });
  const std::size_t n = cfg_.n_nodes == 0 ? trace.nodes.size() : cfg_.n_nodes;
  if (n > trace.nodes.size())
    throw ConfigError(fmt::format("{} nodes requested but the trace holds {}", n, trace.nodes.size()));

  nodes_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (trace.nodes[i].records.empty())
      throw std::invalid_argument(fmt::format("node {} has no trace rows", trace.nodes[i].node_id));
    nodes_.push_back({std::move(trace.nodes[i]), 0});
  }
  observer_ = geo::geodetic_to_ecef(cfg_.observer);

  // Initial jitter is drawn in [0, 2J] so the first emission never precedes
  // the trace start.
  queue_.reserve(n);
  for (auto& ns : nodes_) {
    Ticks t0 = seconds_to_ticks(ns.track.records.front().t);
    if (jitter_ > 0) t0 = static_cast<Ticks>(static_cast<std::int64_t>(t0 + jitter_) + draw_jitter());
    if (t0 >= cfg_.duration) continue;
    ScheduledPacket p;
    p.bsm = bsm_at(ns, t0);
    p.tx_time = t0;
    queue_.insert(std::move(p));
  }
}

void Engine::set_event_log(std::ostream* out) {
  if (out == nullptr) {
    log_.reset();
    return;
  }
  log_.emplace(*out);
  log_->header(nodes_.size());
}

std::int64_t Engine::draw_jitter() {
  const auto steps = static_cast<std::int64_t>(jitter_ / cfg_.jitter_step);
  if (steps == 0) return 0;
  return rng_.uniform_int(-steps, steps) * static_cast<std::int64_t>(cfg_.jitter_step);
}

Engine::NodeState& Engine::node(std::uint32_t id) {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                             [](const NodeState& n, std::uint32_t v) { return n.track.node_id < v; });
  return *it;
}

const geo::BsmRecord& Engine::bsm_at(NodeState& ns, Ticks t) {
  const auto& rows = ns.track.records;
  while (ns.cursor + 1 < rows.size() && seconds_to_ticks(rows[ns.cursor + 1].t) <= t) ++ns.cursor;
  return rows[ns.cursor];
}

std::optional<TransmissionRecord> Engine::step() {
  if (queue_.empty()) return std::nullopt;

  ChannelContext ctx = open_context(queue_.pop_min(), cfg_);
  pending_.clear();
  if (log_) {
    log_->cycle_begin();
    log_->snapshot(ctx.participants.front(), queue_, pending_);
  }

  while (!queue_.empty()) {
    const Branch branch = classify(ctx, queue_.peek().tx_time, cfg_);
    if (branch == Branch::PostAifs) break;
    ScheduledPacket next = queue_.pop_min();
    switch (branch) {
      case Branch::Collision: {
        if (log_) log_->collision(next.tx_time - ctx.curr_start);
        handle_collision(ctx, std::move(next), cfg_);
        break;
      }
      case Branch::Backoff:
      case Branch::AifsDefer: {
        // A packet with backoff history sensed the current transmission while
        // counting down, so it freezes and resumes like any deferred packet.
        if (branch == Branch::Backoff || next.backoff_counter >= 0) {
          const bool drew = handle_backoff(next, ctx, cfg_, rng_);
          if (log_) log_->backoff(next.backoff_counter, drew);
        } else {
          handle_aifs_defer(next, cfg_);
          if (log_) log_->aifs_defer(next.node_id(), next.tx_time);
        }
        pending_.push_back(std::move(next));
        break;
      }
      case Branch::PostAifs: break;
    }
    if (log_) log_->snapshot(ctx.participants.front(), queue_, pending_);
  }

  TransmissionRecord rec = finalize(ctx);
  for (auto& p : pending_) queue_.insert(std::move(p));
  pending_.clear();

  metrics_.record_transmission(rec);
  if (!first_start_) first_start_ = rec.start;
  if (log_) {
    log_->transmission(rec, 100.0 * metrics_.window_cbr_at(rec.start),
                       100.0 * metrics_.success_rate(), ctx.aifs_end - *first_start_);
    log_->check();
  }

  for (const auto& p : ctx.participants) schedule_followup(p);
  return rec;
}

TransmissionRecord Engine::finalize(const ChannelContext& ctx) {
  TransmissionRecord rec;
  rec.start = ctx.curr_start;
  rec.duration = ctx.curr_end - ctx.curr_start;
  rec.damaged = ctx.damaged;
  rec.participants.reserve(ctx.participants.size());
  for (const auto& p : ctx.participants)
    rec.participants.push_back(
        {p.node_id(), p.tx_time, ctx.damaged ? Outcome::Error : Outcome::Success});

  if (ctx.damaged && cfg_.receiver_model_enabled) {
    std::vector<air::Contender> contenders;
    contenders.reserve(ctx.participants.size());
    for (const auto& p : ctx.participants) {
      const double d = geo::distance(geo::geodetic_to_ecef(p.bsm.pos), observer_);
      if (air::clamps(d)) metrics_.note_clamped_distance();
      contenders.push_back({p.node_id(), d, p.tx_time});
    }
    rec.winner = air::resolve_reception(contenders, cfg_.radio(), cfg_.loss_model, cfg_.sinr_th_db);
    if (rec.winner) {
      for (auto& t : rec.participants)
        if (t.node_id == *rec.winner) t.outcome = Outcome::Success;
    }
  }
  return rec;
}

void Engine::schedule_followup(const ScheduledPacket& sent) {
  auto gap = static_cast<std::int64_t>(period_);
  if (jitter_ > 0) gap += draw_jitter();
  gap = std::max(gap, static_cast<std::int64_t>(kMinPacketSpacing));
  const Ticks next_tx = sent.tx_time + static_cast<Ticks>(gap);
  if (next_tx >= cfg_.duration) return;
  auto& ns = node(sent.node_id());
  ScheduledPacket p;
  p.bsm = bsm_at(ns, next_tx);
  p.tx_time = next_tx;
  queue_.insert(std::move(p));
}

RunResult run(const EngineConfig& cfg, geo::MobilityTrace trace, std::ostream* log) {
  const auto wall_start = std::chrono::steady_clock::now();
  Engine engine(cfg, std::move(trace));
  if (log != nullptr && cfg.log_enabled) engine.set_event_log(log);
  RunResult result;
  while (auto rec = engine.step()) result.records.push_back(std::move(*rec));
  result.windows = engine.metrics().windows();
  result.summary = engine.metrics().summary();
  result.summary.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return result;
}

}  // namespace rve::mac

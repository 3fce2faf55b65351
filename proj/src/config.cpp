#include "rve/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include <fmt/format.h>

namespace rve::config {

namespace {

using mac::ConfigError;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || p != end || !std::isfinite(out))
    throw ConfigError(fmt::format("{}: '{}' is not a number", key, v));
  return out;
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || p != end)
    throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", key, v));
  return out;
}

Ticks to_us_ticks(std::string_view key, std::string_view v) {
  const double x = to_double(key, v);
  if (x < 0) throw ConfigError(fmt::format("{} must be non-negative", key));
  return us_to_ticks(x);
}

std::string format_us(Ticks t) { return fmt::format("{}", to_us(t)); }

}  // namespace

void apply(SimConfig& cfg, std::string_view key, std::string_view value) {
  auto& e = cfg.engine;
  value = trim(value);
  if (key == "NODES") {
    e.n_nodes = to_uint(key, value);
  } else if (key == "SLOT_US") {
    e.slot = to_us_ticks(key, value);
  } else if (key == "SIFS_US") {
    e.sifs = to_us_ticks(key, value);
  } else if (key == "AIFSN") {
    e.aifsn = static_cast<unsigned>(to_uint(key, value));
  } else if (key == "CW") {
    e.cw = static_cast<unsigned>(to_uint(key, value));
  } else if (key == "PD_US") {
    e.pd = to_us_ticks(key, value);
  } else if (key == "PTXTIME_US") {
    e.ptxtime = to_us_ticks(key, value);
  } else if (key == "TX_RATE_HZ") {
    e.tx_rate_hz = to_double(key, value);
  } else if (key == "SINR_TH_DB") {
    e.sinr_th_db = to_double(key, value);
  } else if (key == "TX_POWER_DBM") {
    e.tx_power_dbm = to_double(key, value);
  } else if (key == "CABLE_LOSS_DB") {
    e.cable_loss_db = to_double(key, value);
  } else if (key == "NOISE_FLOOR_DBM") {
    e.noise_floor_dbm = to_double(key, value);
  } else if (key == "JITTER_MODE") {
    if (value == "sync") e.jitter_mode = mac::JitterMode::Sync;
    else if (value == "unsync") e.jitter_mode = mac::JitterMode::Unsync;
    else if (value == "none") e.jitter_mode = mac::JitterMode::None;
    else throw ConfigError(fmt::format("JITTER_MODE: expected sync, unsync or none, got '{}'", value));
  } else if (key == "JITTER_US") {
    e.jitter = to_us_ticks(key, value);
  } else if (key == "SEED") {
    e.seed = to_uint(key, value);
  } else if (key == "LOSS_MODEL") {
    if (value == "off") {
      e.receiver_model_enabled = false;
    } else if (value == "freespace") {
      e.receiver_model_enabled = true;
      e.loss_model = air::FreeSpace{};
    } else if (value.starts_with("logdist:")) {
      e.receiver_model_enabled = true;
      e.loss_model = air::LogDistance{to_double(key, value.substr(8))};
    } else {
      throw ConfigError(
          fmt::format("LOSS_MODEL: expected freespace, logdist:<k> or off, got '{}'", value));
    }
  } else if (key == "SCENARIO") {
    cfg.scenario = std::filesystem::path(std::string(value));
  } else if (key == "DURATION_S") {
    const double d = to_double(key, value);
    if (d < 0) throw ConfigError("DURATION_S must be non-negative");
    e.duration = seconds_to_ticks(d);
  } else if (key == "LOG") {
    if (value != "0" && value != "1") throw ConfigError("LOG: expected 0 or 1");
    e.log_enabled = value == "1";
  } else if (key == "OBSERVER") {
    double v[3];
    std::string_view rest = value;
    for (int i = 0; i < 3; ++i) {
      const auto comma = rest.find(',');
      if ((i < 2) == (comma == std::string_view::npos))
        throw ConfigError("OBSERVER: expected lat,lon,height");
      v[i] = to_double(key, trim(rest.substr(0, comma)));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    try {
      e.observer = geo::make_geodetic(v[0], v[1], v[2]);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(fmt::format("OBSERVER: {}", ex.what()));
    }
  } else {
    throw ConfigError(fmt::format("unknown config key '{}'", key));
  }
}

std::pair<std::string, std::string> split_assignment(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError(fmt::format("expected KEY=VALUE, got '{}'", text));
  const auto key = trim(text.substr(0, eq));
  if (key.empty()) throw ConfigError(fmt::format("missing key in '{}'", text));
  return {std::string(key), std::string(trim(text.substr(eq + 1)))};
}

SimConfig parse(std::istream& in, const std::filesystem::path& base_dir) {
  SimConfig cfg;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    auto body = trim(line);
    if (const auto hash = body.find('#'); hash != std::string_view::npos)
      body = trim(body.substr(0, hash));
    if (body.empty()) continue;
    try {
      const auto [key, value] = split_assignment(body);
      apply(cfg, key, value);
    } catch (const ConfigError& ex) {
      throw ConfigError(fmt::format("line {}: {}", no, ex.what()));
    }
  }
  if (!cfg.scenario.empty() && cfg.scenario.is_relative() && !base_dir.empty())
    cfg.scenario = base_dir / cfg.scenario;
  return cfg;
}

SimConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config {}", path.string()));
  return parse(in, path.parent_path());
}

void validate(const SimConfig& cfg) { cfg.engine.validate(); }

std::string to_text(const SimConfig& cfg) {
  const auto& e = cfg.engine;
  std::string loss = "off";
  if (e.receiver_model_enabled) {
    if (const auto* ld = std::get_if<air::LogDistance>(&e.loss_model))
      loss = fmt::format("logdist:{}", ld->exponent);
    else
      loss = "freespace";
  }
  std::string out;
  auto put = [&](std::string_view k, const std::string& v) { out += fmt::format("{}={}\n", k, v); };
  put("NODES", std::to_string(e.n_nodes));
  put("SLOT_US", format_us(e.slot));
  put("SIFS_US", format_us(e.sifs));
  put("AIFSN", std::to_string(e.aifsn));
  put("CW", std::to_string(e.cw));
  put("PD_US", format_us(e.pd));
  put("PTXTIME_US", format_us(e.ptxtime));
  put("TX_RATE_HZ", fmt::format("{}", e.tx_rate_hz));
  put("SINR_TH_DB", fmt::format("{}", e.sinr_th_db));
  put("TX_POWER_DBM", fmt::format("{}", e.tx_power_dbm));
  put("CABLE_LOSS_DB", fmt::format("{}", e.cable_loss_db));
  put("NOISE_FLOOR_DBM", fmt::format("{}", e.noise_floor_dbm));
  put("JITTER_MODE", std::string(mac::to_string(e.jitter_mode)));
  if (e.jitter) put("JITTER_US", format_us(*e.jitter));
  put("SEED", std::to_string(e.seed));
  put("LOSS_MODEL", loss);
  put("OBSERVER", fmt::format("{},{},{}", e.observer.lat, e.observer.lon, e.observer.height));
  if (!cfg.scenario.empty()) put("SCENARIO", cfg.scenario.string());
  put("DURATION_S", fmt::format("{}", to_seconds(e.duration)));
  put("LOG", e.log_enabled ? "1" : "0");
  return out;
}

}  // namespace rve::config

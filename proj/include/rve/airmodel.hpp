#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include "rve/ticks.hpp"

/// Path loss, RSSI, SINR and capture resolution among colliding packets.
namespace rve::air {

struct FreeSpace {
  bool operator==(const FreeSpace&) const = default;
};

/// loss(d0) + 10 k log10(d / d0), anchored at the free-space loss at d0.
struct LogDistance {
  double exponent = 2.0;
  bool operator==(const LogDistance&) const = default;
};

using LossModel = std::variant<FreeSpace, LogDistance>;

std::string to_string(const LossModel& m);

/// Reference distance; shorter distances clamp to it.
inline constexpr double kReferenceDistance = 1.0;
inline constexpr double kSpeedOfLight = 299792458.0;

struct RadioParams {
  double tx_power_dbm = 20.0;
  double cable_loss_db = 3.0;
  /// Thermal noise over 10 MHz (-104 dBm) plus a 5 dB noise figure.
  double noise_floor_dbm = -99.0;
  double carrier_freq_hz = 5.9e9;

  double effective_power_dbm() const { return tx_power_dbm - cable_loss_db; }
};

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

/// Friis free-space loss in dB. No clamping.
double friis_db(double distance_m, double freq_hz);

double path_loss_db(double distance_m, const LossModel& model, const RadioParams& radio);

/// True when `distance_m` is below the reference distance and would clamp.
inline bool clamps(double distance_m) { return distance_m < kReferenceDistance; }

double rssi_dbm(const RadioParams& radio, double distance_m, const LossModel& model);

/// Linear-milliwatt inputs to S / (I + N).
struct SinrInputs {
  double signal_mw = 0.0;
  double interference_mw = 0.0;
  double noise_mw = 0.0;
};

/// 10 log10(S / (I + N)). Throws std::domain_error when S <= 0 or I + N <= 0.
double sinr_db(const SinrInputs& in);

struct Contender {
  std::uint32_t node_id = 0;
  double distance_m = 0.0;  // to the observer
  Ticks tx_time = 0;
};

/// Evaluates every contender's SINR at the observer against the sum of the
/// others plus noise. Returns the contender whose SINR exceeds the threshold;
/// when several do (only possible for thresholds <= 0 dB) the highest wins,
/// and an exact tie yields no winner.
std::optional<std::uint32_t> resolve_reception(std::span<const Contender> contenders,
                                               const RadioParams& radio, const LossModel& model,
                                               double sinr_th_db);

}  // namespace rve::air

#include "rve/airmodel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

namespace rve::air {

std::string to_string(const LossModel& m) {
  if (const auto* ld = std::get_if<LogDistance>(&m)) return fmt::format("logdist:{}", ld->exponent);
  return "freespace";
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

double friis_db(double d, double f) {
  return 20.0 * std::log10(4.0 * std::numbers::pi * d * f / kSpeedOfLight);
}

double path_loss_db(double distance_m, const LossModel& model, const RadioParams& radio) {
  if (!(distance_m >= 0)) throw std::invalid_argument("distance must be non-negative");
  const double d = std::max(distance_m, kReferenceDistance);
  const double f = radio.carrier_freq_hz;
  if (const auto* ld = std::get_if<LogDistance>(&model)) {
    if (!(ld->exponent > 0)) throw std::invalid_argument("path loss exponent must be positive");
    return friis_db(kReferenceDistance, f) +
           10.0 * ld->exponent * std::log10(d / kReferenceDistance);
  }
  return friis_db(d, f);
}

double rssi_dbm(const RadioParams& radio, double distance_m, const LossModel& model) {
  return radio.effective_power_dbm() - path_loss_db(distance_m, model, radio);
}

double sinr_db(const SinrInputs& in) {
  if (!(in.signal_mw > 0)) throw std::domain_error("SINR needs a positive signal power");
  if (in.interference_mw < 0 || in.noise_mw < 0)
    throw std::domain_error("interference and noise must be non-negative");
  const double denom = in.interference_mw + in.noise_mw;
  if (!(denom > 0)) throw std::domain_error("SINR undefined with zero interference and noise");
  return 10.0 * std::log10(in.signal_mw / denom);
}

std::optional<std::uint32_t> resolve_reception(std::span<const Contender> contenders,
                                               const RadioParams& radio, const LossModel& model,
                                               double sinr_th_db) {
  if (contenders.empty()) return std::nullopt;
  std::vector<double> power(contenders.size());
  for (std::size_t i = 0; i < contenders.size(); ++i) {
    power[i] = dbm_to_mw(rssi_dbm(radio, contenders[i].distance_m, model));
  }
  const double noise = dbm_to_mw(radio.noise_floor_dbm);

  std::optional<std::size_t> best;
  double best_sinr = 0.0;
  bool tie = false;
  for (std::size_t i = 0; i < contenders.size(); ++i) {
    double others = 0.0;
    for (std::size_t j = 0; j < contenders.size(); ++j)
      if (j != i) others += power[j];
    const double s = sinr_db({power[i], others, noise});
    if (!(s > sinr_th_db)) continue;
    if (!best || s > best_sinr) {
      best = i;
      best_sinr = s;
      tie = false;
    } else if (s == best_sinr) {
      tie = true;
    }
  }
  if (!best || tie) return std::nullopt;
  return contenders[*best].node_id;
}

}  // namespace rve::air

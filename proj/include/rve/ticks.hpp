#pragma once

#include <cmath>
#include <cstdint>

namespace rve {

/// Engine time base: unsigned nanoseconds since scenario start.
using Ticks = std::uint64_t;

inline constexpr Ticks kTicksPerUs = 1'000;
inline constexpr Ticks kTicksPerMs = 1'000'000;
inline constexpr Ticks kTicksPerSec = 1'000'000'000;

constexpr Ticks us(std::uint64_t v) { return v * kTicksPerUs; }
constexpr Ticks ms(std::uint64_t v) { return v * kTicksPerMs; }
constexpr Ticks sec(std::uint64_t v) { return v * kTicksPerSec; }

constexpr double to_us(Ticks t) { return static_cast<double>(t) / kTicksPerUs; }
constexpr double to_ms(Ticks t) { return static_cast<double>(t) / kTicksPerMs; }
constexpr double to_seconds(Ticks t) { return static_cast<double>(t) / kTicksPerSec; }

// Rounds to the nearest tick. Negative or non-finite input is a caller bug.
inline Ticks seconds_to_ticks(double s) {
  return static_cast<Ticks>(std::llround(s * static_cast<double>(kTicksPerSec)));
}
inline Ticks us_to_ticks(double v) {
  return static_cast<Ticks>(std::llround(v * static_cast<double>(kTicksPerUs)));
}

}  // namespace rve

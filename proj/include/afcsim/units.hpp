#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>

namespace afcsim {

/// Integer picoseconds since scenario start. Every stream and interface in the
/// library exchanges this type; floating-point time only appears at the edges
/// (config parsing and report formatting).
using Time = std::chrono::duration<std::int64_t, std::pico>;

inline constexpr std::int64_t kPsPerNs = 1'000;
inline constexpr std::int64_t kPsPerUs = 1'000'000;
inline constexpr std::int64_t kPsPerMs = 1'000'000'000;
inline constexpr std::int64_t kPsPerS = 1'000'000'000'000;

inline Time from_ns(double ns) { return Time{std::llround(ns * kPsPerNs)}; }
inline Time from_us(double us) { return Time{std::llround(us * kPsPerUs)}; }
inline Time from_seconds(double s) { return Time{std::llround(s * kPsPerS)}; }

inline double to_ns(Time t) { return static_cast<double>(t.count()) / kPsPerNs; }
inline double to_us(Time t) { return static_cast<double>(t.count()) / kPsPerUs; }
inline double to_seconds(Time t) { return static_cast<double>(t.count()) / kPsPerS; }

/// Period of a frequency given in Hz, rounded to the nearest picosecond.
inline Time period_of(double hz) { return Time{std::llround(1e12 / hz)}; }

}  // namespace afcsim

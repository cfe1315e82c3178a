#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "afcsim/units.hpp"

namespace afcsim {

/// Configuration value out of range or malformed. Maps to CLI exit status 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed timestamp file or record (carries a line number or byte offset in
/// the message).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical precondition violated during analysis (empty noise window, zero
/// denominator, degenerate fit).
class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kClusterSpacingMHz = 44'500.0;
inline constexpr double kModeSpacingMHz = 412.0;
inline constexpr int kModesPerCluster = 4;
inline constexpr int kClusterCount = 3;
inline constexpr int kModeCount = kModesPerCluster * kClusterCount;

/// One longitudinal mode of the pair source: three clusters 44.5 GHz apart,
/// four modes 412 MHz apart in each.
struct SpectralMode {
    int cluster = 0;  // -1, 0, +1
    int mode = 0;     // 0..3
    int resonant_mode = 1;

    double detuning_mhz() const {
        return cluster * kClusterSpacingMHz + (mode - resonant_mode) * kModeSpacingMHz;
    }
    bool is_resonant() const { return cluster == 0 && mode == resonant_mode; }
    bool main_cluster() const { return cluster == 0; }

    /// Flat index 0..11, cluster-major.
    int index() const { return (cluster + 1) * kModesPerCluster + mode; }
    static SpectralMode from_index(int index, int resonant_mode) {
        return SpectralMode{index / kModesPerCluster - 1, index % kModesPerCluster, resonant_mode};
    }

    friend bool operator==(const SpectralMode&, const SpectralMode&) = default;
};

enum class Arm : std::uint8_t { signal, idler };
enum class Origin : std::uint8_t { pair, broadband_noise };

struct PhotonEvent {
    Arm arm = Arm::signal;
    Time time{0};
    SpectralMode mode{};
    Origin origin = Origin::pair;
    std::uint64_t pair_id = 0;  // meaningful only for Origin::pair

    friend bool operator==(const PhotonEvent&, const PhotonEvent&) = default;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ConfigError(message);
}

inline void require_probability(double p, const std::string& name) {
    if (!(p >= 0.0 && p <= 1.0))
        throw ConfigError(name + " must lie in [0, 1], got " + std::to_string(p));
}

}  // namespace afcsim

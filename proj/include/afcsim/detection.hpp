#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "afcsim/gates.hpp"
#include "afcsim/random.hpp"
#include "afcsim/types.hpp"

namespace afcsim {

struct TimestampRecord {
    std::uint8_t channel = 0;
    Time time{0};

    friend bool operator==(const TimestampRecord&, const TimestampRecord&) = default;
};

/// Simulation-side provenance of a click. Never serialized.
enum class ClickOrigin : std::uint8_t { pair, noise, dark };

struct Click {
    TimestampRecord record;
    ClickOrigin origin = ClickOrigin::pair;
};

/// Dead time is not modeled.
struct DetectorSpec {
    std::uint8_t channel = 0;
    double efficiency = 1.0;
    double dark_rate = 0.0;            // counts/s
    std::vector<PeriodicGate> gates;   // detector counts only while every gate is on

    bool is_on(Time t) const { return all_on(gates, t); }
    void validate(const std::string& name) const;
};

/// Photon-to-click conversion for one detector. Consumes one uniform per
/// offered photon so that paired runs stay aligned draw for draw.
class Detector {
public:
    explicit Detector(DetectorSpec spec) : spec_(std::move(spec)) {}

    const DetectorSpec& spec() const { return spec_; }
    bool registers(Time t, RandomStream& rng) const;
    /// Poisson dark clicks over [0, duration), kept only while gated on.
    std::vector<Time> dark_counts(Time duration, RandomStream& rng) const;

private:
    DetectorSpec spec_;
};

/// Thins `events` by efficiency inside gate-on time, adds dark clicks, and
/// returns the merged stream sorted by time. Events at or beyond `duration`
/// are not recorded.
std::vector<Click> detect_tagged(std::span<const PhotonEvent> events, const DetectorSpec& spec, Time duration,
                                 RandomStream& rng);
std::vector<TimestampRecord> detect(std::span<const PhotonEvent> events, const DetectorSpec& spec, Time duration,
                                    RandomStream& rng);

enum class TimestampFormat { csv, binary };

/// Non-fatal findings while reading (for example a time that steps backwards
/// within a channel; real time taggers jitter).
struct ReadReport {
    std::vector<TimestampRecord> records;
    std::vector<std::string> warnings;
};

inline constexpr std::size_t kBinaryRecordSize = 16;

void write_timestamps_csv(std::span<const TimestampRecord> records, std::ostream& out);
void write_timestamps_binary(std::span<const TimestampRecord> records, std::ostream& out);
void write_timestamps(std::span<const TimestampRecord> records, const std::filesystem::path& path, TimestampFormat format);

ReadReport read_timestamps_csv(std::istream& in);
ReadReport read_timestamps_binary(std::istream& in);
ReadReport read_timestamps(const std::filesystem::path& path, TimestampFormat format);

}  // namespace afcsim

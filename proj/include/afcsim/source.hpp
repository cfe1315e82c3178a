#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "afcsim/gates.hpp"
#include "afcsim/random.hpp"
#include "afcsim/types.hpp"

namespace afcsim {

/// How the configured correlation time maps onto the two-sided exponential
/// signal-idler delay distribution exp(-|t|/b).
enum class CorrelationConvention {
    e_folding,  // b = correlation_time
    fwhm,       // correlation_time is the full width at half maximum: b = t / (2 ln 2)
};

struct SourceParams {
    double pump_power_mw = 2.0;
    double pair_rate_per_mw = 0.0;   // pairs/s/mW at the cavity output, all twelve modes
    Time correlation_time = Time{108'000};
    CorrelationConvention convention = CorrelationConvention::e_folding;
    int resonant_mode = 1;
    /// Brightness of each secondary-cluster mode relative to a main-cluster mode.
    double secondary_weight = 1.0;
    double noise_rate_per_mw = 0.0;  // broadband signal-arm counts/s/mW
    PeriodicGate duty = PeriodicGate::always_on();
    bool pump_gating = true;
    Time gate_lead = Time{500'000};
    Time gate_hold = Time{20'000'000};

    double pair_rate() const { return pump_power_mw * pair_rate_per_mw; }
    double noise_rate() const { return pump_power_mw * noise_rate_per_mw; }
    /// 1/e constant b of the delay law, in picoseconds.
    double delay_decay_ps() const;
    /// Flat mode index drawn from a single uniform in [0, 1).
    int mode_index(double u) const;

    void validate() const;
};

struct PhotonPair {
    PhotonEvent idler;
    PhotonEvent signal;
};

/// Half-open interval [start, end).
struct Interval {
    Time start{0};
    Time end{0};
    Time length() const { return end - start; }
    bool contains(Time t) const { return t >= start && t < end; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Sorted, disjoint pump-off intervals.
class GateSchedule {
public:
    GateSchedule() = default;

    std::span<const Interval> intervals() const { return intervals_; }
    bool empty() const { return intervals_.empty(); }
    bool contains(Time t) const;
    Time total_off_time() const;

    /// Appends an interval whose start is not earlier than the last appended
    /// start, merging it with the tail when they overlap or touch.
    void append(Interval interval);

    friend bool operator==(const GateSchedule&, const GateSchedule&) = default;

private:
    std::vector<Interval> intervals_;
};

/// Incremental form of build_gate_schedule. Heralds must arrive in time order,
/// which is what lets the simulator gate the pump causally while it runs.
class GateScheduleBuilder {
public:
    GateScheduleBuilder(Time storage_time, const SourceParams& params);

    void add_herald(Time herald);
    const GateSchedule& schedule() const { return schedule_; }
    GateSchedule release() { return std::move(schedule_); }

private:
    Time offset_;
    Time hold_;
    GateSchedule schedule_;
};

/// One pump-off window per herald at t_h: [t_h + tau - lead, ... + hold),
/// clamped to start no earlier than t_h when tau < lead. Overlaps are merged.
GateSchedule build_gate_schedule(std::span<const Time> heralds, Time storage_time, const SourceParams& params);

/// Streams candidate pair emissions in time order over [begin, end), honoring
/// the source duty cycle but not pump gating (the caller decides). Each
/// candidate consumes the same number of draws whether or not it is kept.
class PairEmitter {
public:
    PairEmitter(const SourceParams& params, Time begin, Time end, RandomStream& rng, std::uint64_t first_id = 0);

    std::optional<PhotonPair> next();

private:
    const SourceParams* params_;
    RandomStream* rng_;
    double mean_gap_ps_;
    double decay_ps_;
    std::int64_t on_cursor_;
    std::int64_t on_end_;
    std::uint64_t next_id_;
};

/// Streams broadband signal-arm noise candidates in time order over [begin, end).
class NoiseEmitter {
public:
    NoiseEmitter(const SourceParams& params, Time begin, Time end, RandomStream& rng);

    std::optional<PhotonEvent> next();

private:
    const SourceParams* params_;
    RandomStream* rng_;
    double mean_gap_ps_;
    std::int64_t on_cursor_;
    std::int64_t on_end_;
};

/// Pair emissions over [0, duration). Candidates inside `pump_off` are dropped,
/// as are pairs whose signal would precede the start of the scenario.
std::vector<PhotonPair> sample_pair_emissions(const SourceParams& params, Time duration, RandomStream& rng,
                                              const GateSchedule& pump_off = {});

/// Same law over [begin, end), for slice-parallel generation.
std::vector<PhotonPair> sample_pair_emissions(const SourceParams& params, Time begin, Time end, RandomStream& rng,
                                              const GateSchedule& pump_off, std::uint64_t first_id);

/// Splits [0, duration) into slices of `slice` length, slice k drawing from
/// substream ("source", k) of `master_seed`, and generates them concurrently.
/// Pair ids are prefixed by the slice index.
std::vector<PhotonPair> sample_pair_emissions_sliced(const SourceParams& params, Time duration, Time slice,
                                                     std::uint64_t master_seed, const GateSchedule& pump_off = {});

std::vector<PhotonEvent> sample_broadband_noise(const SourceParams& params, Time duration, RandomStream& rng,
                                                const GateSchedule& pump_off = {});

}  // namespace afcsim

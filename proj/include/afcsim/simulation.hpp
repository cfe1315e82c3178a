#pragma once

#include <cstdint>
#include <vector>

#include "afcsim/config.hpp"
#include "afcsim/detection.hpp"
#include "afcsim/source.hpp"

namespace afcsim {

/// A signal-detector click with its simulated history.
struct SignalClick {
    Time time{0};
    ClickOrigin origin = ClickOrigin::pair;
    bool resonant = false;  // pair photon in the mode held by the memory pit
    bool echoed = false;
};

struct SimulationTally {
    std::uint64_t pair_candidates = 0;
    std::uint64_t pairs_emitted = 0;
    std::uint64_t noise_candidates = 0;
    std::uint64_t noise_emitted = 0;
    std::uint64_t echoes_at_detector = 0;
    std::uint64_t memory_absorbed = 0;
    std::uint64_t idler_pair_clicks = 0;
    std::uint64_t idler_dark_clicks = 0;
    std::uint64_t signal_pair_clicks = 0;
    std::uint64_t signal_noise_clicks = 0;
    std::uint64_t signal_dark_clicks = 0;
};

struct SimulationOutput {
    /// Both channels, ordered by time then channel.
    std::vector<TimestampRecord> records;
    std::vector<Click> idler;
    std::vector<SignalClick> signal;
    GateSchedule pump_off;
    SimulationTally tally;
};

/// Runs the full chain with the pump gated causally by the idler clicks.
///
/// Candidates are walked in time order. Each idler click (pair or dark)
/// extends the pump-off schedule, and later candidates falling inside it are
/// never emitted, so the resulting schedule equals build_gate_schedule over
/// all idler clicks. Every pair candidate consumes the same draws from each
/// named stream whether or not it is emitted or survives, so two
/// configurations sharing a seed see the same pairs meet the same fates
/// wherever their physics agrees.
SimulationOutput simulate(const ExperimentConfig& config);

/// Pump-off window offset used for the gating: the configured storage time,
/// whatever the memory mode.
Time gating_storage_time(const ExperimentConfig& config);

}  // namespace afcsim

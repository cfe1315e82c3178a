#pragma once

#include <algorithm>
#include <span>

#include "afcsim/units.hpp"

namespace afcsim {

/// Periodic on/off schedule: on during [k*period, k*period + on) for every k.
/// A zero period means permanently on.
struct PeriodicGate {
    Time period{0};
    Time on{0};

    static PeriodicGate always_on() { return {}; }
    static PeriodicGate with_duty(Time period, double duty) {
        return {period, Time{static_cast<std::int64_t>(std::llround(period.count() * duty))}};
    }

    bool continuous() const { return period.count() == 0 || on >= period; }
    double duty() const { return continuous() ? 1.0 : static_cast<double>(on.count()) / period.count(); }

    bool is_on(Time t) const { return continuous() || (t.count() % period.count()) < on.count(); }

    /// Total on-time inside [0, duration).
    Time on_time(Time duration) const {
        if (continuous()) return duration;
        const auto full = duration.count() / period.count();
        const auto rest = duration.count() % period.count();
        return Time{full * on.count() + std::min(rest, on.count())};
    }

    /// Wall-clock instant at which `elapsed_on` of on-time has accumulated.
    Time wall_time(Time elapsed_on) const {
        if (continuous()) return elapsed_on;
        const auto k = elapsed_on.count() / on.count();
        return Time{k * period.count() + elapsed_on.count() % on.count()};
    }
};

inline bool all_on(std::span<const PeriodicGate> gates, Time t) {
    return std::all_of(gates.begin(), gates.end(), [t](const PeriodicGate& g) { return g.is_on(t); });
}

}  // namespace afcsim

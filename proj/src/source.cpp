#include "afcsim/source.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>

namespace afcsim {

double SourceParams::delay_decay_ps() const {
    const auto t = static_cast<double>(correlation_time.count());
    return convention == CorrelationConvention::fwhm ? t / (2.0 * std::numbers::ln2) : t;
}

int SourceParams::mode_index(double u) const {
    const double main_share = kModesPerCluster / (kModesPerCluster + 2.0 * kModesPerCluster * secondary_weight);
    const double secondary_share = (1.0 - main_share) / 2.0;
    int cluster = 0;
    double share = main_share;
    if (u < secondary_share) {
        cluster = -1;
        share = secondary_share;
    } else if (u < secondary_share + main_share) {
        u -= secondary_share;
    } else {
        cluster = 1;
        u -= secondary_share + main_share;
        share = secondary_share;
    }
    const int mode = std::min(kModesPerCluster - 1, static_cast<int>(u / share * kModesPerCluster));
    return SpectralMode{cluster, mode, resonant_mode}.index();
}

void SourceParams::validate() const {
    require(pump_power_mw >= 0.0, "source.pump_power must be non-negative");
    require(pair_rate_per_mw >= 0.0, "source.pair_rate_per_mw must be non-negative");
    require(noise_rate_per_mw >= 0.0, "source.noise_rate_per_mw must be non-negative");
    require(correlation_time.count() > 0, "source.correlation_time must be positive");
    require(resonant_mode >= 0 && resonant_mode < kModesPerCluster, "source.resonant_mode must be in 0..3");
    require(duty.continuous() || (duty.on.count() > 0 && duty.on <= duty.period),
            "source duty cycle must lie in (0, 1]");
    require(secondary_weight >= 0.0, "source.secondary_weight must be non-negative");
    require(gate_lead.count() >= 0, "source.gate_lead must be non-negative");
    require(gate_hold.count() > 0, "source.gate_hold must be positive");
}

bool GateSchedule::contains(Time t) const {
    // First interval whose end lies beyond t.
    auto it = std::upper_bound(intervals_.begin(), intervals_.end(), t,
                               [](Time value, const Interval& iv) { return value < iv.end; });
    return it != intervals_.end() && it->start <= t;
}

Time GateSchedule::total_off_time() const {
    Time total{0};
    for (const auto& iv : intervals_) total += iv.length();
    return total;
}

void GateSchedule::append(Interval interval) {
    if (!intervals_.empty() && interval.start <= intervals_.back().end) {
        intervals_.back().end = std::max(intervals_.back().end, interval.end);
        return;
    }
    intervals_.push_back(interval);
}

GateScheduleBuilder::GateScheduleBuilder(Time storage_time, const SourceParams& params)
    : offset_(std::max(Time{0}, storage_time - params.gate_lead)), hold_(params.gate_hold) {
    require(storage_time.count() >= 0, "storage time must be non-negative");
}

void GateScheduleBuilder::add_herald(Time herald) {
    const Time start = herald + offset_;
    schedule_.append({start, start + hold_});
}

GateSchedule build_gate_schedule(std::span<const Time> heralds, Time storage_time, const SourceParams& params) {
    GateScheduleBuilder builder(storage_time, params);
    for (Time h : heralds) builder.add_herald(h);
    return builder.release();
}

PairEmitter::PairEmitter(const SourceParams& params, Time begin, Time end, RandomStream& rng, std::uint64_t first_id)
    : params_(&params),
      rng_(&rng),
      mean_gap_ps_(params.pair_rate() > 0.0 ? 1e12 / params.pair_rate() : 0.0),
      decay_ps_(params.delay_decay_ps()),
      on_cursor_(params.duty.on_time(begin).count()),
      on_end_(params.duty.on_time(end).count()),
      next_id_(first_id) {}

std::optional<PhotonPair> PairEmitter::next() {
    if (mean_gap_ps_ <= 0.0 || on_cursor_ >= on_end_) return std::nullopt;
    on_cursor_ += std::llround(rng_->exponential(mean_gap_ps_));
    if (on_cursor_ >= on_end_) return std::nullopt;

    const auto mode = SpectralMode::from_index(params_->mode_index(rng_->uniform()), params_->resonant_mode);
    const bool positive = rng_->bernoulli(0.5);
    const auto magnitude = std::llround(rng_->exponential(decay_ps_));
    const Time delay{positive ? magnitude : -magnitude};

    const Time t = params_->duty.wall_time(Time{on_cursor_});
    const auto id = next_id_++;
    PhotonPair pair;
    pair.idler = PhotonEvent{Arm::idler, t, mode, Origin::pair, id};
    pair.signal = PhotonEvent{Arm::signal, t + delay, mode, Origin::pair, id};
    return pair;
}

NoiseEmitter::NoiseEmitter(const SourceParams& params, Time begin, Time end, RandomStream& rng)
    : params_(&params),
      rng_(&rng),
      mean_gap_ps_(params.noise_rate() > 0.0 ? 1e12 / params.noise_rate() : 0.0),
      on_cursor_(params.duty.on_time(begin).count()),
      on_end_(params.duty.on_time(end).count()) {}

std::optional<PhotonEvent> NoiseEmitter::next() {
    if (mean_gap_ps_ <= 0.0 || on_cursor_ >= on_end_) return std::nullopt;
    on_cursor_ += std::llround(rng_->exponential(mean_gap_ps_));
    if (on_cursor_ >= on_end_) return std::nullopt;
    PhotonEvent ev;
    ev.arm = Arm::signal;
    ev.time = params_->duty.wall_time(Time{on_cursor_});
    ev.mode = SpectralMode{0, params_->resonant_mode, params_->resonant_mode};
    ev.origin = Origin::broadband_noise;
    return ev;
}

std::vector<PhotonPair> sample_pair_emissions(const SourceParams& params, Time begin, Time end, RandomStream& rng,
                                              const GateSchedule& pump_off, std::uint64_t first_id) {
    std::vector<PhotonPair> out;
    PairEmitter emitter(params, begin, end, rng, first_id);
    while (auto pair = emitter.next()) {
        if (pump_off.contains(pair->idler.time)) continue;
        if (pair->signal.time.count() < 0) continue;
        out.push_back(*pair);
    }
    return out;
}

std::vector<PhotonPair> sample_pair_emissions(const SourceParams& params, Time duration, RandomStream& rng,
                                              const GateSchedule& pump_off) {
    return sample_pair_emissions(params, Time{0}, duration, rng, pump_off, 0);
}

std::vector<PhotonPair> sample_pair_emissions_sliced(const SourceParams& params, Time duration, Time slice,
                                                     std::uint64_t master_seed, const GateSchedule& pump_off) {
    require(slice.count() > 0, "slice length must be positive");
    const auto slices = static_cast<std::uint64_t>((duration.count() + slice.count() - 1) / slice.count());
    std::vector<std::future<std::vector<PhotonPair>>> parts;
    parts.reserve(slices);
    for (std::uint64_t k = 0; k < slices; ++k) {
        parts.push_back(std::async(std::launch::async, [&, k] {
            RandomStream rng(master_seed, "source", k);
            const Time begin{static_cast<std::int64_t>(k) * slice.count()};
            const Time end = std::min(duration, begin + slice);
            return sample_pair_emissions(params, begin, end, rng, pump_off, k << 40);
        }));
    }
    std::vector<PhotonPair> out;
    for (auto& part : parts) {
        auto chunk = part.get();
        out.insert(out.end(), chunk.begin(), chunk.end());
    }
    return out;
}

std::vector<PhotonEvent> sample_broadband_noise(const SourceParams& params, Time duration, RandomStream& rng,
                                                const GateSchedule& pump_off) {
    std::vector<PhotonEvent> out;
    NoiseEmitter emitter(params, Time{0}, duration, rng);
    while (auto ev = emitter.next()) {
        if (!pump_off.contains(ev->time)) out.push_back(*ev);
    }
    return out;
}

}  // namespace afcsim

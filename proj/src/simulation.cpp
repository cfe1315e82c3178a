#include "afcsim/simulation.hpp"

#include <algorithm>
#include <limits>

#include "afcsim/afc_memory.hpp"

namespace afcsim {

Time gating_storage_time(const ExperimentConfig& config) {
    // The pump schedule belongs to the apparatus, so transparency and bare-line runs
    // keep the storage-time offset and their input windows stay ungated.
    return config.memory.storage_time();
}

namespace {

/// Named random streams of one run.
struct Streams {
    RandomStream source;
    RandomStream noise;
    RandomStream chain_idler;
    RandomStream chain_signal;
    RandomStream memory;
    RandomStream chain_post;
    RandomStream detection_idler;
    RandomStream detection_signal;
    RandomStream noise_fate;
    RandomStream dark_idler;
    RandomStream dark_signal;

    explicit Streams(std::uint64_t seed)
        : source(seed, "source"),
          noise(seed, "noise"),
          chain_idler(seed, "chain.idler"),
          chain_signal(seed, "chain.signal"),
          memory(seed, "memory"),
          chain_post(seed, "chain.post"),
          detection_idler(seed, "detection.idler"),
          detection_signal(seed, "detection.signal"),
          noise_fate(seed, "noise.fate"),
          dark_idler(seed, "dark.idler"),
          dark_signal(seed, "dark.signal") {}
};

class Runner {
public:
    explicit Runner(const ExperimentConfig& config)
        : c_(config),
          streams_(config.seed),
          idler_detector_(config.gated_idler_detector()),
          signal_detector_(config.gated_signal_detector()),
          post_(config.chain.post_memory()),
          gate_(gating_storage_time(config), config.source) {}

    SimulationOutput run() {
        const Time duration = c_.duration;
        const auto idler_darks = idler_detector_.dark_counts(duration, streams_.dark_idler);
        PairEmitter pairs(c_.source, Time{0}, duration, streams_.source);
        NoiseEmitter noise(c_.source, Time{0}, duration, streams_.noise);

        auto next_pair = pairs.next();
        auto next_noise = noise.next();
        std::size_t dark_index = 0;
        constexpr Time never{std::numeric_limits<std::int64_t>::max()};

        while (true) {
            const Time tp = next_pair ? next_pair->idler.time : never;
            const Time tn = next_noise ? next_noise->time : never;
            const Time td = dark_index < idler_darks.size() ? idler_darks[dark_index] : never;
            if (tp == never && tn == never && td == never) break;

            if (tp <= tn && tp <= td) {
                on_pair(*next_pair);
                next_pair = pairs.next();
            } else if (td <= tn) {
                out_.idler.push_back({{idler_detector_.spec().channel, td}, ClickOrigin::dark});
                ++out_.tally.idler_dark_clicks;
                if (c_.source.pump_gating) gate_.add_herald(td);
                ++dark_index;
            } else {
                on_noise(*next_noise);
                next_noise = noise.next();
            }
        }

        for (Time t : signal_detector_.dark_counts(duration, streams_.dark_signal)) {
            out_.signal.push_back({t, ClickOrigin::dark, false, false});
            ++out_.tally.signal_dark_clicks;
        }
        std::stable_sort(out_.signal.begin(), out_.signal.end(),
                         [](const SignalClick& a, const SignalClick& b) { return a.time < b.time; });

        out_.pump_off = gate_.release();
        merge_records();
        return std::move(out_);
    }

private:
    bool pump_off(Time t) const { return c_.source.pump_gating && gate_.schedule().contains(t); }

    void on_pair(const PhotonPair& pair) {
        ++out_.tally.pair_candidates;
        // Fixed draw pattern: one uniform per stream per candidate.
        const bool idler_survives = streams_.chain_idler.bernoulli(c_.chain.survival(pair.idler));
        const bool idler_fires = idler_detector_.registers(pair.idler.time, streams_.detection_idler);
        const bool signal_survives = streams_.chain_signal.bernoulli(c_.chain.survival(pair.signal));
        const StorageOutcome stored = storage_transform(pair.signal, c_.memory, streams_.memory);
        const bool post_survives = streams_.chain_post.bernoulli(post_);
        const bool signal_fires = signal_detector_.registers(stored.exit_time, streams_.detection_signal);

        if (pump_off(pair.idler.time)) return;
        ++out_.tally.pairs_emitted;

        if (idler_survives && idler_fires) {
            out_.idler.push_back({{idler_detector_.spec().channel, pair.idler.time}, ClickOrigin::pair});
            ++out_.tally.idler_pair_clicks;
            if (c_.source.pump_gating) gate_.add_herald(pair.idler.time);
        }

        if (pair.signal.time.count() < 0 || !signal_survives) return;
        if (stored.disposition == Disposition::absorbed) {
            ++out_.tally.memory_absorbed;
            return;
        }
        const bool echoed = stored.disposition == Disposition::echoed;
        if (!post_survives || !signal_fires || stored.exit_time >= c_.duration) return;
        out_.signal.push_back({stored.exit_time, ClickOrigin::pair, pair.signal.mode.is_resonant(), echoed});
        ++out_.tally.signal_pair_clicks;
        if (echoed) ++out_.tally.echoes_at_detector;
    }

    void on_noise(const PhotonEvent& ev) {
        ++out_.tally.noise_candidates;
        auto& rng = streams_.noise_fate;
        const bool survives = rng.bernoulli(c_.chain.survival(ev));
        const StorageOutcome stored = storage_transform(ev, c_.memory, rng);
        const bool post_survives = rng.bernoulli(post_);
        const bool fires = signal_detector_.registers(stored.exit_time, rng);

        if (pump_off(ev.time)) return;
        ++out_.tally.noise_emitted;
        if (!survives || stored.disposition == Disposition::absorbed) return;
        if (!post_survives || !fires || stored.exit_time >= c_.duration) return;
        out_.signal.push_back({stored.exit_time, ClickOrigin::noise, false, false});
        ++out_.tally.signal_noise_clicks;
    }

    void merge_records() {
        auto& records = out_.records;
        records.reserve(out_.idler.size() + out_.signal.size());
        for (const auto& click : out_.idler) records.push_back(click.record);
        const auto channel = signal_detector_.spec().channel;
        for (const auto& click : out_.signal) records.push_back({channel, click.time});
        std::sort(records.begin(), records.end(), [](const TimestampRecord& a, const TimestampRecord& b) {
            return a.time != b.time ? a.time < b.time : a.channel < b.channel;
        });
    }

    const ExperimentConfig& c_;
    Streams streams_;
    Detector idler_detector_;
    Detector signal_detector_;
    double post_;
    GateScheduleBuilder gate_;
    SimulationOutput out_;
};

}  // namespace

SimulationOutput simulate(const ExperimentConfig& config) { return Runner(config).run(); }

}  // namespace afcsim

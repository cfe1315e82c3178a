#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "afcsim/afc_memory.hpp"
#include "afcsim/analysis.hpp"
#include "afcsim/detection.hpp"
#include "afcsim/optical_chain.hpp"
#include "afcsim/source.hpp"

namespace afcsim {

/// Physical dimension of a configuration value. Each dimension accepts a fixed
/// set of unit suffixes; a bare number is read in the key's default unit.
enum class Dimension { number, fraction, time, frequency, power, angle };

/// Converts "400 ns", "7.2 pct", "3.5 MHz" to the dimension's base unit:
/// picoseconds, Hz, mW, fraction of one, degrees. `bare_unit` names the unit
/// assumed when no suffix is present (empty: base unit).
double parse_quantity(std::string_view text, Dimension dim, std::string_view bare_unit = {});
Time parse_time(std::string_view text, std::string_view bare_unit);

/// Comma-separated items, trimmed. An empty item is a ConfigError.
std::vector<std::string> split_list(std::string_view text);

/// `section.key = value` lines with `#` comments. Duplicate keys are an error.
/// Every key must be read by some consumer; leftovers are reported as unknown.
class ConfigDocument {
public:
    struct Entry {
        std::string key;
        std::string value;
        int line = 0;
        bool consumed = false;
    };

    static ConfigDocument parse(std::string_view text);
    static ConfigDocument load(const std::filesystem::path& path);

    /// Replaces (or adds) a value; used for command-line overrides.
    void set(const std::string& key, const std::string& value);

    bool has(std::string_view key) const;
    /// Raw text of a key, marking it consumed.
    std::optional<std::string> take(std::string_view key);
    /// All keys under `section.` in file order, marking them consumed.
    std::vector<Entry> take_section(std::string_view section);

    std::optional<double> take_quantity(std::string_view key, Dimension dim, std::string_view bare_unit = {});
    std::optional<Time> take_time(std::string_view key, std::string_view bare_unit);
    std::optional<bool> take_flag(std::string_view key);

    /// Throws ConfigError naming the first unconsumed key.
    void require_all_consumed() const;

    const std::vector<Entry>& entries() const { return entries_; }

private:
    Entry* find(std::string_view key);
    const Entry* find(std::string_view key) const;
    std::vector<Entry> entries_;
};

struct AnalysisConfig {
    HistogramBinning binning;
    Time window{400'000};
    std::vector<DelayRange> input_noise{{Time{-5'000'000}, Time{-1'000'000}}};
    std::optional<std::vector<DelayRange>> echo_noise;  // derived from the gating when absent
    Time autocorr_decay{265'000};
};

/// Every knob of one simulated acquisition.
struct ExperimentConfig {
    std::uint64_t seed = 1;
    Time duration{10 * kPsPerS};
    SourceParams source;
    ChainConfig chain;
    MemoryConfig memory;
    PeriodicGate memory_duty = PeriodicGate::always_on();
    DetectorSpec signal_detector;
    DetectorSpec idler_detector;
    AnalysisConfig analysis;

    /// Detector specs with the duty-cycle gates applied: both detectors follow
    /// the source duty cycle, the signal detector also the memory shutter.
    DetectorSpec gated_signal_detector() const;
    DetectorSpec gated_idler_detector() const;

    /// Time during which the idler detector counts.
    Time acquisition_time() const;

    EfficiencyBudget budget() const;

    /// Noise ranges for the echo window: inside the pump-off region where
    /// only echoed accidentals and dark clicks remain.
    std::vector<DelayRange> echo_noise_ranges() const;
};

/// Reads every non-scenario section, filling documented defaults (the
/// apparatus of the reference experiment, 5 ns bins, 400 ns window).
ExperimentConfig read_experiment(ConfigDocument& doc);

/// Range-checks and normalizes. Throws ConfigError.
ExperimentConfig validate_config(ExperimentConfig config);

/// Parses a complete configuration text that holds no scenario section.
ExperimentConfig parse_config(std::string_view text);

/// The reference loss tables.
LossTable default_signal_loss();
LossTable default_idler_loss();
LossTable default_post_memory_loss();

}  // namespace afcsim

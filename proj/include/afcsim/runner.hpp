#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "afcsim/config.hpp"
#include "afcsim/simulation.hpp"

namespace afcsim {

enum class RunMode { simulate, analyze, simulate_analyze, sweep };
enum class SweepAxis { none, pump, tau, theta };

RunMode parse_run_mode(const std::string& text);
std::string to_string(RunMode mode);

struct Scenario {
    std::string name = "scenario";
    RunMode mode = RunMode::simulate_analyze;
    ExperimentConfig config;
    SweepAxis axis = SweepAxis::none;
    std::vector<double> pump_list_mw;
    std::vector<Time> tau_list;
    std::vector<double> theta_list_deg;
    std::vector<double> finesse_list;  // optional, one per storage time
    bool compare_filter_cavity = false;
    std::filesystem::path out_dir = "out";
    TimestampFormat format = TimestampFormat::csv;
    std::optional<std::filesystem::path> timestamps;  // analyze input; defaults to the one under out_dir

    /// Throws ConfigError when a sweep has no axis values or lists disagree.
    void validate() const;
};

/// Command-line values, applied over the file. Unset fields leave the file
/// (or the built-in default) in charge.
struct Overrides {
    std::optional<std::string> mode;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::string> format;
    std::optional<std::filesystem::path> input;
    bool no_filter_cavity = false;
    std::optional<double> tau_ns;
    std::optional<double> pump_mw;
};

Scenario read_scenario(ConfigDocument& doc);
/// Parses the document, applies the overrides, validates. Throws ConfigError.
Scenario make_scenario(ConfigDocument doc, const Overrides& overrides = {});
Scenario load_scenario(const std::filesystem::path& path, const Overrides& overrides = {});

/// Per-channel sorted time streams read from a timestamp file.
struct ChannelStreams {
    std::map<std::uint8_t, std::vector<Time>> channels;
    std::vector<std::string> warnings;
    std::size_t record_count = 0;

    std::span<const Time> channel(std::uint8_t ch) const;
};

/// Splits records into channels. Streams are re-sorted when the file steps
/// backwards; channels other than `known` draw a warning.
ChannelStreams split_channels(std::span<const TimestampRecord> records, std::span<const std::uint8_t> known = {});
ChannelStreams ingest_timestamps(const std::filesystem::path& path, TimestampFormat format,
                                 std::span<const std::uint8_t> known = {});

/// Everything computed from the two timestamp streams and the configuration.
struct AnalysisReport {
    double acquisition_s = 0.0;
    std::uint64_t heralds = 0;
    std::uint64_t signal_clicks = 0;
    CorrelationHistogram cross{HistogramBinning{}};
    CorrelationResult input;
    std::optional<CorrelationResult> echo;
    std::optional<CorrelationResult> auto_signal;
    std::optional<CorrelationResult> auto_idler;
    std::optional<HeraldingEfficiency> heralding;
    double net_coincidence_rate = 0.0;  // input window, accidentals removed, per second
    std::optional<double> generated_rate_per_mw;
};

AnalysisReport analyze_streams(const ExperimentConfig& config, const ChannelStreams& streams);

/// Simulation truth for the report tables that need it.
struct TruthSummary {
    double background_to_signal_signal = 0.0;  // B/S at the signal detector
    double background_to_signal_idler = 0.0;
    double ratio_nonresonant = 0.0;            // r in the input window
    std::uint64_t resonant_coincidences = 0;
    std::uint64_t nonresonant_coincidences = 0;
};

TruthSummary summarize_truth(const ExperimentConfig& config, const SimulationOutput& sim);

/// One operating point: the configured run plus, for AFC runs, a companion
/// transparency run on the same seed that supplies the input-side numbers.
struct PointResult {
    ExperimentConfig config;
    SimulationOutput sim;
    AnalysisReport report;
    TruthSummary truth;
    std::optional<SimulationOutput> companion_sim;
    std::optional<AnalysisReport> companion;
    std::optional<TruthSummary> companion_truth;

    /// The run whose input window stands for "input photons".
    const AnalysisReport& input_report() const { return companion ? *companion : report; }
    const TruthSummary& input_truth() const { return companion_truth ? *companion_truth : truth; }
};

PointResult run_point(const ExperimentConfig& config);

/// Echo efficiency measured as net echo coincidences per herald over net
/// input coincidences per herald of the companion run.
struct MeasuredEfficiency {
    double eta = 0.0;
    double sigma = 0.0;
};
std::optional<MeasuredEfficiency> measured_efficiency(const PointResult& point);

void write_g2_csv(const AnalysisReport& report, std::ostream& out);
void write_summary_csv(const AnalysisReport& report, std::ostream& out);
void write_truth_csv(const SimulationOutput& sim, const TruthSummary& truth, std::ostream& out);
void write_table_s3_csv(const ExperimentConfig& config, const AnalysisReport& report,
                        const std::optional<TruthSummary>& truth, std::ostream& out);
void write_table_s4_csv(const std::vector<PointResult>& points, std::ostream& out);

struct RunResult {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> warnings;
};

/// Executes the scenario and writes every output under scenario.out_dir.
/// Throws ConfigError for scenario problems, FormatError for bad input files
/// and std::runtime_error for I/O failures.
RunResult run_scenario(const Scenario& scenario);

}  // namespace afcsim

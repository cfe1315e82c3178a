#include "afcsim/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>
#include <thread>

#include "afcsim/afc_memory.hpp"

namespace afcsim {

RunMode parse_run_mode(const std::string& text) {
    if (text == "simulate") return RunMode::simulate;
    if (text == "analyze") return RunMode::analyze;
    if (text == "simulate+analyze") return RunMode::simulate_analyze;
    if (text == "sweep") return RunMode::sweep;
    throw ConfigError("unknown mode '" + text + "' (simulate, analyze, simulate+analyze, sweep)");
}

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::simulate: return "simulate";
        case RunMode::analyze: return "analyze";
        case RunMode::simulate_analyze: return "simulate+analyze";
        case RunMode::sweep: return "sweep";
    }
    return "?";
}

void Scenario::validate() const {
    if (mode != RunMode::sweep) return;
    switch (axis) {
        case SweepAxis::none: throw ConfigError("sweep mode needs scenario.sweep = pump, tau or theta");
        case SweepAxis::pump: require(!pump_list_mw.empty(), "scenario.pump_list must not be empty"); break;
        case SweepAxis::tau:
            require(!tau_list.empty(), "scenario.tau_list must not be empty");
            require(finesse_list.empty() || finesse_list.size() == tau_list.size(),
                    "scenario.finesse_list needs one entry per storage time");
            break;
        case SweepAxis::theta: require(!theta_list_deg.empty(), "scenario.theta_list must not be empty"); break;
    }
    for (double p : pump_list_mw) require(p >= 0.0, "scenario.pump_list values must be non-negative");
    for (Time t : tau_list) require(t.count() > 0, "scenario.tau_list values must be positive");
    for (double f : finesse_list) require(f > 1.0, "scenario.finesse_list values must exceed 1");
    for (double th : theta_list_deg) require(th >= 0.0 && th <= 90.0, "scenario.theta_list values must lie in [0, 90]");
}

namespace {

template <typename T, typename Fn>
std::vector<T> take_list(ConfigDocument& doc, std::string_view key, Fn&& parse_item) {
    std::vector<T> out;
    if (auto v = doc.take(key)) {
        try {
            for (const auto& item : split_list(*v)) out.push_back(parse_item(item));
        } catch (const ConfigError& err) {
            throw ConfigError(std::string(key) + ": " + err.what());
        }
    }
    return out;
}

TimestampFormat parse_format(const std::string& text) {
    if (text == "csv") return TimestampFormat::csv;
    if (text == "binary") return TimestampFormat::binary;
    throw ConfigError("unknown timestamp format '" + text + "' (csv, binary)");
}

std::string format_number(double v) {
    if (!std::isfinite(v)) return "nan";
    std::ostringstream s;
    s.precision(10);
    s << v;
    return s.str();
}

}  // namespace

Scenario read_scenario(ConfigDocument& doc) {
    Scenario s;
    if (auto v = doc.take("scenario.name")) s.name = *v;
    if (auto v = doc.take("scenario.mode")) s.mode = parse_run_mode(*v);
    if (auto v = doc.take("scenario.sweep")) {
        if (*v == "pump") s.axis = SweepAxis::pump;
        else if (*v == "tau") s.axis = SweepAxis::tau;
        else if (*v == "theta") s.axis = SweepAxis::theta;
        else throw ConfigError("scenario.sweep must be pump, tau or theta");
    }
    s.pump_list_mw = take_list<double>(doc, "scenario.pump_list",
                                       [](const std::string& x) { return parse_quantity(x, Dimension::power, "mW"); });
    s.tau_list = take_list<Time>(doc, "scenario.tau_list", [](const std::string& x) { return parse_time(x, "us"); });
    s.theta_list_deg = take_list<double>(doc, "scenario.theta_list",
                                         [](const std::string& x) { return parse_quantity(x, Dimension::angle, "deg"); });
    s.finesse_list = take_list<double>(doc, "scenario.finesse_list",
                                       [](const std::string& x) { return parse_quantity(x, Dimension::number); });
    if (auto v = doc.take_flag("scenario.compare_filter_cavity")) s.compare_filter_cavity = *v;
    if (auto v = doc.take("scenario.out")) s.out_dir = *v;
    if (auto v = doc.take("scenario.format")) s.format = parse_format(*v);
    if (auto v = doc.take("scenario.timestamps")) s.timestamps = *v;
    s.config = read_experiment(doc);
    return s;
}

Scenario make_scenario(ConfigDocument doc, const Overrides& o) {
    if (o.mode) doc.set("scenario.mode", *o.mode);
    if (o.seed) doc.set("run.seed", std::to_string(*o.seed));
    if (o.out_dir) doc.set("scenario.out", o.out_dir->string());
    if (o.format) doc.set("scenario.format", *o.format);
    if (o.input) doc.set("scenario.timestamps", o.input->string());
    if (o.no_filter_cavity) doc.set("filter_cavity.enabled", "false");
    if (o.tau_ns) doc.set("memory.storage_time", format_number(*o.tau_ns) + " ns");
    if (o.pump_mw) doc.set("source.pump_power", format_number(*o.pump_mw) + " mW");
    Scenario s = read_scenario(doc);
    doc.require_all_consumed();
    s.config = validate_config(std::move(s.config));
    s.validate();
    return s;
}

Scenario load_scenario(const std::filesystem::path& path, const Overrides& overrides) {
    return make_scenario(ConfigDocument::load(path), overrides);
}

std::span<const Time> ChannelStreams::channel(std::uint8_t ch) const {
    auto it = channels.find(ch);
    if (it == channels.end()) return {};
    return it->second;
}

ChannelStreams split_channels(std::span<const TimestampRecord> records, std::span<const std::uint8_t> known) {
    ChannelStreams out;
    out.record_count = records.size();
    for (const auto& r : records) out.channels[r.channel].push_back(r.time);
    for (auto& [ch, times] : out.channels) {
        if (!std::is_sorted(times.begin(), times.end())) std::sort(times.begin(), times.end());
        if (!known.empty() && std::find(known.begin(), known.end(), ch) == known.end())
            out.warnings.push_back("unknown channel " + std::to_string(ch) + " (" + std::to_string(times.size()) +
                                   " records ignored)");
    }
    return out;
}

ChannelStreams ingest_timestamps(const std::filesystem::path& path, TimestampFormat format,
                                 std::span<const std::uint8_t> known) {
    auto report = read_timestamps(path, format);
    auto streams = split_channels(report.records, known);
    streams.warnings.insert(streams.warnings.begin(), report.warnings.begin(), report.warnings.end());
    return streams;
}

namespace {

std::optional<CorrelationResult> try_g2(const CorrelationHistogram& hist, Time window, Time center,
                                        std::span<const DelayRange> noise) {
    try {
        return g2_windowed(hist, window, center, noise);
    } catch (const AnalysisError&) {
        return std::nullopt;
    }
}

std::optional<CorrelationResult> try_auto(std::span<const Time> stream, std::uint64_t seed, std::string_view name,
                                          const ExperimentConfig& config, double acquisition_s) {
    RandomStream splitter(seed, name);
    AutoCorrelationOptions options;
    options.window = config.analysis.window;
    const Time w = config.analysis.binning.bin_width;
    options.binning = {w, -(Time{10 * kPsPerUs} + w / 2), Time{10 * kPsPerUs} + w / 2};
    options.acquisition_s = acquisition_s;
    try {
        return autocorrelation_g2(stream, splitter, options);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace

AnalysisReport analyze_streams(const ExperimentConfig& config, const ChannelStreams& streams) {
    const auto idler = streams.channel(config.idler_detector.channel);
    const auto signal = streams.channel(config.signal_detector.channel);
    AnalysisReport r;
    r.acquisition_s = to_seconds(config.acquisition_time());
    r.heralds = idler.size();
    r.signal_clicks = signal.size();
    r.cross = cross_correlation_histogram(idler, signal, config.analysis.binning, r.acquisition_s);
    r.input = g2_windowed(r.cross, config.analysis.window, Time{0}, config.analysis.input_noise);
    if (config.memory.mode == MemoryMode::afc) {
        const auto ranges = config.echo_noise_ranges();
        r.echo = try_g2(r.cross, config.analysis.window, config.memory.storage_time(), ranges);
    }
    r.auto_signal = try_auto(signal, config.seed, "analysis.split.signal", config, r.acquisition_s);
    r.auto_idler = try_auto(idler, config.seed, "analysis.split.idler", config, r.acquisition_s);

    r.net_coincidence_rate = (static_cast<double>(r.input.coincidences) - r.input.accidentals) / r.acquisition_s;
    const auto budget = config.budget();
    try {
        r.heralding = heralding_efficiency(r.input.p_si, r.input.p_i, budget, config.idler_detector.dark_rate,
                                           config.analysis.window);
    } catch (const AnalysisError&) {
    }
    if (config.source.pump_power_mw > 0.0)
        r.generated_rate_per_mw = generated_rate(r.net_coincidence_rate, budget) / config.source.pump_power_mw;
    return r;
}

TruthSummary summarize_truth(const ExperimentConfig& config, const SimulationOutput& sim) {
    TruthSummary t;
    const auto& tally = sim.tally;
    if (tally.signal_pair_clicks > 0)
        t.background_to_signal_signal = static_cast<double>(tally.signal_noise_clicks + tally.signal_dark_clicks) /
                                        static_cast<double>(tally.signal_pair_clicks);
    if (tally.idler_pair_clicks > 0)
        t.background_to_signal_idler =
            static_cast<double>(tally.idler_dark_clicks) / static_cast<double>(tally.idler_pair_clicks);

    std::vector<Time> heralds;
    heralds.reserve(sim.idler.size());
    for (const auto& c : sim.idler) heralds.push_back(c.record.time);
    std::vector<Time> resonant;
    std::vector<Time> other;
    for (const auto& c : sim.signal) (c.origin == ClickOrigin::pair && c.resonant ? resonant : other).push_back(c.time);

    const auto& a = config.analysis;
    const DelayRange window{-a.window / 2, a.window / 2};
    t.resonant_coincidences = counts_in(cross_correlation_histogram(heralds, resonant, a.binning), window);
    t.nonresonant_coincidences = counts_in(cross_correlation_histogram(heralds, other, a.binning), window);
    if (t.resonant_coincidences > 0)
        t.ratio_nonresonant =
            static_cast<double>(t.nonresonant_coincidences) / static_cast<double>(t.resonant_coincidences);
    return t;
}

namespace {

std::vector<std::uint8_t> known_channels(const ExperimentConfig& c) {
    return {c.idler_detector.channel, c.signal_detector.channel};
}

struct SingleRun {
    SimulationOutput sim;
    AnalysisReport report;
    TruthSummary truth;
};

SingleRun run_single(const ExperimentConfig& config) {
    SingleRun run{simulate(config), AnalysisReport{}, TruthSummary{}};
    const auto known = known_channels(config);
    run.report = analyze_streams(config, split_channels(run.sim.records, known));
    run.truth = summarize_truth(config, run.sim);
    return run;
}

}  // namespace

PointResult run_point(const ExperimentConfig& config) {
    auto main = run_single(config);
    PointResult p{config, std::move(main.sim), std::move(main.report), main.truth, std::nullopt, std::nullopt, std::nullopt};
    if (config.memory.mode == MemoryMode::afc) {
        ExperimentConfig companion = config;
        companion.memory.mode = MemoryMode::transparency;
        auto c = run_single(companion);
        p.companion_sim = std::move(c.sim);
        p.companion = std::move(c.report);
        p.companion_truth = c.truth;
    }
    return p;
}

std::optional<MeasuredEfficiency> measured_efficiency(const PointResult& point) {
    if (!point.companion || !point.report.echo) return std::nullopt;
    const auto& echo = *point.report.echo;
    const auto& input = point.companion->input;
    if (point.report.heralds == 0 || point.companion->heralds == 0) return std::nullopt;
    const double echo_net = static_cast<double>(echo.coincidences) - echo.accidentals;
    const double input_net = static_cast<double>(input.coincidences) - input.accidentals;
    if (!(input_net > 0.0)) return std::nullopt;
    const double eta = (echo_net / static_cast<double>(point.report.heralds)) /
                       (input_net / static_cast<double>(point.companion->heralds));
    const double clamped = std::clamp(eta, 0.0, 1.0);
    return MeasuredEfficiency{eta, std::sqrt(clamped * (1.0 - clamped) / input_net)};
}

namespace {

void write_result_row(std::ostream& out, const std::string& name, const CorrelationResult& r) {
    out << name << ',' << format_number(to_ns(r.center)) << ',' << format_number(to_ns(r.window)) << ','
        << r.coincidences << ',' << r.noise_counts << ',' << r.noise_bins << ',' << format_number(r.accidentals) << ','
        << format_number(r.g2) << ',' << format_number(r.sigma_g2) << ',' << format_number(r.p_i) << ','
        << format_number(r.p_si) << ',' << format_number(r.p_s) << '\n';
}

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

}  // namespace

void write_g2_csv(const AnalysisReport& report, std::ostream& out) {
    out << "window,center_ns,width_ns,coincidences,noise_counts,noise_bins,accidentals,g2,sigma_g2,p_i,p_si,p_s\n";
    write_result_row(out, "input", report.input);
    if (report.echo) write_result_row(out, "echo", *report.echo);
    if (report.auto_signal) write_result_row(out, "auto_signal", *report.auto_signal);
    if (report.auto_idler) write_result_row(out, "auto_idler", *report.auto_idler);
}

void write_summary_csv(const AnalysisReport& report, std::ostream& out) {
    out << "key,value\n";
    out << "acquisition_s," << format_number(report.acquisition_s) << '\n';
    out << "heralds," << report.heralds << '\n';
    out << "signal_clicks," << report.signal_clicks << '\n';
    out << "herald_rate_hz," << format_number(static_cast<double>(report.heralds) / report.acquisition_s) << '\n';
    out << "net_coincidence_rate_hz," << format_number(report.net_coincidence_rate) << '\n';
    out << "heralding_efficiency," << (report.heralding ? format_number(report.heralding->raw) : "") << '\n';
    out << "heralding_efficiency_dark_corrected,"
        << (report.heralding ? format_number(report.heralding->dark_corrected) : "") << '\n';
    out << "generated_rate_hz_per_mw," << opt_number(report.generated_rate_per_mw) << '\n';
}

void write_truth_csv(const SimulationOutput& sim, const TruthSummary& truth, std::ostream& out) {
    const auto& t = sim.tally;
    out << "key,value\n";
    out << "pair_candidates," << t.pair_candidates << '\n';
    out << "pairs_emitted," << t.pairs_emitted << '\n';
    out << "noise_candidates," << t.noise_candidates << '\n';
    out << "noise_emitted," << t.noise_emitted << '\n';
    out << "memory_absorbed," << t.memory_absorbed << '\n';
    out << "echoes_at_detector," << t.echoes_at_detector << '\n';
    out << "idler_pair_clicks," << t.idler_pair_clicks << '\n';
    out << "idler_dark_clicks," << t.idler_dark_clicks << '\n';
    out << "signal_pair_clicks," << t.signal_pair_clicks << '\n';
    out << "signal_noise_clicks," << t.signal_noise_clicks << '\n';
    out << "signal_dark_clicks," << t.signal_dark_clicks << '\n';
    out << "pump_off_s," << format_number(to_seconds(sim.pump_off.total_off_time())) << '\n';
    out << "background_to_signal_signal," << format_number(truth.background_to_signal_signal) << '\n';
    out << "background_to_signal_idler," << format_number(truth.background_to_signal_idler) << '\n';
    out << "resonant_coincidences," << truth.resonant_coincidences << '\n';
    out << "nonresonant_coincidences," << truth.nonresonant_coincidences << '\n';
    out << "ratio_nonresonant," << format_number(truth.ratio_nonresonant) << '\n';
}

void write_table_s3_csv(const ExperimentConfig& config, const AnalysisReport& report,
                        const std::optional<TruthSummary>& truth, std::ostream& out) {
    out << "pump_mw,g2_ss,sigma_ss,g2_ss_th,g2_ii,sigma_ii,g2_ii_th,g2_si,sigma_si,R,sigma_R\n";
    std::optional<double> ss_th;
    std::optional<double> ii_th;
    if (truth) {
        const Time t_c = config.analysis.autocorr_decay;
        const double bs = truth->background_to_signal_signal;
        const double bi = truth->background_to_signal_idler;
        ss_th = g2_auto_theory(BackgroundBudget::from_ratios(bs, bs, t_c), config.analysis.window).windowed;
        ii_th = g2_auto_theory(BackgroundBudget::from_ratios(bi, bi, t_c), config.analysis.window).windowed;
    }
    const auto& si = report.input;
    std::optional<double> R;
    std::optional<double> sigma_R;
    if (report.auto_signal && report.auto_idler) {
        const auto& ss = *report.auto_signal;
        const auto& ii = *report.auto_idler;
        try {
            R = cauchy_schwarz_R(si.g2, ss.g2, ii.g2);
            sigma_R = *R * std::sqrt(std::pow(2.0 * si.sigma_g2 / si.g2, 2) + std::pow(ss.sigma_g2 / ss.g2, 2) +
                                     std::pow(ii.sigma_g2 / ii.g2, 2));
        } catch (const AnalysisError&) {
        }
    }
    auto g = [](const std::optional<CorrelationResult>& r) { return r ? format_number(r->g2) : std::string{}; };
    auto s = [](const std::optional<CorrelationResult>& r) { return r ? format_number(r->sigma_g2) : std::string{}; };
    out << format_number(config.source.pump_power_mw) << ',' << g(report.auto_signal) << ',' << s(report.auto_signal)
        << ',' << opt_number(ss_th) << ',' << g(report.auto_idler) << ',' << s(report.auto_idler) << ','
        << opt_number(ii_th) << ',' << format_number(si.g2) << ',' << format_number(si.sigma_g2) << ','
        << opt_number(R) << ',' << opt_number(sigma_R) << '\n';
}

void write_table_s4_csv(const std::vector<PointResult>& points, std::ostream& out) {
    out << "pump_mw,g2_echo,sigma_echo,g2_input,sigma_input,r,g2_predicted,sigma_predicted\n";
    for (const auto& p : points) {
        if (!p.report.echo) continue;
        const auto& echo = *p.report.echo;
        const auto& input = p.input_report().input;
        const double r = p.input_truth().ratio_nonresonant;
        const double predicted = g2_input_prediction(echo.g2, r);
        const double slope = (1.0 + r) / std::pow(1.0 + r * echo.g2, 2);
        out << format_number(p.config.source.pump_power_mw) << ',' << format_number(echo.g2) << ','
            << format_number(echo.sigma_g2) << ',' << format_number(input.g2) << ',' << format_number(input.sigma_g2)
            << ',' << format_number(r) << ',' << format_number(predicted) << ','
            << format_number(slope * echo.sigma_g2) << '\n';
    }
}

namespace {

class OutputDir {
public:
    explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec || !std::filesystem::is_directory(dir_))
            throw std::runtime_error("cannot create output directory " + dir_.string());
    }

    const std::filesystem::path& path() const { return dir_; }

    template <typename Fn>
    void write(const std::string& name, Fn&& fn, RunResult& result) const {
        const auto path = dir_ / name;
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        fn(out);
        if (!out) throw std::runtime_error("failed writing " + path.string());
        result.files.push_back(path);
    }

private:
    std::filesystem::path dir_;
};

std::string timestamp_name(TimestampFormat format) {
    return format == TimestampFormat::csv ? "timestamps.csv" : "timestamps.bin";
}

void write_records(const OutputDir& dir, const std::string& name, const SimulationOutput& sim, TimestampFormat format,
                   RunResult& result) {
    const auto path = dir.path() / name;
    write_timestamps(sim.records, path, format);
    result.files.push_back(path);
}

void write_analysis(const OutputDir& dir, const std::string& suffix, const AnalysisReport& report,
                    RunResult& result) {
    dir.write("g2" + suffix + ".csv", [&](std::ostream& o) { write_g2_csv(report, o); }, result);
    dir.write("summary" + suffix + ".csv", [&](std::ostream& o) { write_summary_csv(report, o); }, result);
    dir.write("histogram" + suffix + ".csv", [&](std::ostream& o) { write_histogram_csv(report.cross, o); }, result);
}

void write_comb_profile(const OutputDir& dir, const ExperimentConfig& config, RunResult& result) {
    if (config.memory.mode != MemoryMode::afc) return;
    const auto& comb = config.memory.comb;
    const auto profile = comb_profile(comb, comb.gamma_khz / 40.0);
    dir.write("comb_profile.csv", [&](std::ostream& o) { write_profile_csv(profile, o); }, result);
}

void write_point(const OutputDir& dir, const PointResult& p, TimestampFormat format, RunResult& result) {
    write_records(dir, timestamp_name(format), p.sim, format, result);
    write_analysis(dir, "", p.report, result);
    dir.write("truth.csv", [&](std::ostream& o) { write_truth_csv(p.sim, p.truth, o); }, result);
    if (p.companion) {
        write_analysis(dir, "_transparency", *p.companion, result);
        dir.write("truth_transparency.csv", [&](std::ostream& o) { write_truth_csv(*p.companion_sim, *p.companion_truth, o); },
                  result);
    }
}

/// Point configurations of a sweep. Points sharing an axis index share a
/// seed, so a filter-cavity comparison pairs runs draw for draw.
struct SweepPoint {
    std::size_t index = 0;
    std::string label;
    ExperimentConfig config;
};

std::vector<SweepPoint> sweep_points(const Scenario& s) {
    std::vector<SweepPoint> points;
    const auto& base = s.config;
    auto seeded = [&](ExperimentConfig c, std::size_t k) {
        c.seed = derive_seed(base.seed, "point", k);
        return c;
    };
    switch (s.axis) {
        case SweepAxis::pump:
            for (std::size_t k = 0; k < s.pump_list_mw.size(); ++k) {
                auto c = seeded(base, k);
                c.source.pump_power_mw = s.pump_list_mw[k];
                points.push_back({k, "point_" + std::to_string(k), validate_config(c)});
            }
            break;
        case SweepAxis::tau:
            for (std::size_t k = 0; k < s.tau_list.size(); ++k) {
                auto c = seeded(base, k);
                std::optional<double> finesse;
                if (!s.finesse_list.empty()) finesse = s.finesse_list[k];
                c.memory.comb = comb_for_storage_time(base.memory.comb, s.tau_list[k], finesse);
                points.push_back({k, "point_" + std::to_string(k), validate_config(c)});
                if (s.compare_filter_cavity) {
                    c.chain.filter_cavity_enabled = !base.chain.filter_cavity_enabled;
                    points.push_back({k, "point_" + std::to_string(k) + "_toggled", validate_config(c)});
                }
            }
            break;
        case SweepAxis::theta:
            for (std::size_t k = 0; k < s.theta_list_deg.size(); ++k) {
                auto c = seeded(base, k);
                c.memory.mode = MemoryMode::bare_line;
                c.memory.polarization_deg = s.theta_list_deg[k];
                points.push_back({k, "point_" + std::to_string(k), validate_config(c)});
            }
            break;
        case SweepAxis::none: break;
    }
    return points;
}

/// Runs the points concurrently, at most one per hardware thread, and returns
/// them in input order.
std::vector<PointResult> run_points(const std::vector<SweepPoint>& points) {
    const std::size_t width = std::max(1U, std::thread::hardware_concurrency());
    std::vector<PointResult> results;
    results.reserve(points.size());
    for (std::size_t start = 0; start < points.size(); start += width) {
        std::vector<std::future<PointResult>> batch;
        for (std::size_t k = start; k < std::min(points.size(), start + width); ++k)
            batch.push_back(std::async(std::launch::async, [&points, k] { return run_point(points[k].config); }));
        for (auto& f : batch) results.push_back(f.get());
    }
    return results;
}

double herald_rate(const AnalysisReport& r) { return static_cast<double>(r.heralds) / r.acquisition_s; }

void write_fig2b(const OutputDir& dir, const std::vector<PointResult>& results, RunResult& result) {
    dir.write("fig2b.csv", [&](std::ostream& o) {
        o << "pump_mw,herald_rate_hz,net_coincidence_rate_hz,g2_input,sigma_input,g2_echo,sigma_echo\n";
        for (const auto& p : results) {
            const auto& in = p.input_report();
            o << format_number(p.config.source.pump_power_mw) << ',' << format_number(herald_rate(in)) << ','
              << format_number(in.net_coincidence_rate) << ',' << format_number(in.input.g2) << ','
              << format_number(in.input.sigma_g2) << ',' << (p.report.echo ? format_number(p.report.echo->g2) : "")
              << ',' << (p.report.echo ? format_number(p.report.echo->sigma_g2) : "") << '\n';
        }
    }, result);

    if (results.size() < 3) return;
    dir.write("fig2b_trend.csv", [&](std::ostream& o) {
        o << "series,rho,p_decreasing,p_increasing\n";
        std::vector<double> pump;
        std::vector<double> input;
        std::vector<double> echo;
        for (const auto& p : results) {
            pump.push_back(p.config.source.pump_power_mw);
            input.push_back(p.input_report().input.g2);
            if (p.report.echo) echo.push_back(p.report.echo->g2);
        }
        auto row = [&](const char* name, const std::vector<double>& y) {
            const auto s = spearman(pump, y);
            o << name << ',' << format_number(s.rho) << ',' << format_number(s.p_decreasing) << ','
              << format_number(s.p_increasing) << '\n';
        };
        row("input", input);
        if (echo.size() == pump.size()) row("echo", echo);
    }, result);
}

void write_fig3bc(const OutputDir& dir, const std::vector<SweepPoint>& points,
                  const std::vector<PointResult>& results, RunResult& result) {
    dir.write("fig3bc.csv", [&](std::ostream& o) {
        o << "tau_us,filter_cavity,finesse,eta_afc_model,eta_measured,sigma_eta,g2_echo,sigma_echo,herald_rate_hz,"
             "echo_coincidences\n";
        for (std::size_t k = 0; k < results.size(); ++k) {
            const auto& p = results[k];
            const auto& c = points[k].config;
            const auto eta = measured_efficiency(p);
            o << format_number(to_us(c.memory.storage_time())) << ',' << (c.chain.filter_cavity_enabled ? 1 : 0) << ','
              << format_number(c.memory.comb.finesse()) << ',' << format_number(c.memory.echo_efficiency()) << ','
              << (eta ? format_number(eta->eta) : "") << ',' << (eta ? format_number(eta->sigma) : "") << ','
              << (p.report.echo ? format_number(p.report.echo->g2) : "") << ','
              << (p.report.echo ? format_number(p.report.echo->sigma_g2) : "") << ','
              << format_number(herald_rate(p.report)) << ',' << (p.report.echo ? p.report.echo->coincidences : 0)
              << '\n';
        }
    }, result);

    CombFamily family{points.front().config.memory.comb, {}};
    std::vector<Time> taus;
    for (const auto& pt : points) {
        if (!taus.empty() && taus.back() == pt.config.memory.storage_time()) continue;
        taus.push_back(pt.config.memory.storage_time());
        family.finesse.push_back(pt.config.memory.comb.finesse());
    }
    const auto rows = efficiency_vs_storage_time(family, taus);
    dir.write("storage_efficiency.csv", [&](std::ostream& o) {
        o << "tau_us,delta_khz,finesse,eta_analytic,eta_numeric\n";
        for (const auto& r : rows)
            o << format_number(to_us(r.tau)) << ',' << format_number(r.delta_khz) << ',' << format_number(r.finesse)
              << ',' << format_number(r.analytic) << ',' << format_number(r.numeric) << '\n';
    }, result);
}

void write_dichroism(const OutputDir& dir, const std::vector<PointResult>& results, RunResult& result) {
    std::vector<DichroismSample> scan;
    for (const auto& p : results) {
        const auto& in = p.report.input;
        scan.push_back({p.config.memory.polarization_deg, static_cast<double>(in.coincidences) - in.accidentals});
    }
    dir.write("dichroism.csv", [&](std::ostream& o) {
        o << "theta_deg,net_coincidences,g2\n";
        for (std::size_t k = 0; k < scan.size(); ++k)
            o << format_number(scan[k].theta_deg) << ',' << format_number(scan[k].counts) << ','
              << format_number(results[k].report.input.g2) << '\n';
    }, result);
    const auto fit = dichroism_fit(scan, results.front().config.memory.dichroism);
    dir.write("dichroism_fit.csv", [&](std::ostream& o) {
        o << "p_nr,p_r,visibility,r\n"
          << format_number(fit.p_nr) << ',' << format_number(fit.p_r) << ',' << format_number(fit.visibility) << ','
          << format_number(fit.ratio) << '\n';
    }, result);
}

RunResult run_sweep(const Scenario& s, const OutputDir& dir) {
    RunResult result;
    const auto points = sweep_points(s);
    const auto results = run_points(points);
    for (std::size_t k = 0; k < points.size(); ++k) {
        const OutputDir sub(dir.path() / points[k].label);
        write_point(sub, results[k], s.format, result);
    }
    switch (s.axis) {
        case SweepAxis::pump:
            write_fig2b(dir, results, result);
            dir.write("tableS4.csv", [&](std::ostream& o) { write_table_s4_csv(results, o); }, result);
            break;
        case SweepAxis::tau: write_fig3bc(dir, points, results, result); break;
        case SweepAxis::theta: write_dichroism(dir, results, result); break;
        case SweepAxis::none: break;
    }
    return result;
}

}  // namespace

RunResult run_scenario(const Scenario& scenario) {
    scenario.validate();
    const OutputDir dir(scenario.out_dir);
    const auto& config = scenario.config;
    RunResult result;

    switch (scenario.mode) {
        case RunMode::simulate: {
            const auto sim = simulate(config);
            write_records(dir, timestamp_name(scenario.format), sim, scenario.format, result);
            const auto truth = summarize_truth(config, sim);
            dir.write("truth.csv", [&](std::ostream& o) { write_truth_csv(sim, truth, o); }, result);
            write_comb_profile(dir, config, result);
            break;
        }
        case RunMode::analyze: {
            const auto path = scenario.timestamps.value_or(dir.path() / timestamp_name(scenario.format));
            const auto known = known_channels(config);
            const auto streams = ingest_timestamps(path, scenario.format, known);
            result.warnings = streams.warnings;
            const auto report = analyze_streams(config, streams);
            write_analysis(dir, "", report, result);
            dir.write("tableS3.csv", [&](std::ostream& o) { write_table_s3_csv(config, report, std::nullopt, o); },
                      result);
            break;
        }
        case RunMode::simulate_analyze: {
            const auto point = run_point(config);
            write_point(dir, point, scenario.format, result);
            write_comb_profile(dir, config, result);
            dir.write("tableS3.csv",
                      [&](std::ostream& o) { write_table_s3_csv(config, point.input_report(), point.input_truth(), o); },
                      result);
            if (point.report.echo)
                dir.write("tableS4.csv", [&](std::ostream& o) { write_table_s4_csv({point}, o); }, result);
            break;
        }
        case RunMode::sweep: {
            auto sweep = run_sweep(scenario, dir);
            result.files.insert(result.files.end(), sweep.files.begin(), sweep.files.end());
            break;
        }
    }
    return result;
}

}  // namespace afcsim

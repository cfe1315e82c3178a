#include "afcsim/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace afcsim {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct Unit {
    std::string_view suffix;
    Dimension dim;
    double scale;
};

constexpr std::array kUnits{
    Unit{"ps", Dimension::time, 1.0},       Unit{"ns", Dimension::time, 1e3},
    Unit{"us", Dimension::time, 1e6},       Unit{"ms", Dimension::time, 1e9},
    Unit{"s", Dimension::time, 1e12},       Unit{"Hz", Dimension::frequency, 1.0},
    Unit{"kHz", Dimension::frequency, 1e3}, Unit{"MHz", Dimension::frequency, 1e6},
    Unit{"GHz", Dimension::frequency, 1e9}, Unit{"mW", Dimension::power, 1.0},
    Unit{"pct", Dimension::fraction, 0.01}, Unit{"deg", Dimension::angle, 1.0},
};

const char* dimension_name(Dimension dim) {
    switch (dim) {
        case Dimension::number: return "a plain number";
        case Dimension::fraction: return "a fraction or pct";
        case Dimension::time: return "a time (ps, ns, us, ms, s)";
        case Dimension::frequency: return "a frequency (Hz, kHz, MHz, GHz)";
        case Dimension::power: return "a power (mW)";
        case Dimension::angle: return "an angle (deg)";
    }
    return "a value";
}

double unit_scale(std::string_view suffix, Dimension dim, std::string_view original) {
    for (const auto& u : kUnits) {
        if (u.suffix == suffix && u.dim == dim) return u.scale;
    }
    throw ConfigError("'" + std::string(original) + "' is not " + dimension_name(dim));
}

std::vector<std::string_view> split(std::string_view s, std::string_view sep) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
        const auto next = s.find(sep, pos);
        parts.push_back(trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
        if (next == std::string_view::npos) break;
        pos = next + sep.size();
    }
    return parts;
}

std::string with_line(const ConfigDocument::Entry& e, const std::string& message) {
    return "line " + std::to_string(e.line) + " (" + e.key + "): " + message;
}

}  // namespace

double parse_quantity(std::string_view text, Dimension dim, std::string_view bare_unit) {
    const auto value_text = trim(text);
    double value = 0.0;
    const char* first = value_text.data();
    const char* last = value_text.data() + value_text.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{}) throw ConfigError("'" + std::string(value_text) + "' is not a number");
    const auto suffix = trim(std::string_view(ptr, static_cast<std::size_t>(last - ptr)));
    if (!suffix.empty()) return value * unit_scale(suffix, dim, value_text);
    if (!bare_unit.empty()) return value * unit_scale(bare_unit, dim, value_text);
    return value;
}

Time parse_time(std::string_view text, std::string_view bare_unit) {
    return Time{std::llround(parse_quantity(text, Dimension::time, bare_unit))};
}

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    for (auto item : split(text, ",")) {
        if (item.empty()) throw ConfigError("empty item in list '" + std::string(trim(text)) + "'");
        out.emplace_back(item);
    }
    return out;
}

ConfigDocument ConfigDocument::parse(std::string_view text) {
    ConfigDocument doc;
    int line_no = 0;
    for (auto raw : split(text, "\n")) {
        ++line_no;
        auto line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = "line " + std::to_string(line_no);
        if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'section.key = value'");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.find('.') == std::string_view::npos || key.front() == '.' || key.back() == '.')
            throw ConfigError(where + ": key '" + std::string(key) + "' must have the form section.key");
        if (value.empty()) throw ConfigError(where + ": empty value for '" + std::string(key) + "'");
        if (doc.find(key)) throw ConfigError(where + ": duplicate key '" + std::string(key) + "'");
        doc.entries_.push_back({std::string(key), std::string(value), line_no, false});
    }
    return doc;
}

ConfigDocument ConfigDocument::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

void ConfigDocument::set(const std::string& key, const std::string& value) {
    if (auto* e = find(key)) {
        e->value = value;
        return;
    }
    entries_.push_back({key, value, 0, false});
}

ConfigDocument::Entry* ConfigDocument::find(std::string_view key) {
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.key == key; });
    return it == entries_.end() ? nullptr : &*it;
}

const ConfigDocument::Entry* ConfigDocument::find(std::string_view key) const {
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.key == key; });
    return it == entries_.end() ? nullptr : &*it;
}

bool ConfigDocument::has(std::string_view key) const { return find(key) != nullptr; }

std::optional<std::string> ConfigDocument::take(std::string_view key) {
    auto* e = find(key);
    if (!e) return std::nullopt;
    e->consumed = true;
    return e->value;
}

std::vector<ConfigDocument::Entry> ConfigDocument::take_section(std::string_view section) {
    std::vector<Entry> out;
    const std::string prefix = std::string(section) + ".";
    for (auto& e : entries_) {
        if (e.key.starts_with(prefix)) {
            e.consumed = true;
            out.push_back(e);
        }
    }
    return out;
}

std::optional<double> ConfigDocument::take_quantity(std::string_view key, Dimension dim, std::string_view bare_unit) {
    auto* e = find(key);
    if (!e) return std::nullopt;
    e->consumed = true;
    try {
        return parse_quantity(e->value, dim, bare_unit);
    } catch (const ConfigError& err) {
        throw ConfigError(with_line(*e, err.what()));
    }
}

std::optional<Time> ConfigDocument::take_time(std::string_view key, std::string_view bare_unit) {
    auto v = take_quantity(key, Dimension::time, bare_unit);
    if (!v) return std::nullopt;
    return Time{std::llround(*v)};
}

std::optional<bool> ConfigDocument::take_flag(std::string_view key) {
    auto* e = find(key);
    if (!e) return std::nullopt;
    e->consumed = true;
    const auto& v = e->value;
    if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "off" || v == "no" || v == "0") return false;
    throw ConfigError(with_line(*e, "expected a boolean, got '" + v + "'"));
}

void ConfigDocument::require_all_consumed() const {
    for (const auto& e : entries_) {
        if (!e.consumed) throw ConfigError(with_line(e, "unknown key"));
    }
}

LossTable default_signal_loss() {
    return {{"dichroic_mirror", 0.99}, {"glass_plate", 0.84}, {"band_pass_filter", 0.95},
            {"fiber", 0.31},           {"other_optical_elements", 0.80}};
}

LossTable default_idler_loss() { return {{"dichroic_mirror", 0.93}, {"glass_plate", 0.80}, {"fiber", 0.60}}; }

LossTable default_post_memory_loss() { return {{"cryostat", 0.75}, {"fiber", 0.60}}; }

namespace {

void read_table(ConfigDocument& doc, std::string_view section, LossTable& table) {
    auto entries = doc.take_section(section);
    if (entries.empty()) return;
    table.clear();
    for (const auto& e : entries) {
        double t = 0.0;
        try {
            t = parse_quantity(e.value, Dimension::fraction);
        } catch (const ConfigError& err) {
            throw ConfigError(with_line(e, err.what()));
        }
        table.push_back({e.key.substr(section.size() + 1), t});
    }
}

void read_cavity(ConfigDocument& doc, const std::string& section, CavitySpec& spec, bool& enabled) {
    if (auto v = doc.take_quantity(section + ".fsr", Dimension::frequency, "GHz")) spec.fsr_ghz = *v / 1e9;
    if (auto v = doc.take_quantity(section + ".linewidth", Dimension::frequency, "MHz")) spec.linewidth_mhz = *v / 1e6;
    if (auto v = doc.take_quantity(section + ".peak_transmission", Dimension::fraction)) spec.peak_transmission = *v;
    if (auto v = doc.take_flag(section + ".enabled")) enabled = *v;
}

void read_detector(ConfigDocument& doc, const std::string& section, DetectorSpec& spec) {
    if (auto v = doc.take_quantity(section + ".channel", Dimension::number)) {
        if (*v < 0 || *v > 255 || *v != std::floor(*v)) throw ConfigError(section + ".channel must be 0..255");
        spec.channel = static_cast<std::uint8_t>(*v);
    }
    if (auto v = doc.take_quantity(section + ".efficiency", Dimension::fraction)) spec.efficiency = *v;
    if (auto v = doc.take_quantity(section + ".dark_rate", Dimension::frequency, "Hz")) spec.dark_rate = *v;
}

std::vector<DelayRange> parse_ranges(const std::string& text) {
    std::vector<DelayRange> out;
    for (auto item : split(text, ",")) {
        const auto ends = split(item, "..");
        if (ends.size() != 2) throw ConfigError("expected 'lo .. hi' delay range, got '" + std::string(item) + "'");
        out.push_back({parse_time(ends[0], "us"), parse_time(ends[1], "us")});
        if (out.back().hi <= out.back().lo) throw ConfigError("delay range '" + std::string(item) + "' is empty");
    }
    return out;
}

template <typename Fn>
auto at_key(ConfigDocument& doc, std::string_view key, Fn&& fn) {
    const auto value = doc.take(key);
    using Result = decltype(fn(std::string{}));
    if (!value) return std::optional<Result>{};
    try {
        return std::optional<Result>{fn(*value)};
    } catch (const ConfigError& err) {
        throw ConfigError(std::string(key) + ": " + err.what());
    }
}

}  // namespace

ExperimentConfig read_experiment(ConfigDocument& doc) {
    ExperimentConfig c;
    c.chain.signal_loss = default_signal_loss();
    c.chain.idler_loss = default_idler_loss();
    c.chain.post_memory_loss = default_post_memory_loss();
    c.source.pair_rate_per_mw = 1.0e5;
    c.source.duty = PeriodicGate::with_duty(Time{10 * kPsPerMs}, 0.45);
    c.memory_duty = PeriodicGate::with_duty(Time{100 * kPsPerMs}, 0.50);
    c.memory.comb.delta_khz = 500.0;
    c.signal_detector = DetectorSpec{2, 0.32, 10.0, {}};
    c.idler_detector = DetectorSpec{1, 0.10, 400.0, {}};

    if (auto v = doc.take_quantity("run.seed", Dimension::number)) {
        if (*v < 0 || *v != std::floor(*v)) throw ConfigError("run.seed must be a non-negative integer");
        c.seed = static_cast<std::uint64_t>(*v);
    }
    if (auto v = doc.take_time("run.duration", "s")) c.duration = *v;

    auto& s = c.source;
    if (auto v = doc.take_quantity("source.pump_power", Dimension::power, "mW")) s.pump_power_mw = *v;
    if (auto v = doc.take_quantity("source.pair_rate_per_mw", Dimension::number)) s.pair_rate_per_mw = *v;
    if (auto v = doc.take_quantity("source.noise_rate_per_mw", Dimension::number)) s.noise_rate_per_mw = *v;
    if (auto v = doc.take_time("source.correlation_time", "ns")) s.correlation_time = *v;
    if (auto v = at_key(doc, "source.correlation_convention", [](const std::string& x) {
            if (x == "e-folding") return CorrelationConvention::e_folding;
            if (x == "fwhm") return CorrelationConvention::fwhm;
            throw ConfigError("expected e-folding or fwhm");
        }))
        s.convention = *v;
    if (auto v = doc.take_quantity("source.resonant_mode", Dimension::number)) s.resonant_mode = static_cast<int>(*v);
    if (auto v = doc.take_quantity("source.secondary_weight", Dimension::number)) s.secondary_weight = *v;
    {
        auto duty = doc.take_quantity("source.duty_cycle", Dimension::fraction);
        auto period = doc.take_time("source.duty_period", "us");
        if (duty && !(*duty > 0.0 && *duty <= 1.0)) throw ConfigError("source.duty_cycle must lie in (0, 1]");
        s.duty = PeriodicGate::with_duty(period.value_or(s.duty.period), duty.value_or(s.duty.duty()));
    }
    if (auto v = doc.take_flag("source.pump_gating")) s.pump_gating = *v;
    if (auto v = doc.take_time("source.gate_lead", "ns")) s.gate_lead = *v;
    if (auto v = doc.take_time("source.gate_hold", "us")) s.gate_hold = *v;

    read_table(doc, "signal_loss", c.chain.signal_loss);
    read_table(doc, "idler_loss", c.chain.idler_loss);
    read_table(doc, "post_memory_loss", c.chain.post_memory_loss);
    read_cavity(doc, "etalon", c.chain.etalon, c.chain.etalon_enabled);
    read_cavity(doc, "filter_cavity", c.chain.filter_cavity, c.chain.filter_cavity_enabled);
    if (auto v = doc.take_flag("chain.idler_main_cluster_only")) c.chain.idler_main_cluster_only = *v;

    auto& m = c.memory;
    if (auto v = at_key(doc, "memory.mode", [](const std::string& x) {
            if (x == "afc") return MemoryMode::afc;
            if (x == "transparency") return MemoryMode::transparency;
            if (x == "bare_line") return MemoryMode::bare_line;
            throw ConfigError("expected afc, transparency or bare_line");
        }))
        m.mode = *v;
    auto optional_fraction = [](const std::string& x) -> std::optional<double> {
        if (x == "auto") return std::nullopt;
        return parse_quantity(x, Dimension::fraction);
    };
    if (auto v = at_key(doc, "memory.eta_afc", optional_fraction)) m.eta_afc = *v;
    if (auto v = at_key(doc, "memory.afc_transmission", optional_fraction)) m.afc_transmission = *v;
    if (auto v = doc.take_quantity("memory.pit_transmission", Dimension::fraction)) m.pit_transmission = *v;
    if (auto v = doc.take_quantity("memory.polarization", Dimension::angle, "deg")) m.polarization_deg = *v;
    if (auto v = doc.take_quantity("memory.inhomogeneous_width", Dimension::frequency, "GHz"))
        m.inhomogeneous_width_ghz = *v / 1e9;
    {
        auto duty = doc.take_quantity("memory.duty_cycle", Dimension::fraction);
        auto period = doc.take_time("memory.duty_period", "us");
        if (duty && !(*duty > 0.0 && *duty <= 1.0)) throw ConfigError("memory.duty_cycle must lie in (0, 1]");
        c.memory_duty =
            PeriodicGate::with_duty(period.value_or(c.memory_duty.period), duty.value_or(c.memory_duty.duty()));
    }

    auto& comb = m.comb;
    if (auto v = doc.take_quantity("comb.gamma", Dimension::frequency, "kHz")) comb.gamma_khz = *v / 1e3;
    if (auto v = doc.take_quantity("comb.delta", Dimension::frequency, "kHz")) comb.delta_khz = *v / 1e3;
    if (auto v = doc.take_quantity("comb.depth", Dimension::number)) comb.depth = *v;
    if (auto v = doc.take_quantity("comb.background", Dimension::number)) comb.background = *v;
    if (auto v = doc.take_quantity("comb.total_width", Dimension::frequency, "MHz")) comb.total_width_mhz = *v / 1e6;
    if (auto v = doc.take_quantity("comb.full_od", Dimension::number)) comb.full_od = *v;
    if (auto v = at_key(doc, "comb.shape", [](const std::string& x) {
            if (x == "gaussian") return PeakShape::gaussian;
            if (x == "square") return PeakShape::square;
            throw ConfigError("expected gaussian or square");
        }))
        comb.shape = *v;
    // A storage time, when given, defines the comb period.
    if (auto tau = doc.take_time("memory.storage_time", "us")) {
        if (tau->count() <= 0) throw ConfigError("memory.storage_time must be positive");
        comb.delta_khz = 1e9 / static_cast<double>(tau->count());
    }

    if (auto v = doc.take_quantity("dichroism.od_d1", Dimension::number)) m.dichroism.od_d1 = *v;
    if (auto v = doc.take_quantity("dichroism.od_d2", Dimension::number)) m.dichroism.od_d2 = *v;

    read_detector(doc, "detector.signal", c.signal_detector);
    read_detector(doc, "detector.idler", c.idler_detector);

    auto& a = c.analysis;
    if (auto v = doc.take_time("analysis.bin_width", "ns")) a.binning.bin_width = *v;
    if (auto v = doc.take_time("analysis.range_min", "us")) a.binning.min_delay = *v;
    if (auto v = doc.take_time("analysis.range_max", "us")) a.binning.max_delay = *v;
    if (auto v = doc.take_time("analysis.window", "ns")) a.window = *v;
    if (auto v = at_key(doc, "analysis.input_noise", parse_ranges)) a.input_noise = *v;
    if (auto v = at_key(doc, "analysis.echo_noise", [](const std::string& x) -> std::optional<std::vector<DelayRange>> {
            if (x == "auto") return std::nullopt;
            return parse_ranges(x);
        }))
        a.echo_noise = *v;
    if (auto v = doc.take_time("analysis.autocorr_decay", "ns")) a.autocorr_decay = *v;
    return c;
}

ExperimentConfig validate_config(ExperimentConfig c) {
    require(c.duration.count() > 0, "run.duration must be positive");
    c.source.validate();
    c.chain.validate();
    c.memory.validate();
    c.signal_detector.validate("detector.signal");
    c.idler_detector.validate("detector.idler");
    require(c.signal_detector.channel != c.idler_detector.channel, "signal and idler detectors need distinct channels");
    c.analysis.binning.validate();
    require(c.analysis.window.count() > 0, "analysis.window must be positive");
    require(c.analysis.autocorr_decay.count() > 0, "analysis.autocorr_decay must be positive");
    require(c.memory_duty.continuous() || c.memory_duty.on.count() > 0, "memory.duty_cycle must lie in (0, 1]");
    return c;
}

ExperimentConfig parse_config(std::string_view text) {
    auto doc = ConfigDocument::parse(text);
    auto config = read_experiment(doc);
    doc.require_all_consumed();
    return validate_config(std::move(config));
}

DetectorSpec ExperimentConfig::gated_signal_detector() const {
    DetectorSpec spec = signal_detector;
    spec.gates = {source.duty, memory_duty};
    return spec;
}

DetectorSpec ExperimentConfig::gated_idler_detector() const {
    DetectorSpec spec = idler_detector;
    spec.gates = {source.duty};
    return spec;
}

Time ExperimentConfig::acquisition_time() const { return source.duty.on_time(duration); }

EfficiencyBudget ExperimentConfig::budget() const {
    EfficiencyBudget b;
    b.eta_s = chain.signal_path() * (chain.etalon_enabled ? chain.etalon.peak_transmission : 1.0);
    b.eta_i = chain.idler_path() * chain.filter_cavity.peak_transmission;
    b.eta_loss = chain.post_memory() * memory_duty.duty();
    b.eta_ds = signal_detector.efficiency;
    b.eta_di = idler_detector.efficiency;
    b.source_duty = source.duty.duty();
    return b;
}

std::vector<DelayRange> ExperimentConfig::echo_noise_ranges() const {
    if (analysis.echo_noise) return *analysis.echo_noise;
    const Time tau = memory.storage_time();
    const Time half = analysis.window / 2;
    const Time margin{50'000};
    if (!source.pump_gating) return {{tau + half + Time{1'000'000}, tau + half + Time{5'000'000}}};

    // The pump goes dark at tau - lead after a herald. Pairs born before that
    // keep echoing for another tau, so the echoed-accidental floor is flat
    // over [off, off + tau) apart from the correlated echo itself, whose tails
    // are kept out by five decay constants.
    const Time off = std::max(Time{0}, tau - source.gate_lead);
    const Time floor_end = off + std::min(tau, source.gate_hold) - margin;
    const Time floor_start = off + Time{100'000};
    auto around = [&](Time guard) {
        std::vector<DelayRange> ranges;
        if (tau - half - guard > floor_start) ranges.push_back({floor_start, tau - half - guard});
        if (floor_end > tau + half + guard) ranges.push_back({tau + half + guard, floor_end});
        return ranges;
    };
    const Time tail{std::llround(5.0 * source.delay_decay_ps())};
    auto ranges = around(std::max(margin, tail));
    return ranges.empty() ? around(margin) : ranges;
}

}  // namespace afcsim

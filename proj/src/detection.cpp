#include "afcsim/detection.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

namespace afcsim {

void DetectorSpec::validate(const std::string& name) const {
    require_probability(efficiency, name + ".efficiency");
    require(dark_rate >= 0.0, name + ".dark_rate must be non-negative");
}

bool Detector::registers(Time t, RandomStream& rng) const {
    const bool fired = rng.bernoulli(spec_.efficiency);
    return fired && spec_.is_on(t);
}

std::vector<Time> Detector::dark_counts(Time duration, RandomStream& rng) const {
    std::vector<Time> out;
    if (spec_.dark_rate <= 0.0) return out;
    const double mean_gap_ps = 1e12 / spec_.dark_rate;
    std::int64_t t = 0;
    while (true) {
        t += std::llround(rng.exponential(mean_gap_ps));
        if (t >= duration.count()) break;
        if (spec_.is_on(Time{t})) out.push_back(Time{t});
    }
    return out;
}

namespace {

void sort_clicks(std::vector<Click>& clicks) {
    std::stable_sort(clicks.begin(), clicks.end(), [](const Click& a, const Click& b) {
        return a.record.time < b.record.time;
    });
}

}  // namespace

std::vector<Click> detect_tagged(std::span<const PhotonEvent> events, const DetectorSpec& spec, Time duration,
                                 RandomStream& rng) {
    const Detector detector(spec);
    std::vector<Click> clicks;
    for (const auto& ev : events) {
        if (detector.registers(ev.time, rng) && ev.time < duration && ev.time.count() >= 0) {
            const auto origin = ev.origin == Origin::pair ? ClickOrigin::pair : ClickOrigin::noise;
            clicks.push_back({{spec.channel, ev.time}, origin});
        }
    }
    for (Time t : detector.dark_counts(duration, rng)) clicks.push_back({{spec.channel, t}, ClickOrigin::dark});
    sort_clicks(clicks);
    return clicks;
}

std::vector<TimestampRecord> detect(std::span<const PhotonEvent> events, const DetectorSpec& spec, Time duration,
                                    RandomStream& rng) {
    std::vector<TimestampRecord> out;
    for (const auto& click : detect_tagged(events, spec, duration, rng)) out.push_back(click.record);
    return out;
}

void write_timestamps_csv(std::span<const TimestampRecord> records, std::ostream& out) {
    out << "channel,time_ps\n";
    for (const auto& r : records) out << static_cast<unsigned>(r.channel) << ',' << r.time.count() << '\n';
}

void write_timestamps_binary(std::span<const TimestampRecord> records, std::ostream& out) {
    std::array<char, kBinaryRecordSize> buf{};
    for (const auto& r : records) {
        buf.fill(0);
        buf[0] = static_cast<char>(r.channel);
        auto t = static_cast<std::uint64_t>(r.time.count());
        for (int i = 0; i < 8; ++i) buf[8 + i] = static_cast<char>((t >> (8 * i)) & 0xffU);
        out.write(buf.data(), buf.size());
    }
}

void write_timestamps(std::span<const TimestampRecord> records, const std::filesystem::path& path,
                      TimestampFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    if (format == TimestampFormat::csv)
        write_timestamps_csv(records, out);
    else
        write_timestamps_binary(records, out);
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

namespace {

class MonotonicityCheck {
public:
    void observe(const TimestampRecord& r, const std::string& where, std::vector<std::string>& warnings) {
        auto [it, inserted] = last_.try_emplace(r.channel, r.time);
        if (!inserted) {
            if (r.time < it->second)
                warnings.push_back(where + ": time steps backwards on channel " + std::to_string(r.channel));
            it->second = r.time;
        }
    }

private:
    std::map<std::uint8_t, Time> last_;
};

template <typename T>
bool parse_integer(std::string_view text, T& value) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    return ec == std::errc{} && ptr == last;
}

}  // namespace

ReadReport read_timestamps_csv(std::istream& in) {
    ReadReport report;
    MonotonicityCheck monotonic;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            if (line == "channel,time_ps") continue;
        }
        const auto comma = line.find(',');
        unsigned channel = 0;
        std::int64_t time = 0;
        const std::string_view view(line);
        if (comma == std::string::npos || !parse_integer(view.substr(0, comma), channel) ||
            !parse_integer(view.substr(comma + 1), time))
            throw FormatError("line " + std::to_string(line_no) + ": malformed record '" + line + "'");
        if (channel > 255)
            throw FormatError("line " + std::to_string(line_no) + ": channel exceeds 255");
        if (time < 0) throw FormatError("line " + std::to_string(line_no) + ": negative time");
        TimestampRecord r{static_cast<std::uint8_t>(channel), Time{time}};
        monotonic.observe(r, "line " + std::to_string(line_no), report.warnings);
        report.records.push_back(r);
    }
    return report;
}

ReadReport read_timestamps_binary(std::istream& in) {
    ReadReport report;
    MonotonicityCheck monotonic;
    std::array<unsigned char, kBinaryRecordSize> buf{};
    std::size_t offset = 0;
    while (true) {
        in.read(reinterpret_cast<char*>(buf.data()), buf.size());
        const auto got = static_cast<std::size_t>(in.gcount());
        if (got == 0) break;
        if (got < buf.size())
            throw FormatError("truncated record at byte offset " + std::to_string(offset) + " (" +
                              std::to_string(got) + " of 16 bytes)");
        std::uint64_t t = 0;
        for (int i = 0; i < 8; ++i) t |= static_cast<std::uint64_t>(buf[8 + i]) << (8 * i);
        if (t > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
            throw FormatError("time out of range at byte offset " + std::to_string(offset));
        if (std::any_of(buf.begin() + 1, buf.begin() + 8, [](unsigned char b) { return b != 0; }))
            report.warnings.push_back("nonzero reserved bytes at byte offset " + std::to_string(offset));
        TimestampRecord r{buf[0], Time{static_cast<std::int64_t>(t)}};
        monotonic.observe(r, "byte offset " + std::to_string(offset), report.warnings);
        report.records.push_back(r);
        offset += buf.size();
    }
    return report;
}

ReadReport read_timestamps(const std::filesystem::path& path, TimestampFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return format == TimestampFormat::csv ? read_timestamps_csv(in) : read_timestamps_binary(in);
}

}  // namespace afcsim

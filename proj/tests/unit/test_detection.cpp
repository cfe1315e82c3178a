#include <doctest.h>

#include <cmath>
#include <sstream>

#include "afcsim/detection.hpp"
#include "helpers.hpp"

using namespace afcsim;

TEST_SUITE("detection") {

TEST_CASE("three-record CSV fixture") {
    std::istringstream in("channel,time_ps\n1,100\n2,250\n1,1000000\n");
    const auto r = read_timestamps_csv(in);
    REQUIRE(r.records.size() == 3);
    CHECK(r.records[0] == TimestampRecord{1, Time{100}});
    CHECK(r.records[1] == TimestampRecord{2, Time{250}});
    CHECK(r.records[2] == TimestampRecord{1, Time{1'000'000}});
    CHECK(r.warnings.empty());

    std::ostringstream out;
    write_timestamps_csv(r.records, out);
    CHECK(out.str() == "channel,time_ps\n1,100\n2,250\n1,1000000\n");
}

TEST_CASE("binary layout is channel, seven zero bytes, little-endian picoseconds") {
    const std::vector<TimestampRecord> recs{{2, Time{0x0102030405060708}}};
    std::ostringstream out;
    write_timestamps_binary(recs, out);
    const std::string bytes = out.str();
    REQUIRE(bytes.size() == kBinaryRecordSize);
    CHECK(static_cast<unsigned char>(bytes[0]) == 2);
    for (int i = 1; i < 8; ++i) CHECK(bytes[static_cast<std::size_t>(i)] == 0);
    for (int i = 0; i < 8; ++i) CHECK(static_cast<unsigned char>(bytes[static_cast<std::size_t>(8 + i)]) == 8 - i);
    std::istringstream in(bytes);
    CHECK(read_timestamps_binary(in).records == recs);
}

TEST_CASE("malformed CSV names the line") {
    std::istringstream in("channel,time_ps\n1,100\n1,abc\n");
    try {
        read_timestamps_csv(in);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::istringstream neg("1,-5\n");
    CHECK_THROWS_AS(read_timestamps_csv(neg), FormatError);
    std::istringstream big("300,5\n");
    CHECK_THROWS_AS(read_timestamps_csv(big), FormatError);
}

TEST_CASE("truncated binary names the byte offset") {
    const std::vector<TimestampRecord> recs{{1, Time{5}}, {2, Time{7}}};
    std::ostringstream out;
    write_timestamps_binary(recs, out);
    std::string bytes = out.str();
    bytes.resize(bytes.size() - 3);
    std::istringstream in(bytes);
    try {
        read_timestamps_binary(in);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("byte offset 16") != std::string::npos);
    }
}

TEST_CASE("backward steps within a channel are warnings") {
    std::istringstream in("1,100\n2,50\n1,90\n");
    const auto r = read_timestamps_csv(in);
    CHECK(r.records.size() == 3);
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("line 3") != std::string::npos);
}

TEST_CASE("file round trip in both formats") {
    test::ScratchDir dir("detection");
    RandomStream rng(43, "records");
    std::vector<TimestampRecord> recs;
    std::int64_t t = 0;
    for (int i = 0; i < 1000; ++i) {
        t += static_cast<std::int64_t>(rng.exponential(1e6));
        recs.push_back({static_cast<std::uint8_t>(1 + rng.uniform_int(0, 1)), Time{t}});
    }
    for (auto format : {TimestampFormat::csv, TimestampFormat::binary}) {
        const auto p1 = dir / "a";
        const auto p2 = dir / "b";
        write_timestamps(recs, p1, format);
        const auto back = read_timestamps(p1, format);
        CHECK(back.records == recs);
        write_timestamps(back.records, p2, format);
        CHECK(test::slurp(p1) == test::slurp(p2));
    }
}

TEST_CASE("detector efficiency thins photons binomially") {
    DetectorSpec spec{1, 0.32, 0.0, {}};
    std::vector<PhotonEvent> events;
    for (int i = 0; i < 100'000; ++i) events.push_back({Arm::signal, Time{i * 1000}});
    RandomStream rng(47, "det");
    const auto clicks = detect(events, spec, Time{1'000'000'000}, rng);
    const double n = 100'000.0;
    CHECK(std::abs(static_cast<double>(clicks.size()) - 0.32 * n) < 5.0 * std::sqrt(n * 0.32 * 0.68));
    for (const auto& c : clicks) CHECK(c.channel == 1);
}

TEST_CASE("dark counts follow the rate and the gates") {
    DetectorSpec spec{2, 0.1, 400.0, {PeriodicGate::with_duty(Time{10'000'000'000}, 0.45)}};
    Detector det(spec);
    RandomStream rng(53, "dark");
    const auto darks = det.dark_counts(Time{100'000'000'000'000}, rng);  // 100 s
    const double expected = 400.0 * 100.0 * 0.45;
    CHECK(std::abs(static_cast<double>(darks.size()) - expected) < 5.0 * std::sqrt(expected));
    for (Time t : darks) CHECK(spec.is_on(t));
    CHECK(std::is_sorted(darks.begin(), darks.end()));
}

TEST_CASE("detector validation") {
    DetectorSpec spec{1, 1.2, 0.0, {}};
    CHECK_THROWS_AS(spec.validate("detector.signal"), ConfigError);
    spec.efficiency = 0.5;
    spec.dark_rate = -1.0;
    CHECK_THROWS_AS(spec.validate("detector.signal"), ConfigError);
}

TEST_CASE("format definition examples") {
    std::istringstream in("1,1500000\n");
    const auto r = read_timestamps_csv(in);
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0] == TimestampRecord{1, Time{1'500'000}});

    std::string bytes(16, '\0');
    bytes[0] = 0x02;
    const unsigned char t[8] = {0x00, 0xC0, 0xE1, 0xE4, 0, 0, 0, 0};
    for (int i = 0; i < 8; ++i) bytes[static_cast<std::size_t>(8 + i)] = static_cast<char>(t[i]);
    std::istringstream bin(bytes);
    const auto b = read_timestamps_binary(bin);
    REQUIRE(b.records.size() == 1);
    CHECK(b.records[0] == TimestampRecord{2, Time{3'840'000'000}});
}

TEST_CASE("a million records survive a round trip") {
    std::vector<TimestampRecord> recs;
    recs.reserve(1'000'000);
    for (std::int64_t i = 0; i < 1'000'000; ++i) recs.push_back({static_cast<std::uint8_t>(1 + i % 2), Time{i * 7'919}});
    std::stringstream bin;
    write_timestamps_binary(recs, bin);
    CHECK(read_timestamps_binary(bin).records == recs);
}

TEST_CASE("blind detector with 400 Hz darks over 10 s") {
    DetectorSpec spec{1, 0.0, 400.0, {}};
    std::vector<PhotonEvent> events;
    for (int i = 0; i < 1000; ++i) events.push_back({Arm::idler, Time{i * 1'000'000}});
    RandomStream rng(109, "det");
    const auto clicks = detect_tagged(events, spec, Time{10'000'000'000'000}, rng);
    CHECK(std::abs(static_cast<double>(clicks.size()) - 4000.0) < 5.0 * std::sqrt(4000.0));
    for (const auto& c : clicks) CHECK(c.origin == ClickOrigin::dark);

    DetectorSpec quiet{1, 0.5, 0.0, {}};
    CHECK(detect(std::vector<PhotonEvent>{}, quiet, Time{1'000'000}, rng).empty());
}

TEST_CASE("a 50 % memory gate halves photon clicks and blocks the off half") {
    const auto gate = PeriodicGate::with_duty(Time{100'000'000'000}, 0.5);
    DetectorSpec spec{2, 1.0, 0.0, {gate}};
    std::vector<PhotonEvent> events;
    RandomStream place(113, "times");
    for (int i = 0; i < 100'000; ++i)
        events.push_back({Arm::signal, Time{static_cast<std::int64_t>(place.uniform() * 1e13)}});
    RandomStream rng(113, "det");
    const auto clicks = detect(events, spec, Time{10'000'000'000'000}, rng);
    CHECK(std::abs(static_cast<double>(clicks.size()) - 50'000.0) < 5.0 * std::sqrt(25'000.0));
    for (const auto& c : clicks) CHECK(gate.is_on(c.time));
}

}  // TEST_SUITE

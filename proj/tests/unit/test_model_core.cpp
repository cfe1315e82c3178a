#include <doctest.h>

#include <cmath>
#include <set>

#include "afcsim/config.hpp"
#include "afcsim/gates.hpp"
#include "afcsim/random.hpp"
#include "afcsim/units.hpp"

using namespace afcsim;

TEST_SUITE("model_core") {

TEST_CASE("time conversions round trip on the picosecond grid") {
    CHECK(from_ns(400.0) == Time{400'000});
    CHECK(from_us(2.0) == Time{2'000'000});
    CHECK(from_seconds(1.5) == Time{1'500'000'000'000});
    for (double ns : {0.0, 1.0, 108.0, 265.0, 2049.18, 1e6}) CHECK(to_ns(from_ns(ns)) == doctest::Approx(ns).epsilon(1e-12));
    CHECK(to_us(from_us(20.0)) == 20.0);
    CHECK(to_seconds(from_seconds(40.0)) == 40.0);
    CHECK(period_of(400.0) == Time{2'500'000'000});
}

TEST_CASE("quantities convert to base units") {
    CHECK(parse_quantity("400 ns", Dimension::time) == 400'000.0);
    CHECK(parse_quantity("2 us", Dimension::time) == 2'000'000.0);
    CHECK(parse_quantity("10 ms", Dimension::time) == 1e10);
    CHECK(parse_quantity("3.5 MHz", Dimension::frequency) == 3.5e6);
    CHECK(parse_quantity("76 kHz", Dimension::frequency) == 76e3);
    CHECK(parse_quantity("2 mW", Dimension::power) == 2.0);
    CHECK(parse_quantity("45 pct", Dimension::fraction) == doctest::Approx(0.45));
    CHECK(parse_quantity("0.45", Dimension::fraction) == 0.45);
    CHECK(parse_quantity("30 deg", Dimension::angle) == 30.0);
    CHECK(parse_quantity("108", Dimension::time, "ns") == 108'000.0);
    CHECK(parse_time("1.5 us", "ns") == Time{1'500'000});
}

TEST_CASE("malformed quantities are configuration errors") {
    CHECK_THROWS_AS(parse_quantity("fast", Dimension::time), ConfigError);
    CHECK_THROWS_AS(parse_quantity("2 furlongs", Dimension::time), ConfigError);
    CHECK_THROWS_AS(parse_quantity("2 mW", Dimension::time), ConfigError);
    CHECK_THROWS_AS(split_list("1, ,2"), ConfigError);
    CHECK(split_list(" 1 ,2,  3 ") == std::vector<std::string>{"1", "2", "3"});
}

TEST_CASE("named streams are reproducible and distinct") {
    RandomStream a(42, "source");
    RandomStream b(42, "source");
    RandomStream c(42, "noise");
    RandomStream d(43, "source");
    RandomStream e(42, "source", 1);
    std::vector<double> xa, xb, xc, xd, xe;
    for (int i = 0; i < 64; ++i) {
        xa.push_back(a.uniform());
        xb.push_back(b.uniform());
        xc.push_back(c.uniform());
        xd.push_back(d.uniform());
        xe.push_back(e.uniform());
    }
    CHECK(xa == xb);
    CHECK(xa != xc);
    CHECK(xa != xd);
    CHECK(xa != xe);
    CHECK(derive_seed(7, "point", 3) == derive_seed(7, "point", 3));
    CHECK(derive_seed(7, "point", 3) != derive_seed(7, "point", 4));
}

TEST_CASE("derived seeds do not collide over a sweep-sized family") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t master : {0ull, 1ull, 2ull})
        for (const char* name : {"source", "noise", "memory", "point"})
            for (std::uint64_t k = 0; k < 100; ++k) seen.insert(derive_seed(master, name, k));
    CHECK(seen.size() == 3u * 4u * 100u);
}

TEST_CASE("uniform draws have the right mean and variance") {
    RandomStream rng(5, "moments");
    const int n = 200'000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sum2 += u * u;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.01));
}

TEST_CASE("periodic gates") {
    const auto g = PeriodicGate::with_duty(Time{10'000}, 0.45);
    CHECK(g.on == Time{4'500});
    CHECK(g.is_on(Time{0}));
    CHECK(g.is_on(Time{4'499}));
    CHECK_FALSE(g.is_on(Time{4'500}));
    CHECK(g.is_on(Time{10'000}));
    CHECK(g.on_time(Time{25'000}) == Time{9'000 + 4'500});
    CHECK(g.duty() == doctest::Approx(0.45));
    CHECK(g.wall_time(Time{4'500}) == Time{10'000});
    CHECK(g.wall_time(Time{5'000}) == Time{10'500});
    CHECK(PeriodicGate::always_on().is_on(Time{123}));
    CHECK(PeriodicGate::always_on().on_time(Time{77}) == Time{77});

    SUBCASE("wall time is the inverse of accumulated on time inside on windows") {
        for (std::int64_t t = 0; t < 40'000; t += 250) {
            if (!g.is_on(Time{t})) continue;
            CHECK(g.wall_time(g.on_time(Time{t})) == Time{t});
        }
    }
}

TEST_CASE("configuration document rules") {
    SUBCASE("duplicate keys name the line") {
        try {
            ConfigDocument::parse("run.seed = 1\nrun.seed = 2\n");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SUBCASE("unknown keys are rejected") {
        CHECK_THROWS_AS(parse_config("run.seed = 1\nsource.flux_capacitor = 3\n"), ConfigError);
    }
    SUBCASE("lines without an equals sign are rejected") {
        CHECK_THROWS_AS(ConfigDocument::parse("run.seed 1\n"), ConfigError);
    }
    SUBCASE("comments and blank lines are ignored") {
        const auto c = parse_config("# header\n\nrun.seed = 9  # trailing\n");
        CHECK(c.seed == 9u);
    }
    SUBCASE("booleans") {
        CHECK_FALSE(parse_config("source.pump_gating = off\n").source.pump_gating);
        CHECK(parse_config("source.pump_gating = yes\n").source.pump_gating);
        CHECK_THROWS_AS(parse_config("source.pump_gating = maybe\n"), ConfigError);
    }
}

TEST_CASE("invalid parameters are rejected with a ConfigError") {
    CHECK_THROWS_AS(parse_config("detector.signal.efficiency = 1.2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("comb.delta = 0 kHz\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("comb.gamma = -5 kHz\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("source.pump_power = -1 mW\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("source.secondary_weight = -0.1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("run.duration = 0 s\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("memory.polarization = 120 deg\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("analysis.bin_width = 3 ns\n"), ConfigError);
}

TEST_CASE("defaults describe the reference apparatus") {
    const auto c = parse_config("");
    const auto b = c.budget();
    CHECK(b.eta_s == doctest::Approx(0.176).epsilon(0.01));
    CHECK(b.eta_i == doctest::Approx(0.223).epsilon(0.01));
    CHECK(b.eta_loss == doctest::Approx(0.225));
    CHECK(c.signal_detector.efficiency == 0.32);
    CHECK(c.idler_detector.efficiency == 0.10);
    CHECK(c.analysis.window == Time{400'000});
    CHECK(c.memory.comb.storage_time() == Time{2'000'000});
}

TEST_CASE("storage time overrides the comb spacing") {
    const auto c = parse_config("memory.storage_time = 4 us\n");
    CHECK(c.memory.storage_time() == Time{4'000'000});
    CHECK(c.memory.comb.delta_khz == doctest::Approx(250.0));
}

}  // TEST_SUITE

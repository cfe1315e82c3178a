#include <doctest.h>

#include <cmath>

#include "afcsim/afc_memory.hpp"

using namespace afcsim;

namespace {

PhotonEvent signal_photon(int cluster, int mode, Time t, Origin origin = Origin::pair) {
    PhotonEvent ev;
    ev.arm = Arm::signal;
    ev.time = t;
    ev.mode = SpectralMode{cluster, mode, 1};
    ev.origin = origin;
    return ev;
}

/// Independent evaluation of d~^2 exp(-7/F^2) exp(-d~) exp(-d0).
double oracle_efficiency(double gamma, double delta, double d, double d0) {
    const double f = delta / gamma;
    const double dt = d / f;
    return dt * dt * std::exp(-7.0 / (f * f)) * std::exp(-dt) * std::exp(-d0);
}

}  // namespace

TEST_SUITE("afc_memory") {

TEST_CASE("analytic efficiency matches the closed form") {
    CombParams c;
    CHECK(afc_efficiency_analytic(c) == doctest::Approx(oracle_efficiency(76.0, 488.0, 4.9, 0.56)));
    CHECK(afc_efficiency_analytic(c) == doctest::Approx(0.131).epsilon(0.01));
    c.delta_khz = 250.0;
    c.gamma_khz = 250.0 / 6.42;
    CHECK(afc_efficiency_analytic(c) == doctest::Approx(oracle_efficiency(c.gamma_khz, 250.0, 4.9, 0.56)));
}

TEST_CASE("storage time is the inverse comb spacing") {
    CombParams c;
    c.delta_khz = 500.0;
    CHECK(c.storage_time() == Time{2'000'000});
    const auto d = comb_for_storage_time(c, Time{4'000'000}, 8.0);
    CHECK(d.delta_khz == doctest::Approx(250.0));
    CHECK(d.finesse() == doctest::Approx(8.0));
    CHECK(comb_for_storage_time(c, Time{4'000'000}).gamma_khz == c.gamma_khz);
}

TEST_CASE("numeric efficiency tracks the analytic form for Gaussian peaks") {
    CombParams c;
    for (double f : {4.0, 6.42, 10.0, 15.0}) {
        c.gamma_khz = c.delta_khz / f;
        const auto profile = comb_profile(c, c.gamma_khz / 40.0);
        const double ratio = afc_efficiency_numeric(profile, c.storage_time()) / afc_efficiency_analytic(c);
        CHECK(ratio == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("dephasing factor lies in [0, 1] and peaks at the echo") {
    CombParams c;
    const auto profile = comb_profile(c, c.gamma_khz / 40.0);
    const double at_echo = dephasing_factor(profile, c.storage_time());
    CHECK(at_echo > 0.0);
    CHECK(at_echo <= 1.0 + 1e-9);
    CHECK(dephasing_factor(profile, c.storage_time() + Time{300'000}) < at_echo);
}

TEST_CASE("too coarse a profile grid is rejected") {
    CombParams c;
    CHECK_THROWS_AS(comb_profile(c, c.gamma_khz / 5.0), ConfigError);
}

TEST_CASE("comb parameter validation") {
    CombParams c;
    c.delta_khz = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = CombParams{};
    c.gamma_khz = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    MemoryConfig m;
    m.mode = MemoryMode::afc;
    m.eta_afc = 0.9;
    m.afc_transmission = 0.2;
    CHECK_THROWS_AS(m.validate(), ConfigError);
}

TEST_CASE("spectral classes") {
    MemoryConfig m;
    CHECK(classify(signal_photon(0, 1, Time{0}), m) == SpectralClass::pit_resonant);
    CHECK(classify(signal_photon(0, 2, Time{0}), m) == SpectralClass::line_resonant);
    CHECK(classify(signal_photon(1, 1, Time{0}), m) == SpectralClass::off_line);
    CHECK(classify(signal_photon(0, 1, Time{0}, Origin::broadband_noise), m) == SpectralClass::off_line);
}

TEST_CASE("storage fractions follow the configured probabilities") {
    MemoryConfig m;
    m.mode = MemoryMode::afc;
    RandomStream rng(37, "memory");
    const int n = 200'000;
    int echoed = 0;
    int transmitted = 0;
    for (int i = 0; i < n; ++i) {
        const auto out = storage_transform(signal_photon(0, 1, Time{1'000}), m, rng);
        if (out.disposition == Disposition::echoed) {
            ++echoed;
            CHECK(out.exit_time == Time{1'000} + m.storage_time());
        } else if (out.disposition == Disposition::transmitted) {
            ++transmitted;
            CHECK(out.exit_time == Time{1'000});
        }
    }
    const double eta = m.echo_efficiency();
    const double t = m.direct_transmission();
    CHECK(std::abs(echoed - n * eta) < 5.0 * std::sqrt(n * eta * (1 - eta)));
    CHECK(std::abs(transmitted - n * t) < 5.0 * std::sqrt(n * t * (1 - t)));

    SUBCASE("off-line light always passes unchanged") {
        for (int i = 0; i < 1000; ++i) {
            const auto out = storage_transform(signal_photon(1, 0, Time{5}), m, rng);
            CHECK(out.disposition == Disposition::transmitted);
            CHECK(out.exit_time == Time{5});
        }
    }
    SUBCASE("non-resonant main-cluster light sees the full optical depth") {
        int passed = 0;
        for (int i = 0; i < n; ++i)
            passed += storage_transform(signal_photon(0, 3, Time{0}), m, rng).disposition == Disposition::transmitted;
        const double p = std::exp(-m.comb.full_od);
        CHECK(std::abs(passed - n * p) < 5.0 * std::sqrt(n * p));
    }
}

TEST_CASE("storage consumes exactly one draw") {
    MemoryConfig m;
    m.mode = MemoryMode::afc;
    RandomStream a(41, "memory");
    RandomStream b(41, "memory");
    storage_transform(signal_photon(0, 1, Time{0}), m, a);
    storage_transform(signal_photon(1, 1, Time{0}, Origin::broadband_noise), m, a);
    b.uniform();
    b.uniform();
    CHECK(a.uniform() == b.uniform());
}

TEST_CASE("efficiency versus storage time at fixed and scaled finesse") {
    CombFamily fixed{CombParams{}, {}};
    const std::vector<Time> taus{Time{1'000'000}, Time{2'000'000}, Time{4'000'000}};
    const auto rows = efficiency_vs_storage_time(fixed, taus);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
        CHECK(r.delta_khz == doctest::Approx(1e9 / static_cast<double>(r.tau.count())));
        CHECK(r.numeric == doctest::Approx(r.analytic).epsilon(0.05));
    }
    CombFamily bad{CombParams{}, {6.0}};
    CHECK_THROWS_AS(efficiency_vs_storage_time(bad, taus), ConfigError);
}

TEST_CASE("comb geometry") {
    CombParams c;
    c.delta_khz = 500.0;
    c.total_width_mhz = 3.5;
    CHECK(c.peak_count() == 7);
    CHECK(comb_for_storage_time(c, Time{4'500'000}).delta_khz == doctest::Approx(222.2).epsilon(1e-3));
}

TEST_CASE("anti-phase readout and the narrow-peak limit") {
    CombParams c;
    const auto profile = comb_profile(c, c.gamma_khz / 40.0);
    const double on = afc_efficiency_numeric(profile, c.storage_time());
    CHECK(afc_efficiency_numeric(profile, c.storage_time() / 2) < 0.05 * on);

    CombParams narrow = c;
    narrow.gamma_khz = 2.0;
    const auto fine = comb_profile(narrow, narrow.gamma_khz / 40.0);
    CHECK(dephasing_factor(fine, narrow.storage_time()) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("dephasing factor at F = 6.42 is near 0.844") {
    CombParams c;
    c.gamma_khz = c.delta_khz / 6.42;
    const auto profile = comb_profile(c, c.gamma_khz / 40.0);
    CHECK(dephasing_factor(profile, c.storage_time()) == doctest::Approx(std::exp(-7.0 / (6.42 * 6.42))).epsilon(0.02));
    CHECK(std::exp(-7.0 / (6.42 * 6.42)) == doctest::Approx(0.844).epsilon(0.001));
}

TEST_CASE("numeric and analytic agree over depth and background") {
    for (double f : {3.0, 6.0, 12.0, 20.0})
        for (double d : {0.5, 2.0, 4.9, 8.0})
            for (double d0 : {0.0, 0.56, 1.0}) {
                CombParams c;
                c.gamma_khz = c.delta_khz / f;
                c.depth = d;
                c.background = d0;
                const auto profile = comb_profile(c, c.gamma_khz / 40.0);
                CHECK(afc_efficiency_numeric(profile, c.storage_time()) ==
                      doctest::Approx(afc_efficiency_analytic(c)).epsilon(0.05));
            }
}

TEST_CASE("at fixed peak width the efficiency peaks at intermediate storage time") {
    // d~ = d/F falls with F while exp(-7/F^2) rises, so eta(tau) first grows
    // and then decays once the finesse drops toward a few.
    CombFamily fixed{CombParams{}, {}};
    std::vector<Time> taus;
    for (int us = 1; us <= 10; ++us) taus.push_back(Time{us * 1'000'000});
    const auto rows = efficiency_vs_storage_time(fixed, taus);
    const auto best = std::max_element(rows.begin(), rows.end(),
                                       [](const auto& a, const auto& b) { return a.analytic < b.analytic; });
    CHECK(best != rows.begin());
    CHECK(best != rows.end() - 1);
    for (auto it = best; it + 1 != rows.end(); ++it) CHECK((it + 1)->analytic < it->analytic);
}

TEST_CASE("memory mode examples") {
    MemoryConfig m;
    m.mode = MemoryMode::afc;
    m.eta_afc = 0.072;
    m.comb.delta_khz = 500.0;
    RandomStream rng(107, "memory");
    const int n = 100'000;
    int echoed = 0;
    for (int i = 0; i < n; ++i) {
        const auto out = storage_transform(signal_photon(0, 1, Time{0}), m, rng);
        if (out.disposition == Disposition::echoed) {
            ++echoed;
            CHECK(out.exit_time == Time{2'000'000});
        }
    }
    CHECK(std::abs(echoed - n * 0.072) < 5.0 * std::sqrt(n * 0.072 * 0.928));

    MemoryConfig pit;
    pit.mode = MemoryMode::transparency;
    for (int i = 0; i < 100; ++i)
        CHECK(storage_transform(signal_photon(0, 1, Time{0}), pit, rng).disposition == Disposition::transmitted);
    CHECK(std::exp(-pit.comb.full_od) == doctest::Approx(0.001).epsilon(0.01));
}

}  // TEST_SUITE

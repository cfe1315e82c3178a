#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "afcsim/analysis.hpp"

using namespace afcsim;

namespace {

std::vector<Time> poisson_stream(double rate_hz, double seconds, RandomStream& rng) {
    std::vector<Time> out;
    double t = 0.0;
    const double end = seconds * 1e12;
    while (true) {
        t += rng.exponential(1e12 / rate_hz);
        if (t >= end) break;
        out.push_back(Time{static_cast<std::int64_t>(t)});
    }
    return out;
}

/// Quadratic reference histogram.
std::vector<std::uint64_t> brute_force(std::span<const Time> starts, std::span<const Time> stops,
                                       const HistogramBinning& b) {
    std::vector<std::uint64_t> counts(b.bin_count(), 0);
    for (Time s : starts)
        for (Time t : stops) {
            const Time d = t - s;
            if (d < b.min_delay || d >= b.max_delay) continue;
            counts[static_cast<std::size_t>((d - b.min_delay).count() / b.bin_width.count())] += 1;
        }
    return counts;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("histogram matches a brute-force count") {
    RandomStream rng(59, "hist");
    const auto starts = poisson_stream(2e4, 0.05, rng);
    const auto stops = poisson_stream(5e4, 0.05, rng);
    const HistogramBinning b{Time{5'000}, Time{-1'002'500}, Time{1'997'500}};
    const auto hist = cross_correlation_histogram(starts, stops, b);
    CHECK(hist.counts == brute_force(starts, stops, b));
    CHECK(hist.n_start == starts.size());
    CHECK(hist.n_stop == stops.size());
}

TEST_CASE("histograms over disjoint starts merge by addition") {
    RandomStream rng(61, "merge");
    const auto starts = poisson_stream(1e4, 0.2, rng);
    const auto stops = poisson_stream(1e4, 0.2, rng);
    const HistogramBinning b;
    std::vector<Time> even;
    std::vector<Time> odd;
    for (std::size_t i = 0; i < starts.size(); ++i) (i % 2 ? odd : even).push_back(starts[i]);
    auto merged = cross_correlation_histogram(even, stops, b);
    merged.merge(cross_correlation_histogram(odd, stops, b));
    const auto whole = cross_correlation_histogram(starts, stops, b);
    CHECK(merged.counts == whole.counts);
    CHECK(merged.n_start == whole.n_start);
    CHECK_THROWS(merged.merge(CorrelationHistogram(HistogramBinning{Time{10'000}, Time{-10'005'000}, Time{14'995'000}})));
}

TEST_CASE("binning validation") {
    CHECK(HistogramBinning{}.bin_count() == 5000u);
    CHECK_THROWS_AS((HistogramBinning{Time{3'000}, Time{-10'002'500}, Time{14'997'500}}.validate()), ConfigError);
    CHECK_THROWS_AS((HistogramBinning{Time{0}, Time{0}, Time{10}}.validate()), ConfigError);
}

TEST_CASE("g2 of a synthetic histogram") {
    CorrelationHistogram h(HistogramBinning{Time{5'000}, Time{-102'500}, Time{102'500}});
    std::fill(h.counts.begin(), h.counts.end(), 10);
    const std::size_t zero = h.counts.size() / 2;
    h.counts[zero] = 110;
    const std::array<DelayRange, 1> noise{DelayRange{Time{-100'000}, Time{-50'000}}};
    const auto r = g2_windowed(h, Time{5'000}, Time{0}, noise);
    CHECK(r.window_bins == 1u);
    CHECK(r.noise_bins == 10u);
    CHECK(r.accidentals == doctest::Approx(10.0));
    CHECK(r.g2 == doctest::Approx(11.0));
    CHECK(r.sigma_g2 == doctest::Approx(11.0 * std::sqrt(1.0 / 110 + 1.0 / 100)));

    h.counts[zero] = 0;
    const auto empty = g2_windowed(h, Time{5'000}, Time{0}, noise);
    CHECK(empty.g2 == 0.0);
    CHECK(empty.sigma_g2 == doctest::Approx(0.1));

    const std::array<DelayRange, 1> nowhere{DelayRange{Time{500'000}, Time{600'000}}};
    CHECK_THROWS_AS(g2_windowed(h, Time{5'000}, Time{0}, nowhere), AnalysisError);
}

TEST_CASE("independent Poisson streams give g2 consistent with one") {
    const int runs = 120;
    double sum = 0.0;
    double sum2 = 0.0;
    const std::array<DelayRange, 1> noise{DelayRange{Time{-5'000'000}, Time{-1'000'000}}};
    for (int k = 0; k < runs; ++k) {
        RandomStream rng(67, "independent", static_cast<std::uint64_t>(k));
        const auto a = poisson_stream(2000.0, 1.0, rng);
        const auto b = poisson_stream(2000.0, 1.0, rng);
        const auto h = cross_correlation_histogram(a, b, HistogramBinning{}, 1.0);
        const double g = g2_windowed(h, Time{400'000}, Time{0}, noise).g2;
        sum += g;
        sum2 += g * g;
    }
    const double mean = sum / runs;
    const double sd = std::sqrt(sum2 / runs - mean * mean);
    CHECK(std::abs(mean - 1.0) < 3.0 * sd / std::sqrt(runs));
}

TEST_CASE("autocorrelation of a Poisson stream is flat") {
    RandomStream rng(71, "auto");
    const auto s = poisson_stream(5e4, 2.0, rng);
    RandomStream split(71, "split");
    AutoCorrelationOptions opt;
    opt.acquisition_s = 2.0;
    const auto r = autocorrelation_g2(s, split, opt);
    CHECK(std::abs(r.g2 - 1.0) < 4.0 * r.sigma_g2);
}

TEST_CASE("Cauchy-Schwarz parameter") {
    CHECK(cauchy_schwarz_R(2.0, 2.0, 2.0) == doctest::Approx(1.0));
    CHECK(cauchy_schwarz_R(1.0, 1.0, 1.0) == doctest::Approx(1.0));
    CHECK(cauchy_schwarz_R(8.7, 1.14, 1.07) == doctest::Approx(62.05).epsilon(0.001));
    CHECK_THROWS_AS(cauchy_schwarz_R(2.0, 0.0, 1.0), AnalysisError);
}

TEST_CASE("efficiency budget") {
    const EfficiencyBudget b{0.18, 0.22, 0.225, 0.32, 0.10, 1.0};
    CHECK(generated_rate(0.83, b) == doctest::Approx(0.83 / (0.18 * 0.22 * 0.225 * 0.32 * 0.10)));
    const auto h = heralding_efficiency(1e-4, 1e-3, b, 0.0, Time{400'000});
    CHECK(h.raw == doctest::Approx(1e-4 / (1e-3 * 0.32 * 0.225)));
    CHECK(h.dark_corrected == doctest::Approx(h.raw));
    const auto hd = heralding_efficiency(1e-4, 1e-3, b, 400.0, Time{400'000});
    CHECK(hd.dark_corrected > hd.raw);
}

TEST_CASE("autocorrelation theory") {
    const auto g = g2_auto_theory(BackgroundBudget::from_ratios(0.0, 0.0, Time{265'000}), Time{1});
    CHECK(g.at_zero == doctest::Approx(2.0));
    CHECK(g.windowed == doctest::Approx(2.0).epsilon(1e-4));
    const auto h = g2_auto_theory(BackgroundBudget::from_ratios(0.85, 0.98, Time{265'000}), Time{400'000});
    CHECK(h.at_zero == doctest::Approx(1.0 + 1.0 / (1.85 * 1.98)));
    CHECK(h.windowed < h.at_zero);
    CHECK(h.windowed > 1.0);
}

TEST_CASE("visibility and predicted input g2 are monotone") {
    double last = -1.0;
    for (double g = 1.0; g < 200.0; g *= 1.3) {
        const double v = visibility_from_g2(g);
        CHECK(v > last);
        CHECK(v < 1.0);
        last = v;
    }
    CHECK(visibility_from_g2(1.0) == 0.0);
    double prev = 1e300;
    for (double r = 0.0; r < 0.5; r += 0.01) {
        const double p = g2_input_prediction(17.4, r);
        CHECK(p < prev);
        prev = p;
    }
    CHECK(g2_input_prediction(17.4, 0.0) == doctest::Approx(17.4));
}

TEST_CASE("dichroism fit recovers a noise-free scan") {
    const DichroismModel m;
    std::vector<DichroismSample> scan;
    for (int th = 0; th <= 90; th += 10) scan.push_back({double(th), 500.0 + 1e4 * std::exp(-m.optical_depth(th))});
    const auto fit = dichroism_fit(scan, m);
    CHECK(fit.p_nr == doctest::Approx(500.0));
    CHECK(fit.p_r == doctest::Approx(1e4));
    CHECK(fit.ratio == doctest::Approx(0.05));
    CHECK(fit.visibility == doctest::Approx(visibility_from_ratio(0.05, m)));
    CHECK(ratio_from_visibility(visibility_from_ratio(0.05, m), m) == doctest::Approx(0.05));

    const std::vector<DichroismSample> flat{{30.0, 1.0}, {30.0, 2.0}};
    CHECK_THROWS_AS(dichroism_fit(flat, m), AnalysisError);
}

TEST_CASE("Spearman rank correlation") {
    const std::vector<double> x{1, 2, 3, 4, 5, 6};
    const std::vector<double> down{9, 7, 6, 4, 2, 1};
    const auto s = spearman(x, down);
    CHECK(s.rho == doctest::Approx(-1.0));
    CHECK(s.p_decreasing == doctest::Approx(1.0 / 720.0));
    CHECK(s.p_increasing == doctest::Approx(1.0));
    const auto u = spearman(x, x);
    CHECK(u.rho == doctest::Approx(1.0));
    const std::vector<double> tied{1, 1, 2, 2, 3, 3};
    const auto t = spearman(x, tied);
    CHECK(t.rho > 0.9);
    CHECK(t.p_increasing < 0.05);
}

TEST_CASE("single coincidence at zero delay") {
    const std::vector<Time> starts{Time{100'000}};
    const std::vector<Time> stops{Time{100'000}};
    const auto h = cross_correlation_histogram(starts, stops, HistogramBinning{});
    CHECK(h.total() == 1u);
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        if (h.counts[i]) CHECK((h.binning.bin_start(i) <= Time{0} && Time{0} < h.binning.bin_start(i) + h.binning.bin_width));
}

TEST_CASE("accidental level of independent streams") {
    RandomStream rng(127, "acc");
    const double r1 = 5000.0;
    const double r2 = 8000.0;
    const double t = 5.0;
    const auto a = poisson_stream(r1, t, rng);
    const auto b = poisson_stream(r2, t, rng);
    const auto h = cross_correlation_histogram(a, b, HistogramBinning{}, t);
    const double expected = r1 * r2 * t * 5e-9;
    const double mean = static_cast<double>(h.total()) / static_cast<double>(h.counts.size());
    CHECK(std::abs(mean - expected) < 5.0 * std::sqrt(expected / static_cast<double>(h.counts.size())));
}

TEST_CASE("visibility and ratio conversions") {
    const DichroismModel m;
    CHECK(ratio_from_visibility(0.90, m) == doctest::Approx(0.013).epsilon(0.05));
    CHECK(ratio_from_visibility(0.70, m) == doctest::Approx(0.052).epsilon(0.05));
    CHECK(visibility_from_ratio(0.0, m) ==
          doctest::Approx((std::exp(-1.4) - std::exp(-6.9)) / (std::exp(-1.4) + std::exp(-6.9))));
    CHECK(visibility_from_ratio(0.0, m) == doctest::Approx(0.992).epsilon(0.001));
    CHECK(visibility_from_g2(2.0) == doctest::Approx(1.0 / 3.0));
}

}  // TEST_SUITE

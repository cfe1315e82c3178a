#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "afcsim/optical_chain.hpp"
#include "afcsim/random.hpp"
#include "afcsim/types.hpp"

namespace afcsim {

/// Delay bins [min + i*w, min + (i+1)*w). Choosing min = -w/2 (mod w) centers
/// a bin on zero delay.
struct HistogramBinning {
    Time bin_width{5'000};
    Time min_delay{-10'002'500};
    Time max_delay{14'997'500};

    std::size_t bin_count() const;
    Time bin_start(std::size_t i) const { return min_delay + bin_width * static_cast<std::int64_t>(i); }
    Time bin_center(std::size_t i) const { return bin_start(i) + bin_width / 2; }
    /// Throws ConfigError unless the bin width is positive and divides the range.
    void validate() const;

    friend bool operator==(const HistogramBinning&, const HistogramBinning&) = default;
};

/// Start-stop delay histogram. Accumulators over disjoint sets of starts (or
/// over runs separated by more than the delay range) merge by addition.
struct CorrelationHistogram {
    HistogramBinning binning;
    std::vector<std::uint64_t> counts;
    std::uint64_t n_start = 0;
    std::uint64_t n_stop = 0;
    double acquisition_s = 0.0;

    explicit CorrelationHistogram(HistogramBinning b = {});

    /// Adds every (stop - start) delay falling inside the binning range. Stops
    /// must be sorted.
    void accumulate(std::span<const Time> starts, std::span<const Time> stops);
    void merge(const CorrelationHistogram& other);
    std::uint64_t total() const;
};

CorrelationHistogram cross_correlation_histogram(std::span<const Time> starts, std::span<const Time> stops,
                                                 const HistogramBinning& binning, double acquisition_s = 0.0);

/// bin_start_ns,counts
void write_histogram_csv(const CorrelationHistogram& hist, std::ostream& out);

/// Delay range [lo, hi), matched against bin centers.
struct DelayRange {
    Time lo{0};
    Time hi{0};
};

/// Normalized cross-correlation in one delay window, from raw counts.
///
/// p_si and p_i are per trial window of width `window` over the acquisition
/// time; p_s is the accidental probability per start, read off the far-delay
/// noise ranges. g2 = p_si / (p_s p_i) then reduces to coincidences over the
/// accidental level scaled to the window width.
struct CorrelationResult {
    double p_s = 0.0;
    double p_i = 0.0;
    double p_si = 0.0;
    double g2 = 0.0;
    double sigma_g2 = 0.0;
    Time window{0};
    Time center{0};
    std::uint64_t coincidences = 0;
    std::uint64_t noise_counts = 0;
    double accidentals = 0.0;  // expected accidental coincidences inside the window
    std::size_t window_bins = 0;
    std::size_t noise_bins = 0;
};

/// Throws AnalysisError when the window or the noise ranges cover no bin, or
/// when the noise ranges hold no counts.
CorrelationResult g2_windowed(const CorrelationHistogram& hist, Time window, Time center,
                              std::span<const DelayRange> noise);

/// Sum of counts in bins whose centers fall inside the range.
std::uint64_t counts_in(const CorrelationHistogram& hist, DelayRange range, std::size_t* bins = nullptr);

struct AutoCorrelationOptions {
    HistogramBinning binning{Time{5'000}, Time{-10'002'500}, Time{10'002'500}};
    Time window{400'000};
    std::vector<DelayRange> noise{{Time{-10'000'000}, Time{-2'000'000}}, {Time{2'000'000}, Time{10'000'000}}};
    double acquisition_s = 0.0;
};

/// Virtual 50/50 beam splitter: each click goes to one of two halves with
/// equal probability, and the halves are cross-correlated around zero delay.
CorrelationResult autocorrelation_g2(std::span<const Time> stream, RandomStream& splitter,
                                     const AutoCorrelationOptions& options = {});

/// R = g2_si^2 / (g2_ss g2_ii). Throws AnalysisError on a non-positive denominator.
double cauchy_schwarz_R(double g2_si, double g2_ss, double g2_ii);

/// Transmissions and detector efficiencies along both arms.
struct EfficiencyBudget {
    double eta_s = 1.0;     // source cavity to cryostat
    double eta_i = 1.0;     // source cavity to idler detector
    double eta_loss = 1.0;  // cryostat to signal detector, memory duty included
    double eta_ds = 1.0;
    double eta_di = 1.0;
    double source_duty = 1.0;

    void validate() const;
};

struct HeraldingEfficiency {
    double raw = 0.0;
    double dark_corrected = 0.0;
};

/// eta_H = p_si / (p_i eta_ds eta_loss), before the cryostat. The corrected
/// value removes idler dark clicks (dark_rate * window per trial) from p_i.
HeraldingEfficiency heralding_efficiency(double p_si, double p_i, const EfficiencyBudget& budget,
                                         double idler_dark_rate, Time window);

/// Back-propagates a detected coincidence rate to the source cavity output.
double generated_rate(double detected_rate, const EfficiencyBudget& budget);

/// Singles split into correlated (S) and background (B) rates at the two
/// detectors of a Hanbury Brown-Twiss pair.
struct BackgroundBudget {
    double s_a = 1.0;
    double b_a = 0.0;
    double s_b = 1.0;
    double b_b = 0.0;
    Time t_c{265'000};

    static BackgroundBudget from_ratios(double b_over_s_a, double b_over_s_b, Time t_c) {
        return {1.0, b_over_s_a, 1.0, b_over_s_b, t_c};
    }
};

enum class WindowAveraging {
    excess,   // (g(0) - 1) * f + 1
    printed,  // g(0) * f + 1
};

struct AutoCorrelationTheory {
    double at_zero = 0.0;
    double windowed = 0.0;
};

/// g(0) = 1 + S_A S_B / (N_A N_B); the windowed value averages a symmetric
/// exponential of decay t_c over the window: f = (2 t_c / W)(1 - exp(-W / 2 t_c)).
AutoCorrelationTheory g2_auto_theory(const BackgroundBudget& budget, Time window,
                                     WindowAveraging averaging = WindowAveraging::excess);

/// V = (g2 - 1) / (g2 + 1).
double visibility_from_g2(double g2_si);

struct DichroismSample {
    double theta_deg = 0.0;
    double counts = 0.0;
};

struct DichroismFit {
    double p_nr = 0.0;
    double p_r = 0.0;
    double visibility = 0.0;
    double ratio = 0.0;  // r = P_nr / P_r
};

/// Least-squares fit of P(theta) = P_nr + P_r exp(-OD(theta)), which is linear
/// in (P_nr, P_r). The visibility compares the fitted model at the two optical
/// depth extremes. Throws AnalysisError when the scan has no optical-depth
/// contrast or the fit leaves no resonant component.
DichroismFit dichroism_fit(std::span<const DichroismSample> scan, const DichroismModel& model);

double visibility_from_ratio(double ratio, const DichroismModel& model);
double ratio_from_visibility(double visibility, const DichroismModel& model);

/// Input g2 expected from the echo g2 (noise-free) and the non-resonant ratio r.
double g2_input_prediction(double g2_echo, double ratio);

struct SpearmanResult {
    double rho = 0.0;
    double p_decreasing = 1.0;  // one-sided P(rho' <= rho) under independence
    double p_increasing = 1.0;
};

/// Rank correlation with a one-sided permutation p-value (exact enumeration
/// up to ten points, t approximation beyond).
SpearmanResult spearman(std::span<const double> x, std::span<const double> y);

}  // namespace afcsim

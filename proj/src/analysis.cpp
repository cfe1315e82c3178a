#include "afcsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace afcsim {

std::size_t HistogramBinning::bin_count() const {
    return static_cast<std::size_t>((max_delay - min_delay) / bin_width);
}

void HistogramBinning::validate() const {
    require(bin_width.count() > 0, "histogram bin width must be positive");
    require(max_delay > min_delay, "histogram range must be non-empty");
    require((max_delay - min_delay).count() % bin_width.count() == 0, "histogram bin width must divide the range");
}

CorrelationHistogram::CorrelationHistogram(HistogramBinning b) : binning(b) {
    binning.validate();
    counts.assign(binning.bin_count(), 0);
}

void CorrelationHistogram::accumulate(std::span<const Time> starts, std::span<const Time> stops) {
    const auto w = binning.bin_width.count();
    for (Time s : starts) {
        auto it = std::lower_bound(stops.begin(), stops.end(), s + binning.min_delay);
        const Time upper = s + binning.max_delay;
        for (; it != stops.end() && *it < upper; ++it) {
            const auto offset = (*it - s - binning.min_delay).count();
            ++counts[static_cast<std::size_t>(offset / w)];
        }
    }
    n_start += starts.size();
    n_stop += stops.size();
}

void CorrelationHistogram::merge(const CorrelationHistogram& other) {
    if (!(binning == other.binning)) throw AnalysisError("cannot merge histograms with different binning");
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    n_start += other.n_start;
    n_stop += other.n_stop;
    acquisition_s += other.acquisition_s;
}

std::uint64_t CorrelationHistogram::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

CorrelationHistogram cross_correlation_histogram(std::span<const Time> starts, std::span<const Time> stops,
                                                 const HistogramBinning& binning, double acquisition_s) {
    CorrelationHistogram hist(binning);
    hist.accumulate(starts, stops);
    hist.acquisition_s = acquisition_s;
    return hist;
}

void write_histogram_csv(const CorrelationHistogram& hist, std::ostream& out) {
    out << "bin_start_ns,counts\n";
    for (std::size_t i = 0; i < hist.counts.size(); ++i)
        out << to_ns(hist.binning.bin_start(i)) << ',' << hist.counts[i] << '\n';
}

std::uint64_t counts_in(const CorrelationHistogram& hist, DelayRange range, std::size_t* bins) {
    std::uint64_t sum = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        const Time c = hist.binning.bin_center(i);
        if (c >= range.lo && c < range.hi) {
            sum += hist.counts[i];
            ++n;
        }
    }
    if (bins) *bins += n;
    return sum;
}

CorrelationResult g2_windowed(const CorrelationHistogram& hist, Time window, Time center,
                              std::span<const DelayRange> noise) {
    CorrelationResult r;
    r.window = window;
    r.center = center;
    r.coincidences = counts_in(hist, {center - window / 2, center + window / 2}, &r.window_bins);
    if (r.window_bins == 0) throw AnalysisError("coincidence window covers no histogram bin");
    for (const auto& range : noise) r.noise_counts += counts_in(hist, range, &r.noise_bins);
    if (r.noise_bins == 0) throw AnalysisError("empty noise window");
    if (r.noise_counts == 0) throw AnalysisError("noise window holds no counts");

    const auto nc = static_cast<double>(r.coincidences);
    const auto nn = static_cast<double>(r.noise_counts);
    r.accidentals = nn * static_cast<double>(r.window_bins) / static_cast<double>(r.noise_bins);
    r.g2 = nc / r.accidentals;
    // An empty window reports the uncertainty of a single count.
    r.sigma_g2 = nc > 0 ? r.g2 * std::sqrt(1.0 / nc + 1.0 / nn) : 1.0 / r.accidentals;

    const double window_s = to_seconds(hist.binning.bin_width) * static_cast<double>(r.window_bins);
    const double trials = hist.acquisition_s > 0.0 ? hist.acquisition_s / window_s : 0.0;
    if (trials > 0.0) {
        r.p_i = static_cast<double>(hist.n_start) / trials;
        r.p_si = nc / trials;
    }
    if (hist.n_start > 0) r.p_s = r.accidentals / static_cast<double>(hist.n_start);
    return r;
}

CorrelationResult autocorrelation_g2(std::span<const Time> stream, RandomStream& splitter,
                                     const AutoCorrelationOptions& options) {
    std::vector<Time> a;
    std::vector<Time> b;
    a.reserve(stream.size() / 2 + 1);
    b.reserve(stream.size() / 2 + 1);
    for (Time t : stream) (splitter.bernoulli(0.5) ? a : b).push_back(t);
    const auto hist = cross_correlation_histogram(a, b, options.binning, options.acquisition_s);
    return g2_windowed(hist, options.window, Time{0}, options.noise);
}

double cauchy_schwarz_R(double g2_si, double g2_ss, double g2_ii) {
    const double denominator = g2_ss * g2_ii;
    if (!(denominator > 0.0)) throw AnalysisError("auto-correlations must be positive");
    return g2_si * g2_si / denominator;
}

void EfficiencyBudget::validate() const {
    for (double v : {eta_s, eta_i, eta_loss, eta_ds, eta_di, source_duty}) {
        if (!(v > 0.0 && v <= 1.0)) throw AnalysisError("efficiency budget factors must lie in (0, 1]");
    }
}

HeraldingEfficiency heralding_efficiency(double p_si, double p_i, const EfficiencyBudget& budget,
                                         double idler_dark_rate, Time window) {
    budget.validate();
    if (!(p_i > 0.0)) throw AnalysisError("p_i must be positive");
    const double scale = budget.eta_ds * budget.eta_loss;
    const double corrected_p_i = p_i - idler_dark_rate * to_seconds(window);
    if (!(corrected_p_i > 0.0)) throw AnalysisError("dark-count correction leaves no heralds");
    return {p_si / (p_i * scale), p_si / (corrected_p_i * scale)};
}

double generated_rate(double detected_rate, const EfficiencyBudget& budget) {
    budget.validate();
    return detected_rate / (budget.eta_i * budget.eta_di * budget.eta_s * budget.eta_loss * budget.eta_ds);
}

AutoCorrelationTheory g2_auto_theory(const BackgroundBudget& budget, Time window, WindowAveraging averaging) {
    const double n_a = budget.s_a + budget.b_a;
    const double n_b = budget.s_b + budget.b_b;
    if (!(n_a > 0.0 && n_b > 0.0)) throw AnalysisError("count rates must be positive");
    AutoCorrelationTheory out;
    out.at_zero = 1.0 + budget.s_a * budget.s_b / (n_a * n_b);
    const double x = to_seconds(window) / (2.0 * to_seconds(budget.t_c));
    const double f = (1.0 - std::exp(-x)) / x;
    out.windowed = (averaging == WindowAveraging::excess ? out.at_zero - 1.0 : out.at_zero) * f + 1.0;
    return out;
}

double visibility_from_g2(double g2_si) { return (g2_si - 1.0) / (g2_si + 1.0); }

namespace {

struct Extremes {
    double high;  // transmission at the weakly absorbing extreme
    double low;
};

Extremes extremes(const DichroismModel& model) {
    return {std::exp(-std::min(model.od_d1, model.od_d2)), std::exp(-std::max(model.od_d1, model.od_d2))};
}

}  // namespace

DichroismFit dichroism_fit(std::span<const DichroismSample> scan, const DichroismModel& model) {
    if (scan.size() < 2) throw AnalysisError("dichroism scan needs at least two angles");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& s : scan) {
        const double x = std::exp(-model.optical_depth(s.theta_deg));
        sx += x;
        sy += s.counts;
        sxx += x * x;
        sxy += x * s.counts;
    }
    const auto n = static_cast<double>(scan.size());
    const double det = n * sxx - sx * sx;
    if (!(det > 1e-12 * n * sxx)) throw AnalysisError("dichroism scan has no optical-depth contrast");

    DichroismFit fit;
    fit.p_r = (n * sxy - sx * sy) / det;
    fit.p_nr = (sy - fit.p_r * sx) / n;
    if (!(fit.p_r > 0.0)) throw AnalysisError("degenerate dichroism fit: no resonant component");
    const auto [hi, lo] = extremes(model);
    const double p_max = fit.p_nr + fit.p_r * hi;
    const double p_min = fit.p_nr + fit.p_r * lo;
    fit.visibility = (p_max - p_min) / (p_max + p_min);
    fit.ratio = fit.p_nr / fit.p_r;
    return fit;
}

double visibility_from_ratio(double ratio, const DichroismModel& model) {
    const auto [hi, lo] = extremes(model);
    return (hi - lo) / (2.0 * ratio + hi + lo);
}

double ratio_from_visibility(double visibility, const DichroismModel& model) {
    if (!(visibility > 0.0)) throw AnalysisError("visibility must be positive");
    const auto [hi, lo] = extremes(model);
    return ((hi - lo) - visibility * (hi + lo)) / (2.0 * visibility);
}

double g2_input_prediction(double g2_echo, double ratio) {
    return g2_echo * (1.0 + ratio) / (1.0 + ratio * g2_echo);
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
        i = j + 1;
    }
    return r;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    const auto n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3) throw AnalysisError("spearman needs at least three paired values");
    const auto rx = ranks(x);
    auto ry = ranks(y);
    SpearmanResult out;
    out.rho = pearson(rx, ry);

    std::uint64_t below = 0, above = 0, total = 0;
    const double tol = 1e-12;
    auto tally = [&](std::span<const double> perm) {
        const double rho = pearson(rx, perm);
        below += rho <= out.rho + tol;
        above += rho >= out.rho - tol;
        ++total;
    };
    if (x.size() <= 10) {
        std::vector<std::size_t> idx(ry.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::vector<double> perm(ry.size());
        do {
            for (std::size_t i = 0; i < idx.size(); ++i) perm[i] = ry[idx[i]];
            tally(perm);
        } while (std::next_permutation(idx.begin(), idx.end()));
    } else {
        RandomStream rng(0x5eed);
        for (int i = 0; i < 200'000; ++i) {
            std::shuffle(ry.begin(), ry.end(), rng.engine());
            tally(ry);
        }
    }
    out.p_decreasing = static_cast<double>(below) / static_cast<double>(total);
    out.p_increasing = static_cast<double>(above) / static_cast<double>(total);
    return out;
}

}  // namespace afcsim

#include "afcsim/afc_memory.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>

namespace afcsim {

Time CombParams::storage_time() const { return Time{std::llround(1e9 / delta_khz)}; }

int CombParams::peak_count() const {
    return std::max(1, static_cast<int>(std::lround(total_width_mhz * 1000.0 / delta_khz)));
}

void CombParams::validate() const {
    require(delta_khz > 0.0, "comb.delta must be positive (echo delay 1/delta is undefined otherwise)");
    require(gamma_khz > 0.0 && gamma_khz < delta_khz, "comb.gamma must lie in (0, delta)");
    require(depth >= 0.0, "comb.depth must be non-negative");
    require(background >= 0.0, "comb.background must be non-negative");
    require(total_width_mhz > 0.0, "comb.total_width must be positive");
    require(full_od >= 0.0, "comb.full_od must be non-negative");
}

double afc_efficiency_analytic(const CombParams& comb) {
    const double f = comb.finesse();
    const double dt = comb.effective_depth();
    return dt * dt * std::exp(-7.0 / (f * f)) * std::exp(-dt) * std::exp(-comb.background);
}

namespace {

double peak_shape(const CombParams& comb, double offset_khz) {
    if (comb.shape == PeakShape::square) return std::abs(offset_khz) < comb.gamma_khz / 2.0 ? 1.0 : 0.0;
    const double x = offset_khz / comb.gamma_khz;
    return std::exp(-4.0 * std::numbers::ln2 * x * x);
}

}  // namespace

CombProfile comb_profile(const CombParams& comb, double resolution_khz) {
    comb.validate();
    if (!(resolution_khz > 0.0) || resolution_khz > comb.gamma_khz / 20.0)
        throw ConfigError("comb profile resolution must give at least 20 samples per peak width");

    CombProfile profile;
    profile.comb = comb;
    profile.resolution_khz = resolution_khz;
    const double width_khz = comb.total_width_mhz * 1000.0;
    profile.start_khz = -width_khz / 2.0;
    const auto samples = static_cast<std::size_t>(std::llround(width_khz / resolution_khz));
    profile.optical_depth.assign(samples, comb.background);

    const int peaks = comb.peak_count();
    for (std::size_t i = 0; i < samples; ++i) {
        const double x = profile.detuning_khz(i);
        double sum = 0.0;
        for (int k = 0; k < peaks; ++k) {
            const double center = (k - (peaks - 1) / 2.0) * comb.delta_khz;
            sum += peak_shape(comb, x - center);
        }
        profile.optical_depth[i] += comb.depth * sum;
    }
    return profile;
}

void write_profile_csv(const CombProfile& profile, std::ostream& out) {
    out << "detuning_kHz,optical_depth\n";
    for (std::size_t i = 0; i < profile.optical_depth.size(); ++i)
        out << profile.detuning_khz(i) << ',' << profile.optical_depth[i] << '\n';
}

double dephasing_factor(const CombProfile& profile, Time tau) {
    double norm = 0.0;
    std::complex<double> amplitude{0.0, 0.0};
    // phase per kHz of detuning: 2 pi * 1e3 Hz * tau[s]
    const double omega = 2.0 * std::numbers::pi * 1e3 * static_cast<double>(tau.count()) * 1e-12;
    for (std::size_t i = 0; i < profile.optical_depth.size(); ++i) {
        const double population = profile.optical_depth[i] - profile.comb.background;
        norm += population;
        amplitude += population * std::polar(1.0, -omega * profile.detuning_khz(i));
    }
    if (!(norm > 0.0)) throw AnalysisError("comb profile has no population above the background");
    return std::norm(amplitude / norm);
}

double afc_efficiency_numeric(const CombProfile& profile, Time tau) {
    if (tau.count() <= 0) throw AnalysisError("storage time must be positive");
    const double dt = profile.comb.effective_depth();
    return dt * dt * std::exp(-dt) * std::exp(-profile.comb.background) * dephasing_factor(profile, tau);
}

CombParams comb_for_storage_time(const CombParams& base, Time tau, std::optional<double> finesse) {
    require(tau.count() > 0, "storage time must be positive");
    CombParams comb = base;
    comb.delta_khz = 1e9 / static_cast<double>(tau.count());
    if (finesse) comb.gamma_khz = comb.delta_khz / *finesse;
    comb.validate();
    return comb;
}

std::vector<StorageEfficiencyRow> efficiency_vs_storage_time(const CombFamily& family, std::span<const Time> taus) {
    require(family.finesse.empty() || family.finesse.size() == taus.size(),
            "comb family needs one finesse per storage time");
    std::vector<StorageEfficiencyRow> rows;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        const auto finesse = family.finesse.empty() ? std::nullopt : std::optional<double>(family.finesse[i]);
        const CombParams comb = comb_for_storage_time(family.base, taus[i], finesse);
        const CombProfile profile = comb_profile(comb, comb.gamma_khz / 40.0);
        rows.push_back({taus[i], comb.delta_khz, comb.finesse(), afc_efficiency_analytic(comb),
                        afc_efficiency_numeric(profile, taus[i])});
    }
    return rows;
}

double MemoryConfig::echo_efficiency() const { return eta_afc ? *eta_afc : afc_efficiency_analytic(comb); }

double MemoryConfig::direct_transmission() const {
    if (afc_transmission) return *afc_transmission;
    return std::exp(-(comb.effective_depth() + comb.background));
}

void MemoryConfig::validate() const {
    comb.validate();
    dichroism.validate();
    require_probability(pit_transmission, "memory.pit_transmission");
    require(inhomogeneous_width_ghz > 0.0, "memory.inhomogeneous_width must be positive");
    if (!(polarization_deg >= 0.0 && polarization_deg <= 90.0))
        throw ConfigError("memory.polarization must lie in [0, 90] degrees");
    if (mode == MemoryMode::afc) {
        require_probability(echo_efficiency(), "memory.eta_afc");
        require_probability(direct_transmission(), "memory.afc_transmission");
        require(echo_efficiency() + direct_transmission() <= 1.0 + 1e-12,
                "memory.eta_afc + memory.afc_transmission must not exceed 1");
    }
}

SpectralClass classify(const PhotonEvent& event, const MemoryConfig& memory) {
    if (event.origin == Origin::broadband_noise) return SpectralClass::off_line;
    if (event.mode.is_resonant()) return SpectralClass::pit_resonant;
    const double half_width_mhz = memory.inhomogeneous_width_ghz * 500.0;
    return std::abs(event.mode.detuning_mhz()) <= half_width_mhz ? SpectralClass::line_resonant
                                                                 : SpectralClass::off_line;
}

StorageOutcome storage_transform(const PhotonEvent& event, const MemoryConfig& memory, RandomStream& rng) {
    const double u = rng.uniform();
    const SpectralClass cls = classify(event, memory);
    auto pass_with = [&](double p) {
        return u < p ? StorageOutcome{Disposition::transmitted, event.time}
                     : StorageOutcome{Disposition::absorbed, event.time};
    };

    if (cls == SpectralClass::off_line) return pass_with(1.0);
    if (memory.mode == MemoryMode::bare_line)
        return pass_with(crystal_survival(memory.dichroism, memory.polarization_deg, true));
    if (cls == SpectralClass::line_resonant) return pass_with(std::exp(-memory.comb.full_od));
    if (memory.mode == MemoryMode::transparency) return pass_with(memory.pit_transmission);

    const double eta = memory.echo_efficiency();
    if (u < eta) return {Disposition::echoed, event.time + memory.storage_time()};
    if (u < eta + memory.direct_transmission()) return {Disposition::transmitted, event.time};
    return {Disposition::absorbed, event.time};
}

}  // namespace afcsim

#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "afcsim/optical_chain.hpp"
#include "afcsim/random.hpp"
#include "afcsim/types.hpp"

namespace afcsim {

enum class PeakShape { gaussian, square };

/// Atomic frequency comb: peaks of width gamma (FWHM, or full width for square
/// peaks) and optical depth `depth`, spaced by delta, over an absorbing
/// background, spanning total_width.
struct CombParams {
    double gamma_khz = 76.0;
    double delta_khz = 488.0;
    double depth = 4.9;
    double background = 0.56;
    double total_width_mhz = 3.5;
    PeakShape shape = PeakShape::gaussian;
    double full_od = 6.9;  // untailored line at the photon polarization

    double finesse() const { return delta_khz / gamma_khz; }
    double effective_depth() const { return depth / finesse(); }
    /// Echo delay 1/delta on the picosecond grid.
    Time storage_time() const;
    int peak_count() const;

    void validate() const;
};

/// d~^2 exp(-7/F^2) exp(-d~) exp(-d0), with F = delta/gamma and d~ = d/F.
double afc_efficiency_analytic(const CombParams& comb);

/// Absorption sampled on a uniform grid of midpoints spanning total_width.
struct CombProfile {
    CombParams comb;
    double resolution_khz = 0.0;
    double start_khz = 0.0;  // left edge of the grid
    std::vector<double> optical_depth;

    double detuning_khz(std::size_t i) const { return start_khz + (static_cast<double>(i) + 0.5) * resolution_khz; }
};

/// Throws ConfigError when the grid has fewer than 20 samples per peak width.
CombProfile comb_profile(const CombParams& comb, double resolution_khz);

/// Two-column CSV: detuning_kHz,optical_depth.
void write_profile_csv(const CombProfile& profile, std::ostream& out);

/// |FT of the normalized peak population at tau|^2. Throws AnalysisError when
/// the profile carries no population above the background.
double dephasing_factor(const CombProfile& profile, Time tau);

/// d~^2 exp(-d~) exp(-d0) times the numerically integrated dephasing factor.
double afc_efficiency_numeric(const CombProfile& profile, Time tau);

/// Comb with delta = 1/tau; gamma follows `finesse` when given, otherwise the
/// base gamma is kept.
CombParams comb_for_storage_time(const CombParams& base, Time tau, std::optional<double> finesse = std::nullopt);

struct CombFamily {
    CombParams base;
    std::vector<double> finesse;  // one per storage time, or empty for fixed gamma
};

struct StorageEfficiencyRow {
    Time tau{0};
    double delta_khz = 0.0;
    double finesse = 0.0;
    double analytic = 0.0;
    double numeric = 0.0;
};

std::vector<StorageEfficiencyRow> efficiency_vs_storage_time(const CombFamily& family, std::span<const Time> taus);

enum class MemoryMode {
    afc,           // comb prepared: resonant light is echoed after 1/delta
    transparency,  // empty pit only
    bare_line,     // nothing tailored: dichroic absorption at the configured polarization
};

struct MemoryConfig {
    MemoryMode mode = MemoryMode::transparency;
    CombParams comb;
    std::optional<double> eta_afc;           // defaults to the analytic efficiency
    std::optional<double> afc_transmission;  // defaults to exp(-(d~ + d0))
    double pit_transmission = 1.0;
    DichroismModel dichroism;
    double polarization_deg = 90.0;
    double inhomogeneous_width_ghz = 5.0;

    Time storage_time() const { return comb.storage_time(); }
    double echo_efficiency() const;
    double direct_transmission() const;
    void validate() const;
};

/// Where a photon sits relative to the memory's spectral features.
enum class SpectralClass {
    pit_resonant,   // the single source mode inside the transparency pit
    line_resonant,  // inside the inhomogeneous line but outside the pit
    off_line,       // broadband noise and anything outside the line
};

SpectralClass classify(const PhotonEvent& event, const MemoryConfig& memory);

enum class Disposition { transmitted, echoed, absorbed };

struct StorageOutcome {
    Disposition disposition = Disposition::absorbed;
    Time exit_time{0};
};

/// Consumes exactly one uniform draw per call.
StorageOutcome storage_transform(const PhotonEvent& event, const MemoryConfig& memory, RandomStream& rng);

}  // namespace afcsim

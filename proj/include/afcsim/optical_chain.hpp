#pragma once

#include <span>
#include <string>
#include <vector>

#include "afcsim/random.hpp"
#include "afcsim/types.hpp"

namespace afcsim {

struct CavitySpec {
    double fsr_ghz = 16.8;
    double linewidth_mhz = 80.0;  // FWHM
    double peak_transmission = 1.0;

    void validate(const std::string& name) const;
};

/// Periodic Lorentzian transmission T(d) = T0 / (1 + (2 d' / FWHM)^2), with d'
/// the detuning folded to the nearest resonance.
double cavity_transmission(const CavitySpec& spec, double detuning_mhz);

struct LossElement {
    std::string name;
    double transmission = 1.0;
};

using LossTable = std::vector<LossElement>;

/// Product of element transmissions. Throws ConfigError on an empty table.
double path_transmission(const LossTable& table);

/// Polarization-dependent optical depth of the unburned inhomogeneous line.
struct DichroismModel {
    double od_d1 = 1.4;  // polarization along D1 (weakly absorbing)
    double od_d2 = 6.9;  // polarization along D2

    /// OD(theta) = od_d1 cos^2 theta + od_d2 sin^2 theta, theta measured from D1.
    double optical_depth(double theta_deg) const;
    void validate() const;
};

/// Survival through the unburned crystal: exp(-OD(theta)) for light inside the
/// inhomogeneous line, 1 otherwise. Throws ConfigError for theta outside [0, 90].
double crystal_survival(const DichroismModel& model, double theta_deg, bool resonant);

/// Passive optics and spectral filters between the source and the memory
/// (signal) or the idler detector.
struct ChainConfig {
    LossTable signal_loss;       // source to cryostat, etalon excluded
    CavitySpec etalon{60.0, 10'000.0, 0.90};
    bool etalon_enabled = true;

    LossTable idler_loss;        // source to idler detector, filter cavity excluded
    CavitySpec filter_cavity{16.8, 80.0, 0.50};
    /// Without the cavity its spectral selectivity is gone but its insertion
    /// loss stays in the budget, so every main-cluster idler mode passes equally.
    bool filter_cavity_enabled = true;
    /// Secondary-cluster idler light never reaches the idler detector.
    bool idler_main_cluster_only = true;

    LossTable post_memory_loss;  // cryostat to signal detector, memory duty cycle excluded

    void validate() const;

    double signal_path() const;
    double idler_path() const;
    double post_memory() const;

    /// Survival probability from the source to the memory (signal) or the
    /// idler detector. Broadband noise sits inside the etalon passband.
    double survival(const PhotonEvent& event) const;
};

/// Independent Bernoulli thinning of each event with ChainConfig::survival.
std::vector<PhotonEvent> apply_chain(std::span<const PhotonEvent> events, const ChainConfig& chain, RandomStream& rng);

}  // namespace afcsim

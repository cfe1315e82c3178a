#include "afcsim/optical_chain.hpp"

#include <cmath>
#include <numbers>

namespace afcsim {

void CavitySpec::validate(const std::string& name) const {
    require(fsr_ghz > 0.0, name + ".fsr must be positive");
    require(linewidth_mhz > 0.0 && linewidth_mhz < fsr_ghz * 1000.0, name + ".linewidth must lie in (0, fsr)");
    require(peak_transmission > 0.0 && peak_transmission <= 1.0, name + ".peak_transmission must lie in (0, 1]");
}

double cavity_transmission(const CavitySpec& spec, double detuning_mhz) {
    const double fsr_mhz = spec.fsr_ghz * 1000.0;
    const double folded = detuning_mhz - fsr_mhz * std::round(detuning_mhz / fsr_mhz);
    const double x = 2.0 * folded / spec.linewidth_mhz;
    return spec.peak_transmission / (1.0 + x * x);
}

double path_transmission(const LossTable& table) {
    require(!table.empty(), "loss table is empty");
    double product = 1.0;
    for (const auto& element : table) product *= element.transmission;
    return product;
}

double DichroismModel::optical_depth(double theta_deg) const {
    const double theta = theta_deg * std::numbers::pi / 180.0;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return od_d1 * c * c + od_d2 * s * s;
}

void DichroismModel::validate() const {
    require(od_d1 >= 0.0 && od_d2 >= 0.0, "dichroism optical depths must be non-negative");
    require(od_d1 < od_d2, "dichroism.od_d1 must be smaller than dichroism.od_d2");
}

double crystal_survival(const DichroismModel& model, double theta_deg, bool resonant) {
    if (!(theta_deg >= 0.0 && theta_deg <= 90.0))
        throw ConfigError("polarization angle must lie in [0, 90] degrees, got " + std::to_string(theta_deg));
    return resonant ? std::exp(-model.optical_depth(theta_deg)) : 1.0;
}

namespace {

double table_or_unity(const LossTable& table) { return table.empty() ? 1.0 : path_transmission(table); }

void validate_table(const LossTable& table, const std::string& name) {
    for (const auto& element : table)
        require(element.transmission > 0.0 && element.transmission <= 1.0,
                name + "." + element.name + " must lie in (0, 1]");
}

}  // namespace

void ChainConfig::validate() const {
    validate_table(signal_loss, "signal_loss");
    validate_table(idler_loss, "idler_loss");
    validate_table(post_memory_loss, "post_memory_loss");
    etalon.validate("etalon");
    filter_cavity.validate("filter_cavity");
}

double ChainConfig::signal_path() const { return table_or_unity(signal_loss); }
double ChainConfig::idler_path() const { return table_or_unity(idler_loss); }
double ChainConfig::post_memory() const { return table_or_unity(post_memory_loss); }

double ChainConfig::survival(const PhotonEvent& event) const {
    if (event.arm == Arm::signal) {
        double t = signal_path();
        if (etalon_enabled) {
            t *= event.origin == Origin::broadband_noise ? etalon.peak_transmission
                                                          : cavity_transmission(etalon, event.mode.detuning_mhz());
        }
        return t;
    }
    if (idler_main_cluster_only && !event.mode.main_cluster()) return 0.0;
    const double filter = filter_cavity_enabled ? cavity_transmission(filter_cavity, event.mode.detuning_mhz())
                                                : filter_cavity.peak_transmission;
    return idler_path() * filter;
}

std::vector<PhotonEvent> apply_chain(std::span<const PhotonEvent> events, const ChainConfig& chain, RandomStream& rng) {
    std::vector<PhotonEvent> out;
    for (const auto& ev : events) {
        if (rng.bernoulli(chain.survival(ev))) out.push_back(ev);
    }
    return out;
}

}  // namespace afcsim

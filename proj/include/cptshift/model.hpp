#pragma once

// Atom and field description for a double-Lambda scheme driven by a
// polychromatic field with sideband spacing Omega ~ omega_g/2, plus the
// reduced couplings and light shifts that every signal path consumes.
//
// Rabi amplitudes are stored pre-multiplied by the upper-branch dipole
// element: V_{k,u} = E_k, V_{k,d} = sqrt(dipole_ratio_sq) * E_k, all in rad/s.

#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "cptshift/error.hpp"
#include "cptshift/units.hpp"

namespace cptshift {

struct AtomParams {
    double ground_splitting = from_ghz(6.834682611);  // omega_g
    double excited_splitting = from_mhz(817.0);       // omega_e
    double optical_width = from_mhz(380.0);           // Gamma, homogeneous optical width
    double ground_relaxation = from_hz(200.0);        // Gamma_g
    double excited_decay = from_mhz(5.75);            // gamma (upper excited level)
    double dipole_ratio_sq = 1.0 / 3.0;               // d_d^2 / d_u^2
    double one_photon_detuning = from_mhz(-28.0);     // Delta_L

    friend bool operator==(const AtomParams&, const AtomParams&) = default;

    void validate() const {
        using detail::require;
        require(std::isfinite(ground_splitting) && ground_splitting > 0, "ground_splitting must be > 0");
        require(std::isfinite(excited_splitting) && excited_splitting > 0, "excited_splitting must be > 0");
        require(std::isfinite(optical_width) && optical_width > 0, "optical_width must be > 0");
        require(std::isfinite(ground_relaxation) && ground_relaxation > 0, "ground_relaxation must be > 0");
        require(std::isfinite(excited_decay) && excited_decay > 0, "excited_decay must be > 0");
        require(dipole_ratio_sq > 0 && dipole_ratio_sq <= 1, "dipole_ratio_sq must lie in (0, 1]");
        require(std::isfinite(one_photon_detuning), "one_photon_detuning must be finite");
    }

    double sideband_spacing() const { return 0.5 * ground_splitting; }

    /// True when (Gamma/Omega)^2 exceeds 0.01, i.e. neighbouring sideband
    /// pairs are no longer negligible as CPT drivers.
    bool sidebands_unresolved() const {
        const double ratio = optical_width / sideband_spacing();
        return ratio * ratio > 0.01;
    }

    // Lorentzian and dispersive factors of the two excited levels.
    double upper_absorptive() const {
        const double d = one_photon_detuning;
        return optical_width / (d * d + optical_width * optical_width);
    }
    double lower_absorptive() const {
        const double d = one_photon_detuning + excited_splitting;
        return optical_width / (d * d + optical_width * optical_width);
    }
    double upper_dispersive() const {
        const double d = one_photon_detuning;
        return d / (d * d + optical_width * optical_width);
    }
    double lower_dispersive() const {
        const double d = one_photon_detuning + excited_splitting;
        return d / (d * d + optical_width * optical_width);
    }

    /// P = Gamma^2/(Delta_L^2+Gamma^2) + Gamma^2/((Delta_L+omega_e)^2+Gamma^2).
    double lorentz_weight() const {
        return optical_width * (upper_absorptive() + lower_absorptive());
    }
};

/// Sideband amplitude table {k -> E_k} with spacing Omega.
class FieldSpectrum {
public:
    FieldSpectrum() = default;

    FieldSpectrum(double spacing, std::map<int, double> amplitudes)
        : spacing_(spacing), amplitudes_(std::move(amplitudes)) {
        detail::require(std::isfinite(spacing_) && spacing_ > 0, "sideband spacing must be > 0");
        power_ = 0.0;
        for (const auto& [k, e] : amplitudes_) {
            detail::require(std::isfinite(e) && e >= 0,
                            "sideband amplitude E_" + std::to_string(k) + " must be >= 0");
            power_ += e * e;
        }
    }

    double spacing() const { return spacing_; }
    const std::map<int, double>& components() const { return amplitudes_; }

    double amplitude(int k) const {
        auto it = amplitudes_.find(k);
        return it == amplitudes_.end() ? 0.0 : it->second;
    }

    /// E^2 = sum_k E_k^2.
    double total_power() const { return power_; }

    /// sigma_k = E_k^2 / E^2.
    double fraction(int k) const {
        const double e = amplitude(k);
        return power_ > 0 ? e * e / power_ : 0.0;
    }

    bool has_resonant_pair() const {
        return amplitudes_.contains(-1) && amplitudes_.contains(1);
    }

    bool resonant_pair_symmetric() const { return amplitude(-1) == amplitude(1); }

    /// Every E_k^2 multiplied by `factor` (sigma_k fixed).
    FieldSpectrum scaled_power(double factor) const {
        detail::require(factor >= 0, "power scale factor must be >= 0");
        const double s = std::sqrt(factor);
        auto amps = amplitudes_;
        for (auto& [k, e] : amps) e *= s;
        return {spacing_, std::move(amps)};
    }

    /// Only E_{-1}^2 and E_{+1}^2 multiplied by `factor`.
    FieldSpectrum attenuate_resonant(double factor) const {
        detail::require(factor >= 0, "attenuation factor must be >= 0");
        const double s = std::sqrt(factor);
        auto amps = amplitudes_;
        for (int k : {-1, 1})
            if (auto it = amps.find(k); it != amps.end()) it->second *= s;
        return {spacing_, std::move(amps)};
    }

    /// Same spectrum with E_{+-1} replaced by their rms value: total power,
    /// pumping rates and non-resonant shift unchanged, resonant asymmetry removed.
    FieldSpectrum symmetrized() const {
        auto amps = amplitudes_;
        const double rms = std::sqrt(0.5 * (amplitude(-1) * amplitude(-1) + amplitude(1) * amplitude(1)));
        amps[-1] = rms;
        amps[1] = rms;
        return {spacing_, std::move(amps)};
    }

    friend bool operator==(const FieldSpectrum&, const FieldSpectrum&) = default;

private:
    double spacing_ = 1.0;
    std::map<int, double> amplitudes_;
    double power_ = 0.0;
};

struct ModulationParams {
    double index = 0.2;            // a, phase-modulation index of Omega
    double frequency = 1.0;        // omega_m
    double detection_phase = 0.0;  // alpha

    void validate() const {
        detail::require(std::isfinite(index) && index >= 0, "modulation index must be >= 0");
        detail::require(std::isfinite(frequency) && frequency > 0, "modulation frequency must be > 0");
        detail::require(std::isfinite(detection_phase), "detection phase must be finite");
    }

    /// The a^2 truncation loses accuracy above a ~ 1/2.
    bool beyond_small_index() const { return index > 0.5; }

    friend bool operator==(const ModulationParams&, const ModulationParams&) = default;
};

/// Reduced ground-state couplings and shifts (all rad/s unless noted).
struct DerivedCouplings {
    double pump_left = 0;         // V_L
    double pump_right = 0;        // V_R
    double two_photon = 0;        // V_LR
    double asymmetry = 0;         // K
    double broadened_width = 0;   // Gamma_g + V_L + V_R
    double lorentz_weight = 0;    // P, dimensionless
    double resonant_shift = 0;    // delta_r
    double nonresonant_shift = 0; // delta_nr
    double reduced_left = 0;      // reduced Rabi of E_{-1}
    double reduced_right = 0;     // reduced Rabi of E_{+1}
    double ground_relaxation = 0; // Gamma_g, carried for the solvers
    double absorption_scale = 0;  // 2P/(gamma Gamma), s^2

    /// (V_L^2 - V_R^2)/(V_L V_R) for the reduced Rabi frequencies.
    double imbalance() const {
        return (reduced_left * reduced_left - reduced_right * reduced_right) /
               (reduced_left * reduced_right);
    }
};

/// Contribution of each sideband to delta_nr, both excited levels summed.
/// The resonant pair only contributes through its off-resonant partner level.
inline std::map<int, double> nonresonant_terms(const AtomParams& atom, const FieldSpectrum& spectrum) {
    const double spacing = spectrum.spacing();
    const double branch = 1.0 + atom.dipole_ratio_sq;
    std::map<int, double> terms;
    for (const auto& [q, e] : spectrum.components()) {
        // Component q appears as V_{-k} with k = -q in both sums.
        const int k = -q;
        double t = 0.0;
        if (k != -1) t -= 1.0 / ((k + 1) * spacing);
        if (k != 1) t += 1.0 / ((k - 1) * spacing);
        terms[q] = branch * e * e * t;
    }
    return terms;
}

inline DerivedCouplings derive_couplings(const AtomParams& atom, const FieldSpectrum& spectrum) {
    atom.validate();
    detail::require(spectrum.has_resonant_pair(), "spectrum must contain the k = -1 and k = +1 sidebands");

    const double r = atom.dipole_ratio_sq;
    const double left = spectrum.amplitude(-1);
    const double right = spectrum.amplitude(1);
    const double absorptive = atom.upper_absorptive() + r * atom.lower_absorptive();
    const double dispersive = atom.upper_dispersive() + r * atom.lower_dispersive();

    DerivedCouplings c;
    c.pump_left = left * left * absorptive;
    c.pump_right = right * right * absorptive;
    c.two_photon = left * right * absorptive;
    c.asymmetry = left * right * dispersive;
    c.broadened_width = atom.ground_relaxation + c.pump_left + c.pump_right;
    c.lorentz_weight = atom.lorentz_weight();
    c.resonant_shift = -(left * left - right * right) * dispersive;
    for (const auto& [q, t] : nonresonant_terms(atom, spectrum)) c.nonresonant_shift += t;
    c.reduced_left = left;
    c.reduced_right = right;
    c.ground_relaxation = atom.ground_relaxation;
    c.absorption_scale = 2.0 * c.lorentz_weight / (atom.excited_decay * atom.optical_width);
    return c;
}

/// Phase-modulation-like family: E_k ~ |J_k(m)|, with the resonant pair
/// skewed by (1 +- epsilon), rescaled to the requested total power.
inline FieldSpectrum bessel_spectrum(double depth, double asymmetry, int max_order, double total_power,
                                     double spacing) {
    detail::require(std::isfinite(depth) && depth >= 0, "modulation depth m must be >= 0");
    detail::require(std::abs(asymmetry) < 1, "asymmetry epsilon must satisfy |epsilon| < 1");
    detail::require(max_order >= 2, "max_order must be >= 2");
    detail::require(std::isfinite(total_power) && total_power > 0, "total_power must be > 0");

    std::map<int, double> amps;
    double sum = 0.0;
    for (int k = -max_order; k <= max_order; ++k) {
        double e = std::abs(std::cyl_bessel_j(static_cast<double>(std::abs(k)), depth));
        if (k == -1) e *= 1.0 + asymmetry;
        if (k == 1) e *= 1.0 - asymmetry;
        amps[k] = e;
        sum += e * e;
    }
    const double scale = std::sqrt(total_power / sum);
    for (auto& [k, e] : amps) e *= scale;
    return {spacing, std::move(amps)};
}

inline FieldSpectrum bessel_spectrum(double depth, double asymmetry, int max_order, double total_power,
                                     const AtomParams& atom) {
    return bessel_spectrum(depth, asymmetry, max_order, total_power, atom.sideband_spacing());
}

} // namespace cptshift

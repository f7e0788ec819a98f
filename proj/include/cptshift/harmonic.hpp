#pragma once

// Fourier-amplitude (harmonic balance) solution of the reduced ground-state
// equations under phase modulation, truncated at |k| <= 2, and the closed
// forms obtained by linearizing it in the two-photon detuning.
//
// Expansion: rho_22 = sum_k G_k exp(-i k omega_m t), rho_21 = sum_k C_k exp(-i k omega_m t),
// with G_{-k} = conj(G_k). The conjugated amplitudes are carried as extra
// real unknowns, giving a 15x15 real system.

#include <array>
#include <complex>

#include <Eigen/Dense>

#include "cptshift/error.hpp"
#include "cptshift/model.hpp"
#include "cptshift/signal.hpp"

namespace cptshift {

using complex = std::complex<double>;

struct FourierAmplitudes {
    complex c0, c1, c_m1, c2, c_m2;  // coherence harmonics C_0, C_{+-1}, C_{+-2}
    double g0 = 0;                   // population harmonic G_0
    complex g1, g2;                  // population harmonics G_1, G_2
};

enum class Truncation {
    /// Drops a*omega_m*C_{+-2} from the C_{+-1} rows (strict a^2 ordering).
    printed,
    /// Keeps every coupling among |k| <= 2; only C_{+-3} is dropped.
    closed,
};

/// Two-photon detuning including light shifts: 2*dt = 2*delta + delta_r + delta_nr.
inline double shifted_detuning(const DerivedCouplings& c, double detuning) {
    return detuning + 0.5 * (c.resonant_shift + c.nonresonant_shift);
}

namespace detail {

inline constexpr int n_unknowns = 15;
using LinearForm = Eigen::Matrix<complex, 1, n_unknowns>;

enum Slot : int { C0 = 0, C1 = 2, Cm1 = 4, C2 = 6, Cm2 = 8, G0 = 10, G1 = 11, G2 = 13 };

inline LinearForm unknown(Slot s) {
    LinearForm f = LinearForm::Zero();
    f(s) = 1.0;
    if (s != G0) f(s + 1) = complex(0, 1);
    return f;
}

inline LinearForm conj(const LinearForm& f) { return f.conjugate(); }

} // namespace detail

inline FourierAmplitudes solve_fourier_amplitudes(const DerivedCouplings& c, const ModulationParams& mod,
                                                  double detuning, Truncation truncation = Truncation::closed) {
    using namespace detail;
    mod.validate();

    const double dt2 = 2.0 * shifted_detuning(c, detuning);
    const double w = mod.frequency;
    const double aw = mod.index * w;
    const double K = c.asymmetry;
    const complex ig(0, c.broadened_width);
    const double keep = truncation == Truncation::closed ? 1.0 : 0.0;

    const LinearForm uC0 = unknown(C0), uC1 = unknown(C1), uCm1 = unknown(Cm1);
    const LinearForm uC2 = unknown(C2), uCm2 = unknown(Cm2);
    const LinearForm uG0 = unknown(G0), uG1 = unknown(G1), uG2 = unknown(G2);

    std::array<std::pair<LinearForm, complex>, 7> complex_rows{{
        {(dt2 + ig) * uC0 + aw * (uC1 + uCm1) - 2.0 * K * uG0, complex(-K, c.two_photon)},
        {(dt2 + w + ig) * uC1 + aw * uC0 + keep * aw * uC2 - 2.0 * K * uG1, 0.0},
        {(dt2 - w + ig) * uCm1 + aw * uC0 + keep * aw * uCm2 - 2.0 * K * conj(uG1), 0.0},
        {(dt2 + 2.0 * w + ig) * uC2 + aw * uC1 - 2.0 * K * uG2, 0.0},
        {(dt2 - 2.0 * w + ig) * uCm2 + aw * uCm1 - 2.0 * K * conj(uG2), 0.0},
        {(w + ig) * uG1 - K * (uC1 - conj(uCm1)), 0.0},
        {(2.0 * w + ig) * uG2 - K * (uC2 - conj(uCm2)), 0.0},
    }};

    Eigen::Matrix<double, n_unknowns, n_unknowns> m;
    Eigen::Matrix<double, n_unknowns, 1> rhs;
    int row = 0;
    for (const auto& [form, b] : complex_rows) {
        m.row(row) = form.real();
        rhs(row++) = b.real();
        m.row(row) = form.imag();
        rhs(row++) = b.imag();
    }
    // Population balance is real: only its imaginary part carries information.
    const LinearForm balance = ig * uG0 - K * (uC0 - conj(uC0));
    m.row(row) = balance.imag();
    rhs(row) = c.pump_right + 0.5 * c.ground_relaxation;

    Eigen::PartialPivLU<Eigen::Matrix<double, n_unknowns, n_unknowns>> lu(m);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14)) throw SingularSystem("Fourier amplitude system is singular", rcond);
    const Eigen::Matrix<double, n_unknowns, 1> x = lu.solve(rhs);

    auto at = [&](Slot s) { return complex(x(s), x(s + 1)); };
    FourierAmplitudes amps;
    amps.c0 = at(C0);
    amps.c1 = at(C1);
    amps.c_m1 = at(Cm1);
    amps.c2 = at(C2);
    amps.c_m2 = at(Cm2);
    amps.g0 = x(G0);
    amps.g1 = at(G1);
    amps.g2 = at(G2);
    return amps;
}

inline FourierAmplitudes solve_fourier_amplitudes(const AtomParams& atom, const FieldSpectrum& spectrum,
                                                  const ModulationParams& mod, double detuning,
                                                  Truncation truncation = Truncation::closed) {
    return solve_fourier_amplitudes(derive_couplings(atom, spectrum), mod, detuning, truncation);
}

/// First-harmonic lock-in amplitudes of the excited-state population.
inline LockInResult signals_from_amplitudes(const FourierAmplitudes& amps, const DerivedCouplings& c,
                                            double detection_phase = 0.0) {
    const double l = c.reduced_left, r = c.reduced_right;
    // kappa_1 = scale * [(L^2 - R^2) G_1 - L R (C_1 + conj(C_{-1}))], S = 2 Re, Q = 2 Im.
    const complex k1 =
        c.absorption_scale * ((l * l - r * r) * amps.g1 - l * r * (amps.c1 + std::conj(amps.c_m1)));
    return LockInResult{2.0 * k1.real(), 2.0 * k1.imag(), 0.0}.at_phase(detection_phase);
}

/// Steady-state absorption (excited-state population) from the G_0, C_0 harmonics.
inline double mean_absorption(const FourierAmplitudes& amps, const DerivedCouplings& c) {
    const double l = c.reduced_left, r = c.reduced_right;
    return c.absorption_scale *
           (l * l * amps.g0 + r * r * (1.0 - amps.g0) - 2.0 * l * r * amps.c0.real());
}

inline LockInResult harmonic_signals(const DerivedCouplings& c, const ModulationParams& mod, double detuning,
                                     Truncation truncation = Truncation::closed) {
    return signals_from_amplitudes(solve_fourier_amplitudes(c, mod, detuning, truncation), c,
                                   mod.detection_phase);
}

struct LinearizedSignals {
    LockInResult signals;
    bool outside_window = false;     // |2 dt| > 0.2 Gamma_g~
    bool large_detuning = false;     // (Delta_L/Gamma)^2 not small
    bool large_asymmetry = false;    // (K/Gamma_g~)^2 not small
    bool any_warning() const { return outside_window || large_detuning || large_asymmetry; }
};

inline LinearizedSignals linearized_signals(const AtomParams& atom, const DerivedCouplings& c,
                                            const ModulationParams& mod, double detuning) {
    mod.validate();
    const double g = c.broadened_width;
    const double w = mod.frequency;
    const double a = mod.index;
    const double dt = shifted_detuning(c, detuning);
    const double l = c.reduced_left, r = c.reduced_right;
    const double K = c.asymmetry;
    const double g2w2 = g * g + w * w;
    const double skew = K * (l * l - r * r) * g2w2;
    // Factor 2 relative to the textbook closed form: 2/T demodulation.
    const double pre = 2.0 * c.absorption_scale * 4.0 * a * w * c.two_photon;

    LinearizedSignals out;
    out.signals.in_phase = pre * (2.0 * dt * l * r * g * g + skew) / (g * g2w2 * g2w2);
    out.signals.quadrature = pre * w * (dt * l * r * (3.0 * g * g + w * w) + skew) / (g * g * g2w2 * g2w2);
    out.signals = out.signals.at_phase(mod.detection_phase);

    const double dl = atom.one_photon_detuning / atom.optical_width;
    out.outside_window = std::abs(2.0 * dt) > 0.2 * g;
    out.large_detuning = dl * dl > 0.05;
    out.large_asymmetry = (K / g) * (K / g) > 0.01;
    return out;
}

inline LinearizedSignals linearized_signals(const AtomParams& atom, const FieldSpectrum& spectrum,
                                            const ModulationParams& mod, double detuning) {
    return linearized_signals(atom, derive_couplings(atom, spectrum), mod, detuning);
}

/// Light-shift decomposition of the in-phase zero crossing.
struct ShiftBreakdown {
    double resonant = 0;     // delta_r
    double nonresonant = 0;  // delta_nr
    double asymmetry = 0;    // delta_as
    double slope = 0;        // A: S = A (2 delta + delta_r + delta_nr + delta_as)
    double predicted_zero = 0;
};

inline ShiftBreakdown asymmetry_shift(const DerivedCouplings& c, const ModulationParams& mod) {
    mod.validate();
    detail::require(c.reduced_left * c.reduced_right > 0,
                    "asymmetry shift undefined without both resonant sidebands");
    const double g = c.broadened_width;
    const double w = mod.frequency;
    const double g2w2 = g * g + w * w;
    const double l = c.reduced_left, r = c.reduced_right;

    ShiftBreakdown s;
    s.resonant = c.resonant_shift;
    s.nonresonant = c.nonresonant_shift;
    s.asymmetry = c.asymmetry * c.imbalance() * g2w2 / (g * g);
    s.slope = 2.0 * c.absorption_scale * 4.0 * mod.index * w * c.two_photon * l * r * g / (g2w2 * g2w2);
    s.predicted_zero = -0.5 * (s.resonant + s.nonresonant + s.asymmetry);
    return s;
}

inline ShiftBreakdown asymmetry_shift(const AtomParams& atom, const FieldSpectrum& spectrum,
                                      const ModulationParams& mod) {
    return asymmetry_shift(derive_couplings(atom, spectrum), mod);
}

} // namespace cptshift

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cptshift/cptshift.hpp"

namespace testing_support {

using namespace cptshift;

/// Working point used across suites: total Rabi 1 MHz, K_max = 2 family.
inline double default_power() { return from_mhz(1.0) * from_mhz(1.0); }

inline FieldSpectrum family_spectrum(double m, double eps, const AtomParams& atom = {}, int kmax = 2,
                                     double power = default_power()) {
    return bessel_spectrum(m, eps, kmax, power, atom);
}

/// Atom with Delta_L at the symmetrizing detuning, so K = 0.
inline AtomParams symmetric_atom() {
    AtomParams a;
    a.one_photon_detuning = symmetrizing_detuning(a.optical_width, a.excited_splitting, a.dipole_ratio_sq);
    return a;
}

/// Detuning that places delta~ (light-shifted) at `shifted`.
inline double bare_detuning(const DerivedCouplings& c, double shifted) {
    return shifted - 0.5 * (c.resonant_shift + c.nonresonant_shift);
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace testing_support

#pragma once

#include <cmath>

namespace cptshift {

/// In-phase and quadrature amplitudes of the absorption at omega_m, using
/// the 2/T convention: kappa(t) = c cos(omega_m t) demodulates to S = c.
struct LockInResult {
    double in_phase = 0;    // S
    double quadrature = 0;  // Q
    double detection_phase = 0;

    /// Re-reference to another detection phase:
    /// S(a) = S(0) cos a - Q(0) sin a, Q(a) = S(0) sin a + Q(0) cos a.
    LockInResult at_phase(double alpha) const {
        const double d = alpha - detection_phase;
        const double c = std::cos(d), s = std::sin(d);
        return {in_phase * c - quadrature * s, in_phase * s + quadrature * c, alpha};
    }
};

} // namespace cptshift

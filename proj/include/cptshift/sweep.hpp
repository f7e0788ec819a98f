#pragma once

// Zero crossings of the in-phase signal, IP/PZD location over a spectrum
// family, the symmetrizing one-photon detuning, and an emulation of the
// servo-lock / intensity-modulation detection procedure.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "cptshift/error.hpp"
#include "cptshift/harmonic.hpp"
#include "cptshift/model.hpp"
#include "cptshift/thick.hpp"
#include "cptshift/time_domain.hpp"

namespace cptshift {

enum class SignalPath { time_domain, harmonic, linearized, thick };

inline const char* to_string(SignalPath p) {
    switch (p) {
    case SignalPath::time_domain: return "time_domain";
    case SignalPath::harmonic: return "harmonic";
    case SignalPath::linearized: return "linearized";
    case SignalPath::thick: return "thick";
    }
    return "?";
}

/// Everything except the spectrum and the detuning.
struct SignalModel {
    SignalPath path = SignalPath::harmonic;
    AtomParams atom;
    ModulationParams mod;
    Truncation truncation = Truncation::closed;
    IntegrationSettings integration;
    CellParams cell;      // thick path only
    ThickOptions thick;   // thick path only

    LockInResult signal(const FieldSpectrum& spectrum, double detuning) const {
        if (path == SignalPath::thick) return averaged_signal(atom, spectrum, mod, cell, detuning, thick);
        const DerivedCouplings c = derive_couplings(atom, spectrum);
        switch (path) {
        case SignalPath::time_domain: return time_domain_signals(c, mod, detuning, integration);
        case SignalPath::linearized: return linearized_signals(atom, c, mod, detuning).signals;
        default: return harmonic_signals(c, mod, detuning, truncation);
        }
    }
};

struct ZeroCrossingOptions {
    std::optional<std::pair<double, double>> bracket;  // default: shifted centre +- Gamma_g~
    double tolerance = 1e-4;                            // |d delta| in units of Gamma_g~
    int max_iterations = 200;
};

/// Default bracket: the light-shifted line centre -(delta_r + delta_nr)/2 +- Gamma_g~.
inline std::pair<double, double> default_bracket(const AtomParams& atom, const FieldSpectrum& spectrum) {
    const DerivedCouplings c = derive_couplings(atom, spectrum);
    const double centre = -0.5 * (c.resonant_shift + c.nonresonant_shift);
    return {centre - c.broadened_width, centre + c.broadened_width};
}

/// Root of S(delta) by TOMS 748 bracketing.
inline double zero_crossing(const SignalModel& model, const FieldSpectrum& spectrum,
                            const ZeroCrossingOptions& options = {}) {
    const double width = derive_couplings(model.atom, spectrum).broadened_width;
    const auto [lo, hi] = options.bracket.value_or(default_bracket(model.atom, spectrum));
    auto f = [&](double d) { return model.signal(spectrum, d).in_phase; };
    const double f_lo = f(lo), f_hi = f(hi);
    if (f_lo == 0) return lo;
    if (f_hi == 0) return hi;
    if ((f_lo > 0) == (f_hi > 0)) throw NoCrossing(lo, hi, f_lo, f_hi);

    const double tol = options.tolerance * width;
    std::uintmax_t iterations = options.max_iterations;
    const auto [a, b] = boost::math::tools::toms748_solve(
        f, lo, hi, f_lo, f_hi, [tol](double x, double y) { return std::abs(y - x) <= tol; }, iterations);
    return 0.5 * (a + b);
}

/// Bessel-like family {E_k} at depth m with fixed asymmetry, order, power.
struct SpectrumFamily {
    double asymmetry = 0;
    int max_order = 5;
    double total_power = from_mhz(1.0) * from_mhz(1.0);

    FieldSpectrum at(double depth, const AtomParams& atom) const {
        return bessel_spectrum(depth, asymmetry, max_order, total_power, atom);
    }
};

struct SweepOptions {
    double root_tolerance = 1e-10;  // zero-crossing tolerance in units of Gamma_g~
    double relative_step = 1e-3;    // power step for d delta_0 / dE^2
    double m_tolerance = 1e-9;      // refinement tolerance for IP/PZD depths
};

struct SweepRecord {
    double m = 0;
    double E2 = 0;
    double delta0 = 0;        // rad/s
    double dDelta0_dE2 = 0;   // (rad/s)/(rad/s)^2
    bool valid = false;       // false when no crossing or a singular configuration
    bool richardson_ok = false;
    bool near_ip = false;
    bool near_pzd = false;
};

struct RootPoint {
    double m = 0;
    double delta0 = 0;       // rad/s at that depth
    double derivative = 0;   // d delta_0 / dE^2 at that depth
};

struct SweepResult {
    std::vector<SweepRecord> records;
    std::vector<RootPoint> ips;
    std::vector<RootPoint> pzds;
    // Extrema of the valid records, reported when no roots are found.
    double min_delta0 = 0, max_delta0 = 0, min_derivative = 0, max_derivative = 0;
};

namespace detail {

inline std::optional<double> crossing_or_none(const SignalModel& model, const FieldSpectrum& spectrum,
                                              double tolerance) {
    try {
        ZeroCrossingOptions o;
        o.tolerance = tolerance;
        return zero_crossing(model, spectrum, o);
    } catch (const NoCrossing&) {
        return std::nullopt;
    } catch (const SingularSystem&) {
        return std::nullopt;
    } catch (const InvalidInput&) {
        return std::nullopt;
    }
}

} // namespace detail

/// delta_0 for the family member at depth m with power scaled by `scale`.
inline std::optional<double> family_zero_crossing(const SignalModel& model, const SpectrumFamily& family,
                                                  double m, double scale, const SweepOptions& options = {}) {
    const FieldSpectrum s = family.at(m, model.atom).scaled_power(scale);
    if (s.amplitude(-1) <= 0 || s.amplitude(1) <= 0) return std::nullopt;
    return detail::crossing_or_none(model, s, options.root_tolerance);
}

/// Central difference at fixed sigma_k; second value is the half-step estimate.
inline std::optional<std::pair<double, double>> family_power_derivative(const SignalModel& model,
                                                                        const SpectrumFamily& family, double m,
                                                                        const SweepOptions& options = {}) {
    const double h = options.relative_step;
    auto diff = [&](double step) -> std::optional<double> {
        const auto up = family_zero_crossing(model, family, m, 1.0 + step, options);
        const auto dn = family_zero_crossing(model, family, m, 1.0 - step, options);
        if (!up || !dn) return std::nullopt;
        return (*up - *dn) / (2.0 * step * family.total_power);
    };
    const auto full = diff(h);
    const auto half = diff(0.5 * h);
    if (!full || !half) return std::nullopt;
    return std::make_pair(*full, *half);
}

inline SweepRecord sweep_point(const SignalModel& model, const SpectrumFamily& family, double m,
                               const SweepOptions& options = {}) {
    SweepRecord rec;
    rec.m = m;
    rec.E2 = family.total_power;
    rec.delta0 = std::numeric_limits<double>::quiet_NaN();
    rec.dDelta0_dE2 = std::numeric_limits<double>::quiet_NaN();
    const auto d0 = family_zero_crossing(model, family, m, 1.0, options);
    const auto der = family_power_derivative(model, family, m, options);
    if (!d0 || !der) return rec;
    rec.valid = true;
    rec.delta0 = *d0;
    rec.dDelta0_dE2 = der->second;
    rec.richardson_ok = std::abs(der->first - der->second) <= 0.01 * std::abs(der->second);
    return rec;
}

namespace detail {

template <class F>
std::optional<double> refine_in_m(F f, double lo, double hi, double f_lo, double f_hi, double tol) {
    if (f_lo == 0) return lo;
    if (f_hi == 0) return hi;
    try {
        std::uintmax_t iterations = 200;
        const auto [a, b] = boost::math::tools::toms748_solve(
            [&](double m) {
                const auto v = f(m);
                if (!v) throw NoCrossing(lo, hi, f_lo, f_hi);
                return *v;
            },
            lo, hi, f_lo, f_hi, [tol](double x, double y) { return std::abs(y - x) <= tol; }, iterations);
        return 0.5 * (a + b);
    } catch (const NoCrossing&) {
        return std::nullopt;
    }
}

} // namespace detail

/// Sign changes of d delta_0/dE^2 (IPs) and of delta_0 (PZDs) along the m grid,
/// each refined by TOMS 748. Grid points without a crossing are skipped.
inline SweepResult find_ips_and_pzds(const SignalModel& model, const SpectrumFamily& family,
                                     const std::vector<double>& m_grid, const SweepOptions& options = {}) {
    SweepResult out;
    out.records.reserve(m_grid.size());
    for (double m : m_grid) out.records.push_back(sweep_point(model, family, m, options));

    auto delta0_at = [&](double m) { return family_zero_crossing(model, family, m, 1.0, options); };
    auto derivative_at = [&](double m) -> std::optional<double> {
        const auto d = family_power_derivative(model, family, m, options);
        if (!d) return std::nullopt;
        return d->second;
    };

    bool first = true;
    for (std::size_t i = 0; i < out.records.size(); ++i) {
        const auto& r = out.records[i];
        if (!r.valid) continue;
        if (first) {
            out.min_delta0 = out.max_delta0 = r.delta0;
            out.min_derivative = out.max_derivative = r.dDelta0_dE2;
            first = false;
        }
        out.min_delta0 = std::min(out.min_delta0, r.delta0);
        out.max_delta0 = std::max(out.max_delta0, r.delta0);
        out.min_derivative = std::min(out.min_derivative, r.dDelta0_dE2);
        out.max_derivative = std::max(out.max_derivative, r.dDelta0_dE2);
    }

    for (std::size_t i = 0; i + 1 < out.records.size(); ++i) {
        auto& a = out.records[i];
        auto& b = out.records[i + 1];
        if (!a.valid || !b.valid) continue;
        if ((a.dDelta0_dE2 > 0) != (b.dDelta0_dE2 > 0) || a.dDelta0_dE2 == 0) {
            if (auto m = detail::refine_in_m(derivative_at, a.m, b.m, a.dDelta0_dE2, b.dDelta0_dE2,
                                             options.m_tolerance)) {
                RootPoint p{*m, delta0_at(*m).value_or(std::numeric_limits<double>::quiet_NaN()), 0.0};
                out.ips.push_back(p);
                (std::abs(*m - a.m) <= std::abs(*m - b.m) ? a : b).near_ip = true;
            }
        }
        if ((a.delta0 > 0) != (b.delta0 > 0) || a.delta0 == 0) {
            if (auto m = detail::refine_in_m(delta0_at, a.m, b.m, a.delta0, b.delta0, options.m_tolerance)) {
                out.pzds.push_back({*m, 0.0, derivative_at(*m).value_or(std::numeric_limits<double>::quiet_NaN())});
                (std::abs(*m - a.m) <= std::abs(*m - b.m) ? a : b).near_pzd = true;
            }
        }
    }
    return out;
}

/// Evenly spaced grid with `count` points including both ends.
inline std::vector<double> linear_grid(double lo, double hi, int count) {
    std::vector<double> g;
    if (count <= 0) return g;
    if (count == 1) return {lo};
    g.reserve(count);
    for (int i = 0; i < count; ++i) g.push_back(lo + (hi - lo) * i / (count - 1));
    return g;
}

/// Root in (-omega_e, 0) of (1/r) D/(D^2+G^2) + (D+omega_e)/((D+omega_e)^2+G^2); nulls K.
inline double symmetrizing_detuning(double gamma, double omega_e, double dipole_ratio_sq = 1.0 / 3.0) {
    detail::require(std::isfinite(gamma) && gamma > 0, "Gamma must be > 0");
    detail::require(std::isfinite(omega_e) && omega_e > 0, "omega_e must be > 0");
    detail::require(dipole_ratio_sq > 0 && dipole_ratio_sq <= 1, "dipole_ratio_sq must lie in (0, 1]");
    auto f = [&](double d) {
        const double e = d + omega_e;
        return d / (d * d + gamma * gamma) / dipole_ratio_sq + e / (e * e + gamma * gamma);
    };
    // Converged well past the required 1e-6 omega_e so that K(root) vanishes to
    // near machine precision.
    const double tol = 1e-13 * omega_e;
    // For Gamma << omega_e two extra roots appear within ~Gamma of the poles at
    // -omega_e and 0; the one kept is the root farthest from both.
    constexpr int cells = 4096;
    std::optional<double> best;
    double best_clearance = -1;
    double x0 = -omega_e, f0 = f(x0);
    for (int i = 1; i <= cells; ++i) {
        const double x1 = -omega_e + omega_e * i / cells;
        const double f1 = f(x1);
        if ((f0 > 0) != (f1 > 0)) {
            const auto [a, b] = boost::math::tools::bisect(
                f, x0, x1, [tol](double x, double y) { return std::abs(y - x) <= tol; });
            const double root = 0.5 * (a + b);
            const double clearance = std::min(root + omega_e, -root);
            if (clearance > best_clearance) {
                best = root;
                best_clearance = clearance;
            }
        }
        x0 = x1;
        f0 = f1;
    }
    if (!best) throw std::logic_error("symmetrizing detuning: no sign change in (-omega_e, 0)");
    return *best;
}

struct ServoScenario {
    double m_start = 2.0;
    double m_end = 3.6;
    int grid_steps = 81;               // m values (dwells) along the ramp
    double intensity_depth = 0.3;      // fractional intensity modulation
    double intensity_period = 1.0;     // s
    int periods_per_step = 4;          // intensity periods per dwell
    int samples_per_period = 200;
    double time_constant_ratio = 1.0 / 20.0;  // servo tau / intensity period
    double gain_scale = 1.0;                  // 0 opens the loop
};

struct ServoTrace {
    std::vector<double> time;
    std::vector<double> delta;      // locked detuning, rad/s
    std::vector<double> intensity;  // power scale factor
    std::vector<double> depth;      // m(t)
    std::vector<double> m_grid;     // dwell centres
    std::vector<double> response;   // |first harmonic of delta| per dwell, rad/s
    std::vector<double> minima;     // m at local minima of the response
    bool lock_lost = false;
};

/// Integral servo on the in-phase signal while m ramps slowly and the total
/// power is modulated harmonically; the response is the first harmonic of the
/// locked detuning at the intensity frequency, per dwell, after removing a
/// linear trend.
inline ServoTrace servo_lock_experiment(const SignalModel& model, const SpectrumFamily& family,
                                        const ServoScenario& scenario, const SweepOptions& options = {}) {
    detail::require(scenario.grid_steps >= 1, "servo scenario needs at least one dwell");
    detail::require(scenario.intensity_depth >= 0 && scenario.intensity_depth < 1,
                    "intensity depth must lie in [0, 1)");
    detail::require(scenario.intensity_period > 0, "intensity period must be > 0");
    detail::require(scenario.periods_per_step >= 2, "need at least 2 intensity periods per dwell");
    detail::require(scenario.samples_per_period >= 20, "need at least 20 samples per intensity period");
    detail::require(scenario.gain_scale >= 0, "servo gain must be >= 0");

    ServoTrace trace;
    trace.m_grid = linear_grid(scenario.m_start, scenario.m_end, scenario.grid_steps);
    const double dm = scenario.grid_steps > 1 ? trace.m_grid[1] - trace.m_grid[0] : 0.0;

    const FieldSpectrum start = family.at(trace.m_grid.front(), model.atom);
    const double width = derive_couplings(model.atom, start).broadened_width;
    const auto bracket = default_bracket(model.atom, start);
    ZeroCrossingOptions zc;
    zc.tolerance = options.root_tolerance;
    double delta = zero_crossing(model, start, zc);

    // Integral gain from the local slope dS/d delta at the initial lock point.
    const double h = 1e-3 * width;
    const double slope =
        (model.signal(start, delta + h).in_phase - model.signal(start, delta - h).in_phase) / (2.0 * h);
    detail::require(slope > 0, "in-phase signal slope must be positive at the lock point");
    const double tau = scenario.time_constant_ratio * scenario.intensity_period;
    const double gain = scenario.gain_scale / (tau * slope);

    const int per_dwell = scenario.periods_per_step * scenario.samples_per_period;
    const double dt = scenario.intensity_period / scenario.samples_per_period;
    const double w = two_pi / scenario.intensity_period;
    const double dwell_time = per_dwell * dt;

    for (int j = 0; j < scenario.grid_steps && !trace.lock_lost; ++j) {
        std::vector<double> window;
        window.reserve(per_dwell);
        for (int i = 0; i < per_dwell; ++i) {
            const double t = j * dwell_time + i * dt;
            // Slow ramp centred on the dwell's grid value.
            const double m = trace.m_grid[j] + dm * ((i + 0.5) / per_dwell - 0.5);
            const double scale = 1.0 + scenario.intensity_depth * std::sin(w * t);
            const FieldSpectrum s = family.at(m, model.atom).scaled_power(scale);
            double err = 0;
            try {
                err = model.signal(s, delta).in_phase;
            } catch (const std::exception&) {
                trace.lock_lost = true;
                break;
            }
            trace.time.push_back(t);
            trace.delta.push_back(delta);
            trace.intensity.push_back(scale);
            trace.depth.push_back(m);
            window.push_back(delta);
            delta -= gain * err * dt;
            if (delta < bracket.first - width || delta > bracket.second + width) {
                trace.lock_lost = true;
                break;
            }
        }
        if (trace.lock_lost) break;

        // Detrend the dwell (least-squares line) and demodulate per period.
        const double n = static_cast<double>(window.size());
        double st = 0, sy = 0, stt = 0, sty = 0;
        for (std::size_t i = 0; i < window.size(); ++i) {
            const double x = static_cast<double>(i);
            st += x;
            sy += window[i];
            stt += x * x;
            sty += x * window[i];
        }
        const double b = (n * sty - st * sy) / (n * stt - st * st);
        const double a = (sy - b * st) / n;
        double amp = 0;
        for (int p = 0; p < scenario.periods_per_step; ++p) {
            double c = 0, s = 0;
            for (int i = 0; i < scenario.samples_per_period; ++i) {
                const int k = p * scenario.samples_per_period + i;
                const double v = window[k] - (a + b * k);
                const double ph = w * (j * dwell_time + k * dt);
                c += v * std::cos(ph);
                s += v * std::sin(ph);
            }
            c *= 2.0 / scenario.samples_per_period;
            s *= 2.0 / scenario.samples_per_period;
            amp += std::hypot(c, s);
        }
        trace.response.push_back(amp / scenario.periods_per_step);
    }

    for (std::size_t j = 1; j + 1 < trace.response.size(); ++j)
        if (trace.response[j] < trace.response[j - 1] && trace.response[j] <= trace.response[j + 1])
            trace.minima.push_back(trace.m_grid[j]);
    return trace;
}

} // namespace cptshift

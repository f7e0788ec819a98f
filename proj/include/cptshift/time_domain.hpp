#pragma once

// Direct integration of the reduced ground-state equations under phase
// modulation, lock-in demodulation of the absorption, and the steady state of
// the full four-level double-Lambda density matrix used to check the reduction.

#include <array>
#include <cmath>
#include <complex>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "cptshift/csv.hpp"
#include "cptshift/error.hpp"
#include "cptshift/harmonic.hpp"
#include "cptshift/model.hpp"
#include "cptshift/signal.hpp"

namespace cptshift {

struct GroundState {
    double rho22 = 0.5;
    double rho11 = 0.5;
    complex rho21{0.0, 0.0};
};

struct TimeTrace {
    double period = 0;         // 2 pi / omega_m
    int periods = 0;           // whole periods recorded
    std::vector<double> time;  // uniform, spans `periods` periods, both ends included
    std::vector<GroundState> states;
    std::vector<double> kappa;
};

/// Zero fields mean "choose automatically".
struct IntegrationSettings {
    double transient = 0;     // s; default 20/Gamma_g~ or 5 periods, whichever is longer
    int steps_per_period = 0; // default: smallest count meeting both step bounds
    int periods = 4;          // recorded periods after the transient
};

/// kappa = (2P/(gamma Gamma)) (L^2 rho22 + R^2 rho11 - 2 L R Re rho21).
inline double absorption(const GroundState& s, const DerivedCouplings& c) {
    const double l = c.reduced_left, r = c.reduced_right;
    return c.absorption_scale * (l * l * s.rho22 + r * r * s.rho11 - 2.0 * l * r * s.rho21.real());
}

namespace detail {

struct Resolved {
    int steps_per_period;
    int transient_periods;
};

inline Resolved resolve_settings(const IntegrationSettings& s, double period, double width) {
    require(s.periods >= 4, "at least 4 recorded periods are required");
    const double min_steps = std::max(200.0, period / (0.02 / width));
    int steps = s.steps_per_period;
    if (steps == 0) steps = static_cast<int>(std::ceil(min_steps - 1e-9));
    require(steps >= min_steps - 1e-9,
            "step exceeds min(T/200, 0.02/Gamma_g~); need at least " +
                std::to_string(static_cast<int>(std::ceil(min_steps))) + " steps per period");

    const double min_transient = std::max(10.0 / width, 5.0 * period);
    double transient = s.transient;
    if (transient == 0) transient = std::max(20.0 / width, 5.0 * period);
    require(transient >= min_transient * (1 - 1e-12), "transient shorter than max(10/Gamma_g~, 5 periods)");
    return {steps, static_cast<int>(std::ceil(transient / period - 1e-9))};
}

} // namespace detail

inline TimeTrace integrate_ground_state(const DerivedCouplings& c, const ModulationParams& mod, double detuning,
                                        const IntegrationSettings& settings = {}) {
    mod.validate();
    const double w = mod.frequency;
    const double period = two_pi / w;
    const double g = c.broadened_width;
    const auto [steps, transient_periods] = detail::resolve_settings(settings, period, g);
    const double h = period / steps;

    const double dt = shifted_detuning(c, detuning);
    const double aw = mod.index * w;
    const double vl = c.pump_left, vr = c.pump_right, K = c.asymmetry, gg = c.ground_relaxation;

    using State = std::array<double, 4>;  // rho22, rho11, Re rho21, Im rho21
    auto rhs = [&](double t, const State& y) {
        const complex r21(y[2], y[3]);
        const complex d21 = c.two_photon - complex(0, K) * (y[0] - y[1]) +
                            complex(0, 2.0 * (dt + aw * std::cos(w * t))) * r21 - g * r21;
        return State{-vl * y[0] + vr * y[1] + 2.0 * K * y[3] - gg * (y[0] - 0.5),
                     -vr * y[1] + vl * y[0] - 2.0 * K * y[3] - gg * (y[1] - 0.5), d21.real(), d21.imag()};
    };
    auto axpy = [](const State& y, double a, const State& k) {
        return State{y[0] + a * k[0], y[1] + a * k[1], y[2] + a * k[2], y[3] + a * k[3]};
    };
    auto step = [&](double t, State& y) {
        const State k1 = rhs(t, y);
        const State k2 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k1));
        const State k3 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k2));
        const State k4 = rhs(t + h, axpy(y, h, k3));
        for (int i = 0; i < 4; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    };

    State y{0.5, 0.5, 0.0, 0.0};
    const long transient_steps = static_cast<long>(transient_periods) * steps;
    for (long i = 0; i < transient_steps; ++i) step(i * h, y);

    TimeTrace trace;
    trace.period = period;
    trace.periods = settings.periods;
    const long recorded = static_cast<long>(settings.periods) * steps;
    trace.time.reserve(recorded + 1);
    trace.states.reserve(recorded + 1);
    trace.kappa.reserve(recorded + 1);
    for (long i = 0;; ++i) {
        const double t = (transient_steps + i) * h;
        GroundState s{y[0], y[1], complex(y[2], y[3])};
        trace.time.push_back(t);
        trace.states.push_back(s);
        trace.kappa.push_back(absorption(s, c));
        if (i == recorded) break;
        step(t, y);
    }
    return trace;
}

inline TimeTrace integrate_ground_state(const AtomParams& atom, const FieldSpectrum& spectrum,
                                        const ModulationParams& mod, double detuning,
                                        const IntegrationSettings& settings = {}) {
    return integrate_ground_state(derive_couplings(atom, spectrum), mod, detuning, settings);
}

/// S = (2/T) int kappa cos(omega_m t + alpha), Q = (2/T) int kappa sin(omega_m t + alpha), trapezoid rule.
inline LockInResult lockin(const TimeTrace& trace, double omega_m, double alpha = 0.0) {
    detail::require(omega_m > 0, "modulation frequency must be > 0");
    detail::require(trace.time.size() >= 2 && trace.time.size() == trace.kappa.size(), "trace is empty");
    const double span = trace.time.back() - trace.time.front();
    const double cycles = span * omega_m / two_pi;
    const double whole = std::round(cycles);
    detail::require(whole >= 4 && std::abs(cycles - whole) <= 1e-9 * whole,
                    "trace must span an integer number (>= 4) of modulation periods");

    double s = 0, q = 0;
    for (std::size_t i = 0; i + 1 < trace.time.size(); ++i) {
        const double t0 = trace.time[i], t1 = trace.time[i + 1];
        const double f0 = trace.kappa[i], f1 = trace.kappa[i + 1];
        s += 0.5 * (t1 - t0) * (f0 * std::cos(omega_m * t0 + alpha) + f1 * std::cos(omega_m * t1 + alpha));
        q += 0.5 * (t1 - t0) * (f0 * std::sin(omega_m * t0 + alpha) + f1 * std::sin(omega_m * t1 + alpha));
    }
    return {2.0 * s / span, 2.0 * q / span, alpha};
}

inline LockInResult time_domain_signals(const DerivedCouplings& c, const ModulationParams& mod, double detuning,
                                        const IntegrationSettings& settings = {}) {
    return lockin(integrate_ground_state(c, mod, detuning, settings), mod.frequency, mod.detection_phase);
}

/// Columns t, rho22, rho11, Re_rho21, Im_rho21, kappa.
inline void write_trace_csv(const TimeTrace& trace, const std::filesystem::path& path) {
    std::vector<std::vector<double>> rows;
    rows.reserve(trace.time.size());
    for (std::size_t i = 0; i < trace.time.size(); ++i) {
        const auto& s = trace.states[i];
        rows.push_back({trace.time[i], s.rho22, s.rho11, s.rho21.real(), s.rho21.imag(), trace.kappa[i]});
    }
    emit_csv(path, {"t", "rho22", "rho11", "Re_rho21", "Im_rho21", "kappa"}, rows);
}

/// Steady state of the four-level system, state order (u, d, 2, 1).
struct FullLambdaState {
    Eigen::Matrix4cd rho;
    double rcond = 0;

    double excited_population() const { return (rho(0, 0) + rho(1, 1)).real(); }
    double trace() const { return rho.trace().real(); }
    GroundState ground() const { return {rho(2, 2).real(), rho(3, 3).real(), rho(2, 3)}; }
};

/// Bichromatic resonant drive only (no phase modulation), rotating frame.
/// E_{-1} couples |2>, E_{+1} couples |1> with the opposite sign; the lower
/// excited level sees sqrt(dipole_ratio_sq) times each amplitude and decays at
/// gamma * dipole_ratio_sq.
inline FullLambdaState steady_state_full_lambda(const AtomParams& atom, double e_left, double e_right,
                                                double detuning) {
    atom.validate();
    detail::require(e_left >= 0 && e_right >= 0, "field amplitudes must be >= 0");
    const double s = std::sqrt(atom.dipole_ratio_sq);
    const double dl = atom.one_photon_detuning;

    Eigen::Matrix4cd h = Eigen::Matrix4cd::Zero();
    h(0, 0) = -dl;
    h(1, 1) = -dl - atom.excited_splitting;
    h(2, 2) = -detuning;
    h(3, 3) = detuning;
    h(0, 2) = e_left;
    h(0, 3) = -e_right;
    h(1, 2) = s * e_left;
    h(1, 3) = -s * e_right;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) h(j, i) = std::conj(h(i, j));

    const double gu = atom.excited_decay, gd = atom.excited_decay * atom.dipole_ratio_sq;
    const double gg = atom.ground_relaxation, gam = atom.optical_width;

    auto generator = [&](const Eigen::Matrix4cd& rho) {
        Eigen::Matrix4cd out = complex(0, -1) * (h * rho - rho * h);
        out(0, 0) -= gu * rho(0, 0);
        out(1, 1) -= gd * rho(1, 1);
        for (int g : {2, 3}) out(g, g) += -gg * (rho(g, g) - 0.5) + 0.5 * (gu * rho(0, 0) + gd * rho(1, 1));
        out(2, 3) -= gg * rho(2, 3);
        out(3, 2) -= gg * rho(3, 2);
        for (int e : {0, 1})
            for (int g : {2, 3}) {
                out(e, g) -= gam * rho(e, g);
                out(g, e) -= gam * rho(g, e);
            }
        return out;
    };

    // 4 real diagonal entries followed by (Re, Im) of the 6 upper-triangle entries.
    constexpr std::array<std::pair<int, int>, 6> upper{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
    using Vec16 = Eigen::Matrix<double, 16, 1>;
    auto pack = [&](const Eigen::Matrix4cd& m) {
        Vec16 x;
        for (int i = 0; i < 4; ++i) x(i) = m(i, i).real();
        for (int k = 0; k < 6; ++k) {
            x(4 + 2 * k) = m(upper[k].first, upper[k].second).real();
            x(5 + 2 * k) = m(upper[k].first, upper[k].second).imag();
        }
        return x;
    };
    auto unpack = [&](const Vec16& x) {
        Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
        for (int i = 0; i < 4; ++i) m(i, i) = x(i);
        for (int k = 0; k < 6; ++k) {
            const auto [i, j] = upper[k];
            m(i, j) = complex(x(4 + 2 * k), x(5 + 2 * k));
            m(j, i) = std::conj(m(i, j));
        }
        return m;
    };

    // The generator is affine in rho: L(rho) = M x + b.
    const Vec16 b = pack(generator(Eigen::Matrix4cd::Zero()));
    Eigen::Matrix<double, 16, 16> m;
    for (int k = 0; k < 16; ++k) m.col(k) = pack(generator(unpack(Vec16::Unit(k)))) - b;

    Eigen::PartialPivLU<Eigen::Matrix<double, 16, 16>> lu(m);
    FullLambdaState out;
    out.rcond = lu.rcond();
    if (!(out.rcond > 1e-16)) throw SingularSystem("double-Lambda steady-state system is singular", out.rcond);
    out.rho = unpack(lu.solve(-b));
    return out;
}

} // namespace cptshift

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "common.hpp"

using namespace cptshift;
using namespace testing_support;

namespace {

double reference_width(const AtomParams& atom, double eps = 0.0) {
    return derive_couplings(atom, family_spectrum(2.9, eps, atom)).broadened_width;
}

SignalModel make_model(SignalPath path, const AtomParams& atom, double ratio, double index = 0.2) {
    SignalModel m;
    m.path = path;
    m.atom = atom;
    m.mod = {index, ratio * reference_width(atom), 0.0};
    return m;
}

// E_{+-2}^2 = 3/4 E_{+-1}^2 cancels delta_nr term by term (carrier absent).
FieldSpectrum nonresonant_free_spectrum(const AtomParams& atom) {
    const double e1 = from_mhz(0.5);
    const double e2 = std::sqrt(0.75) * e1;
    return FieldSpectrum(atom.sideband_spacing(), {{-2, e2}, {-1, e1}, {1, e1}, {2, e2}});
}

} // namespace

TEST(Sweep, LinearizedRootIsPrintedShiftSum) {
    const AtomParams atom;
    for (double eps : {0.0, 0.1, 0.2}) {
        for (double ratio : {0.25, 1.0}) {
            const auto model = make_model(SignalPath::linearized, atom, ratio);
            const auto spec = family_spectrum(2.6, eps, atom);
            const auto c = derive_couplings(atom, spec);
            const double g = c.broadened_width, w = model.mod.frequency;
            const double l = c.reduced_left, r = c.reduced_right;
            const double das = c.asymmetry * (l * l - r * r) / (l * r) * (g * g + w * w) / (g * g);
            const double expected = -0.5 * (c.resonant_shift + c.nonresonant_shift + das);
            ZeroCrossingOptions opt;
            opt.tolerance = 1e-13;
            const double root = zero_crossing(model, spec, opt);
            EXPECT_NEAR(root, expected, 1e-10 * g) << eps << " " << ratio;
            EXPECT_NEAR(asymmetry_shift(c, model.mod).predicted_zero, expected, 1e-12 * g);
        }
    }
}

TEST(Sweep, NoShiftWithoutAsymmetryOrNonresonantTerms) {
    const AtomParams atom = symmetric_atom();
    const auto spec = nonresonant_free_spectrum(atom);
    const auto c = derive_couplings(atom, spec);
    ASSERT_LT(std::abs(c.nonresonant_shift), 1e-12 * c.broadened_width);
    ASSERT_LT(std::abs(c.asymmetry), 1e-9 * c.two_photon);
    for (auto path : {SignalPath::linearized, SignalPath::harmonic}) {
        auto model = make_model(path, atom, 0.5);
        ZeroCrossingOptions opt;
        opt.tolerance = 1e-12;
        EXPECT_NEAR(zero_crossing(model, spec, opt), 0.0, 1e-8 * c.broadened_width) << to_string(path);
    }
}

TEST(Sweep, TimeDomainAndHarmonicCrossingsAgree) {
    const AtomParams atom;
    for (double eps : {0.0, 0.2}) {
        const auto spec = family_spectrum(2.4, eps, atom);
        const double g = derive_couplings(atom, spec).broadened_width;
        const auto h = make_model(SignalPath::harmonic, atom, 0.5);
        auto td = make_model(SignalPath::time_domain, atom, 0.5);
        ZeroCrossingOptions opt;
        opt.tolerance = 1e-6;
        const double dh = zero_crossing(h, spec, opt);
        const double dt = zero_crossing(td, spec, opt);
        EXPECT_LT(std::abs(dh - dt), 0.01 * g) << eps;
    }
}

TEST(Sweep, NoCrossingWhenBracketMissesRoot) {
    const AtomParams atom;
    const auto model = make_model(SignalPath::linearized, atom, 0.5);
    const auto spec = family_spectrum(2.4, 0.0, atom);
    const double root = zero_crossing(model, spec);
    const double g = derive_couplings(atom, spec).broadened_width;
    ZeroCrossingOptions opt;
    opt.bracket = std::make_pair(root + 0.1 * g, root + 0.5 * g);
    EXPECT_THROW(zero_crossing(model, spec, opt), NoCrossing);
}

TEST(Sweep, WeakFieldSymmetricFamilyHasCoincidentIpsAndPzds) {
    // epsilon = 0: delta_0 = -delta_nr/2 is linear in E^2, so every PZD is an IP.
    const AtomParams atom;
    const auto model = make_model(SignalPath::linearized, atom, 0.5);
    const auto res = find_ips_and_pzds(model, SpectrumFamily{0.0, 2, default_power()}, linear_grid(2.0, 3.6, 33));
    ASSERT_EQ(res.ips.size(), 2u);
    ASSERT_EQ(res.pzds.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_NEAR(res.ips[i].m, res.pzds[i].m, 1e-6) << i;
        EXPECT_LT(std::abs(res.ips[i].delta0), 1e-6 * reference_width(atom)) << i;
    }
    // Oracle: zeros of delta_nr(m) by bisection.
    auto dnr = [&](double m) { return derive_couplings(atom, family_spectrum(m, 0.0, atom)).nonresonant_shift; };
    auto bisect = [&](double lo, double hi) {
        for (int i = 0; i < 60; ++i) {
            const double mid = 0.5 * (lo + hi);
            ((dnr(lo) > 0) == (dnr(mid) > 0) ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    EXPECT_NEAR(res.pzds[0].m, bisect(2.3, 2.6), 1e-7);
    EXPECT_NEAR(res.pzds[1].m, bisect(3.2, 3.5), 1e-7);
}

TEST(Sweep, AsymmetricFamilySeparatesIpsFromPzds) {
    const AtomParams atom;
    const auto model = make_model(SignalPath::linearized, atom, 1.0);
    const auto res = find_ips_and_pzds(model, SpectrumFamily{0.2, 2, default_power()}, linear_grid(1.5, 4.2, 55));
    ASSERT_EQ(res.ips.size(), 2u);
    ASSERT_EQ(res.pzds.size(), 2u);
    for (const auto& r : res.records) EXPECT_TRUE(r.valid && r.richardson_ok) << r.m;
    EXPECT_NEAR(res.ips[0].m, 2.58, 0.01);
    EXPECT_NEAR(res.ips[1].m, 3.28, 0.01);
    EXPECT_NEAR(to_hz(res.ips[0].delta0), -13.46, 0.2);
    EXPECT_NEAR(to_hz(res.ips[1].delta0), -21.4, 0.3);
    EXPECT_GT(std::abs(res.ips[0].delta0 - res.ips[1].delta0), from_hz(1.0));
    EXPECT_GT(std::abs(res.ips[0].m - res.pzds[0].m), 0.05);
}

TEST(Sweep, IpShiftShrinksWithModulationFrequency) {
    const AtomParams atom;
    double prev = 0;
    for (double ratio : {0.05, 0.25, 0.5, 1.0}) {
        const auto model = make_model(SignalPath::linearized, atom, ratio);
        const auto res =
            find_ips_and_pzds(model, SpectrumFamily{0.2, 2, default_power()}, linear_grid(1.5, 4.2, 55));
        ASSERT_EQ(res.ips.size(), 2u) << ratio;
        const double size = std::abs(res.ips[0].delta0) + std::abs(res.ips[1].delta0);
        EXPECT_GT(size, prev) << ratio;
        prev = size;
        if (ratio == 0.05) {
            EXPECT_LT(std::abs(res.ips[0].m - res.pzds[0].m), 0.005);
        }
    }
}

TEST(Sweep, IpDerivativeVanishes) {
    const AtomParams atom;
    const auto model = make_model(SignalPath::linearized, atom, 1.0);
    const SpectrumFamily fam{0.2, 2, default_power()};
    const auto res = find_ips_and_pzds(model, fam, linear_grid(2.0, 3.6, 33));
    ASSERT_FALSE(res.ips.empty());
    const auto at = sweep_point(model, fam, res.ips[0].m);
    const auto off = sweep_point(model, fam, res.ips[0].m + 0.1);
    EXPECT_LT(std::abs(at.dDelta0_dE2), 1e-3 * std::abs(off.dDelta0_dE2));
}

TEST(Sweep, DerivativeMatchesFiniteDifferenceOracle) {
    const AtomParams atom;
    const auto model = make_model(SignalPath::harmonic, atom, 0.5);
    const SpectrumFamily fam{0.2, 2, default_power()};
    const double m = 2.7;
    const auto rec = sweep_point(model, fam, m);
    ASSERT_TRUE(rec.valid);
    ZeroCrossingOptions opt;
    opt.tolerance = 1e-12;
    const double h = 0.01;
    const double up = zero_crossing(model, fam.at(m, atom).scaled_power(1 + h), opt);
    const double dn = zero_crossing(model, fam.at(m, atom).scaled_power(1 - h), opt);
    const double oracle = (up - dn) / (2 * h * fam.total_power);
    EXPECT_NEAR(rec.dDelta0_dE2, oracle, 1e-3 * std::abs(oracle));
}

TEST(Sweep, Deterministic) {
    const AtomParams atom;
    const auto model = make_model(SignalPath::harmonic, atom, 0.5);
    const SpectrumFamily fam{0.2, 2, default_power()};
    const auto a = find_ips_and_pzds(model, fam, linear_grid(2.0, 3.0, 11));
    const auto b = find_ips_and_pzds(model, fam, linear_grid(2.0, 3.0, 11));
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        EXPECT_EQ(a.records[i].delta0, b.records[i].delta0);
        EXPECT_EQ(a.records[i].dDelta0_dE2, b.records[i].dDelta0_dE2);
    }
}

TEST(Sweep, LinearGrid) {
    EXPECT_TRUE(linear_grid(1, 2, 0).empty());
    EXPECT_EQ(linear_grid(1, 2, 1), std::vector<double>{1.0});
    const auto g = linear_grid(1, 2, 5);
    ASSERT_EQ(g.size(), 5u);
    EXPECT_EQ(g.front(), 1.0);
    EXPECT_EQ(g.back(), 2.0);
    EXPECT_DOUBLE_EQ(g[2], 1.5);
}

TEST(Symmetrizing, WideLineValue) {
    const double d = symmetrizing_detuning(from_mhz(1000), from_mhz(817));
    EXPECT_NEAR(to_mhz(d), -157.0, 2.0);
}

TEST(Symmetrizing, NarrowLineLimit) {
    // Gamma -> 0: 3/D + 1/(D + omega_e) = 0 gives D = -3/4 omega_e.
    const double d = symmetrizing_detuning(from_mhz(1e-3), from_mhz(817));
    EXPECT_NEAR(to_mhz(d), -0.75 * 817, 0.5);
}

TEST(Symmetrizing, NullsAsymmetryCoupling) {
    for (double gamma : {100.0, 380.0, 1000.0}) {
        AtomParams atom;
        atom.optical_width = from_mhz(gamma);
        atom.one_photon_detuning = symmetrizing_detuning(atom.optical_width, atom.excited_splitting);
        const auto c = derive_couplings(atom, family_spectrum(2.4, 0.3, atom));
        EXPECT_LT(std::abs(c.asymmetry), 1e-9 * c.two_photon) << gamma;
        EXPECT_GT(atom.one_photon_detuning, -atom.excited_splitting);
        EXPECT_LT(atom.one_photon_detuning, 0.0);
    }
}

TEST(Symmetrizing, RejectsBadInput) {
    EXPECT_THROW(symmetrizing_detuning(0, 1), InvalidInput);
    EXPECT_THROW(symmetrizing_detuning(1, -1), InvalidInput);
    EXPECT_THROW(symmetrizing_detuning(1, 1, 0), InvalidInput);
}

TEST(Symmetrizing, AsymmetricSpectrumMatchesSymmetricLightShiftFrame) {
    // At K = 0 the asymmetry only enters through delta_r, so the crossing in the
    // delta~ frame is the same as for the symmetrized spectrum.
    const AtomParams atom = symmetric_atom();
    const auto model = make_model(SignalPath::harmonic, atom, 0.5);
    const auto asym = family_spectrum(2.4, 0.3, atom);
    const auto sym = asym.symmetrized();
    const auto ca = derive_couplings(atom, asym), cs = derive_couplings(atom, sym);
    ZeroCrossingOptions opt;
    opt.tolerance = 1e-10;
    const double da = shifted_detuning(ca, zero_crossing(model, asym, opt));
    const double ds = shifted_detuning(cs, zero_crossing(model, sym, opt));
    EXPECT_NEAR(da, ds, 1e-6 * ca.broadened_width);
}

TEST(Servo, OpenLoopHoldsDetuning) {
    const AtomParams atom;
    const auto model = make_model(SignalPath::linearized, atom, 0.5);
    ServoScenario sc;
    sc.grid_steps = 3;
    sc.gain_scale = 0;
    const auto tr = servo_lock_experiment(model, SpectrumFamily{0.2, 2, default_power()}, sc);
    ASSERT_FALSE(tr.delta.empty());
    for (double d : tr.delta) EXPECT_EQ(d, tr.delta.front());
}

TEST(Servo, ConstantIntensityLocksToCrossing) {
    const AtomParams atom;
    const auto model = make_model(SignalPath::linearized, atom, 0.5);
    const SpectrumFamily fam{0.2, 2, default_power()};
    ServoScenario sc;
    sc.m_start = sc.m_end = 2.7;
    sc.grid_steps = 1;
    sc.intensity_depth = 0;
    sc.periods_per_step = 8;
    const auto tr = servo_lock_experiment(model, fam, sc);
    ASSERT_FALSE(tr.lock_lost);
    const double expected = zero_crossing(model, fam.at(2.7, atom));
    const double g = reference_width(atom, 0.2);
    EXPECT_NEAR(tr.delta.back(), expected, 2e-4 * g);
    EXPECT_LT(tr.response.front(), 1e-6 * g);
}

TEST(Servo, ResponseMinimaSitAtIps) {
    const AtomParams atom;
    const auto model = make_model(SignalPath::linearized, atom, 0.5);
    const SpectrumFamily fam{0.2, 2, default_power()};
    ServoScenario sc;
    const auto tr = servo_lock_experiment(model, fam, sc);
    ASSERT_FALSE(tr.lock_lost);
    const double step = tr.m_grid[1] - tr.m_grid[0];
    const auto ips = find_ips_and_pzds(model, fam, linear_grid(sc.m_start, sc.m_end, 41)).ips;
    ASSERT_EQ(ips.size(), 2u);
    ASSERT_EQ(tr.minima.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_LE(std::abs(tr.minima[i] - ips[i].m), step) << i;
}

TEST(Servo, RejectsBadScenario) {
    const AtomParams atom;
    const auto model = make_model(SignalPath::linearized, atom, 0.5);
    const SpectrumFamily fam{0.2, 2, default_power()};
    ServoScenario sc;
    sc.intensity_depth = 1.0;
    EXPECT_THROW(servo_lock_experiment(model, fam, sc), InvalidInput);
    sc = {};
    sc.periods_per_step = 1;
    EXPECT_THROW(servo_lock_experiment(model, fam, sc), InvalidInput);
}

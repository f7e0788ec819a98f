#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "cptshift/cptshift.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cmd_validate(const std::string& path) {
    const auto cfg = cptshift::parse_config(read_file(path));
    std::cout << "ok: " << path << " (" << cptshift::to_string(cfg.sweep.axis) << " axis, "
              << cptshift::to_string(cfg.sweep.path) << " path)\n";
    return 0;
}

int cmd_run(const std::string& path) {
    const auto cfg = cptshift::parse_config(read_file(path));
    const auto run = cptshift::run_scenario(cfg);
    for (std::size_t i = 0; i < run.results.size(); ++i) {
        const auto& r = run.results[i];
        std::cout << cptshift::to_string(cfg.sweep.axis);
        if (cfg.sweep.axis != cptshift::SweepAxis::m) std::cout << " = " << run.values[i];
        std::cout << ": " << r.ips.size() << " IP(s), " << r.pzds.size() << " PZD(s)\n";
        for (const auto& ip : r.ips)
            std::printf("  IP  m = %.6f  delta0 = %.6g Hz\n", ip.m, cptshift::to_hz(ip.delta0));
        for (const auto& pz : r.pzds) std::printf("  PZD m = %.6f\n", pz.m);
        if (r.ips.empty() && r.pzds.empty())
            std::printf("  no roots; delta0 in [%.6g, %.6g] Hz\n", cptshift::to_hz(r.min_delta0),
                        cptshift::to_hz(r.max_delta0));
    }
    for (const auto& f : run.files) std::cout << "wrote " << f.string() << '\n';
    return 0;
}

int cmd_sym_detuning(double gamma_mhz, double omega_e_mhz, double ratio) {
    const double d = cptshift::symmetrizing_detuning(cptshift::from_mhz(gamma_mhz),
                                                     cptshift::from_mhz(omega_e_mhz), ratio);
    std::printf("%.12g\n", cptshift::to_mhz(d));
    return 0;
}

int cmd_trace(const std::string& path, double m, double detuning_hz, const std::string& out) {
    const auto cfg = cptshift::parse_config(read_file(path));
    const auto p = cptshift::resolve_point(cfg, cfg.sweep.values.empty()
                                                    ? std::nullopt
                                                    : std::optional<double>(cfg.sweep.values.front()));
    const auto trace = cptshift::integrate_ground_state(cfg.atom, p.family.at(m, cfg.atom), p.model.mod,
                                                        cptshift::from_hz(detuning_hz));
    cptshift::write_trace_csv(trace, out);
    const auto s = cptshift::lockin(trace, p.model.mod.frequency, p.model.mod.detection_phase);
    std::printf("S = %.12g  Q = %.12g\nwrote %s\n", s.in_phase, s.quadrature, out.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CPT light-shift and error-signal simulator"};
    app.set_version_flag("--version", std::string(CPTSHIFT_VERSION));
    app.require_subcommand(1);

    std::string config;
    auto* run = app.add_subcommand("run", "run a scenario and write CSV output");
    run->add_option("config", config, "scenario JSON")->required()->check(CLI::ExistingFile);

    auto* validate = app.add_subcommand("validate", "check a scenario file without running it");
    validate->add_option("config", config, "scenario JSON")->required()->check(CLI::ExistingFile);

    double gamma = 0, omega_e = 0, ratio = 1.0 / 3.0;
    auto* sym = app.add_subcommand("sym-detuning", "one-photon detuning that nulls the asymmetry coupling (MHz)");
    sym->add_option("--gamma", gamma, "optical width Gamma/2pi, MHz")->required()->check(CLI::PositiveNumber);
    sym->add_option("--omega-e", omega_e, "excited splitting omega_e/2pi, MHz")->required()->check(CLI::PositiveNumber);
    sym->add_option("--dipole-ratio-sq", ratio, "d_d^2/d_u^2")->check(CLI::Range(1e-12, 1.0));

    double m = 2.4, detuning = 0;
    std::string out = "trace.csv";
    auto* trace = app.add_subcommand("trace", "dump one time-domain trace");
    trace->add_option("config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
    trace->add_option("--m", m, "modulation depth of the spectrum family");
    trace->add_option("--detuning-hz", detuning, "two-photon detuning delta/2pi, Hz");
    trace->add_option("--out", out, "output CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) return cmd_run(config);
        if (*validate) return cmd_validate(config);
        if (*sym) return cmd_sym_detuning(gamma, omega_e, ratio);
        if (*trace) return cmd_trace(config, m, detuning, out);
    } catch (const cptshift::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

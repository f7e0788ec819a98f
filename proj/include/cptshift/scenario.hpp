#pragma once

// Scenario orchestration: one config -> one m-sweep per outer sweep value,
// written as CSV, plus a roots table and a manifest holding the resolved config.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cptshift/config.hpp"
#include "cptshift/csv.hpp"
#include "cptshift/sweep.hpp"

#ifndef CPTSHIFT_VERSION
#define CPTSHIFT_VERSION "unknown"
#endif

namespace cptshift {

inline constexpr const char* output_dir_env = "CPTSHIFT_OUTPUT_DIR";

/// CPTSHIFT_OUTPUT_DIR wins over the configured directory when set and non-empty.
inline std::filesystem::path resolve_output_dir(const ScenarioConfig& cfg) {
    if (const char* env = std::getenv(output_dir_env); env && *env) return env;
    return cfg.output.directory;
}

struct ScenarioRun {
    std::filesystem::path directory;
    std::vector<std::filesystem::path> files;
    std::vector<SweepResult> results;  // one per outer value
    std::vector<double> values;        // outer values (a single NaN-free 0 for the m axis)
};

/// Signal model and family for one outer sweep value.
struct ResolvedPoint {
    SignalModel model;
    SpectrumFamily family;
    double reference_width = 0;  // Gamma_g~ at the reference depth, symmetric member
};

inline ResolvedPoint resolve_point(const ScenarioConfig& cfg, std::optional<double> value) {
    ResolvedPoint p;
    p.model.path = cfg.sweep.path;
    p.model.atom = cfg.atom;
    p.model.truncation = cfg.sweep.truncation;
    if (cfg.cell) p.model.cell = *cfg.cell;
    p.family.asymmetry = cfg.spectrum.asymmetry;
    p.family.max_order = cfg.spectrum.max_order;
    p.family.total_power = cfg.spectrum.total_rabi * cfg.spectrum.total_rabi;

    std::optional<double> ratio = cfg.modulation.frequency_ratio;
    if (value) {
        switch (cfg.sweep.axis) {
        case SweepAxis::omega_m: ratio = *value; break;
        case SweepAxis::beta: p.model.cell.attenuation = *value / p.model.cell.length; break;
        case SweepAxis::epsilon: p.family.asymmetry = *value; break;
        case SweepAxis::power: p.family.total_power = from_mhz(*value) * from_mhz(*value); break;
        case SweepAxis::m: break;
        }
    }

    SpectrumFamily symmetric = p.family;
    symmetric.asymmetry = 0;
    p.reference_width =
        derive_couplings(cfg.atom, symmetric.at(cfg.reference_depth(), cfg.atom)).broadened_width;
    p.model.mod.index = cfg.modulation.index;
    p.model.mod.detection_phase = cfg.modulation.detection_phase;
    p.model.mod.frequency = ratio ? *ratio * p.reference_width : cfg.modulation.frequency.value_or(0.0);
    return p;
}

inline std::string value_tag(SweepAxis axis, std::size_t index, double value) {
    if (axis == SweepAxis::m) return "";
    std::string v = format_number(value);
    for (char& c : v)
        if (c == '-') c = 'm';
    return std::string("_") + to_string(axis) + "_" + std::to_string(index) + "_" + v;
}

// Output units: E2 in MHz^2 ((E/2pi)^2), delta0 in Hz, dDelta0_dE2 in Hz/MHz^2.
inline constexpr double mhz2 = from_mhz(1.0) * from_mhz(1.0);

inline ScenarioRun run_scenario(const ScenarioConfig& cfg) {
    ScenarioRun run;
    run.directory = resolve_output_dir(cfg);
    std::filesystem::create_directories(run.directory);

    const std::vector<double> m_grid =
        linear_grid(cfg.spectrum.m_min, cfg.spectrum.m_max, cfg.spectrum.m_points);
    std::vector<std::optional<double>> outer;
    if (cfg.sweep.axis == SweepAxis::m) outer.push_back(std::nullopt);
    for (double v : cfg.sweep.values) outer.push_back(v);

    nlohmann::json manifest;
    manifest["tool"] = "cptshift";
    manifest["version"] = CPTSHIFT_VERSION;
    manifest["config"] = nlohmann::json::parse(serialize(cfg));
    manifest["m_grid"] = m_grid;
    manifest["units"] = {{"m", "dimensionless"},
                         {"E2", "MHz^2"},
                         {"delta0_Hz", "Hz"},
                         {"dDelta0_dE2", "Hz/MHz^2"}};
    manifest["runs"] = nlohmann::json::array();

    std::vector<std::vector<std::string>> roots;
    for (std::size_t i = 0; i < outer.size(); ++i) {
        ResolvedPoint p;
        try {
            p = resolve_point(cfg, outer[i]);
        } catch (const std::exception& e) {
            throw std::runtime_error("scenario '" + cfg.output.prefix + "', " + to_string(cfg.sweep.axis) +
                                     " value #" + std::to_string(i) + ": " + e.what());
        }
        SweepResult result;
        try {
            result = find_ips_and_pzds(p.model, p.family, m_grid);
        } catch (const std::exception& e) {
            throw std::runtime_error("scenario '" + cfg.output.prefix + "', " + to_string(cfg.sweep.axis) +
                                     " value #" + std::to_string(i) + ": " + e.what());
        }

        std::vector<std::vector<double>> rows;
        for (const auto& r : result.records)
            if (r.valid) rows.push_back({r.m, r.E2 / mhz2, to_hz(r.delta0), to_hz(r.dDelta0_dE2) * mhz2});
        const double value = outer[i].value_or(0.0);
        const auto csv = run.directory / (cfg.output.prefix + value_tag(cfg.sweep.axis, i, value) + ".csv");
        emit_csv(csv, {"m", "E2", "delta0_Hz", "dDelta0_dE2"}, rows);
        run.files.push_back(csv);

        const std::string axis_value = outer[i] ? format_number(value) : "";
        int order = 0;
        for (const auto& ip : result.ips)
            roots.push_back({axis_value, "IP", std::to_string(++order), format_number(ip.m),
                             format_number(to_hz(ip.delta0))});
        order = 0;
        for (const auto& pz : result.pzds)
            roots.push_back({axis_value, "PZD", std::to_string(++order), format_number(pz.m),
                             format_number(to_hz(pz.delta0))});

        manifest["runs"].push_back({{"axis", to_string(cfg.sweep.axis)},
                                    {"value", outer[i] ? nlohmann::json(value) : nlohmann::json(nullptr)},
                                    {"omega_m_Hz", to_hz(p.model.mod.frequency)},
                                    {"reference_width_Hz", to_hz(p.reference_width)},
                                    {"asymmetry", p.family.asymmetry},
                                    {"total_power_MHz2", p.family.total_power / mhz2},
                                    {"attenuation_per_m", p.model.cell.attenuation},
                                    {"file", csv.filename().string()},
                                    {"valid_points", rows.size()},
                                    {"ips", result.ips.size()},
                                    {"pzds", result.pzds.size()}});
        run.results.push_back(std::move(result));
        run.values.push_back(value);
    }

    const auto roots_path = run.directory / (cfg.output.prefix + "_roots.csv");
    emit_table(roots_path, {"sweep_value", "kind", "order", "m", "delta0_Hz"}, roots);
    run.files.push_back(roots_path);

    const auto manifest_path = run.directory / (cfg.output.prefix + "_manifest.json");
    manifest["files"] = nlohmann::json::array();
    for (const auto& f : run.files) manifest["files"].push_back(f.filename().string());
    std::ofstream(manifest_path, std::ios::binary | std::ios::trunc) << manifest.dump(2) << '\n';
    run.files.push_back(manifest_path);
    return run;
}

} // namespace cptshift

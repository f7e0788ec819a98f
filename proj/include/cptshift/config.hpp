#pragma once

// JSON scenario configuration. Frequency keys carry their unit in the key
// name (_Hz, _MHz, _GHz); values are converted to rad/s on load.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cptshift/harmonic.hpp"
#include "cptshift/model.hpp"
#include "cptshift/sweep.hpp"
#include "cptshift/thick.hpp"
#include "cptshift/units.hpp"

namespace cptshift {

/// Carries every problem found in a document, not just the first.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors)
        : std::runtime_error(join(errors)), errors_(std::move(errors)) {}
    const std::vector<std::string>& errors() const noexcept { return errors_; }

private:
    static std::string join(const std::vector<std::string>& errors) {
        std::string s = "invalid configuration:";
        for (const auto& e : errors) s += "\n  " + e;
        return s;
    }
    std::vector<std::string> errors_;
};

enum class SweepAxis { m, omega_m, beta, epsilon, power };

inline const char* to_string(SweepAxis a) {
    switch (a) {
    case SweepAxis::m: return "m";
    case SweepAxis::omega_m: return "omega_m";
    case SweepAxis::beta: return "beta";
    case SweepAxis::epsilon: return "epsilon";
    case SweepAxis::power: return "power";
    }
    return "?";
}

struct ScenarioConfig {
    AtomParams atom;

    struct Modulation {
        double index = 0.2;
        std::optional<double> frequency;        // rad/s
        std::optional<double> frequency_ratio;  // omega_m / Gamma_g~(reference_depth)
        std::optional<double> reference_depth;  // default: middle of the m range
        double detection_phase = 0;
        friend bool operator==(const Modulation&, const Modulation&) = default;
    } modulation;

    struct Spectrum {
        double m_min = 0;
        double m_max = 0;
        int m_points = 101;
        double asymmetry = 0;
        int max_order = 5;
        double total_rabi = from_mhz(1.0);  // sqrt(E^2), rad/s
        friend bool operator==(const Spectrum&, const Spectrum&) = default;
    } spectrum;

    std::optional<CellParams> cell;

    struct Sweep {
        SweepAxis axis = SweepAxis::m;
        // omega_m: ratios to Gamma_g~(reference_depth); beta: optical depth beta*l;
        // epsilon: asymmetry; power: total Rabi frequency in MHz.
        std::vector<double> values;
        SignalPath path = SignalPath::harmonic;
        Truncation truncation = Truncation::closed;
        friend bool operator==(const Sweep&, const Sweep&) = default;
    } sweep;

    struct Output {
        std::string directory = "output";
        std::string prefix = "scenario";
        friend bool operator==(const Output&, const Output&) = default;
    } output;

    double reference_depth() const {
        return modulation.reference_depth.value_or(0.5 * (spectrum.m_min + spectrum.m_max));
    }

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

namespace detail {

using nlohmann::json;

/// Reads one JSON object, recording type errors and unknown keys.
class BlockReader {
public:
    BlockReader(const json& obj, std::string path, std::vector<std::string>& errors)
        : obj_(obj), path_(std::move(path)), errors_(errors) {}

    ~BlockReader() {
        if (!obj_.is_object()) return;
        for (const auto& [key, _] : obj_.items())
            if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
                errors_.push_back(path_ + "." + key + ": unknown key");
    }

    bool has(const std::string& key) {
        seen_.push_back(key);
        return obj_.is_object() && obj_.contains(key);
    }

    std::optional<double> number(const std::string& key) {
        if (!has(key)) return std::nullopt;
        const json& v = obj_.at(key);
        if (!v.is_number()) {
            errors_.push_back(path_ + "." + key + ": expected a number");
            return std::nullopt;
        }
        return v.get<double>();
    }

    void number(const std::string& key, double& target, double scale = 1.0) {
        if (auto v = number(key)) target = *v * scale;
    }

    void integer(const std::string& key, int& target) {
        if (!has(key)) return;
        const json& v = obj_.at(key);
        if (!v.is_number_integer()) {
            errors_.push_back(path_ + "." + key + ": expected an integer");
            return;
        }
        target = v.get<int>();
    }

    std::optional<std::string> text(const std::string& key) {
        if (!has(key)) return std::nullopt;
        const json& v = obj_.at(key);
        if (!v.is_string()) {
            errors_.push_back(path_ + "." + key + ": expected a string");
            return std::nullopt;
        }
        return v.get<std::string>();
    }

    std::optional<std::vector<double>> numbers(const std::string& key) {
        if (!has(key)) return std::nullopt;
        const json& v = obj_.at(key);
        std::vector<double> out;
        if (v.is_array())
            for (const auto& x : v) {
                if (!x.is_number()) break;
                out.push_back(x.get<double>());
            }
        if (!v.is_array() || out.size() != v.size()) {
            errors_.push_back(path_ + "." + key + ": expected an array of numbers");
            return std::nullopt;
        }
        return out;
    }

    void error(const std::string& key, const std::string& message) {
        errors_.push_back(path_ + "." + key + ": " + message);
    }

private:
    const json& obj_;
    std::string path_;
    std::vector<std::string>& errors_;
    std::vector<std::string> seen_;
};

inline const json& block(const json& root, const std::string& name, bool required,
                         std::vector<std::string>& errors) {
    static const json empty = json::object();
    if (!root.contains(name)) {
        if (required) errors.push_back(name + ": required block is missing");
        return empty;
    }
    const json& b = root.at(name);
    if (!b.is_object()) {
        errors.push_back(name + ": expected an object");
        return empty;
    }
    return b;
}

template <class E>
std::optional<E> parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> options) {
    for (const auto& [name, value] : options)
        if (s == name) return value;
    return std::nullopt;
}

inline void check(bool ok, const std::string& field, const std::string& message, std::vector<std::string>& errors) {
    if (!ok) errors.push_back(field + ": " + message);
}

} // namespace detail

/// Parses and validates a scenario document; throws ConfigError listing every problem.
inline ScenarioConfig parse_config(std::string_view text) {
    using detail::json;
    std::vector<std::string> errors;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("malformed JSON: ") + e.what()});
    }
    if (!root.is_object()) throw ConfigError({"top level must be an object"});

    ScenarioConfig cfg;
    for (const auto& [key, _] : root.items())
        if (key != "atom" && key != "modulation" && key != "spectrum" && key != "cell" && key != "sweep" &&
            key != "output")
            errors.push_back(key + ": unknown block");

    {
        detail::BlockReader r(detail::block(root, "atom", false, errors), "atom", errors);
        auto& a = cfg.atom;
        r.number("ground_splitting_GHz", a.ground_splitting, from_ghz(1.0));
        r.number("excited_splitting_MHz", a.excited_splitting, from_mhz(1.0));
        r.number("optical_width_MHz", a.optical_width, from_mhz(1.0));
        r.number("ground_relaxation_Hz", a.ground_relaxation, from_hz(1.0));
        r.number("excited_decay_MHz", a.excited_decay, from_mhz(1.0));
        r.number("dipole_ratio_sq", a.dipole_ratio_sq);
        r.number("one_photon_detuning_MHz", a.one_photon_detuning, from_mhz(1.0));
    }
    {
        detail::BlockReader r(detail::block(root, "modulation", true, errors), "modulation", errors);
        auto& m = cfg.modulation;
        r.number("index", m.index);
        if (auto v = r.number("frequency_Hz")) m.frequency = from_hz(*v);
        m.frequency_ratio = r.number("frequency_ratio");
        m.reference_depth = r.number("reference_depth");
        r.number("detection_phase_rad", m.detection_phase);
    }
    {
        detail::BlockReader r(detail::block(root, "spectrum", true, errors), "spectrum", errors);
        auto& s = cfg.spectrum;
        if (!r.has("m_min")) r.error("m_min", "required");
        if (!r.has("m_max")) r.error("m_max", "required");
        r.number("m_min", s.m_min);
        r.number("m_max", s.m_max);
        r.integer("m_points", s.m_points);
        r.number("asymmetry", s.asymmetry);
        r.integer("max_order", s.max_order);
        r.number("total_rabi_MHz", s.total_rabi, from_mhz(1.0));
    }
    if (root.contains("cell")) {
        detail::BlockReader r(detail::block(root, "cell", false, errors), "cell", errors);
        CellParams c;
        r.number("length_m", c.length);
        r.number("attenuation_per_m", c.attenuation);
        r.integer("slabs", c.slabs);
        cfg.cell = c;
    }
    {
        detail::BlockReader r(detail::block(root, "sweep", false, errors), "sweep", errors);
        auto& s = cfg.sweep;
        if (auto v = r.text("axis")) {
            auto e = detail::parse_enum<SweepAxis>(*v, {{"m", SweepAxis::m},
                                                        {"omega_m", SweepAxis::omega_m},
                                                        {"beta", SweepAxis::beta},
                                                        {"epsilon", SweepAxis::epsilon},
                                                        {"power", SweepAxis::power}});
            if (e) s.axis = *e;
            else r.error("axis", "must be one of m, omega_m, beta, epsilon, power");
        }
        if (auto v = r.numbers("values")) s.values = *v;
        if (auto v = r.text("path")) {
            auto e = detail::parse_enum<SignalPath>(*v, {{"time_domain", SignalPath::time_domain},
                                                         {"harmonic", SignalPath::harmonic},
                                                         {"linearized", SignalPath::linearized},
                                                         {"thick", SignalPath::thick}});
            if (e) s.path = *e;
            else r.error("path", "must be one of time_domain, harmonic, linearized, thick");
        }
        if (auto v = r.text("truncation")) {
            auto e = detail::parse_enum<Truncation>(*v, {{"closed", Truncation::closed},
                                                         {"printed", Truncation::printed}});
            if (e) s.truncation = *e;
            else r.error("truncation", "must be closed or printed");
        }
    }
    {
        detail::BlockReader r(detail::block(root, "output", false, errors), "output", errors);
        if (auto v = r.text("directory")) cfg.output.directory = *v;
        if (auto v = r.text("prefix")) cfg.output.prefix = *v;
    }

    // Module invariants.
    using detail::check;
    const auto& a = cfg.atom;
    check(a.ground_splitting > 0, "atom.ground_splitting_GHz", "must be > 0", errors);
    check(a.excited_splitting > 0, "atom.excited_splitting_MHz", "must be > 0", errors);
    check(a.optical_width > 0, "atom.optical_width_MHz", "must be > 0", errors);
    check(a.ground_relaxation > 0, "atom.ground_relaxation_Hz", "must be > 0", errors);
    check(a.excited_decay > 0, "atom.excited_decay_MHz", "must be > 0", errors);
    check(a.dipole_ratio_sq > 0 && a.dipole_ratio_sq <= 1, "atom.dipole_ratio_sq", "must lie in (0, 1]", errors);

    const auto& m = cfg.modulation;
    check(m.index >= 0, "modulation.index", "must be >= 0", errors);
    check(!m.frequency || *m.frequency > 0, "modulation.frequency_Hz", "must be > 0", errors);
    check(!m.frequency_ratio || *m.frequency_ratio > 0, "modulation.frequency_ratio", "must be > 0", errors);
    check(!(m.frequency && m.frequency_ratio), "modulation", "give frequency_Hz or frequency_ratio, not both",
          errors);
    check(m.frequency || m.frequency_ratio || cfg.sweep.axis == SweepAxis::omega_m, "modulation",
          "frequency_Hz or frequency_ratio is required", errors);
    check(!m.reference_depth || *m.reference_depth >= 0, "modulation.reference_depth", "must be >= 0", errors);

    const auto& s = cfg.spectrum;
    check(s.m_min >= 0, "spectrum.m_min", "must be >= 0", errors);
    check(s.m_max >= s.m_min, "spectrum.m_max", "must be >= m_min", errors);
    check(s.m_points >= 0, "spectrum.m_points", "must be >= 0", errors);
    check(std::abs(s.asymmetry) < 1, "spectrum.asymmetry", "must satisfy |epsilon| < 1", errors);
    check(s.max_order >= 2, "spectrum.max_order", "must be >= 2", errors);
    check(s.total_rabi > 0, "spectrum.total_rabi_MHz", "must be > 0", errors);

    if (cfg.cell) {
        check(cfg.cell->length > 0, "cell.length_m", "must be > 0", errors);
        check(cfg.cell->attenuation >= 0, "cell.attenuation_per_m", "must be >= 0", errors);
        check(cfg.cell->slabs >= 8, "cell.slabs", "must be >= 8", errors);
    }

    const auto& sw = cfg.sweep;
    check(sw.axis != SweepAxis::m || sw.values.empty(), "sweep.values", "must be empty for the m axis", errors);
    check(sw.axis != SweepAxis::beta || sw.path == SignalPath::thick, "sweep.path", "beta axis needs path thick",
          errors);
    check(sw.path != SignalPath::thick || cfg.cell.has_value(), "cell", "required block for path thick", errors);
    for (double v : sw.values) {
        switch (sw.axis) {
        case SweepAxis::omega_m: check(v > 0, "sweep.values", "omega_m ratios must be > 0", errors); break;
        case SweepAxis::beta: check(v >= 0, "sweep.values", "optical depths must be >= 0", errors); break;
        case SweepAxis::epsilon: check(std::abs(v) < 1, "sweep.values", "asymmetries must satisfy |v| < 1", errors); break;
        case SweepAxis::power: check(v > 0, "sweep.values", "total Rabi values must be > 0", errors); break;
        case SweepAxis::m: break;
        }
    }
    check(!cfg.output.prefix.empty(), "output.prefix", "must not be empty", errors);

    if (!errors.empty()) throw ConfigError(std::move(errors));
    return cfg;
}

/// Writes every field explicitly so that parse_config(serialize(c)) == c.
inline std::string serialize(const ScenarioConfig& cfg) {
    using detail::json;
    json j;
    const auto& a = cfg.atom;
    j["atom"] = {{"ground_splitting_GHz", a.ground_splitting / from_ghz(1.0)},
                 {"excited_splitting_MHz", a.excited_splitting / from_mhz(1.0)},
                 {"optical_width_MHz", a.optical_width / from_mhz(1.0)},
                 {"ground_relaxation_Hz", a.ground_relaxation / from_hz(1.0)},
                 {"excited_decay_MHz", a.excited_decay / from_mhz(1.0)},
                 {"dipole_ratio_sq", a.dipole_ratio_sq},
                 {"one_photon_detuning_MHz", a.one_photon_detuning / from_mhz(1.0)}};
    json mod = {{"index", cfg.modulation.index}, {"detection_phase_rad", cfg.modulation.detection_phase}};
    if (cfg.modulation.frequency) mod["frequency_Hz"] = *cfg.modulation.frequency / from_hz(1.0);
    if (cfg.modulation.frequency_ratio) mod["frequency_ratio"] = *cfg.modulation.frequency_ratio;
    if (cfg.modulation.reference_depth) mod["reference_depth"] = *cfg.modulation.reference_depth;
    j["modulation"] = mod;
    const auto& s = cfg.spectrum;
    j["spectrum"] = {{"m_min", s.m_min},         {"m_max", s.m_max},
                     {"m_points", s.m_points},   {"asymmetry", s.asymmetry},
                     {"max_order", s.max_order}, {"total_rabi_MHz", s.total_rabi / from_mhz(1.0)}};
    if (cfg.cell)
        j["cell"] = {{"length_m", cfg.cell->length},
                     {"attenuation_per_m", cfg.cell->attenuation},
                     {"slabs", cfg.cell->slabs}};
    j["sweep"] = {{"axis", to_string(cfg.sweep.axis)},
                  {"values", cfg.sweep.values},
                  {"path", to_string(cfg.sweep.path)},
                  {"truncation", cfg.sweep.truncation == Truncation::closed ? "closed" : "printed"}};
    j["output"] = {{"directory", cfg.output.directory}, {"prefix", cfg.output.prefix}};
    return j.dump(2) + "\n";
}

} // namespace cptshift

#pragma once

// Scenario configuration: a flat TOML-style key-value format (sections, `=`
// pairs, `#` comments) parsed into a validated ScenarioConfig, then resolved
// into run-ready parameters with closed-form optimal defaults.

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "polsim/params.hpp"
#include "polsim/polariton.hpp"
#include "polsim/presets.hpp"
#include "polsim/protocols.hpp"
#include "polsim/pulses.hpp"

namespace polsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Minimal flat TOML subset: [section] headers, key = value, '#' comments,
// optionally double-quoted strings. Keys are stored as "section.key".
inline std::map<std::string, std::string> parse_flat_toml(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": malformed section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
        if (val.size() >= 2 && val.front() == '"' && val.back() == '"')
            val = val.substr(1, val.size() - 2);
        kv[section.empty() ? key : section + "." + key] = val;
    }
    return kv;
}

inline double to_double(const std::string& key, const std::string& s) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("config field " + key + ": not a number: '" + s + "'");
    }
}

inline int to_int(const std::string& key, const std::string& s) {
    const double v = to_double(key, s);
    if (v != std::floor(v)) throw ConfigError("config field " + key + ": not an integer");
    return static_cast<int>(v);
}

} // namespace detail

struct ScenarioConfig {
    Protocol protocol = Protocol::W;
    int N = 2;
    // Loss specification: exactly one of the two forms.
    std::optional<double> C;
    std::optional<double> gamma_over_kappa;
    std::optional<double> kappa;
    std::optional<double> gamma;
    double gamma1 = 0.0;
    std::optional<std::string> preset; // fills kappa/gamma/gamma1/Delta hints

    std::optional<double> gT; // absent => auto-converge
    std::optional<int> m_max; // absent => adaptive (start at 3)
    std::string pulse = "builtin";
    ModelKind model = ModelKind::Full;
    double tol = 1e-8;

    // Optional overrides; unset values default to the closed-form optima.
    std::optional<double> Delta;
    std::optional<double> eta;
    std::optional<double> Omega0;
    std::optional<double> delta_gl;
    std::optional<double> delta;

    std::string output_path = "result";
    int workers = 0; // 0 => hardware concurrency

    void validate() const {
        const bool by_C = C.has_value() || gamma_over_kappa.has_value();
        const bool by_rates = kappa.has_value() || gamma.has_value();
        if (by_C && by_rates)
            throw ConfigError("specify either C + gamma_over_kappa or kappa + gamma, not both");
        if (by_C && !(C.has_value() && gamma_over_kappa.has_value()))
            throw ConfigError("C and gamma_over_kappa must be given together");
        if (by_rates && !(kappa.has_value() && gamma.has_value()))
            throw ConfigError("kappa and gamma must be given together");
        if (!by_C && !by_rates) throw ConfigError("loss rates missing: give C + gamma_over_kappa or kappa + gamma");
        if (C && *C <= 0.0) throw ConfigError("C must be > 0");
        if (gamma_over_kappa && *gamma_over_kappa <= 0.0) throw ConfigError("gamma_over_kappa must be > 0");
        if (kappa && *kappa <= 0.0) throw ConfigError("kappa must be > 0");
        if (gamma && *gamma <= 0.0) throw ConfigError("gamma must be > 0");
        if (gamma1 < 0.0) throw ConfigError("gamma1 must be >= 0");
        if (N < 2) throw ConfigError("N must be >= 2");
        if (protocol == Protocol::CZ && N != 2) throw ConfigError("CZ requires N = 2");
        if (protocol == Protocol::C2Z && N != 3) throw ConfigError("C2Z requires N = 3");
        if (gT && *gT <= 0.0) throw ConfigError("gT must be > 0");
        if (m_max && *m_max < 1) throw ConfigError("m_max must be >= 1");
        if (tol <= 1e-14 || tol >= 1e-4) throw ConfigError("tol must lie in (1e-14, 1e-4)");
        if (workers < 0) throw ConfigError("workers must be >= 0");
    }
};

inline ScenarioConfig parse_scenario_config(std::istream& in) {
    const auto kv = detail::parse_flat_toml(in);
    ScenarioConfig cfg;
    std::map<std::string, std::string> pending(kv);
    auto take = [&](const std::string& key) -> std::optional<std::string> {
        auto it = pending.find(key);
        if (it == pending.end()) return std::nullopt;
        std::string v = it->second;
        pending.erase(it);
        return v;
    };

    if (auto v = take("scenario.protocol")) {
        if (*v == "W") cfg.protocol = Protocol::W;
        else if (*v == "CZ") cfg.protocol = Protocol::CZ;
        else if (*v == "C2Z") cfg.protocol = Protocol::C2Z;
        else throw ConfigError("scenario.protocol: must be W, CZ, or C2Z");
    }
    if (auto v = take("scenario.preset")) {
        const auto& p = find_preset(*v); // throws on unknown name
        cfg.preset = *v;
        cfg.kappa = p.kappa();
        cfg.gamma = p.gamma();
        cfg.gamma1 = p.gamma1();
        if (p.Delta_hint > 0.0) cfg.Delta = p.Delta_hint;
    }
    if (auto v = take("scenario.N")) cfg.N = detail::to_int("scenario.N", *v);
    else if (cfg.protocol != Protocol::W) cfg.N = gate_register_size(cfg.protocol);
    if (auto v = take("scenario.C")) cfg.C = detail::to_double("scenario.C", *v);
    if (auto v = take("scenario.gamma_over_kappa"))
        cfg.gamma_over_kappa = detail::to_double("scenario.gamma_over_kappa", *v);
    if (auto v = take("scenario.kappa")) cfg.kappa = detail::to_double("scenario.kappa", *v);
    if (auto v = take("scenario.gamma")) cfg.gamma = detail::to_double("scenario.gamma", *v);
    if (auto v = take("scenario.gamma1")) cfg.gamma1 = detail::to_double("scenario.gamma1", *v);
    if (auto v = take("scenario.gT")) {
        if (*v != "auto") cfg.gT = detail::to_double("scenario.gT", *v);
    }
    if (auto v = take("scenario.m_max")) {
        if (*v != "adaptive") cfg.m_max = detail::to_int("scenario.m_max", *v);
    }
    if (auto v = take("scenario.pulse")) cfg.pulse = *v;
    if (auto v = take("scenario.model")) {
        if (*v == "full") cfg.model = ModelKind::Full;
        else if (*v == "effective") cfg.model = ModelKind::Effective;
        else throw ConfigError("scenario.model: must be full or effective");
    }
    if (auto v = take("scenario.tol")) cfg.tol = detail::to_double("scenario.tol", *v);
    if (auto v = take("scenario.Delta")) cfg.Delta = detail::to_double("scenario.Delta", *v);
    if (auto v = take("scenario.eta")) cfg.eta = detail::to_double("scenario.eta", *v);
    if (auto v = take("scenario.Omega0")) cfg.Omega0 = detail::to_double("scenario.Omega0", *v);
    if (auto v = take("scenario.delta_gl"))
        cfg.delta_gl = detail::to_double("scenario.delta_gl", *v);
    if (auto v = take("scenario.delta")) cfg.delta = detail::to_double("scenario.delta", *v);
    if (auto v = take("output.path")) cfg.output_path = *v;
    if (auto v = take("output.workers")) cfg.workers = detail::to_int("output.workers", *v);

    if (!pending.empty()) throw ConfigError("unknown config field: " + pending.begin()->first);
    cfg.validate();
    return cfg;
}

inline ScenarioConfig load_scenario_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_scenario_config(in);
}

// A fully resolved run: physical parameters with all defaults filled from the
// closed-form optima, duration, pulse, and model choice.
struct ResolvedScenario {
    ScenarioConfig config;
    PhysicalParams params;
    double gT = 0.0;
    bool gT_auto = false;
    PulseProfile pulse = constant_pulse(1.0, 1.0, 0.0); // placeholder; gates load a profile
    int m_max = 3;
    bool m_max_adaptive = true;
};

inline ResolvedScenario resolve_scenario(const ScenarioConfig& cfg,
                                         const std::string& pulse_dir = "data/pulses") {
    cfg.validate();
    ResolvedScenario r;
    r.config = cfg;

    double kappa, gamma;
    if (cfg.C) {
        // C = 1/(κγ), γ/κ = ratio  =>  κ = 1/√(C·ratio), γ = ratio·κ
        kappa = 1.0 / std::sqrt(*cfg.C * *cfg.gamma_over_kappa);
        gamma = *cfg.gamma_over_kappa * kappa;
    } else {
        kappa = *cfg.kappa;
        gamma = *cfg.gamma;
    }

    PhysicalParams p;
    p.N = cfg.N;
    p.kappa = kappa;
    p.gamma = gamma;
    p.gamma1 = cfg.gamma1;

    if (cfg.protocol == Protocol::W) {
        const auto [D_opt, y_opt] = optimal_w_parameters(kappa, gamma, cfg.N);
        p.Delta = cfg.Delta.value_or(D_opt);
        const double y = cfg.Delta && !cfg.eta
                             ? optimal_w_drive_ratio_at(p.Delta, kappa, gamma, cfg.N)
                             : y_opt;
        r.gT_auto = !cfg.gT.has_value();
        r.gT = cfg.gT.value_or(1.0 / std::sqrt(kappa * gamma)); // auto: starting point ~√C
        p = resolve_w_params(p, r.gT, y);
        if (cfg.eta) {
            p.eta = *cfg.eta;
            p.delta_gl = 0.5 * p.eta * p.eta * p.Delta;
        }
    } else {
        const TauTable tau =
            cfg.protocol == Protocol::CZ ? builtin_cz_tau() : builtin_c2z_tau();
        const auto [D_opt, r_opt] = optimal_gate_parameters(cfg.protocol, tau, kappa, gamma);
        p.Delta = cfg.Delta.value_or(D_opt);
        r.gT_auto = !cfg.gT.has_value();
        r.gT = cfg.gT.value_or(gate_area(cfg.protocol) / std::sqrt(kappa * gamma) * 0.1);
        p = resolve_gate_params(p, cfg.protocol, r.gT, r_opt);
        if (cfg.eta) {
            p.eta = *cfg.eta;
            p.delta_gl = 0.5 * p.eta * p.eta * p.Delta;
        }
        if (cfg.pulse == "builtin") {
            const std::string file = cfg.protocol == Protocol::CZ
                                         ? "/cz_area7.612.pulse"
                                         : "/c2z_area10.809.pulse";
            r.pulse = load_pulse(pulse_dir + file);
        } else {
            r.pulse = load_pulse(cfg.pulse);
        }
    }
    if (cfg.Omega0) {
        p.Omega0 = *cfg.Omega0;
        if (!cfg.gT) throw ConfigError("Omega0 override requires an explicit gT");
    }
    if (cfg.delta_gl) p.delta_gl = *cfg.delta_gl;
    if (cfg.delta) p.delta = *cfg.delta;

    r.params = p;
    r.m_max_adaptive = !cfg.m_max.has_value();
    r.m_max = cfg.m_max.value_or(3);
    return r;
}

} // namespace polsim

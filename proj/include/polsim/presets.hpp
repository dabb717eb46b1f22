#pragma once

// Platform presets: physical cavity-QED parameter sets and their conversion
// to g = 1 units. All physical rates are stored in rad/s.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "polsim/params.hpp"

namespace polsim {

struct PlatformPreset {
    std::string name;
    std::string description;
    // Physical angular rates (rad/s).
    double g_phys = 0.0;
    double kappa_phys = 0.0;
    double gamma_phys = 0.0;
    double gamma1_phys = 0.0;
    // Protocol hints in g = 1 units.
    double Delta_hint = 0.0; // 0 means "use the closed-form optimum"
    double gT_w_n10 = 0.0;   // quoted W-preparation duration for N = 10

    // g = 1 units.
    double kappa() const { return kappa_phys / g_phys; }
    double gamma() const { return gamma_phys / g_phys; }
    double gamma1() const { return gamma1_phys / g_phys; }
    double cooperativity() const { return g_phys * g_phys / (kappa_phys * gamma_phys); }

    PhysicalParams params() const {
        PhysicalParams p;
        p.kappa = kappa();
        p.gamma = gamma();
        p.gamma1 = gamma1();
        return p;
    }

    // Round-trip back to physical rates from the g = 1 values.
    double to_physical(double rate_in_g_units) const { return rate_in_g_units * g_phys; }
};

inline const std::vector<PlatformPreset>& platform_presets() {
    constexpr double twopi = 2.0 * M_PI;
    static const std::vector<PlatformPreset> presets = {
        {"rb_fiber_cavity",
         "87Rb atoms in a fiber Fabry-Perot optical cavity (D2 line, finesse 2e5): "
         "g = 2π·400 MHz, κ = 2π·20 MHz, γ = 2π·6 MHz, C ≈ 1.3e3 (quoted ≈ 1500; the "
         "quoted value rounds the geometric estimate, the rates themselves give 1333)",
         twopi * 400e6, twopi * 20e6, twopi * 6e6, 0.0, 0.0, 1e4},
        {"rydberg_microwave",
         "Cs Rydberg states coupled to an on-chip microwave resonator: g = 2π·4 MHz, "
         "κ = 2π·17 Hz, 1/γ = 820 µs, 1/γ₁ = 2 ms, C ≈ 4.9e9 (effective-model regime)",
         twopi * 4e6, twopi * 17.0, 1.0 / 820e-6, 1.0 / 2e-3, 0.0, 930.0},
        {"caf_stripline",
         "CaF molecules coupled to a superconducting stripline cavity: g = 2π·10 kHz, "
         "κ = 2π·70 Hz, γ = 2π·0.01 Hz, Δ = 2π·50 kHz (Δ/g = 5), C ≈ 1.4e8",
         twopi * 10e3, twopi * 70.0, twopi * 0.01, 0.0, 5.0, twopi * 10e3 * 1.9e-3},
    };
    return presets;
}

inline const PlatformPreset& find_preset(const std::string& name) {
    for (const auto& p : platform_presets())
        if (p.name == name) return p;
    throw std::invalid_argument("unknown preset: " + name);
}

} // namespace polsim

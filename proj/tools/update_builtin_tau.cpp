// Regenerates the bundled gate pulses and the built-in dwell-time tables.
//
// Usage: update_builtin_tau <repo_root>
//
// Synthesizes the time-optimal CZ (area 7.612) and C2Z (area 10.809) phase
// profiles, writes them to <repo_root>/data/pulses/, computes the per-branch
// dwell times on the lossless effective model, and rewrites
// <repo_root>/include/polsim/builtin_tau.hpp.

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "polsim/protocols.hpp"
#include "polsim/pulse_synthesis.hpp"

using namespace polsim;

static void emit_table(std::ofstream& out, const char* fn_name, const TauTable& tau) {
    out << "inline TauTable " << fn_name << "() {\n"
        << "    return TauTable{{\n";
    for (const auto& [name, value] : tau.entries) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", value);
        out << "        {\"" << name << "\", " << buf << "},\n";
    }
    out << "    }};\n}\n";
}

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: update_builtin_tau <repo_root>\n");
        return 2;
    }
    const std::string root = argv[1];

    struct Job {
        Protocol gate;
        const char* name;
        const char* pulse_file;
        const char* fn;
        double target_coeff;
    };
    const Job jobs[] = {
        {Protocol::CZ, "CZ", "cz_area7.612.pulse", "builtin_cz_tau", 6.45},
        {Protocol::C2Z, "C2Z", "c2z_area10.809.pulse", "builtin_c2z_tau", 14.66},
    };

    std::ofstream hdr(root + "/include/polsim/builtin_tau.hpp");
    hdr << "#pragma once\n\n"
        << "// Built-in dwell-time tables for the bundled time-optimal gate pulses.\n"
        << "// Generated by tools/update_builtin_tau; do not edit by hand.\n"
        << "// Units: tau values are Omega0-weighted dwell times (dimensionless areas).\n\n"
        << "namespace polsim {\n\n";

    for (const auto& job : jobs) {
        const double area = gate_area(job.gate);
        std::printf("[%s] synthesizing area %.3f ...\n", job.name, area);
        const auto synth = synthesize_time_optimal(job.gate, area, 64, 16);
        std::printf("[%s] objective %.3e (%s)\n", job.name, synth.objective,
                    synth.message.c_str());
        if (synth.objective > 1e-5)
            throw std::runtime_error(std::string(job.name) +
                                     ": synthesis objective too poor to bundle");
        save_pulse(synth.pulse, root + "/data/pulses/" + job.pulse_file);

        const auto tau = gate_dwell_table(job.gate, synth.pulse);
        const double coeff = gate_error_minimum(job.gate, tau, 1.0, 1.0);
        std::printf("[%s] error-minimum coefficient %.4f (published %.2f)\n", job.name, coeff,
                    job.target_coeff);
        if (std::abs(coeff - job.target_coeff) > 0.05 * job.target_coeff)
            throw std::runtime_error(std::string(job.name) +
                                     ": dwell table inconsistent with published coefficient");
        emit_table(hdr, job.fn, tau);
        hdr << "\n";
    }

    hdr << "} // namespace polsim\n";
    std::printf("wrote %s/include/polsim/builtin_tau.hpp and data/pulses/\n", root.c_str());
    return 0;
}

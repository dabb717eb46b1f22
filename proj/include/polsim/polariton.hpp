#pragma once

// Closed-form spectral analysis of the blockade: polariton energies, dressed
// eigenvalues, perturbative shifts, analytic infidelities and optimal
// parameters. Everything here is a hard-coded closed form validated
// numerically in the tests; g = 1 throughout.

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>

#include "polsim/params.hpp"
#include "polsim/tau.hpp"

namespace polsim {

struct PolaritonSpectrum {
    int n = 0;
    std::complex<double> eps_plus;
    std::optional<std::complex<double>> eps_minus; // absent for n = 0
    double mixing_cos = 0.0;                       // cos θ
};

inline PolaritonSpectrum polariton_spectrum(int n, double Delta, double delta) {
    if (n < 0) throw std::invalid_argument("polariton_spectrum: n must be >= 0");
    PolaritonSpectrum s;
    s.n = n;
    if (n == 0) {
        s.eps_plus = delta; // only |p_0^+> = |0,0;1>
        s.mixing_cos = 1.0;
        return s;
    }
    const double root = std::sqrt((delta - Delta) * (delta - Delta) + 4.0 * n);
    s.eps_plus = 0.5 * (delta + Delta) + 0.5 * root;
    s.eps_minus = 0.5 * (delta + Delta) - 0.5 * root;
    s.mixing_cos = (delta - Delta) / root;
    return s;
}

enum class BlockadeRegime { DetuningDominated, DecayDominated };

struct BlockadeDiagnostics {
    double eta_eff = 0.0;
    double gamma_eff = 0.0;
    std::complex<double> lambda_plus;
    std::complex<double> lambda_minus;
    BlockadeRegime regime = BlockadeRegime::DetuningDominated;
};

// Dressing of {|2,0;0>, |p_2^->} by the cavity drive at the blockade point:
// λ± = ±√(η_eff² − γ_eff²/16) − i γ_eff/4.
inline BlockadeDiagnostics dressed_eigenvalues(const PhysicalParams& p) {
    if (p.Delta <= 0.0)
        throw std::invalid_argument("dressed_eigenvalues: Delta must be positive");
    BlockadeDiagnostics d;
    const double denom = p.Delta + 2.0 / p.Delta;
    d.eta_eff = p.eta / std::sqrt(denom);
    d.gamma_eff = (p.kappa * p.Delta + 2.0 * p.gamma) / denom;
    const std::complex<double> root =
        std::sqrt(std::complex<double>(d.eta_eff * d.eta_eff - d.gamma_eff * d.gamma_eff / 16.0));
    const std::complex<double> shift{0.0, -d.gamma_eff / 4.0};
    d.lambda_plus = root + shift;
    d.lambda_minus = -root + shift;
    d.regime = (d.eta_eff >= d.gamma_eff / 4.0) ? BlockadeRegime::DetuningDominated
                                                : BlockadeRegime::DecayDominated;
    return d;
}

struct PerturbativeShifts {
    std::complex<double> dE0;
    std::complex<double> dE1;
    std::complex<double> dE1_prime;
};

// Third-order shifts of |0,0;0> and |1,0;0> from the cavity drive, first order
// in κ, γ; plus the qubit-drive shift of the dressed W state.
inline PerturbativeShifts perturbative_shifts(const PhysicalParams& p) {
    const double e2 = p.eta * p.eta;
    if (p.delta == 0.0) throw std::invalid_argument("perturbative_shifts: delta must be nonzero");
    if (p.Delta == 0.0) throw std::invalid_argument("perturbative_shifts: Delta must be nonzero");
    const double d1 = p.delta - 1.0 / p.Delta;
    if (d1 == 0.0)
        throw std::invalid_argument("perturbative_shifts: resonance delta = g^2/Delta");
    PerturbativeShifts s;
    s.dE0 = {-e2 / p.delta, -p.kappa * e2 / (2.0 * p.delta * p.delta)};
    s.dE1 = {-e2 / d1,
             -0.5 * e2 * (p.kappa * p.Delta * p.Delta + p.gamma) / (p.Delta * p.Delta * d1 * d1)};
    if (p.Omega0 > 0.0) {
        if (p.eta <= 0.0)
            throw std::invalid_argument("perturbative_shifts: eta must be > 0 when Omega0 > 0");
        s.dE1_prime = {0.0, -p.Omega0 * p.Omega0 * (p.N - 1) / (2.0 * e2) *
                                (0.5 * p.kappa + p.gamma / (p.Delta * p.Delta))};
    }
    return s;
}

enum class Protocol { W, CZ, C2Z };

// W-state infidelity at detuning Delta and drive ratio y = η²/Ω0 in the
// T → ∞ limit:  (π / 2√N) [ y (5κΔ²/4 + γ) + (N−1) (κ/2 + γ/Δ²) / y ].
inline double w_error_expression(double kappa, double gamma, int N, double Delta, double y) {
    if (N < 2) throw std::invalid_argument("w_error_expression: N must be >= 2");
    if (y <= 0.0) throw std::invalid_argument("w_error_expression: eta^2/Omega0 must be > 0");
    const double d2 = Delta * Delta;
    return M_PI / (2.0 * std::sqrt(double(N))) *
           (y * (1.25 * kappa * d2 + gamma) + (N - 1) * (0.5 * kappa + gamma / d2) / y);
}

inline std::pair<double, double> optimal_w_parameters(double kappa, double gamma, int N) {
    if (N < 2) throw std::invalid_argument("optimal_w_parameters: N must be >= 2");
    if (kappa <= 0.0 || gamma <= 0.0)
        throw std::invalid_argument("optimal_w_parameters: kappa, gamma must be > 0");
    const double Delta_opt = std::pow(8.0 / 5.0, 0.25) * std::sqrt(gamma / kappa);
    const double y_opt = std::sqrt(0.5 * (N - 1) * kappa / gamma);
    return {Delta_opt, y_opt};
}

// Minimizer of the W error over η²/Ω0 at a fixed (possibly non-optimal) Delta;
// usable when gamma is negligible, unlike the joint closed-form optimum.
inline double optimal_w_drive_ratio_at(double Delta, double kappa, double gamma, int N) {
    if (N < 2) throw std::invalid_argument("optimal_w_drive_ratio_at: N must be >= 2");
    const double d2 = Delta * Delta;
    const double A = 1.25 * kappa * d2 + gamma;
    const double B = (N - 1) * (0.5 * kappa + gamma / d2);
    if (A <= 0.0 || B <= 0.0)
        throw std::invalid_argument("optimal_w_drive_ratio_at: need some loss on both branches");
    return std::sqrt(B / A);
}

namespace detail {

// Weighted dwell sums entering the gate error laws:
//   2^(N-1)·2·(1-F)·r-split:  (1/r)(κΔ²·P + γ·Q) + r(κ/2 + γ/Δ²)·R
struct GateDwellSums {
    double P = 0.0;
    double Q = 0.0;
    double R = 0.0;
    double weight = 0.0; // 1/4 for CZ, 1/8 for C2Z
};

inline GateDwellSums gate_dwell_sums(Protocol gate, const TauTable& tau) {
    GateDwellSums s;
    if (gate == Protocol::CZ) {
        const double T0 = tau.at("1'1'") + 2.0 * tau.at("1'0") + tau.at("00");
        s.Q = 2.0 * tau.at("1'1") + tau.at("W");
        s.P = 0.25 * T0 + s.Q;
        s.R = tau.at("W");
        s.weight = 0.25;
    } else if (gate == Protocol::C2Z) {
        const double T0 =
            tau.at("1'1'1'") + 3.0 * tau.at("1'1'0") + 3.0 * tau.at("1'00") + tau.at("000");
        s.Q = 3.0 * tau.at("1'1'1") + 3.0 * tau.at("1'W") + tau.at("W1");
        s.P = 0.25 * T0 + s.Q;
        s.R = 3.0 * tau.at("1'W") + 2.0 * tau.at("W1");
        s.weight = 0.125;
    } else {
        throw std::invalid_argument("gate_dwell_sums: gate must be CZ or C2Z");
    }
    return s;
}

} // namespace detail

// First-order gate error at detuning Delta and r = Ω0/η².
inline double gate_error_expression(Protocol gate, const TauTable& tau, double kappa, double gamma,
                                    double Delta, double r) {
    if (r <= 0.0) throw std::invalid_argument("gate_error_expression: Omega0/eta^2 must be > 0");
    const auto s = detail::gate_dwell_sums(gate, tau);
    const double d2 = Delta * Delta;
    return s.weight *
           ((kappa * d2 * s.P + gamma * s.Q) / r + r * (0.5 * kappa + gamma / d2) * s.R);
}

// Joint minimum of gate_error_expression over Delta and r; scales exactly as
// 1/√C with C = 1/(κγ).
inline double gate_error_minimum(Protocol gate, const TauTable& tau, double kappa, double gamma) {
    const auto s = detail::gate_dwell_sums(gate, tau);
    const double pref =
        2.0 * s.weight * std::sqrt(s.R * (s.P + 0.5 * s.Q + std::sqrt(2.0 * s.P * s.Q)));
    return pref * std::sqrt(kappa * gamma);
}

// Closed-form optima for the gate error law given the dwell-time table.
inline std::pair<double, double> optimal_gate_parameters(Protocol gate, const TauTable& tau,
                                                         double kappa, double gamma) {
    if (kappa <= 0.0 || gamma <= 0.0)
        throw std::invalid_argument("optimal_gate_parameters: kappa, gamma must be > 0");
    const auto s = detail::gate_dwell_sums(gate, tau);
    // argmin of (κ²Δ²P/2 + γ²Q/Δ²): Δ² = (γ/κ)√(2Q/P)
    const double Delta_opt = std::pow(2.0 * s.Q / s.P, 0.25) * std::sqrt(gamma / kappa);
    const double d2 = Delta_opt * Delta_opt;
    const double r_opt =
        std::sqrt((kappa * d2 * s.P + gamma * s.Q) / ((0.5 * kappa + gamma / d2) * s.R));
    return {Delta_opt, r_opt};
}

// Dwell-time tables for the bundled time-optimal pulses (areas 7.612 and
// 10.809), frozen from the pulse-synthesis run committed under data/pulses.
inline TauTable builtin_cz_tau();
inline TauTable builtin_c2z_tau();

// Optimal closed-form protocol error for cooperativity C. For W the exact
// prefactor π√((1−1/N)(√(5/2)+7/4)) is used; the rounded constants quoted
// elsewhere (5.73, 4.05, 6.45, 14.66) appear only in tests.
inline double analytic_infidelity(Protocol protocol, double C, int N) {
    if (C <= 0.0) throw std::invalid_argument("analytic_infidelity: C must be > 0");
    switch (protocol) {
        case Protocol::W: {
            if (N < 2) throw std::invalid_argument("analytic_infidelity: W requires N >= 2");
            const double pref = M_PI * std::sqrt((1.0 - 1.0 / N) * (std::sqrt(2.5) + 1.75));
            return pref / std::sqrt(C);
        }
        case Protocol::CZ:
            return gate_error_minimum(Protocol::CZ, builtin_cz_tau(), 1.0, 1.0) / std::sqrt(C);
        case Protocol::C2Z:
            return gate_error_minimum(Protocol::C2Z, builtin_c2z_tau(), 1.0, 1.0) / std::sqrt(C);
    }
    throw std::invalid_argument("analytic_infidelity: unknown protocol");
}

} // namespace polsim

#include "polsim/builtin_tau.hpp"

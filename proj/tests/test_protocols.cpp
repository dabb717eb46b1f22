#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "polsim/protocols.hpp"

using namespace polsim;

#ifndef POLSIM_SOURCE_DIR
#define POLSIM_SOURCE_DIR "."
#endif

namespace {

PulseProfile bundled_pulse(Protocol gate) {
    const std::string root = POLSIM_SOURCE_DIR;
    return load_pulse(root + (gate == Protocol::CZ ? "/data/pulses/cz_area7.612.pulse"
                                                   : "/data/pulses/c2z_area10.809.pulse"));
}

} // namespace

TEST_CASE("parameter resolution fixes the protocol constraints") {
    PhysicalParams base;
    base.N = 4;
    base.kappa = 1e-2;
    base.gamma = 1e-2;
    base.Delta = 1.3;
    const double gT = 500.0, y = 2.0;
    const auto p = resolve_w_params(base, gT, y);
    CHECK(p.delta == Catch::Approx(2.0 / p.Delta).epsilon(1e-14));
    CHECK(p.Omega0 * gT == Catch::Approx(M_PI / 2.0).epsilon(1e-14)); // pi/sqrt(4)
    CHECK(p.eta * p.eta == Catch::Approx(y * p.Omega0).epsilon(1e-14));
    CHECK(p.delta_gl == Catch::Approx(0.5 * p.eta * p.eta * p.Delta).epsilon(1e-14));

    const auto q = resolve_gate_params(base, Protocol::CZ, gT, 1.5);
    CHECK(q.N == 2);
    CHECK(q.Omega0 == Catch::Approx(7.612 / gT).epsilon(1e-14));
    CHECK(q.Omega0 / (q.eta * q.eta) == Catch::Approx(1.5).epsilon(1e-12));

    CHECK_THROWS_AS(resolve_w_params(base, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(resolve_gate_params(base, Protocol::W, gT, 1.0), std::invalid_argument);
    PhysicalParams small;
    small.N = 1;
    CHECK_THROWS_AS(resolve_w_params(small, gT, 1.0), std::invalid_argument);
}

TEST_CASE("preparation runner rejects inconsistent drive rates") {
    PhysicalParams p;
    p.N = 2;
    p.kappa = 1e-2;
    p.gamma = 1e-2;
    p.Delta = 1.0;
    auto r = resolve_w_params(p, 100.0, 1.0);
    CHECK_THROWS_AS(run_w_preparation(r, 120.0, ModelKind::Effective), std::invalid_argument);
}

TEST_CASE("full and effective preparation models agree in the blockade regime") {
    PhysicalParams p;
    p.N = 2;
    p.kappa = 1e-2;
    p.gamma = 1e-2;
    const auto [Delta, y] = optimal_w_parameters(p.kappa, p.gamma, p.N);
    p.Delta = Delta;
    const double gT = 2000.0;
    const auto resolved = resolve_w_params(p, gT, y);

    const auto full = run_w_preparation(resolved, gT, ModelKind::Full, 1e-8);
    const auto eff = run_w_preparation(resolved, gT, ModelKind::Effective, 1e-8);

    // Frozen anchors for this parameter point (C = 1e4, optimal Delta/y).
    CHECK(full.fidelity == Catch::Approx(0.956615).margin(1e-3));
    CHECK(eff.fidelity == Catch::Approx(0.960390).margin(1e-3));
    CHECK(std::abs(full.fidelity - eff.fidelity) < 0.01);

    // Transfer populations behave like a slow pi pulse. The D1 population can
    // exceed the fidelity slightly: the latter also pays the phase mismatch.
    CHECK(full.populations.at("D1") == Catch::Approx(full.fidelity).margin(2e-3));
    CHECK(full.populations.at("D0") < 2e-3);
    CHECK(full.populations.at("D2") < 2e-3);

    // The budget decomposition closes against the measured infidelity.
    const double total =
        full.budget.gamma_loss + full.budget.kappa_loss + full.budget.residual;
    CHECK(total == Catch::Approx(1.0 - full.fidelity).epsilon(0.05));

    // Truncation diagnostics: converged at the default photon cutoff.
    CHECK(full.m_max_used == 3);
    CHECK(full.truncation_peak < truncation_threshold);
}

TEST_CASE("preparation error tracks the closed-form law at C = 1e4") {
    PhysicalParams p;
    p.N = 2;
    p.kappa = 1e-2;
    p.gamma = 1e-2;
    const auto [Delta, y] = optimal_w_parameters(p.kappa, p.gamma, p.N);
    p.Delta = Delta;
    const double gT = 4000.0;
    const auto res = run_w_preparation(resolve_w_params(p, gT, y), gT, ModelKind::Full, 1e-8);
    const double law = analytic_infidelity(Protocol::W, 1e4, 2);
    CHECK(-std::log(res.fidelity) == Catch::Approx(law).epsilon(0.10));
}

TEST_CASE("gate phase targets and branch-sum optimization") {
    // A state that meets the target phases exactly is recovered with F = 1.
    const double theta_star = 1.1;
    for (Protocol gate : {Protocol::CZ, Protocol::C2Z}) {
        const int N = gate_register_size(gate);
        std::vector<Complex> A(N + 1);
        double wsum = 0.0;
        for (int j = 0; j <= N; ++j) {
            double binom = 1.0;
            for (int k = 0; k < j; ++k) binom = binom * (N - k) / (k + 1);
            const double w = binom / std::pow(2.0, N);
            const double ph = detail::gate_target_phase(gate, j, theta_star);
            A[j] = w * Complex(std::cos(ph), std::sin(ph));
            wsum += w;
        }
        const auto [theta, F] = detail::optimize_theta_sums(gate, A);
        CHECK(F == Catch::Approx(wsum * wsum).margin(1e-9));
        CHECK(std::cos(theta - theta_star) == Catch::Approx(1.0).margin(1e-8));
    }
    // CZ phase pattern: xi2 = 2 xi1 + pi.
    const double t = 0.37;
    CHECK(detail::gate_target_phase(Protocol::CZ, 0, t) ==
          Catch::Approx(2.0 * detail::gate_target_phase(Protocol::CZ, 1, t) + M_PI));
    CHECK(detail::gate_target_phase(Protocol::CZ, 2, t) == 0.0);
    // C2Z phase pattern: the conditional pi sits on the all-|1'> branch.
    CHECK(detail::gate_target_phase(Protocol::C2Z, 3, t) == Catch::Approx(3.0 * t + M_PI));
    CHECK(detail::gate_target_phase(Protocol::C2Z, 1, t) == Catch::Approx(t));
}

TEST_CASE("lossless effective gate reaches unit fidelity with the bundled pulses") {
    for (Protocol gate : {Protocol::CZ, Protocol::C2Z}) {
        PhysicalParams p;
        p.Delta = 1.1;
        p.kappa = 0.0;
        p.gamma = 0.0;
        const double gT = 1500.0;
        const auto resolved = resolve_gate_params(p, gate, gT, 1.2);
        const auto res = run_gate(gate, resolved, bundled_pulse(gate), gT, ModelKind::Effective,
                                  1e-10);
        INFO("gate " << (gate == Protocol::CZ ? "CZ" : "C2Z"));
        // The C2Z profile sits marginally above its feasibility boundary; its
        // best known phase-condition objective is ~5e-7, which bounds the
        // fidelity deficit at the same level.
        CHECK(res.fidelity > 1.0 - 1e-6);
        CHECK(res.budget.residual < 1e-6);
    }
}

TEST_CASE("CZ infidelity matches its dwell-time error law at C = 1e4") {
    PhysicalParams p;
    p.kappa = 0.01;
    p.gamma = 0.01;
    const auto tau = builtin_cz_tau();
    const auto [Delta, r] = optimal_gate_parameters(Protocol::CZ, tau, p.kappa, p.gamma);
    p.Delta = Delta;
    const double gT = 2400.0;
    const auto resolved = resolve_gate_params(p, Protocol::CZ, gT, r);
    const auto res =
        run_gate(Protocol::CZ, resolved, bundled_pulse(Protocol::CZ), gT, ModelKind::Full, 1e-8);
    // Frozen anchor for this point; the closed-form law gives 6.458e-2.
    CHECK(1.0 - res.fidelity == Catch::Approx(6.382e-2).margin(4e-3));
    const double total = res.budget.gamma_loss + res.budget.kappa_loss + res.budget.residual;
    CHECK(total == Catch::Approx(1.0 - res.fidelity).epsilon(0.08));
    // Effective model lands on the same value.
    const auto eff = run_gate(Protocol::CZ, resolved, bundled_pulse(Protocol::CZ), gT,
                              ModelKind::Effective, 1e-8);
    CHECK(std::abs(eff.fidelity - res.fidelity) < 5e-3);
}

TEST_CASE("gate error formula is the dwell-sum expression in disguise") {
    // (Gamma-weighted dwell sums) / (2^(N-1)·2·Omega0) must equal the
    // closed-form error expression in (Delta, r) exactly.
    std::mt19937 rng(51);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Protocol gate : {Protocol::CZ, Protocol::C2Z}) {
        const TauTable tau = gate == Protocol::CZ ? builtin_cz_tau() : builtin_c2z_tau();
        for (int trial = 0; trial < 25; ++trial) {
            PhysicalParams p;
            p.kappa = 0.2 * u(rng) + 1e-3;
            p.gamma = 0.2 * u(rng) + 1e-3;
            p.Delta = 0.5 + 2.0 * u(rng);
            const double r = 0.3 + 2.0 * u(rng);
            const auto resolved = resolve_gate_params(p, gate, 1000.0, r);
            const auto model = build_effective_model(resolved);
            const double lhs = gate_error_formula(gate, tau, model, resolved.Omega0);
            const double rhs = gate_error_expression(gate, tau, p.kappa, p.gamma, p.Delta, r);
            CHECK(lhs == Catch::Approx(rhs).epsilon(1e-10));
        }
    }
}

TEST_CASE("gate error formula is linear in the loss rates") {
    const auto tau = builtin_cz_tau();
    PhysicalParams p;
    p.kappa = 0.01;
    p.gamma = 0.02;
    p.Delta = 1.1;
    const auto resolved = resolve_gate_params(p, Protocol::CZ, 800.0, 1.0);
    const auto m1 = build_effective_model(resolved);
    PhysicalParams q = resolved;
    q.kappa *= 2.0;
    q.gamma *= 2.0;
    const auto m2 = build_effective_model(q);
    CHECK(gate_error_formula(Protocol::CZ, tau, m2, resolved.Omega0) ==
          Catch::Approx(2.0 * gate_error_formula(Protocol::CZ, tau, m1, resolved.Omega0))
              .epsilon(1e-12));
}

TEST_CASE("dwell tables from the bundled pulses reproduce the frozen tables") {
    for (Protocol gate : {Protocol::CZ, Protocol::C2Z}) {
        const auto measured = gate_dwell_table(gate, bundled_pulse(gate));
        const TauTable frozen = gate == Protocol::CZ ? builtin_cz_tau() : builtin_c2z_tau();
        for (const auto& [name, value] : frozen.entries) {
            INFO("entry " << name);
            CHECK(measured.at(name) == Catch::Approx(value).margin(1e-8));
        }
        // Per-class sum rule: ground + excited dwell equals the pulse area.
        if (gate == Protocol::CZ) {
            CHECK(measured.at("1'0") + measured.at("1'1") ==
                  Catch::Approx(7.612).epsilon(1e-7));
            CHECK(measured.at("00") + measured.at("W") == Catch::Approx(7.612).epsilon(1e-7));
        } else {
            CHECK(measured.at("1'1'0") + measured.at("1'1'1") ==
                  Catch::Approx(10.809).epsilon(1e-7));
            CHECK(measured.at("1'00") + measured.at("1'W") ==
                  Catch::Approx(10.809).epsilon(1e-7));
            CHECK(measured.at("000") + measured.at("W1") ==
                  Catch::Approx(10.809).epsilon(1e-7));
        }
    }
}

TEST_CASE("non-adiabatic residual model") {
    CHECK(w_nonadiabatic_residual(2, 1.0, 1.0, 1000.0) ==
          Catch::Approx(2.0 * w_nonadiabatic_residual(2, 1.0, 1.0, 2000.0)).epsilon(1e-14));
    CHECK_THROWS_AS(w_nonadiabatic_residual(1, 1.0, 1.0, 100.0), std::invalid_argument);
    CHECK_THROWS_AS(w_nonadiabatic_residual(2, 0.0, 1.0, 100.0), std::invalid_argument);
}

TEST_CASE("duration convergence helper") {
    // Synthetic infidelity a + b/gT: plateaus once b/gT is small.
    auto inf = [](double gT) { return 0.05 + 10.0 / gT; };
    const auto [value, gT] = converge_in_gT(inf, 100.0, 0.02);
    CHECK(std::abs(value - 0.05) / 0.05 < 0.05);
    CHECK(gT > 100.0);
}

TEST_CASE("finite-duration optimum exists when the stored state decays") {
    PhysicalParams p;
    p.N = 3;
    p.kappa = 1e-3;
    p.gamma = 1e-3;
    p.gamma1 = 2e-5;
    const auto [Delta, y] = optimal_w_parameters(p.kappa, p.gamma, p.N);
    p.Delta = Delta;
    const auto [gT_opt, F_opt] = optimize_w_duration(p, y, ModelKind::Effective, 100.0, 20000.0);
    CHECK(gT_opt > 110.0);
    CHECK(gT_opt < 19000.0);
    // The optimum beats both bracket endpoints.
    auto fidelity_at = [&](double gT) {
        const auto r = resolve_w_params(p, gT, y);
        return run_w_preparation(r, gT, ModelKind::Effective).fidelity -
               w_nonadiabatic_residual(p.N, r.Delta, y, gT);
    };
    CHECK(F_opt >= fidelity_at(100.0) - 1e-9);
    CHECK(F_opt >= fidelity_at(20000.0) - 1e-9);
}

#pragma once

// Re-synthesis of the time-optimal phase profiles. The drive is phase-only,
// Ω(t) = Ω0 e^{iφ(τ)}; the phase is a natural cubic spline over uniformly
// spaced knots, and the knot values are optimized (multi-start BFGS) so that
// the lossless branch evolutions acquire the gate phase pattern with no
// residual excited-state population.
//
// Branch structure (N0 = atoms initialized in |0>, coupling √N0 Ω/2, all in
// dimensionless time τ = tΩ0, Γ = 0):
//   c_{N0} = <g| T-ordered exp(-i ∫ H_{N0}) |g>
// CZ  requires  c2 = -c1²  (ξ2 = 2ξ1 + π) with |c1| = |c2| = 1.
// C2Z additionally requires c3 = c1³ (ξ3 = 3ξ1); the conditional π lands on
// the uncoupled all-|1'> branch via the free single-qubit phase.

#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <gsl/gsl_multimin.h>

#include "polsim/polariton.hpp"
#include "polsim/pulses.hpp"

namespace polsim {

namespace detail {

// Natural cubic spline second derivatives (same recursion as PulseProfile).
inline std::vector<double> natural_spline_d2(const std::vector<double>& x,
                                             const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> d2(n, 0.0), u(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
        const double p = sig * d2[i - 1] + 2.0;
        d2[i] = (sig - 1.0) / p;
        u[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]) - (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
        u[i] = (6.0 * u[i] / (x[i + 1] - x[i - 1]) - sig * u[i - 1]) / p;
    }
    for (std::size_t k = n - 1; k-- > 0;) d2[k] = d2[k] * d2[k + 1] + u[k];
    return d2;
}

inline double spline_eval(const std::vector<double>& x, const std::vector<double>& y,
                          const std::vector<double>& d2, double t) {
    if (t <= x.front()) return y.front();
    if (t >= x.back()) return y.back();
    std::size_t lo = 0, hi = x.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (x[mid] <= t ? lo : hi) = mid;
    }
    const double h = x[lo + 1] - x[lo];
    const double A = (x[lo + 1] - t) / h, B = (t - x[lo]) / h;
    return A * y[lo] + B * y[lo + 1] +
           ((A * A * A - A) * d2[lo] + (B * B * B - B) * d2[lo + 1]) * h * h / 6.0;
}

// Lossless branch propagation with piecewise-constant phase (exact 2-level
// step). Returns the final ground amplitude; optionally accumulates the exact
// adjoint gradient of (c, |c|²-type functionals) via dU/dφ at each step.
class BranchPropagator {
public:
    // coupling a = √N0 / 2, n steps over [0, area]; phi holds the midpoint
    // phases phi[j], j = 0..n-1.
    BranchPropagator(double a, int n, double area) : a_(a), n_(n), dt_(area / n) {}

    std::complex<double> ground_amplitude(const std::vector<double>& phi) const {
        std::complex<double> g{1.0, 0.0}, e{0.0, 0.0};
        const double th = a_ * dt_, c = std::cos(th), s = std::sin(th);
        for (int j = 0; j < n_; ++j) {
            const std::complex<double> w{std::cos(phi[j]), std::sin(phi[j])};
            // U = cos(th) I - i sin(th) (e^{iφ}|e><g| + e^{-iφ}|g><e|)
            const std::complex<double> g2 = c * g - std::complex<double>(0, s) * std::conj(w) * e;
            const std::complex<double> e2 = c * e - std::complex<double>(0, s) * w * g;
            g = g2;
            e = e2;
        }
        return g;
    }

    // dc/dφ_j for c = <g|U|g>, all j, via one forward and one backward pass.
    void ground_amplitude_gradient(const std::vector<double>& phi, std::complex<double>& c_out,
                                   std::vector<std::complex<double>>& dc) const {
        const double th = a_ * dt_, c = std::cos(th), s = std::sin(th);
        std::vector<std::complex<double>> gf(n_ + 1), ef(n_ + 1);
        gf[0] = 1.0;
        ef[0] = 0.0;
        for (int j = 0; j < n_; ++j) {
            const std::complex<double> w{std::cos(phi[j]), std::sin(phi[j])};
            gf[j + 1] = c * gf[j] - std::complex<double>(0, s) * std::conj(w) * ef[j];
            ef[j + 1] = c * ef[j] - std::complex<double>(0, s) * w * gf[j];
        }
        c_out = gf[n_];
        // Backward adjoint row vector <g| U_n ... U_{j+1}.
        std::complex<double> rg{1.0, 0.0}, re{0.0, 0.0};
        dc.assign(n_, 0.0);
        for (int j = n_ - 1; j >= 0; --j) {
            const std::complex<double> w{std::cos(phi[j]), std::sin(phi[j])};
            // dU/dφ applied to ψ = (g, e): the off-diagonal entries pick up
            // ±i from dw/dφ = i w, giving (-s conj(w) e, +s w g).
            const std::complex<double> dg = -s * std::conj(w) * ef[j];
            const std::complex<double> de = s * w * gf[j];
            dc[j] = rg * dg + re * de;
            // Pull the adjoint row back through U_j: row <- row · U_j.
            const std::complex<double> rg2 = c * rg - std::complex<double>(0, s) * w * re;
            const std::complex<double> re2 = c * re - std::complex<double>(0, s) * std::conj(w) * rg;
            rg = rg2;
            re = re2;
        }
    }

private:
    double a_;
    int n_;
    double dt_;
};

} // namespace detail

struct SynthesisResult {
    PulseProfile pulse;
    double objective = 0.0;  // phase-condition violation² plus leakage
    bool converged = false;  // objective below 1e-8
    int starts_used = 0;
    std::string message;
};

inline constexpr double synthesis_objective_target = 1e-8;

namespace detail {

struct SynthesisProblem {
    Protocol gate;
    double area;
    int knots;
    int steps;
    std::vector<double> knot_tau;
    // Midpoint spline basis: phi_mid = basis · x (spline evaluation is linear
    // in the knot values).
    std::vector<std::vector<double>> basis; // basis[k][j]
    std::vector<BranchPropagator> branches; // couplings √N0/2 for N0 = 1..nb

    SynthesisProblem(Protocol g, double a, int segments, int steps_) : gate(g), area(a),
                                                                       knots(segments + 1),
                                                                       steps(steps_) {
        knot_tau.resize(knots);
        for (int k = 0; k < knots; ++k) knot_tau[k] = area * double(k) / (knots - 1);
        std::vector<double> unit(knots, 0.0);
        basis.assign(knots, std::vector<double>(steps, 0.0));
        for (int k = 0; k < knots; ++k) {
            unit.assign(knots, 0.0);
            unit[k] = 1.0;
            const auto d2 = natural_spline_d2(knot_tau, unit);
            for (int j = 0; j < steps; ++j)
                basis[k][j] = spline_eval(knot_tau, unit, d2, (j + 0.5) * area / steps);
        }
        const int nb = (gate == Protocol::C2Z) ? 3 : 2;
        for (int N0 = 1; N0 <= nb; ++N0)
            branches.emplace_back(0.5 * std::sqrt(double(N0)), steps, area);
    }

    std::vector<double> midpoint_phases(const double* x) const {
        std::vector<double> phi(steps, 0.0);
        for (int k = 0; k < knots; ++k) {
            if (x[k] == 0.0) continue;
            for (int j = 0; j < steps; ++j) phi[j] += x[k] * basis[k][j];
        }
        return phi;
    }

    // Objective and (optionally) its exact gradient in the knot values.
    double eval(const double* x, double* grad) const {
        using C = std::complex<double>;
        const auto phi = midpoint_phases(x);
        std::vector<C> c(branches.size());
        std::vector<std::vector<C>> dc(branches.size());
        for (std::size_t b = 0; b < branches.size(); ++b) {
            if (grad) branches[b].ground_amplitude_gradient(phi, c[b], dc[b]);
            else c[b] = branches[b].ground_amplitude(phi);
        }
        const C f1 = c[0] * c[0] + c[1]; // c2 = -c1²
        double J = std::norm(f1) + (1.0 - std::norm(c[0])) + (1.0 - std::norm(c[1]));
        C f2{0.0, 0.0};
        if (gate == Protocol::C2Z) {
            f2 = c[0] * c[0] * c[0] - c[2]; // c3 = c1³
            J += std::norm(f2) + (1.0 - std::norm(c[2]));
        }
        if (grad) {
            // dJ/dc_b (Wirtinger): J contribution 2 Re(conj(w_b) dc_b).
            std::vector<C> w(branches.size(), C{0.0, 0.0});
            w[0] += std::conj(f1) * 2.0 * c[0] - std::conj(c[0]);
            w[1] += std::conj(f1) - std::conj(c[1]);
            if (gate == Protocol::C2Z) {
                w[0] += std::conj(f2) * 3.0 * c[0] * c[0];
                w[2] += -std::conj(f2) - std::conj(c[2]);
            }
            std::vector<double> gphi(steps, 0.0);
            for (std::size_t b = 0; b < branches.size(); ++b)
                for (int j = 0; j < steps; ++j) gphi[j] += 2.0 * std::real(w[b] * dc[b][j]);
            for (int k = 0; k < knots; ++k) {
                double s = 0.0;
                for (int j = 0; j < steps; ++j) s += basis[k][j] * gphi[j];
                grad[k] = s;
            }
        }
        return J;
    }
};

inline double synth_f(const gsl_vector* v, void* p) {
    return static_cast<const SynthesisProblem*>(p)->eval(v->data, nullptr);
}
inline void synth_df(const gsl_vector* v, void* p, gsl_vector* g) {
    static_cast<const SynthesisProblem*>(p)->eval(v->data, g->data);
}
inline void synth_fdf(const gsl_vector* v, void* p, double* f, gsl_vector* g) {
    *f = static_cast<const SynthesisProblem*>(p)->eval(v->data, g->data);
}

} // namespace detail

inline SynthesisResult synthesize_time_optimal(Protocol gate, double area, int segments,
                                               int starts = 16, unsigned seed = 20240917) {
    if (gate != Protocol::CZ && gate != Protocol::C2Z)
        throw std::invalid_argument("synthesize_time_optimal: gate must be CZ or C2Z");
    if (area <= 0.0) throw std::invalid_argument("synthesize_time_optimal: area must be > 0");
    if (segments < 16)
        throw std::invalid_argument("synthesize_time_optimal: need at least 16 segments");

    const detail::SynthesisProblem prob(gate, area, segments, 4096);
    const int K = prob.knots;

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> amp(-1.5, 1.5);
    std::uniform_real_distribution<double> freq(0.5, 3.0);
    std::uniform_real_distribution<double> ph(0.0, 2.0 * M_PI);

    std::vector<double> best_x(K, 0.0);
    double best_J = std::numeric_limits<double>::infinity();
    int used = 0;

    gsl_multimin_function_fdf fdf;
    fdf.n = K;
    fdf.f = detail::synth_f;
    fdf.df = detail::synth_df;
    fdf.fdf = detail::synth_fdf;
    fdf.params = const_cast<void*>(static_cast<const void*>(&prob));

    for (int s = 0; s < starts; ++s) {
        ++used;
        gsl_vector* x = gsl_vector_alloc(K);
        if (s == 0) {
            // Symmetric single-dip seed resembling the known profiles.
            for (int k = 0; k < K; ++k)
                gsl_vector_set(x, k, 1.0 - std::cos(2.0 * M_PI * k / (K - 1)));
        } else {
            const int modes = 1 + s % 3;
            std::vector<double> a(modes), f(modes), p0(modes);
            for (int m = 0; m < modes; ++m) { a[m] = amp(rng); f[m] = freq(rng); p0[m] = ph(rng); }
            for (int k = 0; k < K; ++k) {
                double v = 0.0;
                const double u = double(k) / (K - 1);
                for (int m = 0; m < modes; ++m) v += a[m] * std::cos(2.0 * M_PI * f[m] * u + p0[m]);
                gsl_vector_set(x, k, v);
            }
        }

        gsl_multimin_fdfminimizer* m =
            gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, K);
        gsl_multimin_fdfminimizer_set(m, &fdf, x, 0.1, 0.1);
        int status = GSL_CONTINUE;
        for (int it = 0; it < 4000 && status == GSL_CONTINUE; ++it) {
            status = gsl_multimin_fdfminimizer_iterate(m);
            if (status) break; // line-search stall: accept current point
            if (m->f < 1e-14) break;
            status = gsl_multimin_test_gradient(m->gradient, 1e-12);
        }
        if (m->f < best_J) {
            best_J = m->f;
            for (int k = 0; k < K; ++k) best_x[k] = gsl_vector_get(m->x, k);
        }
        gsl_multimin_fdfminimizer_free(m);
        gsl_vector_free(x);
        if (best_J < 1e-12) break; // comfortably below target; stop early
    }

    // Gauge: φ(0) = 0 (a constant phase offset is unobservable).
    const double off = best_x[0];
    for (double& v : best_x) v -= off;

    SynthesisResult res{PulseProfile::sampled(1.0, 0.0, prob.knot_tau, best_x,
                                              gate == Protocol::CZ ? "CZ" : "C2Z"),
                        best_J, best_J < synthesis_objective_target, used, {}};
    if (res.converged) {
        res.message = "converged";
    } else {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "non-convergence: best objective %.3e above target %.1e after %d starts",
                      best_J, synthesis_objective_target, used);
        res.message = buf;
    }
    return res;
}

} // namespace polsim

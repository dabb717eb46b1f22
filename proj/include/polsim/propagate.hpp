#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "polsim/basis.hpp"
#include "polsim/hamiltonian.hpp"
#include "polsim/params.hpp"
#include "polsim/tau.hpp"

namespace polsim {

using VectorXd = Eigen::VectorXd;

// Optional per-sample observables. All are diagonal expectation weights over
// |ψ_i|²; tracked entries are named population sums (e.g. a projector onto a
// photon-traced Dicke state is a 0/1 weight vector).
struct Observables {
    VectorXd ne_weights;       // <n_e>
    VectorXd nph_weights;      // <a†a>
    VectorXd boundary_weights; // population of the m = m_max photon layer
    std::vector<std::pair<std::string, VectorXd>> tracked;
};

inline VectorXd state_projector_weights(int dim, int index) {
    VectorXd w = VectorXd::Zero(dim);
    w[index] = 1.0;
    return w;
}

struct Trajectory {
    std::vector<double> times;
    std::vector<double> norms;
    std::vector<double> n_e;
    std::vector<double> n_ph;
    std::vector<double> boundary;
    std::map<std::string, std::vector<double>> populations;
    VectorXcd final_state;
    double T = 0.0;
    long steps = 0;
    long rejected = 0;
};

struct EvolveOptions {
    double tol = 1e-10;
    int samples = 1001; // dense-output grid points (1000 intervals)
    double max_step_over_norm = 0.5; // cap: h <= this / ||H||-estimate
    Observables observables;
};

namespace detail {

inline double hamiltonian_norm_estimate(const TimeDependentOperator& H) {
    // Row sums of |static| plus the full drive amplitude on B, B†.
    const int d = H.dim();
    VectorXd row = VectorXd::Zero(d);
    auto accumulate = [&](const SparseXcd& M, double scale) {
        for (int k = 0; k < M.outerSize(); ++k)
            for (SparseXcd::InnerIterator it(M, k); it; ++it) row[it.row()] += scale * std::abs(it.value());
    };
    accumulate(H.static_part, 1.0);
    if (H.pulse) {
        accumulate(H.drive_part, 0.5 * H.pulse->Omega0());
        accumulate(H.drive_conj_part, 0.5 * H.pulse->Omega0());
    }
    return std::max(row.maxCoeff(), 1e-12);
}

// Composite Simpson on a uniform grid (odd number of points); falls back to a
// trapezoid for a trailing interval.
inline double simpson(const std::vector<double>& y, double dx) {
    const std::size_t n = y.size();
    if (n < 2) return 0.0;
    double s = 0.0;
    std::size_t i = 0;
    for (; i + 2 < n; i += 2) s += (y[i] + 4.0 * y[i + 1] + y[i + 2]) * dx / 3.0;
    if (i + 1 < n) s += 0.5 * (y[i] + y[i + 1]) * dx;
    return s;
}

} // namespace detail

// Integrates i dψ/dt = H(t) ψ with an adaptive Dormand-Prince 5(4) pair and
// dense output. Observables are sampled on a uniform grid via the standard
// DOPRI5 interpolant.
inline Trajectory evolve(const TimeDependentOperator& H, const VectorXcd& psi0, double T,
                         const EvolveOptions& opts = {}) {
    if (!(opts.tol > 1e-14 && opts.tol < 1e-4))
        throw std::invalid_argument("evolve: tol must lie in (1e-14, 1e-4)");
    if (psi0.size() != H.dim()) throw std::invalid_argument("evolve: state dimension mismatch");
    if (T <= 0.0) throw std::invalid_argument("evolve: duration must be positive");
    const int samples = std::max(opts.samples, 2);

    const int d = H.dim();
    const double hnorm = detail::hamiltonian_norm_estimate(H);
    const double hmax = std::min(opts.max_step_over_norm / hnorm, T);

    auto deriv = [&](double t, const VectorXcd& y, VectorXcd& out) {
        H.apply(t, y, out);
        out *= Complex(0.0, -1.0);
    };

    Trajectory traj;
    traj.T = T;
    traj.times.resize(samples);
    for (int i = 0; i < samples; ++i) traj.times[i] = T * double(i) / (samples - 1);

    const bool want_ne = opts.observables.ne_weights.size() == d;
    const bool want_nph = opts.observables.nph_weights.size() == d;
    const bool want_bd = opts.observables.boundary_weights.size() == d;
    auto record = [&](const VectorXcd& y) {
        traj.norms.push_back(y.norm());
        const VectorXd p = y.cwiseAbs2();
        if (want_ne) traj.n_e.push_back(opts.observables.ne_weights.dot(p));
        if (want_nph) traj.n_ph.push_back(opts.observables.nph_weights.dot(p));
        if (want_bd) traj.boundary.push_back(opts.observables.boundary_weights.dot(p));
        for (const auto& [name, w] : opts.observables.tracked)
            traj.populations[name].push_back(w.dot(p));
    };

    // Dormand-Prince coefficients.
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    static const double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

    VectorXcd y = psi0, k1(d), k2(d), k3(d), k4(d), k5(d), k6(d), k7(d), ytmp(d), ynew(d), yerr(d);
    deriv(0.0, y, k1);

    double t = 0.0;
    double h = std::min(hmax, 1e-2 / hnorm);
    int next_sample = 0;
    record(y);
    ++next_sample;

    const double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;

    while (t < T) {
        h = std::min(h, T - t);
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw std::runtime_error("evolve: step size underflow at t = " + std::to_string(t));

        ytmp = y + h * a21 * k1;
        deriv(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        deriv(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        deriv(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        deriv(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        deriv(t + h, ytmp, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        deriv(t + h, ynew, k7); // FSAL
        yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double err = 0.0;
        for (int i = 0; i < d; ++i) {
            const double sc = opts.tol + opts.tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double r = std::abs(yerr[i]) / sc;
            err += r * r;
        }
        err = std::sqrt(err / d);
        if (!std::isfinite(err))
            throw std::runtime_error("evolve: non-finite amplitudes at t = " + std::to_string(t));

        if (err <= 1.0) {
            // Dense output for samples inside (t, t+h].
            const bool need_dense =
                next_sample < samples && traj.times[next_sample] <= t + h + 1e-14 * T;
            VectorXcd rc1, rc2, rc3, rc4, rc5;
            if (need_dense) {
                rc1 = y;
                rc2 = ynew - y;
                rc3 = h * k1 - rc2;
                rc4 = rc2 - h * k7 - rc3;
                rc5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            }
            while (next_sample < samples && traj.times[next_sample] <= t + h + 1e-14 * T) {
                const double th = std::min((traj.times[next_sample] - t) / h, 1.0);
                const double th1 = 1.0 - th;
                ytmp = rc1 + th * (rc2 + th1 * (rc3 + th * (rc4 + th1 * rc5)));
                record(ytmp);
                ++next_sample;
            }
            t += h;
            y.swap(ynew);
            k1.swap(k7);
            ++traj.steps;
            h = std::min({h * std::min(5.0, std::max(0.2, 0.9 * std::pow(err + 1e-300, -0.2))), hmax});
        } else {
            ++traj.rejected;
            h *= std::min(1.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
        }
    }

    // Make sure the final grid point reflects the exactly-integrated state.
    traj.final_state = y;
    if (next_sample == samples) {
        traj.norms.back() = y.norm();
        const VectorXd p = y.cwiseAbs2();
        if (want_ne) traj.n_e.back() = opts.observables.ne_weights.dot(p);
        if (want_nph) traj.n_ph.back() = opts.observables.nph_weights.dot(p);
        if (want_bd) traj.boundary.back() = opts.observables.boundary_weights.dot(p);
        for (const auto& [name, w] : opts.observables.tracked)
            traj.populations[name].back() = w.dot(p);
    } else {
        record(y);
        ++next_sample;
        if (next_sample != samples)
            throw std::logic_error("evolve: dense-output grid not fully populated");
    }
    return traj;
}

// Observable weight builders.
inline Observables make_symmetric_observables(const SymmetricBasis& basis) {
    Observables obs;
    const int d = basis.dim();
    obs.ne_weights.resize(d);
    obs.nph_weights.resize(d);
    obs.boundary_weights.resize(d);
    for (int i = 0; i < d; ++i) {
        const auto& s = basis.state(i);
        obs.ne_weights[i] = s.b;
        obs.nph_weights[i] = s.m;
        obs.boundary_weights[i] = (s.m == basis.m_max()) ? 1.0 : 0.0;
    }
    return obs;
}

inline Observables make_four_level_observables(const FourLevelBasis& basis) {
    Observables obs;
    const int d = basis.dim();
    obs.ne_weights.resize(d);
    obs.nph_weights.resize(d);
    obs.boundary_weights.resize(d);
    for (int i = 0; i < d; ++i) {
        auto [labels, m] = basis.state(i);
        int ne = 0;
        for (auto l : labels)
            if (l == AtomLabel::Excited) ++ne;
        obs.ne_weights[i] = ne;
        obs.nph_weights[i] = m;
        obs.boundary_weights[i] = (m == basis.m_max()) ? 1.0 : 0.0;
    }
    return obs;
}

// Peak population of the m = m_max photon layer; caller re-runs with a larger
// truncation when this exceeds 1e-8.
inline double check_truncation(const Trajectory& traj) {
    if (traj.boundary.empty())
        throw std::invalid_argument("check_truncation: trajectory lacks boundary-layer samples");
    double peak = 0.0;
    for (double v : traj.boundary) peak = std::max(peak, v);
    return peak;
}

inline constexpr double truncation_threshold = 1e-8;

// Dwell times τ_q = Ω0 ∫ |<q|ψ(t)>|² dt under lossless evolution, by composite
// Simpson on the dense-output grid.
inline TauTable dwell_times(const TimeDependentOperator& H_lossless, const VectorXcd& psi0,
                            const std::vector<std::pair<std::string, int>>& labels, double T,
                            double Omega0, double tol = 1e-10, int samples = 4001) {
    // Reject non-unitary generators.
    const MatrixXcd H0 = MatrixXcd(H_lossless.static_part);
    if ((H0 - H0.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("dwell_times: Hamiltonian must be lossless");

    EvolveOptions opts;
    opts.tol = tol;
    opts.samples = samples;
    for (const auto& [name, idx] : labels)
        opts.observables.tracked.emplace_back(name,
                                              state_projector_weights(H_lossless.dim(), idx));
    const Trajectory traj = evolve(H_lossless, psi0, T, opts);
    const double dx = traj.times[1] - traj.times[0];

    TauTable tau;
    for (const auto& [name, idx] : labels)
        tau.entries[name] = Omega0 * detail::simpson(traj.populations.at(name), dx);
    return tau;
}

struct ErrorBudget {
    double gamma_loss = 0.0;
    double kappa_loss = 0.0;
    double residual = 0.0;
};

// Loss integrals γ∫<n_e>dt and κ∫<a†a>dt from a lossy trajectory; the
// non-adiabatic residual comes from a companion lossless run against the
// target state.
inline ErrorBudget error_budget(const Trajectory& traj, const PhysicalParams& params,
                                const Trajectory& lossless_traj, int target_index) {
    if (traj.n_e.empty() || traj.n_ph.empty())
        throw std::invalid_argument("error_budget: trajectory lacks <n_e>/<a†a> samples");
    ErrorBudget b;
    const double dx = traj.times[1] - traj.times[0];
    b.gamma_loss = params.gamma * detail::simpson(traj.n_e, dx);
    b.kappa_loss = params.kappa * detail::simpson(traj.n_ph, dx);
    b.residual = 1.0 - std::norm(lossless_traj.final_state[target_index]);
    return b;
}

} // namespace polsim

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "polsim/basis.hpp"
#include "polsim/params.hpp"
#include "polsim/pulses.hpp"

namespace polsim {

using Complex = std::complex<double>;
using SparseXcd = Eigen::SparseMatrix<Complex>;
using VectorXcd = Eigen::VectorXcd;
using MatrixXcd = Eigen::MatrixXcd;
using Triplet = Eigen::Triplet<Complex>;

inline constexpr Complex I{0.0, 1.0};

// H(t) = static_part + Ω(t) B / 2 + Ω*(t) B† / 2, with Ω(t) supplied by the
// pulse. The η cavity drive is time-independent in every protocol and lives in
// static_part; eta_law is a hook for a modulated drive and replaces the static
// η term when set.
struct TimeDependentOperator {
    SparseXcd static_part;
    SparseXcd drive_part;      // B
    SparseXcd drive_conj_part; // B†
    std::optional<PulseProfile> pulse;
    SparseXcd eta_part; // i(a† - a), only used together with eta_law
    std::function<double(double)> eta_law;

    int dim() const { return static_cast<int>(static_part.rows()); }
    bool has_drive() const { return pulse.has_value(); }

    Complex drive_amplitude(double t) const { return pulse ? pulse->drive(t) : Complex{0.0}; }

    void apply(double t, const VectorXcd& x, VectorXcd& out) const {
        out.noalias() = static_part * x;
        if (pulse) {
            const Complex w = 0.5 * pulse->drive(t);
            out.noalias() += w * (drive_part * x);
            out.noalias() += std::conj(w) * (drive_conj_part * x);
        }
        if (eta_law) out.noalias() += Complex(eta_law(t)) * (eta_part * x);
    }

    MatrixXcd dense(double t) const {
        MatrixXcd H = MatrixXcd(static_part);
        if (pulse) {
            const Complex w = 0.5 * pulse->drive(t);
            H += w * MatrixXcd(drive_part) + std::conj(w) * MatrixXcd(drive_conj_part);
        }
        if (eta_law) H += Complex(eta_law(t)) * MatrixXcd(eta_part);
        return H;
    }

    // Largest row sum of |H(t)| entries; cheap spectral-norm upper bound used
    // for step-size capping.
    double norm_estimate(double t) const {
        const MatrixXcd H = dense(t);
        double best = 0.0;
        for (int i = 0; i < H.rows(); ++i) {
            double s = 0.0;
            for (int j = 0; j < H.cols(); ++j) s += std::abs(H(i, j));
            best = std::max(best, s);
        }
        return best;
    }
};

namespace detail {

inline SparseXcd collective_matrix(CollectiveOp op, const SymmetricBasis& basis) {
    std::vector<Triplet> trips;
    for (int i = 0; i < basis.dim(); ++i) {
        const auto el = collective_coupling_element(op, basis.state(i), basis.N(), basis.m_max());
        if (el.amplitude != 0.0) trips.emplace_back(basis.index(el.to), i, Complex(el.amplitude));
    }
    SparseXcd M(basis.dim(), basis.dim());
    M.setFromTriplets(trips.begin(), trips.end());
    return M;
}

inline SparseXcd diagonal_matrix(const SymmetricBasis& basis,
                                 const std::function<double(const SymmetricBasisState&)>& f) {
    std::vector<Triplet> trips;
    for (int i = 0; i < basis.dim(); ++i) {
        const double v = f(basis.state(i));
        if (v != 0.0) trips.emplace_back(i, i, Complex(v));
    }
    SparseXcd M(basis.dim(), basis.dim());
    M.setFromTriplets(trips.begin(), trips.end());
    return M;
}

} // namespace detail

// Full rotating-frame Hamiltonian on the symmetric basis:
//   δ a†a + Δ n_e + g (S− a† + S+ a) − (i/2)κ a†a − (i/2)γ n_e − (i/2)γ1 n_1
//   + iη (a† − a) + [Ω(t)/2 Σ|1><0| + h.c.]
inline TimeDependentOperator build_full_hamiltonian(const PhysicalParams& p,
                                                    const SymmetricBasis& basis,
                                                    const PulseProfile& pulse) {
    p.validate();
    if (basis.N() != p.N)
        throw std::invalid_argument("build_full_hamiltonian: basis/params N mismatch");

    const SparseXcd a = detail::collective_matrix(CollectiveOp::A, basis);
    const SparseXcd adag = detail::collective_matrix(CollectiveOp::Adag, basis);
    const SparseXcd sp_a = detail::collective_matrix(CollectiveOp::SplusA, basis);
    const SparseXcd sm_adag = detail::collective_matrix(CollectiveOp::SminusAdag, basis);
    const SparseXcd n_ph =
        detail::diagonal_matrix(basis, [](const SymmetricBasisState& s) { return double(s.m); });
    const SparseXcd n_e =
        detail::diagonal_matrix(basis, [](const SymmetricBasisState& s) { return double(s.b); });
    const SparseXcd n_1 =
        detail::diagonal_matrix(basis, [](const SymmetricBasisState& s) { return double(s.a); });

    TimeDependentOperator H;
    H.static_part = (Complex(p.delta) - 0.5 * I * p.kappa) * n_ph +
                    (Complex(p.Delta) - 0.5 * I * p.gamma) * n_e - 0.5 * I * p.gamma1 * n_1 +
                    Complex(p.g) * (sm_adag + sp_a) + I * p.eta * (adag - a);
    H.eta_part = I * (adag - a);
    if (pulse.Omega0() > 0.0 && p.Omega0 > 0.0) {
        H.drive_part = detail::collective_matrix(CollectiveOp::Raise01, basis);
        H.drive_conj_part = SparseXcd(H.drive_part.adjoint());
        H.pulse = pulse;
    } else {
        H.drive_part.resize(basis.dim(), basis.dim());
        H.drive_conj_part.resize(basis.dim(), basis.dim());
    }
    H.static_part.makeCompressed();
    return H;
}

// Four-level (gate) variant on the product basis; |1'> is a spectator.
inline TimeDependentOperator build_four_level_hamiltonian(const PhysicalParams& p,
                                                          const FourLevelBasis& basis,
                                                          const PulseProfile& pulse) {
    p.validate();
    if (basis.N() != p.N)
        throw std::invalid_argument("build_four_level_hamiltonian: basis/params N mismatch");

    const int d = basis.dim();
    const int mmax = basis.m_max();
    std::vector<Triplet> st, dr;

    auto push_atom_op = [&](std::vector<Triplet>& out, AtomLabel from, AtomLabel to, int dm,
                            Complex scale) {
        // scale · Σ_j |to_j><from_j| ⊗ (photon ladder by dm)
        for (int i = 0; i < d; ++i) {
            auto [labels, m] = basis.state(i);
            const int m2 = m + dm;
            if (m2 < 0 || m2 > mmax) continue;
            double ph = 1.0;
            if (dm == -1) ph = std::sqrt(double(m));
            if (dm == +1) ph = std::sqrt(double(m + 1));
            for (int j = 0; j < basis.N(); ++j) {
                if (labels[j] != from) continue;
                auto labels2 = labels;
                labels2[j] = to;
                out.emplace_back(basis.index(labels2, m2), i, scale * ph);
            }
        }
    };

    for (int i = 0; i < d; ++i) {
        auto [labels, m] = basis.state(i);
        int ne = 0, n1 = 0;
        for (auto l : labels) {
            if (l == AtomLabel::Excited) ++ne;
            if (l == AtomLabel::One) ++n1;
        }
        const Complex diag = (Complex(p.delta) - 0.5 * I * p.kappa) * double(m) +
                             (Complex(p.Delta) - 0.5 * I * p.gamma) * double(ne) -
                             0.5 * I * p.gamma1 * double(n1);
        if (diag != Complex(0.0)) st.emplace_back(i, i, diag);
        // iη (a† − a)
        if (m + 1 <= mmax && p.eta != 0.0)
            st.emplace_back(basis.index(labels, m + 1), i, I * p.eta * std::sqrt(double(m + 1)));
        if (m >= 1 && p.eta != 0.0)
            st.emplace_back(basis.index(labels, m - 1), i, -I * p.eta * std::sqrt(double(m)));
    }
    push_atom_op(st, AtomLabel::One, AtomLabel::Excited, -1, Complex(p.g));  // g S+ a
    push_atom_op(st, AtomLabel::Excited, AtomLabel::One, +1, Complex(p.g));  // g S- a†
    push_atom_op(dr, AtomLabel::Zero, AtomLabel::One, 0, Complex(1.0));      // Σ|1><0|

    TimeDependentOperator H;
    H.static_part.resize(d, d);
    H.static_part.setFromTriplets(st.begin(), st.end());
    H.static_part.makeCompressed();
    H.drive_part.resize(d, d);
    H.drive_part.setFromTriplets(dr.begin(), dr.end());
    H.drive_conj_part = SparseXcd(H.drive_part.adjoint());
    if (pulse.Omega0() > 0.0 && p.Omega0 > 0.0) H.pulse = pulse;
    return H;
}

// Closed-form two-level blockade model (energies, linewidths, coupling rule).
struct EffectiveModel {
    double E0 = 0.0;
    double Gamma0 = 0.0;
    double E1 = 0.0;
    double eta = 0.0;
    double Delta = 0.0;
    double kappa = 0.0;
    double gamma = 0.0;
    double Omega0 = 0.0;
    double gamma1 = 0.0;

    // Γ1 for a subspace with N0 atoms initialized in |0>; includes the γ1
    // modification when the |1> state itself decays.
    double Gamma1(int N0) const {
        const double d2 = Delta * Delta;
        double G = eta * eta * (kappa * d2 + gamma);
        if (N0 > 1 && Omega0 > 0.0)
            G += (N0 - 1) * Omega0 * Omega0 / (eta * eta) * (0.5 * kappa + gamma / d2);
        if (gamma1 > 0.0) {
            double f = 1.0 + eta * eta * d2;
            if (N0 > 1 && Omega0 > 0.0)
                f += (N0 - 1) * Omega0 * Omega0 * (1.0 + 1.0 / d2) / (eta * eta);
            G += f * gamma1;
        }
        return G;
    }

    double coupling(int N0) const { return std::sqrt(double(N0)); } // √N0 Ω/2 rule

    // Ω' = Ω0 √(1 − (Γ0 − Γ1)² / (4 N Ω0²)) for the damped Rabi closed form.
    double Omega_prime(int N0) const {
        const double d = Gamma0 - Gamma1(N0);
        return Omega0 * std::sqrt(1.0 - d * d / (4.0 * N0 * Omega0 * Omega0));
    }
};

inline EffectiveModel build_effective_model(const PhysicalParams& p) {
    p.validate();
    if (p.Delta == 0.0) throw std::invalid_argument("build_effective_model: Delta must be nonzero");
    if (p.Omega0 > 0.0 && p.eta <= 0.0)
        throw std::invalid_argument("build_effective_model: eta must be > 0 when Omega0 > 0");
    EffectiveModel m;
    m.eta = p.eta;
    m.Delta = p.Delta;
    m.kappa = p.kappa;
    m.gamma = p.gamma;
    m.Omega0 = p.Omega0;
    m.gamma1 = p.gamma1;
    const double e2 = p.eta * p.eta, d2 = p.Delta * p.Delta;
    m.E0 = -0.5 * e2 * p.Delta;
    m.E1 = -e2 * p.Delta;
    m.Gamma0 = 0.25 * p.kappa * e2 * d2;
    return m;
}

// Two-level blockade Hamiltonian in the dressed rotating frame: basis
// {computational state, excited partner}, coupling √N0 Ω(t)/2, diagonal decay.
// N0 = 0 degenerates to pure decay of the computational state.
inline TimeDependentOperator build_effective_hamiltonian(const EffectiveModel& model, int N0,
                                                         const PulseProfile& pulse) {
    if (N0 < 0) throw std::invalid_argument("build_effective_hamiltonian: N0 must be >= 0");
    TimeDependentOperator H;
    if (N0 == 0) {
        H.static_part.resize(1, 1);
        H.static_part.insert(0, 0) = -0.5 * I * model.Gamma0;
        H.drive_part.resize(1, 1);
        H.drive_conj_part.resize(1, 1);
        H.static_part.makeCompressed();
        return H;
    }
    H.static_part.resize(2, 2);
    H.static_part.insert(0, 0) = -0.5 * I * model.Gamma0;
    H.static_part.insert(1, 1) = -0.5 * I * model.Gamma1(N0);
    H.drive_part.resize(2, 2);
    H.drive_part.insert(1, 0) = model.coupling(N0);
    H.drive_conj_part = SparseXcd(H.drive_part.adjoint());
    H.pulse = pulse;
    H.static_part.makeCompressed();
    return H;
}

} // namespace polsim

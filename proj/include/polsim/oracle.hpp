#pragma once

// Brute-force tensor-product construction of the collective operators and the
// symmetric-sector projector. This is the validation anchor for all
// combinatorial factors in basis.hpp; it is built independently of the
// symmetric fast path and must stay that way.

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

#include "polsim/basis.hpp"

namespace polsim::oracle {

using Complex = std::complex<double>;
using MatrixXcd = Eigen::MatrixXcd;
using VectorXcd = Eigen::VectorXcd;

// Full product basis of N three-level atoms (labels 0, 1, e) and a truncated
// photon mode. Atom 0 is the most significant trit; photons are fastest.
class ThreeLevelProductBasis {
public:
    ThreeLevelProductBasis(int N, int m_max) : N_(N), m_max_(m_max) {
        if (N < 1 || m_max < 0) throw std::invalid_argument("ThreeLevelProductBasis: bad sizes");
        dim_ = 1;
        for (int j = 0; j < N; ++j) dim_ *= 3;
        dim_ *= (m_max + 1);
    }

    int N() const { return N_; }
    int m_max() const { return m_max_; }
    int dim() const { return dim_; }

    int index(const std::vector<int>& labels, int m) const {
        int code = 0;
        for (int l : labels) code = code * 3 + l;
        return code * (m_max_ + 1) + m;
    }

    int photons_of(int i) const { return i % (m_max_ + 1); }

    std::pair<std::vector<int>, int> state(int i) const {
        const int m = i % (m_max_ + 1);
        int code = i / (m_max_ + 1);
        std::vector<int> labels(N_);
        for (int j = N_ - 1; j >= 0; --j) {
            labels[j] = code % 3;
            code /= 3;
        }
        return {labels, m};
    }

private:
    int N_, m_max_, dim_;
};

// Normalized symmetrization of |a,b;m> in the product space. All coefficients
// positive real (phase convention shared with the symmetric basis).
inline VectorXcd symmetrized_state(const SymmetricBasisState& s, const ThreeLevelProductBasis& full) {
    VectorXcd v = VectorXcd::Zero(full.dim());
    int count = 0;
    for (int i = 0; i < full.dim(); ++i) {
        auto [labels, m] = full.state(i);
        if (m != s.m) continue;
        int a = 0, b = 0;
        for (int l : labels) {
            if (l == 1) ++a;
            if (l == 2) ++b;
        }
        if (a == s.a && b == s.b) {
            v[i] = 1.0;
            ++count;
        }
    }
    if (count == 0) throw std::invalid_argument("symmetrized_state: state not representable");
    v /= std::sqrt(double(count));
    return v;
}

// Rows are the symmetrized states: maps full-space vectors to symmetric-sector
// amplitudes.
inline MatrixXcd symmetric_projector(const SymmetricBasis& sym, const ThreeLevelProductBasis& full) {
    if (sym.N() != full.N() || sym.m_max() != full.m_max())
        throw std::invalid_argument("symmetric_projector: basis size mismatch");
    MatrixXcd P(sym.dim(), full.dim());
    for (int i = 0; i < sym.dim(); ++i) P.row(i) = symmetrized_state(sym.state(i), full).transpose();
    return P;
}

inline VectorXcd project_full_to_symmetric(const VectorXcd& full_state, const SymmetricBasis& sym,
                                           const ThreeLevelProductBasis& full) {
    if (full_state.size() != full.dim())
        throw std::invalid_argument("project_full_to_symmetric: dimension mismatch");
    return symmetric_projector(sym, full) * full_state;
}

// Tensor-product matrix of a collective operator.
inline MatrixXcd collective_operator_matrix(CollectiveOp op, const ThreeLevelProductBasis& full) {
    const int d = full.dim();
    MatrixXcd M = MatrixXcd::Zero(d, d);

    auto add_single_atom = [&](int from_label, int to_label, int dm) {
        // Σ_j |to_j><from_j| combined with a photon ladder shift dm.
        for (int i = 0; i < d; ++i) {
            auto [labels, m] = full.state(i);
            const int m2 = m + dm;
            if (m2 < 0 || m2 > full.m_max()) continue;
            double ph = 1.0;
            if (dm == -1) ph = std::sqrt(double(m));
            if (dm == +1) ph = std::sqrt(double(m + 1));
            for (int j = 0; j < full.N(); ++j) {
                if (labels[j] != from_label) continue;
                auto labels2 = labels;
                labels2[j] = to_label;
                M(full.index(labels2, m2), i) += ph;
            }
        }
    };

    switch (op) {
        case CollectiveOp::Raise01: add_single_atom(0, 1, 0); break;
        case CollectiveOp::Lower01: add_single_atom(1, 0, 0); break;
        case CollectiveOp::SplusA: add_single_atom(1, 2, -1); break;   // S+ a
        case CollectiveOp::SminusAdag: add_single_atom(2, 1, +1); break; // S- a†
        case CollectiveOp::A:
        case CollectiveOp::Adag: {
            const int dm = (op == CollectiveOp::A) ? -1 : +1;
            for (int i = 0; i < d; ++i) {
                auto [labels, m] = full.state(i);
                const int m2 = m + dm;
                if (m2 < 0 || m2 > full.m_max()) continue;
                const double ph = (dm == -1) ? std::sqrt(double(m)) : std::sqrt(double(m + 1));
                M(full.index(labels, m2), i) += ph;
            }
            break;
        }
    }
    return M;
}

// Diagonal number operators on the product space.
inline MatrixXcd number_operator_matrix(int label, const ThreeLevelProductBasis& full) {
    MatrixXcd M = MatrixXcd::Zero(full.dim(), full.dim());
    for (int i = 0; i < full.dim(); ++i) {
        auto [labels, m] = full.state(i);
        int c = 0;
        for (int l : labels)
            if (l == label) ++c;
        M(i, i) = c;
    }
    return M;
}

inline MatrixXcd photon_number_matrix(const ThreeLevelProductBasis& full) {
    MatrixXcd M = MatrixXcd::Zero(full.dim(), full.dim());
    for (int i = 0; i < full.dim(); ++i) M(i, i) = full.photons_of(i);
    return M;
}

} // namespace polsim::oracle

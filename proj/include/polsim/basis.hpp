#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace polsim {

// Collective state |a, b; m>: a atoms in |1>, b atoms in |e>, m cavity photons,
// the remaining N-a-b atoms in |0>.
struct SymmetricBasisState {
    int a = 0;
    int b = 0;
    int m = 0;

    friend bool operator==(const SymmetricBasisState&, const SymmetricBasisState&) = default;
    friend auto operator<=>(const SymmetricBasisState&, const SymmetricBasisState&) = default;
};

// Permutation-symmetric collective basis. Ordering is lexicographic in
// (n = a+b, b, m) so that conserved-number blocks are contiguous.
class SymmetricBasis {
public:
    SymmetricBasis(int N, int m_max) : N_(N), m_max_(m_max) {
        if (N < 1) throw std::invalid_argument("SymmetricBasis: N must be >= 1");
        if (m_max < 0) throw std::invalid_argument("SymmetricBasis: m_max must be >= 0");
        for (int n = 0; n <= N; ++n)
            for (int b = 0; b <= n; ++b)
                for (int m = 0; m <= m_max; ++m)
                    states_.push_back({n - b, b, m});
        for (std::size_t i = 0; i < states_.size(); ++i)
            index_[key(states_[i])] = static_cast<int>(i);
    }

    int N() const { return N_; }
    int m_max() const { return m_max_; }
    int dim() const { return static_cast<int>(states_.size()); }
    const std::vector<SymmetricBasisState>& states() const { return states_; }
    const SymmetricBasisState& state(int i) const { return states_.at(i); }

    int index(const SymmetricBasisState& s) const {
        auto it = index_.find(key(s));
        if (it == index_.end()) throw std::out_of_range("SymmetricBasis: state not in basis");
        return it->second;
    }

    bool contains(const SymmetricBasisState& s) const {
        return s.a >= 0 && s.b >= 0 && s.m >= 0 && s.a + s.b <= N_ && s.m <= m_max_;
    }

private:
    static std::tuple<int, int, int> key(const SymmetricBasisState& s) {
        return {s.a + s.b, s.b, s.m};
    }

    int N_;
    int m_max_;
    std::vector<SymmetricBasisState> states_;
    std::map<std::tuple<int, int, int>, int> index_;
};

enum class CollectiveOp {
    SplusA,     // S+ a
    SminusAdag, // S- a†
    A,          // a
    Adag,       // a†
    Raise01,    // Σ|1><0|
    Lower01,    // Σ|0><1|
};

struct CouplingElement {
    SymmetricBasisState to;
    double amplitude = 0.0; // real, non-negative under the positive phase convention
};

// Single nonzero matrix element of a collective operator acting on a symmetric
// state. Zero amplitude when the operator annihilates the state or the image
// leaves the (N, m_max) truncation.
inline CouplingElement collective_coupling_element(CollectiveOp op, const SymmetricBasisState& s,
                                                   int N, int m_max) {
    const int n0 = N - s.a - s.b; // atoms in |0>
    if (s.a < 0 || s.b < 0 || s.m < 0 || n0 < 0)
        throw std::invalid_argument("collective_coupling_element: state invalid for N");

    auto zero = [&]() { return CouplingElement{s, 0.0}; };
    switch (op) {
        case CollectiveOp::Raise01: {
            if (n0 == 0) return zero();
            return {{s.a + 1, s.b, s.m}, std::sqrt(double(n0) * (s.a + 1))};
        }
        case CollectiveOp::Lower01: {
            if (s.a == 0) return zero();
            return {{s.a - 1, s.b, s.m}, std::sqrt(double(s.a) * (n0 + 1))};
        }
        case CollectiveOp::A: {
            if (s.m == 0) return zero();
            return {{s.a, s.b, s.m - 1}, std::sqrt(double(s.m))};
        }
        case CollectiveOp::Adag: {
            if (s.m + 1 > m_max) return zero();
            return {{s.a, s.b, s.m + 1}, std::sqrt(double(s.m + 1))};
        }
        case CollectiveOp::SplusA: {
            if (s.a == 0 || s.m == 0) return zero();
            return {{s.a - 1, s.b + 1, s.m - 1},
                    std::sqrt(double(s.a) * (s.b + 1)) * std::sqrt(double(s.m))};
        }
        case CollectiveOp::SminusAdag: {
            if (s.b == 0) return zero();
            if (s.m + 1 > m_max) return zero();
            return {{s.a + 1, s.b - 1, s.m + 1},
                    std::sqrt(double(s.a + 1) * s.b) * std::sqrt(double(s.m + 1))};
        }
    }
    return zero();
}

// Per-atom labels for the gate variant. |1'> is a spectator in the rotating
// frame: zero energy, no coupling, no loss.
enum class AtomLabel : std::uint8_t { Zero = 0, OnePrime = 1, One = 2, Excited = 3 };

// Product basis over per-atom labels {0, 1', 1, e} joined with photon number.
// Ordering: atom labels form a base-4 code (atom 0 most significant), photon
// number is the fastest index.
class FourLevelBasis {
public:
    FourLevelBasis(int N, int m_max) : N_(N), m_max_(m_max) {
        if (N < 2 || N > 3)
            throw std::invalid_argument("FourLevelBasis: supported gate sizes are N in {2,3}");
        if (m_max < 0) throw std::invalid_argument("FourLevelBasis: m_max must be >= 0");
        dim_ = pow4(N) * (m_max + 1);
    }

    int N() const { return N_; }
    int m_max() const { return m_max_; }
    int dim() const { return dim_; }

    int index(const std::vector<AtomLabel>& labels, int m) const {
        if (static_cast<int>(labels.size()) != N_)
            throw std::invalid_argument("FourLevelBasis: label count mismatch");
        if (m < 0 || m > m_max_) throw std::out_of_range("FourLevelBasis: photon number");
        int code = 0;
        for (auto l : labels) code = code * 4 + static_cast<int>(l);
        return code * (m_max_ + 1) + m;
    }

    std::pair<std::vector<AtomLabel>, int> state(int i) const {
        if (i < 0 || i >= dim_) throw std::out_of_range("FourLevelBasis: index");
        const int m = i % (m_max_ + 1);
        int code = i / (m_max_ + 1);
        std::vector<AtomLabel> labels(N_);
        for (int j = N_ - 1; j >= 0; --j) {
            labels[j] = static_cast<AtomLabel>(code % 4);
            code /= 4;
        }
        return {labels, m};
    }

    AtomLabel label_of(int i, int atom) const {
        int code = i / (m_max_ + 1);
        for (int j = N_ - 1; j > atom; --j) code /= 4;
        return static_cast<AtomLabel>(code % 4);
    }

    int photons_of(int i) const { return i % (m_max_ + 1); }

private:
    static int pow4(int n) { return 1 << (2 * n); }

    int N_;
    int m_max_;
    int dim_;
};

} // namespace polsim

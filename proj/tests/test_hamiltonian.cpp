#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>
#include <random>

#include "polsim/hamiltonian.hpp"
#include "polsim/oracle.hpp"
#include "polsim/polariton.hpp"

using namespace polsim;

namespace {

PhysicalParams random_params(std::mt19937& rng, int N, bool lossy, bool driven) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PhysicalParams p;
    p.N = N;
    p.Delta = 0.5 + 2.5 * u(rng);
    p.delta = -1.0 + 3.0 * u(rng);
    p.eta = 0.5 * u(rng);
    p.delta_gl = -0.2 + 0.4 * u(rng);
    if (lossy) {
        p.kappa = 0.3 * u(rng);
        p.gamma = 0.3 * u(rng);
        p.gamma1 = 0.1 * u(rng);
    }
    p.Omega0 = driven ? 0.1 + 0.9 * u(rng) : 0.0;
    return p;
}

// Brute-force product-space Hamiltonian: the independent reference for the
// symmetric-basis fast path.
MatrixXcd oracle_hamiltonian(const PhysicalParams& p, const oracle::ThreeLevelProductBasis& full,
                             double t) {
    using oracle::collective_operator_matrix;
    const MatrixXcd a = collective_operator_matrix(CollectiveOp::A, full);
    const MatrixXcd adag = collective_operator_matrix(CollectiveOp::Adag, full);
    const MatrixXcd sp_a = collective_operator_matrix(CollectiveOp::SplusA, full);
    const MatrixXcd sm_adag = collective_operator_matrix(CollectiveOp::SminusAdag, full);
    const MatrixXcd nph = oracle::photon_number_matrix(full);
    const MatrixXcd n1 = oracle::number_operator_matrix(1, full);
    const MatrixXcd ne = oracle::number_operator_matrix(2, full);
    MatrixXcd H = (Complex(p.delta) - 0.5 * I * p.kappa) * nph +
                  (Complex(p.Delta) - 0.5 * I * p.gamma) * ne - 0.5 * I * p.gamma1 * n1 +
                  Complex(p.g) * (sm_adag + sp_a) + I * p.eta * (adag - a);
    if (p.Omega0 > 0.0) {
        const Complex w =
            0.5 * p.Omega0 * Complex(std::cos(p.delta_gl * t), std::sin(p.delta_gl * t));
        const MatrixXcd raise = collective_operator_matrix(CollectiveOp::Raise01, full);
        H += w * raise + std::conj(w) * MatrixXcd(raise.adjoint());
    }
    return H;
}

} // namespace

TEST_CASE("full Hamiltonian matches the tensor-product construction") {
    std::mt19937 rng(20240917);
    std::uniform_real_distribution<double> ut(0.0, 5.0);
    for (int N : {2, 3}) {
        for (int m_max : {1, 2}) {
            const SymmetricBasis sym(N, m_max);
            const oracle::ThreeLevelProductBasis full(N, m_max);
            const MatrixXcd P = oracle::symmetric_projector(sym, full);
            for (int trial = 0; trial < 5; ++trial) {
                const auto p = random_params(rng, N, true, true);
                const auto pulse = constant_pulse(p.Omega0, p.Omega0 * 6.0, p.delta_gl);
                const auto H = build_full_hamiltonian(p, sym, pulse);
                const double t = ut(rng);
                const MatrixXcd lhs = H.dense(t);
                const MatrixXcd rhs = P * oracle_hamiltonian(p, full, t) * P.adjoint();
                INFO("N=" << N << " m_max=" << m_max << " trial=" << trial);
                CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
            }
        }
    }
}

TEST_CASE("lossless Hamiltonian is Hermitian") {
    std::mt19937 rng(7);
    const SymmetricBasis basis(3, 2);
    std::uniform_real_distribution<double> ut(0.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = random_params(rng, 3, false, true);
        const auto pulse = constant_pulse(p.Omega0, p.Omega0 * 4.0, p.delta_gl);
        const auto H = build_full_hamiltonian(p, basis, pulse);
        const MatrixXcd M = H.dense(ut(rng));
        CHECK((M - M.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("anti-Hermitian part is a non-positive diagonal") {
    std::mt19937 rng(8);
    const SymmetricBasis basis(3, 2);
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = random_params(rng, 3, true, true);
        const auto pulse = constant_pulse(p.Omega0, p.Omega0 * 4.0, p.delta_gl);
        const auto H = build_full_hamiltonian(p, basis, pulse);
        const MatrixXcd M = H.dense(1.0);
        const MatrixXcd A = (M - M.adjoint()) / (2.0 * I); // imaginary (decay) part
        for (int i = 0; i < A.rows(); ++i) {
            CHECK(std::abs(std::imag(A(i, i))) < 1e-14);
            CHECK(std::real(A(i, i)) <= 1e-14);
            for (int j = 0; j < A.cols(); ++j)
                if (i != j) CHECK(std::abs(A(i, j)) < 1e-14);
        }
    }
}

TEST_CASE("drive-free Hamiltonian conserves n = a + b and k = b + m") {
    std::mt19937 rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const int N = std::uniform_int_distribution<int>(2, 5)(rng);
        const int m_max = std::uniform_int_distribution<int>(1, 3)(rng);
        const SymmetricBasis basis(N, m_max);
        auto p = random_params(rng, N, true, false);
        p.eta = 0.0; // the cavity drive is the only term breaking k-conservation
        const auto H = build_full_hamiltonian(p, basis, constant_pulse(1.0, 1.0, 0.0));
        const MatrixXcd M = H.dense(0.0);
        for (int i = 0; i < M.rows(); ++i)
            for (int j = 0; j < M.cols(); ++j) {
                if (std::abs(M(i, j)) == 0.0) continue;
                const auto& si = basis.state(i);
                const auto& sj = basis.state(j);
                CHECK(si.a + si.b == sj.a + sj.b);
                CHECK(si.b + si.m == sj.b + sj.m);
            }
    }
}

TEST_CASE("(n, k=1) blocks reproduce the closed-form pair energies") {
    std::mt19937 rng(10);
    std::uniform_real_distribution<double> ud(0.3, 3.0);
    std::uniform_real_distribution<double> us(-2.0, 2.0);
    const int N = 5;
    const SymmetricBasis basis(N, 2);
    for (int trial = 0; trial < 100; ++trial) {
        PhysicalParams p;
        p.N = N;
        p.Delta = ud(rng);
        p.delta = us(rng);
        const auto H = build_full_hamiltonian(p, basis, constant_pulse(1.0, 1.0, 0.0));
        const MatrixXcd M = H.dense(0.0);
        for (int n = 1; n <= 5; ++n) {
            const int i1 = basis.index({n, 0, 1});     // |n,0;1>
            const int i2 = basis.index({n - 1, 1, 0}); // |n-1,1;0>
            Eigen::Matrix2d block;
            block << std::real(M(i1, i1)), std::real(M(i1, i2)), std::real(M(i2, i1)),
                std::real(M(i2, i2));
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(block);
            const auto spec = polariton_spectrum(n, p.Delta, p.delta);
            CHECK(std::abs(es.eigenvalues()[1] - std::real(spec.eps_plus)) < 1e-12);
            CHECK(std::abs(es.eigenvalues()[0] - std::real(*spec.eps_minus)) < 1e-12);
        }
    }
}

TEST_CASE("apply agrees with the dense matrix") {
    std::mt19937 rng(11);
    const SymmetricBasis basis(3, 2);
    std::uniform_real_distribution<double> ut(0.0, 5.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = random_params(rng, 3, true, true);
        const auto pulse = constant_pulse(p.Omega0, p.Omega0 * 4.0, p.delta_gl);
        const auto H = build_full_hamiltonian(p, basis, pulse);
        const double t = ut(rng);
        VectorXcd x = VectorXcd::Random(basis.dim());
        VectorXcd out(basis.dim());
        H.apply(t, x, out);
        CHECK((out - H.dense(t) * x).norm() < 1e-12 * x.norm());
    }
}

TEST_CASE("four-level Hamiltonian restricted to {0,1,e} matches the product oracle") {
    std::mt19937 rng(12);
    const int N = 2, m_max = 2;
    const FourLevelBasis basis(N, m_max);
    const oracle::ThreeLevelProductBasis full(N, m_max);
    std::uniform_real_distribution<double> ut(0.0, 5.0);
    for (int trial = 0; trial < 5; ++trial) {
        const auto p = random_params(rng, N, true, true);
        const auto pulse = constant_pulse(p.Omega0, p.Omega0 * 4.0, p.delta_gl);
        const auto H = build_four_level_hamiltonian(p, basis, pulse);
        const double t = ut(rng);
        const MatrixXcd M = H.dense(t);
        const MatrixXcd Mref = oracle_hamiltonian(p, full, t);
        // Map product labels {0,1,e} -> four-level {Zero, One, Excited}.
        auto map_index = [&](int i) {
            auto [labels, m] = full.state(i);
            std::vector<AtomLabel> four(N);
            for (int j = 0; j < N; ++j)
                four[j] = labels[j] == 0 ? AtomLabel::Zero
                                         : (labels[j] == 1 ? AtomLabel::One : AtomLabel::Excited);
            return basis.index(four, m);
        };
        for (int i = 0; i < full.dim(); ++i)
            for (int j = 0; j < full.dim(); ++j)
                CHECK(std::abs(M(map_index(i), map_index(j)) - Mref(i, j)) < 1e-12);
    }
}

TEST_CASE("|1'> is a spectator in the four-level Hamiltonian") {
    const FourLevelBasis basis(2, 2);
    PhysicalParams p;
    p.N = 2;
    p.Delta = 1.5;
    p.delta = 2.0 / p.Delta;
    p.eta = 0.0;
    p.Omega0 = 0.5;
    const auto H = build_four_level_hamiltonian(p, basis, constant_pulse(0.5, 2.0, 0.0));
    const MatrixXcd M = H.dense(0.0);
    // With no cavity drive, |1'1'; m> has zero diagonal energy and no coupling.
    for (int m = 0; m <= 2; ++m) {
        const int i = basis.index({AtomLabel::OnePrime, AtomLabel::OnePrime}, m);
        for (int j = 0; j < basis.dim(); ++j) {
            if (j == i) continue;
            CHECK(std::abs(M(i, j)) == 0.0);
            CHECK(std::abs(M(j, i)) == 0.0);
        }
    }
    const int i0 = basis.index({AtomLabel::OnePrime, AtomLabel::OnePrime}, 0);
    CHECK(std::abs(M(i0, i0)) == 0.0);
}

TEST_CASE("effective model energies and linewidths") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        PhysicalParams p;
        p.N = 3;
        p.Delta = 0.5 + 2.5 * u(rng);
        p.delta = 2.0 / p.Delta;
        p.eta = 0.05 + 0.3 * u(rng);
        p.Omega0 = 0.01 + 0.05 * u(rng);
        p.kappa = 0.2 * u(rng);
        p.gamma = 0.2 * u(rng);
        p.gamma1 = (trial % 2) ? 0.05 * u(rng) : 0.0;
        const auto m = build_effective_model(p);
        const double e2 = p.eta * p.eta, d2 = p.Delta * p.Delta;
        CHECK(m.E0 == Catch::Approx(-0.5 * e2 * p.Delta).margin(1e-15));
        CHECK(m.E1 == Catch::Approx(-e2 * p.Delta).margin(1e-15));
        CHECK(m.Gamma0 == Catch::Approx(0.25 * p.kappa * e2 * d2).margin(1e-15));
        double G1 = e2 * (p.kappa * d2 + p.gamma);
        double G2 = G1 + p.Omega0 * p.Omega0 / e2 * (0.5 * p.kappa + p.gamma / d2);
        if (p.gamma1 > 0.0) {
            G1 += (1.0 + e2 * d2) * p.gamma1;
            G2 += (1.0 + e2 * d2 + p.Omega0 * p.Omega0 * (1.0 + 1.0 / d2) / e2) * p.gamma1;
        }
        CHECK(m.Gamma1(1) == Catch::Approx(G1).epsilon(1e-12));
        CHECK(m.Gamma1(2) == Catch::Approx(G2).epsilon(1e-12));
        CHECK(m.coupling(3) == Catch::Approx(std::sqrt(3.0)).epsilon(1e-15));
    }
}

TEST_CASE("effective two-level Hamiltonian structure") {
    PhysicalParams p;
    p.N = 2;
    p.Delta = 1.2;
    p.delta = 2.0 / p.Delta;
    p.eta = 0.1;
    p.Omega0 = 0.02;
    p.kappa = 0.01;
    p.gamma = 0.02;
    const auto m = build_effective_model(p);
    const auto pulse = constant_pulse(p.Omega0, M_PI / std::sqrt(2.0), 0.0);

    const auto H0 = build_effective_hamiltonian(m, 0, pulse);
    CHECK(H0.dim() == 1);
    CHECK(H0.dense(0.0)(0, 0) == Complex(0.0, -0.5 * m.Gamma0));

    const auto H2 = build_effective_hamiltonian(m, 2, pulse);
    CHECK(H2.dim() == 2);
    const MatrixXcd M = H2.dense(0.0);
    CHECK(M(0, 0) == Complex(0.0, -0.5 * m.Gamma0));
    CHECK(M(1, 1) == Complex(0.0, -0.5 * m.Gamma1(2)));
    CHECK(std::abs(M(1, 0) - Complex(0.5 * std::sqrt(2.0) * p.Omega0)) < 1e-15);
    CHECK(std::abs(M(0, 1) - std::conj(M(1, 0))) < 1e-15);

    CHECK_THROWS_AS(build_effective_hamiltonian(m, -1, pulse), std::invalid_argument);
}

TEST_CASE("builder validation") {
    const SymmetricBasis basis(2, 2);
    PhysicalParams p;
    p.N = 3; // mismatch
    p.Delta = 1.0;
    CHECK_THROWS_AS(build_full_hamiltonian(p, basis, constant_pulse(1.0, 1.0, 0.0)),
                    std::invalid_argument);
    PhysicalParams q;
    q.N = 2;
    q.Delta = 0.0;
    CHECK_THROWS_AS(build_effective_model(q), std::invalid_argument);
    PhysicalParams r;
    r.N = 2;
    r.Omega0 = 0.1;
    r.eta = 0.0;
    CHECK_THROWS_AS(build_effective_model(r), std::invalid_argument);
}

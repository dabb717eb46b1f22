#pragma once

#include <cmath>
#include <stdexcept>

namespace polsim {

// All rates and detunings in units of the atom-cavity coupling g (g = 1).
struct PhysicalParams {
    double g = 1.0;        // reference unit, fixed
    double kappa = 0.0;    // cavity linewidth
    double gamma = 0.0;    // |e> linewidth
    double Delta = 1.0;    // drive-atom detuning
    double delta = 0.0;    // drive-cavity detuning
    double eta = 0.0;      // cavity drive amplitude
    double Omega0 = 0.0;   // qubit Rabi frequency
    double delta_gl = 0.0; // qubit-drive detuning
    int N = 1;             // register size
    double gamma1 = 0.0;   // optional decay of |1> (Rydberg preset)

    void validate() const {
        if (g != 1.0) throw std::invalid_argument("PhysicalParams: g must be 1 (reference unit)");
        if (kappa < 0 || gamma < 0 || eta < 0 || Omega0 < 0 || gamma1 < 0)
            throw std::invalid_argument("PhysicalParams: rates must be non-negative");
        if (N < 1) throw std::invalid_argument("PhysicalParams: N must be >= 1");
    }

    double cooperativity() const { return g * g / (kappa * gamma); }
};

// delta fixed by the blockade condition unless overridden.
inline double blockade_detuning(double Delta) {
    if (Delta == 0.0) throw std::invalid_argument("blockade_detuning: Delta must be nonzero");
    return 2.0 / Delta; // 2 g^2 / Delta with g = 1
}

} // namespace polsim

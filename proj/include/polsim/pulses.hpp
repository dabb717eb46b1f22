#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace polsim {

// Phase-only qubit drive: Ω(t) = Ω0 exp[i(φ(tΩ0) + δ_gl t)]. |Ω(t)| = Ω0 for
// every profile. Sampled profiles interpolate φ with a natural cubic spline
// (continuous value and first derivative).
class PulseProfile {
public:
    enum class Kind { Constant, Sampled };

    static PulseProfile constant(double Omega0, double area, double delta_gl) {
        if (Omega0 <= 0) throw std::invalid_argument("constant_pulse: Omega0 must be > 0");
        if (area <= 0) throw std::invalid_argument("constant_pulse: area must be > 0");
        PulseProfile p;
        p.kind_ = Kind::Constant;
        p.Omega0_ = Omega0;
        p.area_ = area;
        p.delta_gl_ = delta_gl;
        return p;
    }

    static PulseProfile sampled(double Omega0, double delta_gl, std::vector<double> tau,
                                std::vector<double> phi, std::string gate = {}) {
        if (Omega0 <= 0) throw std::invalid_argument("PulseProfile: Omega0 must be > 0");
        if (tau.size() != phi.size() || tau.size() < 2)
            throw std::invalid_argument("PulseProfile: need >= 2 (tau, phi) samples");
        if (tau.front() != 0.0) throw std::invalid_argument("PulseProfile: tau must start at 0");
        for (std::size_t i = 1; i < tau.size(); ++i) {
            if (!(tau[i] > tau[i - 1]))
                throw std::invalid_argument("PulseProfile: tau must be strictly increasing");
            if (std::abs(phi[i] - phi[i - 1]) > M_PI)
                throw std::invalid_argument("PulseProfile: phase jump larger than pi between samples");
        }
        PulseProfile p;
        p.kind_ = Kind::Sampled;
        p.Omega0_ = Omega0;
        p.area_ = tau.back();
        p.delta_gl_ = delta_gl;
        p.tau_ = std::move(tau);
        p.phi_ = std::move(phi);
        p.gate_ = std::move(gate);
        p.build_spline();
        return p;
    }

    Kind kind() const { return kind_; }
    double Omega0() const { return Omega0_; }
    double area() const { return area_; }
    double delta_gl() const { return delta_gl_; }
    double duration() const { return area_ / Omega0_; }
    const std::string& gate() const { return gate_; }
    const std::vector<double>& tau_samples() const { return tau_; }
    const std::vector<double>& phi_samples() const { return phi_; }

    // Copy with protocol-chosen rate and drive detuning; the dimensionless
    // phase trajectory is unchanged.
    PulseProfile with_rate(double Omega0, double delta_gl) const {
        PulseProfile p = *this;
        if (Omega0 <= 0) throw std::invalid_argument("PulseProfile: Omega0 must be > 0");
        p.Omega0_ = Omega0;
        p.delta_gl_ = delta_gl;
        return p;
    }

    // φ(τ) at dimensionless time τ = t Ω0.
    double phase(double tau) const {
        if (kind_ == Kind::Constant) return 0.0;
        if (tau <= tau_.front()) return phi_.front();
        if (tau >= tau_.back()) return phi_.back();
        const auto it = std::upper_bound(tau_.begin(), tau_.end(), tau);
        const std::size_t i = static_cast<std::size_t>(it - tau_.begin()) - 1;
        const double h = tau_[i + 1] - tau_[i];
        const double A = (tau_[i + 1] - tau) / h;
        const double B = (tau - tau_[i]) / h;
        return A * phi_[i] + B * phi_[i + 1] +
               ((A * A * A - A) * d2_[i] + (B * B * B - B) * d2_[i + 1]) * h * h / 6.0;
    }

    std::complex<double> drive(double t) const {
        const double ph = phase(t * Omega0_) + delta_gl_ * t;
        return Omega0_ * std::complex<double>(std::cos(ph), std::sin(ph));
    }

private:
    void build_spline() {
        // Natural cubic spline second derivatives via the standard tridiagonal
        // recursion.
        const std::size_t n = tau_.size();
        d2_.assign(n, 0.0);
        std::vector<double> u(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double sig = (tau_[i] - tau_[i - 1]) / (tau_[i + 1] - tau_[i - 1]);
            const double p = sig * d2_[i - 1] + 2.0;
            d2_[i] = (sig - 1.0) / p;
            u[i] = (phi_[i + 1] - phi_[i]) / (tau_[i + 1] - tau_[i]) -
                   (phi_[i] - phi_[i - 1]) / (tau_[i] - tau_[i - 1]);
            u[i] = (6.0 * u[i] / (tau_[i + 1] - tau_[i - 1]) - sig * u[i - 1]) / p;
        }
        for (std::size_t k = n - 1; k-- > 0;) d2_[k] = d2_[k] * d2_[k + 1] + u[k];
    }

    Kind kind_ = Kind::Constant;
    double Omega0_ = 1.0;
    double area_ = 0.0;
    double delta_gl_ = 0.0;
    std::vector<double> tau_, phi_, d2_;
    std::string gate_;
};

inline PulseProfile constant_pulse(double Omega0, double area, double delta_gl) {
    return PulseProfile::constant(Omega0, area, delta_gl);
}

// Pulse file format: UTF-8 text with header lines `# gate: <name>` and
// `# area: <decimal>`, then two whitespace-separated columns `tau phi`.
inline void save_pulse(const PulseProfile& p, const std::string& path) {
    if (p.kind() != PulseProfile::Kind::Sampled)
        throw std::invalid_argument("save_pulse: only sampled profiles are stored");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_pulse: cannot open " + path);
    char buf[80];
    out << "# gate: " << (p.gate().empty() ? "none" : p.gate()) << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", p.area());
    out << "# area: " << buf << "\n";
    const auto& tau = p.tau_samples();
    const auto& phi = p.phi_samples();
    for (std::size_t i = 0; i < tau.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g", tau[i], phi[i]);
        out << buf << "\n";
    }
}

inline PulseProfile load_pulse(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_pulse: cannot open " + path);
    std::string line, gate;
    double area = -1.0;
    bool have_area = false;
    std::vector<double> tau, phi;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string key;
            hs >> key;
            if (key == "gate:") hs >> gate;
            else if (key == "area:") { hs >> area; have_area = true; }
            continue;
        }
        std::istringstream ls(line);
        double t, ph;
        if (!(ls >> t >> ph))
            throw std::runtime_error("load_pulse: parse error at line " + std::to_string(lineno));
        tau.push_back(t);
        phi.push_back(ph);
    }
    if (!have_area) throw std::runtime_error("load_pulse: missing '# area:' header");
    PulseProfile p = PulseProfile::sampled(1.0, 0.0, std::move(tau), std::move(phi), gate);
    if (std::abs(p.area() - area) > 1e-9)
        throw std::runtime_error("load_pulse: area metadata does not match samples");
    return p;
}

} // namespace polsim

#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace polsim {

// Dimensionless dwell times τ_q = Ω0 ∫ |<q|ψ(t)>|² dt over a lossless run.
struct TauTable {
    std::map<std::string, double> entries;

    double at(const std::string& q) const {
        auto it = entries.find(q);
        if (it == entries.end()) throw std::out_of_range("TauTable: missing entry " + q);
        return it->second;
    }

    bool has(const std::string& q) const { return entries.count(q) > 0; }
};

} // namespace polsim

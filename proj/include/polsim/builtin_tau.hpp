#pragma once

// Built-in dwell-time tables for the bundled time-optimal gate pulses.
// Generated by tools/update_builtin_tau; do not edit by hand.
// Units: tau values are Omega0-weighted dwell times (dimensionless areas).

namespace polsim {

inline TauTable builtin_cz_tau() {
    return TauTable{{
        {"00", 3.6543313029730822},
        {"1'0", 3.6752783098614299},
        {"1'1", 3.9367216896666282},
        {"1'1'", 7.6120000000000001},
        {"W", 3.9576686960065337},
    }};
}

inline TauTable builtin_c2z_tau() {
    return TauTable{{
        {"000", 5.6757022418864151},
        {"1'00", 5.4036726126258277},
        {"1'1'0", 5.4116244741225286},
        {"1'1'1", 5.3973755249433752},
        {"1'1'1'", 10.808999999999999},
        {"1'W", 5.4053273850631625},
        {"W1", 5.1332977547916618},
    }};
}

} // namespace polsim

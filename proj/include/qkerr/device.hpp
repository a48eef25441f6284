#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "qkerr/operators.hpp"

namespace qkerr {

// All configuration and reporting frequencies are in the nu = omega/2pi
// convention (GHz for frequencies and detunings, MHz for couplings); decay
// and dephasing rates are in 1/us. Internal dynamics uses angular rad/s,
// converted in one place through the *_rad accessors.
struct DeviceParams {
    double omega_a_ghz = 0.0;  // resonator a frequency
    double omega_b_ghz = 0.0;
    double delta_a_ghz = 0.0;  // omega_eg - omega_a, negative
    double delta_b_ghz = 0.0;  // omega_fe - omega_b, positive
    double g_mhz = 0.0;        // |g>-|e> coupling of resonator a
    double mu_mhz = 0.0;       // |e>-|f> coupling of resonator b
    double g_ab_mhz = 0.0;     // inter-resonator crosstalk strength
    int k = 1;                 // phase-matching index

    // Lindblad rates, 1/us.
    double kappa_a_per_us = 0.0;
    double kappa_b_per_us = 0.0;
    double gamma_eg_per_us = 0.0;
    double gamma_fe_per_us = 0.0;
    double gamma_fg_per_us = 0.0;
    double gamma_phi_e_per_us = 0.0;
    double gamma_phi_f_per_us = 0.0;

    double omega_eg_ghz() const { return omega_a_ghz + delta_a_ghz; }
    double omega_fe_ghz() const { return omega_b_ghz + delta_b_ghz; }
    double delta_ab_ghz() const { return omega_a_ghz - omega_b_ghz; }

    double g_rad() const { return two_pi * g_mhz * 1e6; }
    double mu_rad() const { return two_pi * mu_mhz * 1e6; }
    double g_ab_rad() const { return two_pi * g_ab_mhz * 1e6; }
    double delta_a_rad() const { return two_pi * delta_a_ghz * 1e9; }
    double delta_b_rad() const { return two_pi * delta_b_ghz * 1e9; }
    double delta_ab_rad() const { return two_pi * delta_ab_ghz() * 1e9; }

    double kappa_a_per_s() const { return kappa_a_per_us * 1e6; }
    double kappa_b_per_s() const { return kappa_b_per_us * 1e6; }
    double gamma_eg_per_s() const { return gamma_eg_per_us * 1e6; }
    double gamma_fe_per_s() const { return gamma_fe_per_us * 1e6; }
    double gamma_fg_per_s() const { return gamma_fg_per_us * 1e6; }
    double gamma_phi_e_per_s() const { return gamma_phi_e_per_us * 1e6; }
    double gamma_phi_f_per_s() const { return gamma_phi_f_per_us * 1e6; }

    void validate() const {
        if (!(delta_a_ghz < 0.0)) throw std::invalid_argument("DeviceParams: delta_a must be negative");
        if (!(delta_b_ghz > 0.0)) throw std::invalid_argument("DeviceParams: delta_b must be positive");
        if (!(delta_b_ghz > -delta_a_ghz))
            throw std::invalid_argument("DeviceParams: delta_b must exceed |delta_a|");
        if (!(g_mhz > 0.0)) throw std::invalid_argument("DeviceParams: g must be positive");
        if (mu_mhz < 0.0) throw std::invalid_argument("DeviceParams: mu must be nonnegative");
        if (g_ab_mhz < 0.0) throw std::invalid_argument("DeviceParams: g_ab must be nonnegative");
        if (k < 1) throw std::invalid_argument("DeviceParams: k must be a positive integer");
        for (double r : {kappa_a_per_us, kappa_b_per_us, gamma_eg_per_us, gamma_fe_per_us,
                         gamma_fg_per_us, gamma_phi_e_per_us, gamma_phi_f_per_us})
            if (r < 0.0) throw std::invalid_argument("DeviceParams: rates must be nonnegative");
    }
};

// Maps the decoherence-time parameterization (gamma, eta in us) onto channel
// rates: 1/gamma_eg = 3 gamma, 1/gamma_fe = 2 gamma, 1/gamma_fg = 10 gamma,
// 1/gamma_phi = gamma, 1/kappa = eta. gamma or eta <= 0 switches the
// respective channels off (the lossless idealization).
inline void set_rates_from_times(DeviceParams& p, double gamma_us, double eta_us) {
    if (gamma_us > 0.0) {
        p.gamma_eg_per_us = 1.0 / (3.0 * gamma_us);
        p.gamma_fe_per_us = 1.0 / (2.0 * gamma_us);
        p.gamma_fg_per_us = 1.0 / (10.0 * gamma_us);
        p.gamma_phi_e_per_us = 1.0 / gamma_us;
        p.gamma_phi_f_per_us = 1.0 / gamma_us;
    } else {
        p.gamma_eg_per_us = p.gamma_fe_per_us = p.gamma_fg_per_us = 0.0;
        p.gamma_phi_e_per_us = p.gamma_phi_f_per_us = 0.0;
    }
    if (eta_us > 0.0) {
        p.kappa_a_per_us = p.kappa_b_per_us = 1.0 / eta_us;
    } else {
        p.kappa_a_per_us = p.kappa_b_per_us = 0.0;
    }
}

struct DerivedParams {
    double lambda_mhz = 0.0;  // effective Raman coupling (g mu/2)(1/|d_a| + 1/d_b)
    double delta_mhz = 0.0;   // Delta = d_b - |d_a|
    double chi_mhz = 0.0;     // cross-Kerr coefficient lambda^2/Delta
    double theta_mhz = 0.0;   // chi + g^2/d_a (negative for the gate regime)
    double t_gate_s = 0.0;    // pi/|theta|
    double t_cat_s = 0.0;     // pi/chi
    std::vector<std::string> warnings;

    double lambda_rad() const { return two_pi * lambda_mhz * 1e6; }
    double delta_rad() const { return two_pi * delta_mhz * 1e6; }
    double chi_rad() const { return two_pi * chi_mhz * 1e6; }
    double theta_rad() const { return two_pi * theta_mhz * 1e6; }
};

// Derived quantities evaluated exactly as the closed-form expressions, in the
// nu convention. Dispersive-regime violations produce warnings, not errors;
// Delta <= 0 alone is rejected because nothing downstream is defined there.
inline DerivedParams derive(const DeviceParams& p) {
    const double abs_da_mhz = -p.delta_a_ghz * 1e3;
    const double db_mhz = p.delta_b_ghz * 1e3;
    if (!(abs_da_mhz > 0.0) || !(db_mhz > 0.0))
        throw std::invalid_argument("derive: detunings have the wrong sign");

    DerivedParams d;
    d.delta_mhz = db_mhz - abs_da_mhz;
    if (d.delta_mhz <= 0.0) throw std::invalid_argument("derive: Delta = delta_b - |delta_a| must be positive");
    d.lambda_mhz = 0.5 * p.g_mhz * p.mu_mhz * (1.0 / abs_da_mhz + 1.0 / db_mhz);
    d.chi_mhz = d.lambda_mhz * d.lambda_mhz / d.delta_mhz;
    d.theta_mhz = d.chi_mhz + p.g_mhz * p.g_mhz / (p.delta_a_ghz * 1e3);
    d.t_gate_s = d.theta_mhz != 0.0 ? 1.0 / (2e6 * std::abs(d.theta_mhz)) : 0.0;
    d.t_cat_s = d.chi_mhz > 0.0 ? 1.0 / (2e6 * d.chi_mhz) : 0.0;

    const double stark_a = p.g_mhz * p.g_mhz / abs_da_mhz;
    const double stark_b = p.mu_mhz > 0.0 ? p.mu_mhz * p.mu_mhz / db_mhz : 0.0;
    if (abs_da_mhz / p.g_mhz < 5.0)
        d.warnings.push_back("dispersive margin |delta_a|/g below 5");
    if (p.mu_mhz > 0.0 && db_mhz / p.mu_mhz < 5.0)
        d.warnings.push_back("dispersive margin delta_b/mu below 5");
    const double scale = std::max({stark_a, stark_b, d.lambda_mhz});
    if (scale > 0.0 && d.delta_mhz / scale < 1.0)
        d.warnings.push_back("Delta below the largest second-order scale");
    if (p.mu_mhz == 0.0) d.warnings.push_back("mu = 0: resonator b decoupled, chi = 0");
    return d;
}

struct GateSolution {
    double lambda_mhz = 0.0;
    double mu_mhz = 0.0;
    double t_gate_s = 0.0;
};

// Couplings and interaction time satisfying both gate phase conditions
// |theta| t = pi and (g^2/|delta_a|) t = 2 k pi:
//   lambda = g sqrt[(d_b - |d_a|)(2k-1) / (2k |d_a|)]
//   mu     = 2|d_a| d_b / (|d_a| + d_b) * sqrt[...]
//   t      = k |d_a| / g^2   (nu convention; equals 2 k pi |d_a|/g^2 angular)
inline GateSolution solve_gate_parameters(double g_mhz, double delta_a_ghz, double delta_b_ghz,
                                          int k) {
    if (k < 1) throw std::invalid_argument("solve_gate_parameters: k must be positive");
    if (!(delta_a_ghz < 0.0) || !(g_mhz > 0.0))
        throw std::invalid_argument("solve_gate_parameters: need delta_a < 0 and g > 0");
    const double abs_da = -delta_a_ghz * 1e3;  // MHz
    const double db = delta_b_ghz * 1e3;
    if (db <= abs_da)
        throw std::invalid_argument("solve_gate_parameters: delta_b must exceed |delta_a|");
    const double root = std::sqrt((db - abs_da) * (2.0 * k - 1.0) / (2.0 * k * abs_da));
    GateSolution s;
    s.lambda_mhz = g_mhz * root;
    s.mu_mhz = 2.0 * abs_da * db / (abs_da + db) * root;
    s.t_gate_s = double(k) * (abs_da * 1e6) / ((g_mhz * 1e6) * (g_mhz * 1e6));
    return s;
}

// Q = omega * energy-decay time (angular frequency times time).
inline double quality_factor(double omega_ghz, double decay_time_us) {
    if (omega_ghz <= 0.0 || decay_time_us < 0.0)
        throw std::invalid_argument("quality_factor: bad inputs");
    return two_pi * omega_ghz * 1e9 * decay_time_us * 1e-6;
}

}  // namespace qkerr

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "qbatt/params.hpp"

namespace qbatt {

// Drude-Ohmic spectral density J(w) = m gamma0 w wD^2 / (w^2 + wD^2); odd in w.
inline double spectral_density(double omega, const SystemParams& p) {
    const double wd2 = p.omega_d * p.omega_d;
    return p.mass * p.gamma0 * omega * wd2 / (omega * omega + wd2);
}

// Memory kernel gamma(t) = gamma0 wD exp(-wD t) for t >= 0.
inline double damping_kernel(double t, const SystemParams& p) {
    if (t < 0.0) return 0.0;
    return p.gamma0 * p.omega_d * std::exp(-p.omega_d * t);
}

// Laplace transform gamma~(lambda) = gamma0 wD / (lambda + wD), Re lambda > -wD.
inline std::complex<double> damping_kernel_laplace(std::complex<double> lambda,
                                                   const SystemParams& p) {
    const std::complex<double> den = lambda + p.omega_d;
    if (std::abs(den) < 1e-300)
        throw std::domain_error("damping_kernel_laplace: pole at lambda = -omega_d");
    return p.gamma0 * p.omega_d / den;
}

// Symmetrized noise spectrum L_s(w) = J(w) coth(beta w / 2).  Even in w.
// T = 0 reduces to |J(w)|; the w -> 0 limit is 2 m gamma0 T.
inline double noise_kernel_symmetric(double omega, const SystemParams& p) {
    if (p.temperature <= 0.0)
        return spectral_density(omega, p) * (omega >= 0.0 ? 1.0 : -1.0);
    const double beta = 1.0 / p.temperature;
    const double x = beta * omega;
    const double wd2 = p.omega_d * p.omega_d;
    const double lorentz = p.mass * p.gamma0 * wd2 / (omega * omega + wd2);
    if (std::abs(x) < 1e-6) {
        // w coth(beta w/2) = 2T (1 + (beta w)^2/12 + ...)
        return lorentz * 2.0 * p.temperature * (1.0 + x * x / 12.0);
    }
    return lorentz * omega / std::tanh(0.5 * x);
}

// Uniform-comb discretization of the reservoir: w_k = k Delta, masses m_k = m,
// couplings matching the Drude-Ohmic continuum.
struct BathDiscretization {
    double delta = 0.0;
    int n_modes = 0;
    std::vector<double> mode_freqs;  // w_k = k Delta, k = 1..N
    std::vector<double> mode_masses; // m_k (= m)
    std::vector<double> couplings;   // c_k
    double counterterm = 0.0;        // Omega_N^2 = sum_k c_k^2/(m m_k w_k^2)
};

inline BathDiscretization build_bath(const SystemParams& p, double delta, int n_modes) {
    p.validate();
    if (!(delta > 0.0)) throw std::invalid_argument("build_bath: delta must be > 0");
    if (n_modes < 1) throw std::invalid_argument("build_bath: n_modes must be >= 1");
    BathDiscretization b;
    b.delta = delta;
    b.n_modes = n_modes;
    b.mode_freqs.resize(n_modes);
    b.mode_masses.assign(n_modes, p.mass);
    b.couplings.resize(n_modes);
    const double wd2 = p.omega_d * p.omega_d;
    double ct = 0.0;
    for (int k = 0; k < n_modes; ++k) {
        const double wk = (k + 1) * delta;
        b.mode_freqs[k] = wk;
        const double ck2 = wk * wk * (2.0 * p.gamma0 * p.mass * b.mode_masses[k] * delta / M_PI) *
                           wd2 / (wd2 + wk * wk);
        b.couplings[k] = std::sqrt(ck2);
        ct += ck2 / (p.mass * b.mode_masses[k] * wk * wk);
    }
    b.counterterm = ct;
    return b;
}

} // namespace qbatt

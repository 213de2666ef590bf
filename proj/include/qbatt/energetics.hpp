#pragma once

#include <cmath>
#include <optional>

#include "qbatt/params.hpp"
#include "qbatt/response.hpp"
#include "qbatt/variances.hpp"

namespace qbatt {

// All energy bookkeeping for one instant of the charging protocol.
// Conventions: w_total = w_on + w_off, de_reservoir = w_total - de_battery
// (energy balance of the closed system), eta_b = ergotropy/<H_B>,
// eta_w = ergotropy/W.  eta_w is left empty at W ~ 0 (only t = 0).
struct EnergyLedger {
    double t = 0.0;
    double e_stored = 0.0;    // <H_B(t)>
    double de_battery = 0.0;  // <H_B(t)> - <H_B(0)>
    double ergotropy = 0.0;
    double h_coupling = 0.0;  // <H_C(t)>
    double w_on = 0.0;
    double w_off = 0.0;
    double w_total = 0.0;
    double de_reservoir = 0.0;
    double eta_b = 0.0;
    std::optional<double> eta_w;
    double det_sigma = 0.0;
};

inline double stored_energy(const MomentSet& ms, const SystemParams& p) {
    return 0.5 * p.mass * ms.v2() + 0.5 * p.mass * p.omega0 * p.omega0 * ms.x2();
}

// Maximum unitarily extractable energy of the Gaussian battery state.
inline double ergotropy(const MomentSet& ms, const SystemParams& p) {
    const CovarianceMatrix cov = covariance(ms, p);
    const double e = stored_energy(ms, p) - p.omega0 * std::sqrt(cov.det());
    return std::max(0.0, e);
}

// <H_C> written through battery moments alone:
//   <H_C>/m = <xdot^2> - (1/2) d2<x^2>/dt2 - (w0^2 + W^2/2) <x^2>.
// omega_sq is the counter-term frequency squared; the continuum value is
// gamma0 omega_d, a discretized bath passes its own finite sum.
inline double coupling_energy(const MomentSet& ms, const SystemParams& p,
                              double omega_sq) {
    return p.mass * (ms.v2() - 0.5 * ms.x2_ddot -
                     (p.omega0 * p.omega0 + 0.5 * omega_sq) * ms.x2());
}

inline double coupling_energy(const MomentSet& ms, const SystemParams& p) {
    return coupling_energy(ms, p, p.big_omega_sq());
}

// Assemble the ledger from precomputed moments plus the coupling energy and
// switch-on work (shared by the continuum pipeline and the discrete oracle).
inline EnergyLedger assemble_ledger(const MomentSet& ms, const SystemParams& p,
                                    double h_coupling, double w_on) {
    EnergyLedger led;
    led.t = ms.t;
    led.e_stored = stored_energy(ms, p);
    led.de_battery = led.e_stored - 0.5 * p.omega0;
    led.det_sigma = covariance(ms, p).det();
    led.ergotropy = std::max(0.0, led.e_stored - p.omega0 * std::sqrt(led.det_sigma));
    led.h_coupling = h_coupling;
    led.w_on = w_on;
    led.w_off = -h_coupling;
    led.w_total = led.w_on + led.w_off;
    led.de_reservoir = led.w_total - led.de_battery;
    led.eta_b = led.ergotropy / led.e_stored;
    if (led.w_total > 1e-12 * std::max(w_on, 1.0))
        led.eta_w = led.ergotropy / led.w_total;
    return led;
}

inline EnergyLedger ledger(const ResponseFunction& rf, double t,
                           const QuadratureSpec& spec = {}) {
    const SystemParams& p = rf.params;
    const MomentSet ms = moments(rf, t, spec);
    const double om2 = p.big_omega_sq();
    const double hc = coupling_energy(ms, p, om2);
    const double won = 0.25 * om2 / p.omega0;
    return assemble_ledger(ms, p, hc, won);
}

} // namespace qbatt

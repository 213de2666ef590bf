#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "qbatt/energetics.hpp"
#include "qbatt/params.hpp"
#include "qbatt/quadrature.hpp"
#include "qbatt/response.hpp"
#include "qbatt/special_functions.hpp"

namespace qbatt {

// Scaled noise kernel F(s) = int_0^inf x/(1+x^2) coth(ratio x / 2) cos(x s) dx
// with ratio = omega_d / T.  Evaluated as the T = 0 part (closed form through
// exponential integrals) plus an exponentially convergent thermal correction.
// Logarithmically divergent at s = 0.
inline double scaled_noise_kernel(double s, double ratio) {
    s = std::abs(s);
    if (s == 0.0) throw std::domain_error("scaled_noise_kernel: s = 0 diverges");
    const double f0 = 0.5 * (std::exp(s) * expint_e1(s) - std::exp(-s) * expint_ei(s));
    if (!(ratio > 0.0) || std::isinf(ratio)) return f0; // T = 0
    const double x_top = 45.0 / ratio;
    const double th = integrate(
        [&](double x) {
            if (x <= 0.0) return 2.0 / ratio;
            return x / (1.0 + x * x) * 2.0 / std::expm1(ratio * x) * std::cos(x * s);
        },
        0.0, x_top, 1e-11, 1e-15, {1.0, 1.0 / ratio});
    return f0 + th;
}

// Limit forms quoted alongside F(s).
inline double scaled_noise_kernel_low_t(double s) {
    constexpr double euler = 0.5772156649015328606;
    return -(euler + std::log(std::abs(s)));
}

inline double scaled_noise_kernel_high_t(double s, double ratio) {
    return M_PI / ratio * std::exp(-std::abs(s));
}

enum class TemperatureRegime { Low, High };

// Closed-form short-time energetics in the strongly underdamped window,
// near the local maxima of the stored energy.
struct SudShortTime {
    double h_b = 0.0;
    double ergotropy = 0.0;
    double w = 0.0;
    double eta_w = 0.0;
    bool in_domain = true; // false outside the validity window
};

inline SudShortTime sud_short_time(const SystemParams& p, double t,
                                   TemperatureRegime regime) {
    p.validate();
    const double om = p.big_omega();
    const double a = 0.25 * p.big_omega_sq() / p.omega0; // W_on
    const double env = std::exp(-p.omega_d * t);
    const double sn = std::sin(om * t), cs = std::cos(om * t);

    SudShortTime out;
    out.in_domain = (p.omega_d * t <= 1.0) && (om >= 5.0 * std::max(p.omega0, p.omega_d));
    out.h_b = a * env * sn * sn;
    out.w = a * (1.0 - env * cs * cs);
    out.ergotropy = out.h_b;

    if (regime == TemperatureRegime::High) {
        const double T = p.temperature, m = p.mass, w0 = p.omega0;
        const double slow = 2.0 * w0 * w0 * p.omega_d / (om * om);
        out.h_b += 0.5 * T * (env * sn * sn + (1.0 - env));
        out.w += 0.5 * T * (env * sn * sn + (om * om) / (w0 * w0) * (1.0 - std::exp(-slow * t)));
        // ergotropy from the approximate covariance
        const double half = std::exp(-0.5 * p.omega_d * t);
        const double x2h = env * cs * cs / (2.0 * m * w0);
        const double v2h = env * om * om * sn * sn / (2.0 * m * w0);
        const double x2th = 2.0 * T / (m * om * om) *
                            ((1.0 - half * cs) - 0.5 * env * sn * sn +
                             0.5 * om * om / (w0 * w0) * (1.0 - std::exp(-slow * t)));
        const double v2th = T / m * (1.0 - env * cs * cs);
        // xv = (1/2) d<x^2>/dt from the same closed forms
        const double dx2h = (env / (2.0 * m * w0)) * (-p.omega_d * cs * cs - om * std::sin(2.0 * om * t));
        const double dx2th =
            2.0 * T / (m * om * om) *
            (half * (0.5 * p.omega_d * cs + om * sn) +
             env * (0.5 * p.omega_d * sn * sn - 0.5 * om * std::sin(2.0 * om * t)) +
             p.omega_d * std::exp(-slow * t));
        const double x2 = x2h + x2th, v2 = v2h + v2th, xv = 0.5 * (dx2h + dx2th);
        const double det = (m * w0 * x2) * (m / w0 * v2) - (m * xv) * (m * xv);
        out.ergotropy = std::max(0.0, out.h_b - w0 * std::sqrt(std::max(0.0, det)));
    }
    out.eta_w = out.w > 0.0 ? out.ergotropy / out.w : 0.0;
    return out;
}

// Stationary state of the still-coupled battery, via the digamma closed form.
struct SteadyState {
    double x2_inf = 0.0;
    double v2_inf = 0.0;
    double h_b_inf = 0.0;
    double ergotropy_inf = 0.0;
    double h_c_inf = 0.0;
    double w_inf = 0.0;
    double eta_w_inf = 0.0;
};

inline SteadyState steady_state(const ResponseFunction& rf) {
    const SystemParams& p = rf.params;
    if (!(p.gamma0 > 0.0))
        throw std::domain_error("steady_state: needs gamma0 > 0");
    const double m = p.mass, w0 = p.omega0, T = p.temperature;

    std::array<cplx, 3> kj;
    cplx ksum = 0.0;
    for (int j = 0; j < 3; ++j) {
        cplx prod = 1.0;
        for (int jp = 0; jp < 3; ++jp)
            if (jp != j) prod *= (rf.roots[jp] - rf.roots[j]);
        kj[j] = rf.roots[j] / prod;
        ksum += kj[j];
    }
    if (std::abs(ksum) > 1e-8)
        throw ResidueError("steady_state: sum of k_j weights does not vanish");

    cplx x2 = 0.0, kk = 0.0;
    if (T > 0.0) {
        for (int j = 0; j < 3; ++j) {
            if ((1.0 + rf.roots[j] / (2.0 * M_PI * T)).real() <= 0.0)
                throw DigammaDomain("steady_state: digamma argument left of the poles");
            const cplx psi = digamma(1.0 + rf.roots[j] / (2.0 * M_PI * T));
            x2 += rf.weights[j] * psi;
            kk += kj[j] * psi;
        }
        x2 = T / (m * w0 * w0) - x2 / (M_PI * m);
        kk = p.big_omega_sq() / (M_PI * m) * kk;
    } else {
        // T -> 0: psi(1 + z) -> ln z and the 1/(2z) correction cancels the
        // classical T/(m w0^2) term, leaving the log form over the roots
        for (int j = 0; j < 3; ++j) {
            const cplx lg = std::log(rf.roots[j]);
            x2 += rf.weights[j] * lg;
            kk += kj[j] * lg;
        }
        x2 = -x2 / (M_PI * m);
        kk = p.big_omega_sq() / (M_PI * m) * kk;
    }
    if (std::abs(x2.imag()) > 1e-10 * std::max(1.0, std::abs(x2.real())) ||
        std::abs(kk.imag()) > 1e-10 * std::max(1.0, std::abs(kk.real())))
        throw ResidueError("steady_state: imaginary residue in stationary moments");

    SteadyState out;
    out.x2_inf = x2.real();
    out.v2_inf = w0 * w0 * out.x2_inf + kk.real();
    out.h_b_inf = 0.5 * m * out.v2_inf + 0.5 * m * w0 * w0 * out.x2_inf;
    const double da = std::sqrt(m * w0 * out.x2_inf) - std::sqrt(m * out.v2_inf / w0);
    out.ergotropy_inf = 0.5 * w0 * da * da;
    out.h_c_inf = m * (out.v2_inf - (w0 * w0 + 0.5 * p.big_omega_sq()) * out.x2_inf);
    out.w_inf = 0.25 * p.big_omega_sq() / w0 - out.h_c_inf;
    out.eta_w_inf = out.ergotropy_inf / out.w_inf;
    return out;
}

} // namespace qbatt

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "qbatt/errors.hpp"
#include "qbatt/kernels.hpp"
#include "qbatt/quadrature.hpp"
#include "qbatt/response.hpp"

namespace qbatt {

// Second moments of the battery coordinate at one time, split into the
// transient (homogeneous) part carried by chi and the noise-driven (thermal)
// part.  xv is the symmetrized <x xdot> = (1/2) d<x^2>/dt; x2_ddot is the full
// second time derivative of <x^2>.
struct MomentSet {
    double t = 0.0;
    double x2_h = 0.0, x2_th = 0.0;
    double v2_h = 0.0, v2_th = 0.0;
    double xv_h = 0.0, xv_th = 0.0;
    double x2_ddot = 0.0;

    double x2() const { return x2_h + x2_th; }
    double v2() const { return v2_h + v2_th; }
    double xv() const { return xv_h + xv_th; }
};

struct ThermalParts {
    double x2 = 0.0, v2 = 0.0, xv = 0.0, dd = 0.0;
    long evaluations = 0;
};

// <x_h^2> = (w0/2m) chi^2 + chi_dot^2/(2 m w0), <xdot_h^2> likewise one
// derivative up; xv and d2<x^2>/dt2 follow by differentiating in t.
inline ThermalParts homogeneous_moments(const ResponseFunction& rf, double t) {
    const double m = rf.params.mass, w0 = rf.params.omega0;
    const double c0 = chi(rf, t, 0), c1 = chi(rf, t, 1), c2 = chi(rf, t, 2), c3 = chi(rf, t, 3);
    ThermalParts h;
    h.x2 = 0.5 * w0 / m * c0 * c0 + 0.5 / (m * w0) * c1 * c1;
    h.v2 = 0.5 * w0 / m * c1 * c1 + 0.5 / (m * w0) * c2 * c2;
    h.xv = 0.5 * (w0 * c0 * c1 + c1 * c2 / w0) / m;
    h.dd = (w0 * (c1 * c1 + c0 * c2) + (c2 * c2 + c1 * c3) / w0) / m;
    return h;
}

namespace detail {

// phi(z) = (1 - e^{-z t})/z, entire in z; the series branch keeps the relative
// error bounded where the direct difference would cancel
inline cplx window_phi(cplx z, double t) {
    const cplx u = z * t;
    if (std::abs(u) < 1e-4) return t * (1.0 - u / 2.0 + u * u / 6.0 - u * u * u / 24.0);
    return (1.0 - std::exp(-u)) / z;
}

// Complex coth with a large-argument guard; only reached with Re z > 0.
inline cplx ccoth(cplx z) {
    if (z.real() > 350.0) return {1.0, 0.0};
    if (z.real() > 19.0) return 1.0 + 2.0 * std::exp(-2.0 * z);
    const cplx e = std::exp(2.0 * z);
    return (e + 1.0) / (e - 1.0);
}

// Noise spectrum continued off the positive real axis (Re w > 0).
inline cplx noise_kernel_cplx(cplx w, const SystemParams& p) {
    const double wd2 = p.omega_d * p.omega_d;
    const cplx jw = p.mass * p.gamma0 * w * wd2 / (w * w + wd2);
    if (p.temperature <= 0.0) return jw;
    return jw * ccoth(0.5 * w / p.temperature);
}

// Everything the thermal integrands need at fixed (response, t).
struct ThermalKernel {
    std::array<cplx, 3> lam, wgt, lw, decay; // roots, chi_j, lambda_j chi_j, e^{-lambda_j t}
    double t = 0.0;
    double chi0 = 0.0, chi1 = 0.0;
    double int_chi = 0.0; // integral of chi over [0, t]
    SystemParams p;

    explicit ThermalKernel(const ResponseFunction& rf, double time) : t(time), p(rf.params) {
        cplx ic = 0.0;
        for (int j = 0; j < 3; ++j) {
            lam[j] = rf.roots[j];
            wgt[j] = rf.weights[j];
            lw[j] = rf.roots[j] * rf.weights[j];
            decay[j] = std::exp(-rf.roots[j] * time);
            ic += rf.weights[j] * (1.0 - decay[j]) / rf.roots[j];
        }
        chi0 = chi(rf, time, 0);
        chi1 = chi(rf, time, 1);
        int_chi = ic.real();
    }

    // minus/plus root sums at (possibly complex) frequency w
    struct Sums {
        cplx am, bm, um, vm; // 1/(lambda - i w) weighted by chi, chi E, lam chi, lam chi E
        cplx ap, bp, up, vp; // same with +i w
    };

    Sums sums(cplx w) const {
        Sums s{};
        const cplx iw = cplx(0.0, 1.0) * w;
        for (int j = 0; j < 3; ++j) {
            const cplx dm = 1.0 / (lam[j] - iw);
            const cplx dp = 1.0 / (lam[j] + iw);
            s.am += wgt[j] * dm;
            s.bm += wgt[j] * decay[j] * dm;
            s.um += lw[j] * dm;
            s.vm += lw[j] * decay[j] * dm;
            s.ap += wgt[j] * dp;
            s.bp += wgt[j] * decay[j] * dp;
            s.up += lw[j] * dp;
            s.vp += lw[j] * decay[j] * dp;
        }
        return s;
    }

    // full integrand on the real axis: {x2, v2, xv, dd}.  The windowed
    // transforms go through window_phi so small t does not cancel.
    QuadVec<4> body(double w) const {
        const cplx iw(0.0, w);
        cplx chat = 0.0, dhat = 0.0;
        for (int j = 0; j < 3; ++j) {
            const cplx ph = window_phi(lam[j] - iw, t);
            chat += wgt[j] * ph;
            dhat -= lw[j] * ph;
        }
        const cplx p_osc = std::exp(cplx(0.0, w * t));
        const double L = noise_kernel_symmetric(w, p);
        QuadVec<4> f;
        f[0] = L * std::norm(chat);
        f[1] = L * std::norm(dhat);
        f[2] = L * (chi0 * (p_osc * std::conj(chat))).real();
        const double wthresh = 1e-7 * std::max(1.0, std::abs(lam[0]));
        if (std::abs(w) < wthresh) {
            f[3] = L * (2.0 * chi0 * chi0 + 2.0 * chi1 * int_chi);
        } else {
            const cplx pref(chi0, -chi1 / w);
            f[3] = L * 2.0 * (pref * p_osc * std::conj(dhat)).real();
        }
        return f;
    }

    // non-oscillatory part of the integrand, analytic in w; real on the real
    // axis up to rounding of the conjugate-pair sums
    QuadVec<4> smooth(double w) const {
        const Sums s = sums(cplx(w, 0.0));
        const cplx L = noise_kernel_cplx(cplx(w, 0.0), p);
        const cplx pref(chi0, -chi1 / w);
        const cplx v0 = L * (s.am * s.ap + s.bm * s.bp);
        const cplx v1 = L * (s.um * s.up + s.vm * s.vp);
        const cplx v2 = L * (-0.5 * chi0 * (s.bp + s.bm));
        const cplx v3 = L * (pref * s.vp + std::conj(pref) * s.vm);
        const double mag = std::abs(v0) + std::abs(v1) + std::abs(v2) + std::abs(v3);
        if (std::abs(v0.imag()) + std::abs(v1.imag()) + std::abs(v2.imag()) +
                std::abs(v3.imag()) >
            1e-8 * std::max(mag, 1e-290))
            throw ResidueError("thermal tail integrand has an imaginary residue");
        return {v0.real(), v1.real(), v2.real(), v3.real()};
    }

    // coefficient of e^{+i w t}, continued to complex w
    std::array<cplx, 4> osc_coeff(cplx w) const {
        const Sums s = sums(w);
        const cplx L = noise_kernel_cplx(w, p);
        const cplx pref = chi0 - cplx(0.0, 1.0) * chi1 / w;
        return {L * (-s.ap * s.bm), L * (-s.vm * s.up), L * (0.5 * chi0 * s.ap),
                L * (-pref * s.up)};
    }
};

} // namespace detail

// Thermal contributions by frequency integration of the noise spectrum against
// the windowed transforms of chi.  The integrand is even, so only w >= 0 is
// integrated.  Beyond w_max the integrand splits into a smooth part (mapped to
// a compact interval) and an e^{i w t} part (rotated onto a vertical contour
// where it decays); both tails are evaluated to the same tolerance as the body,
// so no oscillatory truncation error is left behind.
inline ThermalParts thermal_moments(const ResponseFunction& rf, double t,
                                    const QuadratureSpec& spec = {}) {
    ThermalParts out;
    const SystemParams& p = rf.params;
    if (p.gamma0 == 0.0 || t == 0.0) return out;
    if (t < 0.0) throw std::invalid_argument("thermal_moments: t must be >= 0");

    const detail::ThermalKernel ker(rf, t);

    const double nu = std::abs(rf.roots[0].imag());
    const double gam = rf.roots[0].real();
    const double w_feat = std::max({p.omega_d, p.big_omega(), nu, p.temperature});
    const double w_max = spec.omega_max_factor * std::max(w_feat, p.omega0);

    std::vector<double> seeds = {p.omega_d, p.big_omega(), p.temperature,
                                 2.0 * M_PI * p.temperature};
    if (nu > 0.0) {
        // log ladder out of the resonance so narrow Lorentzians (weak
        // coupling, small cutoff) hand the adaptive splitter octave marks
        seeds.push_back(nu);
        for (double step = gam; step < 2.0 * nu; step *= 5.0) {
            seeds.push_back(std::max(0.0, nu - step));
            seeds.push_back(nu + step);
        }
    }

    auto fbody = [&](double w) { return ker.body(w); };
    // absolute floor from a scale probe so near-zero components cannot stall
    double probe = 0.0;
    for (double w : {0.1 * w_feat, 0.5 * w_feat, w_feat, 2.0 * w_feat}) {
        const auto f = ker.body(w);
        for (double v : f) probe = std::max(probe, std::abs(v));
    }
    const double abs_floor = std::max(spec.abs_tol, 1e-14 * probe * w_max);

    auto body = integrate_adaptive<4>(fbody, 0.0, w_max, spec.rel_tol, abs_floor, seeds,
                                      spec.max_panels);
    out.evaluations += body.evaluations;
    if (!body.converged && spec.throw_on_failure)
        throw QuadratureFailure("thermal_moments: body integral did not converge");

    // smooth tail: substitute u = 1/w
    auto ftail = [&](double u) -> QuadVec<4> {
        if (u <= 0.0) return QuadVec<4>{0.0, 0.0, 0.0, 0.0};
        const auto f = ker.smooth(1.0 / u);
        return {f[0] / (u * u), f[1] / (u * u), f[2] / (u * u), f[3] / (u * u)};
    };
    auto tail_smooth = integrate_adaptive<4>(ftail, 0.0, 1.0 / w_max, spec.rel_tol,
                                             abs_floor / w_max, {}, spec.max_panels);
    out.evaluations += tail_smooth.evaluations;

    // oscillatory tail on the vertical line w = w_max + i y
    const cplx phase = std::exp(cplx(0.0, w_max * t));
    auto fosc = [&](double y) -> QuadVec<8> {
        const auto c = ker.osc_coeff(cplx(w_max, y));
        const double damp = std::exp(-y * t);
        QuadVec<8> f;
        for (int k = 0; k < 4; ++k) {
            f[2 * k] = c[k].real() * damp;
            f[2 * k + 1] = c[k].imag() * damp;
        }
        return f;
    };
    QuadVec<4> tail_osc{};
    {
        double y0 = 0.0;
        double seg = w_max;
        const double y_stop = (t > 0.0) ? 46.0 / t : 0.0;
        QuadVec<8> acc{};
        for (int it = 0; it < 60; ++it) {
            const double y1 = std::min(y0 + seg, y_stop);
            auto r = integrate_adaptive<8>(fosc, y0, y1, spec.rel_tol, abs_floor,
                                           {}, spec.max_panels);
            out.evaluations += r.evaluations;
            double seg_mag = 0.0;
            for (int k = 0; k < 8; ++k) {
                acc[k] += r.value[k];
                seg_mag = std::max(seg_mag, std::abs(r.value[k]));
            }
            y0 = y1;
            if (y0 >= y_stop) break;
            seg *= 2.0;
            double ref = abs_floor;
            for (int k = 0; k < 8; ++k) ref = std::max(ref, std::abs(acc[k]) * spec.tail_rel);
            if (seg_mag < std::max(ref, spec.tail_rel * probe * w_max)) break;
        }
        for (int k = 0; k < 4; ++k) {
            const cplx integral(acc[2 * k], acc[2 * k + 1]);
            tail_osc[k] = 2.0 * (cplx(0.0, 1.0) * phase * integral).real();
        }
    }

    const double norm = 1.0 / (M_PI * p.mass * p.mass);
    out.x2 = (body.value[0] + tail_smooth.value[0] + tail_osc[0]) * norm;
    out.v2 = (body.value[1] + tail_smooth.value[1] + tail_osc[1]) * norm;
    out.xv = (body.value[2] + tail_smooth.value[2] + tail_osc[2]) * norm;
    out.dd = (body.value[3] + tail_smooth.value[3] + tail_osc[3]) * norm;
    return out;
}

inline MomentSet moments(const ResponseFunction& rf, double t, const QuadratureSpec& spec = {}) {
    if (t < 0.0) throw std::invalid_argument("moments: t must be >= 0");
    MomentSet ms;
    ms.t = t;
    const ThermalParts h = homogeneous_moments(rf, t);
    const ThermalParts th = thermal_moments(rf, t, spec);
    ms.x2_h = h.x2;
    ms.v2_h = h.v2;
    ms.xv_h = h.xv;
    ms.x2_th = th.x2;
    ms.v2_th = th.v2;
    ms.xv_th = th.xv;
    ms.x2_ddot = h.dd + th.dd;
    return ms;
}

// Dimensionless battery covariance matrix
//   [ m w0 <x^2>        (m/2) d<x^2>/dt ]
//   [ (m/2) d<x^2>/dt   (m/w0) <xdot^2> ]
struct CovarianceMatrix {
    double xx = 0.0, xp = 0.0, pp = 0.0;
    double det() const { return xx * pp - xp * xp; }
};

inline CovarianceMatrix covariance(const MomentSet& ms, const SystemParams& p) {
    CovarianceMatrix s;
    s.xx = p.mass * p.omega0 * ms.x2();
    s.xp = p.mass * ms.xv();
    s.pp = p.mass / p.omega0 * ms.v2();
    if (s.det() < 0.25 - 1e-6)
        throw HeisenbergViolation("covariance: det sigma = " + std::to_string(s.det()) +
                                  " < 1/4 at t = " + std::to_string(ms.t));
    return s;
}

// Stationary thermal variances from the fluctuation-dissipation integral
//   <x^2> = (1/pi m) int_0^inf dw coth(beta w/2) Im chi~(-i w),
// used as an independent long-time reference.
inline std::array<double, 2> stationary_moments_fdt(const SystemParams& p,
                                                    const QuadratureSpec& spec = {}) {
    p.validate();
    if (p.gamma0 == 0.0) return {0.0, 0.0};
    ResponseFunction rf = solve_characteristic(p);
    const double nu = std::abs(rf.roots[0].imag());
    const double gam = rf.roots[0].real();
    const double w_feat = std::max({p.omega_d, p.big_omega(), nu, p.temperature, p.omega0});
    const double w_max = spec.omega_max_factor * w_feat;
    std::vector<double> seeds = {p.omega0, p.omega_d, p.big_omega(), p.temperature};
    if (nu > 0.0) {
        seeds.push_back(nu);
        for (double step = gam; step < 2.0 * nu; step *= 5.0) {
            seeds.push_back(std::max(0.0, nu - step));
            seeds.push_back(nu + step);
        }
    }
    auto f = [&](double w) -> QuadVec<2> {
        const double im = chi_laplace(p, cplx(0.0, -w)).imag();
        double cth;
        if (p.temperature <= 0.0)
            cth = 1.0;
        else {
            const double x = 0.5 * w / p.temperature;
            cth = x < 1e-8 ? 1.0 / x : 1.0 / std::tanh(x);
        }
        return {cth * im, w * w * cth * im};
    };
    auto body = integrate_adaptive<2>(f, 0.0, w_max, spec.rel_tol, 0.0, seeds, spec.max_panels);
    if (!body.converged && spec.throw_on_failure)
        throw QuadratureFailure("stationary_moments_fdt: integral did not converge");
    // tail via u = 1/w (integrand ~ 1/w^5 and 1/w^3; no oscillation)
    auto ftail = [&](double u) -> QuadVec<2> {
        if (u <= 0.0) return {0.0, 0.0};
        const auto v = f(1.0 / u);
        return {v[0] / (u * u), v[1] / (u * u)};
    };
    auto tail = integrate_adaptive<2>(ftail, 0.0, 1.0 / w_max, spec.rel_tol, 0.0, {},
                                      spec.max_panels);
    const double norm = 1.0 / (M_PI * p.mass);
    return {(body.value[0] + tail.value[0]) * norm, (body.value[1] + tail.value[1]) * norm};
}

} // namespace qbatt

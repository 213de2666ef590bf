#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "qbatt/errors.hpp"
#include "qbatt/kernels.hpp"
#include "qbatt/quadrature.hpp"
#include "qbatt/response.hpp"
#include "qbatt/variances.hpp"

namespace qbatt {

// Mode-resolved energy flows: the coupling and reservoir energy carried by the
// k-th bath mode, from the exact root sums and noise integrals.  All formulas
// take the continuum response function; the bath discretization only supplies
// (omega_k, c_k).

namespace spectral_detail {

using qbatt::detail::window_phi;

// root sums must come out real; a surviving imaginary part means the
// conjugate pairing upstream is broken
inline double real_checked(cplx v, const char* where) {
    if (std::abs(v.imag()) > 1e-9 * std::max(1.0, std::abs(v.real())))
        throw ResidueError(std::string("spectral: imaginary residue in ") + where);
    return v.real();
}

inline cplx phi(cplx z, double t) { return window_phi(z, t); }

// (e^{i a t} - e^{-lam t})/(lam + i a), the same window seen from the other
// endpoint; the phi route keeps it stable when (lam + i a) t is small, the
// direct difference avoids overflow when it is large
inline cplx ediff(cplx lam, double a, double t) {
    const cplx z = lam + cplx(0.0, a);
    if (std::abs(z * t) < 1.0) return std::exp(-lam * t) * phi(-z, t);
    return (std::exp(cplx(0.0, a * t)) - std::exp(-lam * t)) / z;
}

// Divided difference [D(beta) - D(alpha)]/(beta - alpha) of the sine-window
// transform D(a) = int_0^t sin(wk (t - t')) e^{-a t'} dt'.  The direct form
// cancels to O(t^3) out of O(t) pieces, so for small arguments it is summed
// from the double series
//   D(a) = sum_{m,l} (-1)^m wk^{2m+1} (-a)^l t^{2m+l+2} / (2m+l+2)!
// whose divided difference replaces (-a)^l by (-1)^l sum_r alpha^r beta^{l-1-r}.
inline cplx sine_window_dd(cplx alpha, cplx beta, double wk, double t) {
    const double scale =
        t * std::max({std::abs(alpha), std::abs(beta), wk});
    if (scale < 0.5) {
        cplx acc = 0.0;
        const int nmax = 24;
        for (int m = 0; 2 * m + 3 <= nmax; ++m) {
            // t^{2m+l+2}/(2m+l+2)! built up incrementally over l
            double tpow = std::pow(t, 2 * m + 3);
            double fact = 1.0;
            for (int q = 2; q <= 2 * m + 3; ++q) fact *= q;
            const double wkp = std::pow(wk, 2 * m + 1) * (m % 2 == 0 ? 1.0 : -1.0);
            cplx h = 1.0;       // h_l = sum_{r<l} alpha^r beta^{l-1-r}, starting at l = 1
            cplx beta_pow = 1.0; // beta^{l-1}
            double sign_l = -1.0;
            for (int l = 1; 2 * m + l + 2 <= nmax; ++l) {
                acc += wkp * sign_l * h * tpow / fact;
                tpow *= t;
                fact *= (2 * m + l + 3);
                beta_pow *= beta;
                h = alpha * h + beta_pow;
                sign_l = -sign_l;
            }
        }
        return acc;
    }
    // D(a) = (1/2i) [e^{i wk t} phi(a + i wk) - e^{-i wk t} phi(a - i wk)],
    // removable at a = -+ i wk by construction
    const cplx ep = std::exp(cplx(0.0, wk * t)), em = std::exp(cplx(0.0, -wk * t));
    auto D = [&](cplx a) {
        return (ep * phi(a + cplx(0.0, wk), t) - em * phi(a - cplx(0.0, wk), t)) /
               cplx(0.0, 2.0);
    };
    return (D(beta) - D(alpha)) / (beta - alpha);
}

struct ModeKernel {
    std::array<cplx, 3> lam, wgt, decay;
    double t, wk, ck, coth_k;
    double chi0, chi1;
    const SystemParams* p;

    ModeKernel(const ResponseFunction& rf, const BathDiscretization& bath, double time,
               int k) {
        t = time;
        wk = bath.mode_freqs[k];
        ck = bath.couplings[k];
        p = &rf.params;
        coth_k = p->temperature > 0.0 ? 1.0 / std::tanh(0.5 * wk / p->temperature) : 1.0;
        cplx c0 = 0.0, c1 = 0.0;
        for (int j = 0; j < 3; ++j) {
            lam[j] = rf.roots[j];
            wgt[j] = rf.weights[j];
            decay[j] = std::exp(-rf.roots[j] * time);
            c0 += wgt[j] * decay[j];
            c1 -= lam[j] * wgt[j] * decay[j];
        }
        chi0 = c0.real();
        chi1 = c1.real();
    }

    // homogeneous part of <x x_k>_s (factorized double root sum)
    double cross_homogeneous() const {
        const cplx iwk(0.0, wk);
        cplx g0 = 0.0, g1 = 0.0;
        for (int j = 0; j < 3; ++j) {
            const cplx gp = ediff(lam[j], wk, t);
            const cplx gm = ediff(lam[j], -wk, t);
            const cplx g = (gp - gm) / cplx(0.0, 2.0);
            g0 += wgt[j] * g;
            g1 += lam[j] * wgt[j] * g;
        }
        const double w0 = p->omega0, m = p->mass;
        const cplx val = (w0 * w0 * chi0 * g0 - chi1 * g1) * ck / (2.0 * m * m * w0 * wk);
        return real_checked(val, "the homogeneous cross term");
    }

    // <x_th xi_k>_s
    double cross_noise() const {
        cplx s = 0.0;
        for (int j = 0; j < 3; ++j)
            s += wgt[j] * (phi(lam[j] - cplx(0.0, wk), t) + phi(lam[j] + cplx(0.0, wk), t));
        const double m = p->mass;
        return (ck * coth_k / (4.0 * m * m * wk)) * real_checked(s, "the noise cross term");
    }

    // omega-integrand of the remaining thermal cross term.  V Y + Z collapses
    // to a sum of sine-window divided differences; the naive product form
    // cancels six orders deep at small t.
    double cross_integrand(double w) const {
        const cplx iw(0.0, w);
        cplx U = 0.0, VYZ = 0.0;
        for (int j = 0; j < 3; ++j) {
            U += wgt[j] * ediff(lam[j], w, t);
            VYZ += wgt[j] * (-2.0) * sine_window_dd(lam[j], iw, wk, t);
        }
        const double L = noise_kernel_symmetric(w, *p);
        return (L * U * VYZ).real();
    }

    // homogeneous reservoir-mode energy (factorized double root sum)
    double reservoir_homogeneous() const {
        const cplx iwk(0.0, wk);
        cplx pp = 0.0, pm = 0.0, qp = 0.0, qm = 0.0;
        for (int j = 0; j < 3; ++j) {
            const cplx fp = phi(lam[j] + iwk, t);
            const cplx fm = phi(lam[j] - iwk, t);
            pp += wgt[j] * fp;
            pm += wgt[j] * fm;
            qp += lam[j] * wgt[j] * fp;
            qm += lam[j] * wgt[j] * fm;
        }
        const double w0 = p->omega0, m = p->mass;
        const cplx val = (pp * pm + qp * qm / (w0 * w0)) * ck * ck * w0 / (4.0 * m * m);
        return real_checked(val, "the homogeneous reservoir energy");
    }

    // thermal reservoir-mode pieces: I1 (closed form), its time derivative,
    // the I2 omega-integrand and its time derivative
    double i1() const {
        const cplx iwk(0.0, wk);
        cplx s = 0.0;
        for (int j = 0; j < 3; ++j) {
            const cplx zp = lam[j] + iwk, zm = lam[j] - iwk;
            s += wgt[j] * (-2.0 * wk * t / (lam[j] * lam[j] + wk * wk) +
                           cplx(0.0, 1.0) * (phi(zp, t) / zp - phi(zm, t) / zm));
        }
        const double m = p->mass;
        return (ck * ck * coth_k / (4.0 * m * m)) * real_checked(s, "I1");
    }

    double i1_rate() const {
        const cplx iwk(0.0, wk);
        cplx s = 0.0;
        for (int j = 0; j < 3; ++j) {
            const cplx zp = lam[j] + iwk, zm = lam[j] - iwk;
            s += wgt[j] * (-2.0 * wk / (lam[j] * lam[j] + wk * wk) +
                           cplx(0.0, 1.0) *
                               (std::exp(-zp * t) / zp - std::exp(-zm * t) / zm));
        }
        const double m = p->mass;
        return (ck * ck * coth_k / (4.0 * m * m)) * s.real();
    }

    void fg_factors(double w, cplx& Fp, cplx& Fm, cplx& Gp, cplx& Gm) const {
        const cplx iwk(0.0, wk);
        Fp = Fm = Gp = Gm = 0.0;
        for (int j = 0; j < 3; ++j) {
            const cplx dm = 1.0 / (lam[j] - cplx(0.0, w));
            const cplx dp = 1.0 / (lam[j] + cplx(0.0, w));
            Fp += wgt[j] * (phi(cplx(0.0, -(w + wk)), t) - phi(lam[j] - iwk, t)) * dp;
            Fm += wgt[j] * (phi(cplx(0.0, -(w - wk)), t) - phi(lam[j] + iwk, t)) * dp;
            Gm += wgt[j] * (phi(cplx(0.0, w + wk), t) - phi(lam[j] + iwk, t)) * dm;
            Gp += wgt[j] * (phi(cplx(0.0, w - wk), t) - phi(lam[j] - iwk, t)) * dm;
        }
    }

    double i2_integrand(double w) const {
        cplx Fp, Fm, Gp, Gm;
        fg_factors(w, Fp, Fm, Gp, Gm);
        const double L = noise_kernel_symmetric(w, *p);
        return (L * (Fp * Gm + Fm * Gp)).real();
    }

    double i2_rate_integrand(double w) const {
        cplx Fp, Fm, Gp, Gm;
        fg_factors(w, Fp, Fm, Gp, Gm);
        const cplx ep = std::exp(cplx(0.0, wk * t)), em = std::exp(cplx(0.0, -wk * t));
        cplx U = 0.0, Ub = 0.0;
        for (int j = 0; j < 3; ++j) {
            U += wgt[j] * ediff(lam[j], w, t);
            Ub += wgt[j] * ediff(lam[j], -w, t);
        }
        const double L = noise_kernel_symmetric(w, *p);
        return (L * (ep * U * Gm + em * Fp * Ub + em * U * Gp + ep * Fm * Ub)).real();
    }
};

// integration window and seeds for the mode integrals
inline std::pair<double, std::vector<double>> mode_window(const ResponseFunction& rf,
                                                          double wk, double t,
                                                          const QuadratureSpec& spec) {
    const SystemParams& p = rf.params;
    const double nu = std::abs(rf.roots[0].imag());
    const double w_max =
        spec.omega_max_factor *
        std::max({p.omega_d, p.big_omega(), nu, p.temperature, wk, p.omega0});
    std::vector<double> seeds;
    for (double s : {p.omega_d, nu, wk, p.temperature}) {
        if (s > 0.0) {
            seeds.push_back(s);
            seeds.push_back(-s);
        }
    }
    // resolve the sin((w -+ w_k) t)/(w -+ w_k) concentration
    if (t > 0.0) {
        for (int n = 1; n <= 4; ++n) {
            seeds.push_back(wk + n * M_PI / t);
            seeds.push_back(wk - n * M_PI / t);
            seeds.push_back(-wk + n * M_PI / t);
            seeds.push_back(-wk - n * M_PI / t);
        }
    }
    return {w_max, seeds};
}

template <class F>
double mode_integral(F&& f, const ResponseFunction& rf, double wk, double t,
                     const QuadratureSpec& spec) {
    auto [w_max, seeds] = mode_window(rf, wk, t, spec);
    auto wrap = [&](double w) { return QuadVec<1>{f(w)}; };
    // probe-based absolute floor
    double probe = 0.0;
    for (double w : {0.3 * wk + 0.1, wk, 2.0 * wk + 0.2, rf.params.omega_d})
        probe = std::max(probe, std::abs(f(w)));
    const double afloor = std::max(spec.abs_tol, 1e-13 * probe * w_max);
    auto r = integrate_adaptive<1>(wrap, -w_max, w_max, spec.rel_tol, afloor, seeds,
                                   spec.max_panels);
    if (!r.converged && spec.throw_on_failure)
        throw QuadratureFailure("spectral: mode integral did not converge");
    return r.value[0] / (2.0 * M_PI);
}

} // namespace spectral_detail

// Coupling energy change carried by mode k: Delta E_C(t, omega_k).
inline double mode_coupling_energy(const ResponseFunction& rf, const BathDiscretization& bath,
                                   double t, int k, const MomentSet& ms,
                                   const QuadratureSpec& spec = {}) {
    if (k < 0 || k >= bath.n_modes) throw std::invalid_argument("mode index");
    if (t == 0.0) return 0.0;
    spectral_detail::ModeKernel ker(rf, bath, t, k);
    const double m = rf.params.mass;
    double xxk = ker.cross_homogeneous() + ker.cross_noise();
    xxk += (ker.ck / (2.0 * m * m * m * ker.wk)) *
           spectral_detail::mode_integral([&](double w) { return ker.cross_integrand(w); },
                                          rf, ker.wk, t, spec);
    const double hck = -ker.ck * xxk +
                       ker.ck * ker.ck / (2.0 * m * ker.wk * ker.wk) * ms.x2();
    const double hck0 = ker.ck * ker.ck / (2.0 * m * ker.wk * ker.wk) * 0.5 /
                        (m * rf.params.omega0);
    return hck - hck0;
}

// Reservoir energy change carried by mode k: Delta E_R(t, omega_k).
inline double mode_reservoir_energy(const ResponseFunction& rf, const BathDiscretization& bath,
                                    double t, int k, const QuadratureSpec& spec = {}) {
    if (k < 0 || k >= bath.n_modes) throw std::invalid_argument("mode index");
    if (t == 0.0) return 0.0;
    spectral_detail::ModeKernel ker(rf, bath, t, k);
    const double m = rf.params.mass;
    const double i2 =
        (ker.ck * ker.ck / (4.0 * m * m * m)) *
        spectral_detail::mode_integral([&](double w) { return ker.i2_integrand(w); }, rf,
                                       ker.wk, t, spec);
    return ker.reservoir_homogeneous() + ker.i1() + i2;
}

// d/dt of the thermal reservoir pieces I1 + I2 (the secular-cancellation probe).
inline double mode_reservoir_thermal_rate(const ResponseFunction& rf,
                                          const BathDiscretization& bath, double t, int k,
                                          const QuadratureSpec& spec = {}) {
    spectral_detail::ModeKernel ker(rf, bath, t, k);
    const double m = rf.params.mass;
    const double di2 =
        (ker.ck * ker.ck / (4.0 * m * m * m)) *
        spectral_detail::mode_integral([&](double w) { return ker.i2_rate_integrand(w); },
                                       rf, ker.wk, t, spec);
    return ker.i1_rate() + di2;
}

struct SpectralGrid {
    std::vector<double> times;
    std::vector<double> mode_freqs;
    // row-major [time][mode], stored per unit Delta so the continuum limit is
    // grid-independent
    std::vector<double> de_c_over_delta;
    std::vector<double> de_r_over_delta;
    std::vector<double> sum_de_c; // per time, plain sums over modes
    std::vector<double> sum_de_r;
};

// Fill the (time x mode) grids; stride subsamples the stored modes while the
// sum rules always run over every mode.
inline SpectralGrid spectral_grid(const ResponseFunction& rf, const BathDiscretization& bath,
                                  const std::vector<double>& times,
                                  const QuadratureSpec& spec = {}, int stride = 1) {
    if (times.empty()) throw std::invalid_argument("spectral_grid: empty time list");
    SpectralGrid grid;
    grid.times = times;
    for (int k = 0; k < bath.n_modes; k += stride) grid.mode_freqs.push_back(bath.mode_freqs[k]);
    for (double t : times) {
        const MomentSet ms = moments(rf, t, spec);
        double sc = 0.0, sr = 0.0;
        for (int k = 0; k < bath.n_modes; ++k) {
            const double dec = mode_coupling_energy(rf, bath, t, k, ms, spec);
            const double der = mode_reservoir_energy(rf, bath, t, k, spec);
            sc += dec;
            sr += der;
            if (k % stride == 0) {
                grid.de_c_over_delta.push_back(dec / bath.delta);
                grid.de_r_over_delta.push_back(der / bath.delta);
            }
        }
        grid.sum_de_c.push_back(sc);
        grid.sum_de_r.push_back(sr);
    }
    return grid;
}

} // namespace qbatt

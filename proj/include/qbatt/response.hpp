#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "qbatt/errors.hpp"
#include "qbatt/params.hpp"

namespace qbatt {

using cplx = std::complex<double>;

// chi(t) = sum_j chi_j exp(-lambda_j t), with lambda_j the roots of
//   lambda^3 - wD lambda^2 + (w0^2 + gamma0 wD) lambda - wD w0^2 = 0
// and weights chi_j = (wD - lambda_j) prod_{j' != j} 1/(lambda_j' - lambda_j).
// Root ordering: underdamped stores {Gamma + i nu, Gamma - i nu, real};
// overdamped stores ascending real roots.
struct ResponseFunction {
    std::array<cplx, 3> roots{};
    std::array<cplx, 3> weights{};
    RegimeTag regime;
    SystemParams params;

    double min_decay_rate() const {
        return std::min({roots[0].real(), roots[1].real(), roots[2].real()});
    }
};

namespace detail {

inline double cubic_eval(double x, double b, double c, double d) {
    return ((x + b) * x + c) * x + d;
}

// One real root of the monic cubic x^3 + b x^2 + c x + d by bisection on a
// sign-changing bracket, then Newton.
inline double cubic_real_root(double b, double c, double d) {
    double hi = 1.0 + std::max({std::abs(b), std::abs(c), std::abs(d)}); // Cauchy bound
    double lo = 0.0;
    double flo = cubic_eval(lo, b, c, d);
    if (flo == 0.0) return lo;
    double fhi = cubic_eval(hi, b, c, d);
    if (flo * fhi > 0.0) {
        lo = -hi;
        flo = cubic_eval(lo, b, c, d);
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fm = cubic_eval(mid, b, c, d);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) {
        const double f = cubic_eval(x, b, c, d);
        const double df = (3.0 * x + 2.0 * b) * x + c;
        if (df == 0.0) break;
        const double dx = f / df;
        x -= dx;
        if (std::abs(dx) <= 1e-17 * std::abs(x)) break;
    }
    return x;
}

inline cplx cubic_newton_polish(cplx z, double b, double c, double d) {
    for (int it = 0; it < 3; ++it) {
        const cplx f = ((z + b) * z + c) * z + d;
        const cplx df = (3.0 * z + 2.0 * b) * z + c;
        if (std::abs(df) == 0.0) break;
        z -= f / df;
    }
    return z;
}

} // namespace detail

inline ResponseFunction solve_characteristic(const SystemParams& p, double regime_tol = 1e-10) {
    p.validate();
    ResponseFunction rf;
    rf.params = p;
    rf.regime = classify_regime(p, regime_tol);
    if (rf.regime.kind == DampingKind::CriticallyDamped)
        throw DegenerateRoots("solve_characteristic: repeated roots (critically damped input)");

    if (p.gamma0 == 0.0) {
        // decoupled battery: chi(t) = sin(w0 t)/w0 exactly
        rf.roots = {cplx(0.0, p.omega0), cplx(0.0, -p.omega0), cplx(p.omega_d, 0.0)};
        rf.weights = {cplx(0.0, 0.5 / p.omega0), cplx(0.0, -0.5 / p.omega0), cplx(0.0, 0.0)};
        return rf;
    }

    const double b = -p.omega_d;
    const double c = p.omega0 * p.omega0 + p.gamma0 * p.omega_d;
    const double d = -p.omega_d * p.omega0 * p.omega0;

    const double r = detail::cubic_real_root(b, c, d);
    // deflate to z^2 + q1 z + q0
    const double q1 = b + r;
    const double q0 = c + r * q1;
    const double disc = q1 * q1 - 4.0 * q0;
    std::array<cplx, 3> roots;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        roots = {cplx(0.5 * (-q1 - s), 0.0), cplx(0.5 * (-q1 + s), 0.0), cplx(r, 0.0)};
    } else {
        const double s = std::sqrt(-disc);
        roots = {cplx(-0.5 * q1, 0.5 * s), cplx(-0.5 * q1, -0.5 * s), cplx(r, 0.0)};
    }
    for (auto& z : roots) z = detail::cubic_newton_polish(z, b, c, d);

    double max_mag = 0.0;
    for (const auto& z : roots) max_mag = std::max(max_mag, std::abs(z));
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (std::abs(roots[i] - roots[j]) < 1e-8 * max_mag)
                throw DegenerateRoots("solve_characteristic: roots closer than 1e-8 of scale");

    // canonical ordering and exact conjugate symmetry
    const double imag_tol = 1e-12 * max_mag;
    int n_complex = 0;
    for (const auto& z : roots)
        if (std::abs(z.imag()) > imag_tol) ++n_complex;
    if (n_complex >= 2) {
        // underdamped: pair the two complex roots, enforce conjugacy
        std::sort(roots.begin(), roots.end(),
                  [](const cplx& l, const cplx& rr) { return std::abs(l.imag()) > std::abs(rr.imag()); });
        cplx pair = 0.5 * (roots[0] + std::conj(roots[1]));
        if (pair.imag() < 0.0) pair = std::conj(pair);
        rf.roots = {pair, std::conj(pair), cplx(roots[2].real(), 0.0)};
    } else {
        std::array<double, 3> re{roots[0].real(), roots[1].real(), roots[2].real()};
        std::sort(re.begin(), re.end());
        rf.roots = {cplx(re[0], 0.0), cplx(re[1], 0.0), cplx(re[2], 0.0)};
    }

    for (int j = 0; j < 3; ++j) {
        cplx prod = 1.0;
        for (int jp = 0; jp < 3; ++jp)
            if (jp != j) prod *= (rf.roots[jp] - rf.roots[j]);
        rf.weights[j] = (p.omega_d - rf.roots[j]) / prod;
    }

    // sum rules chi(0) = 0, chi'(0) = 1, chi''(0) = 0
    cplx s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (int j = 0; j < 3; ++j) {
        s0 += rf.weights[j];
        s1 += rf.weights[j] * rf.roots[j];
        s2 += rf.weights[j] * rf.roots[j] * rf.roots[j];
    }
    const double wscale = std::max(1.0, std::abs(rf.weights[0]) * max_mag * max_mag);
    if (std::abs(s0) > 1e-10 || std::abs(s1 + 1.0) > 1e-10 || std::abs(s2) > 1e-10 * wscale)
        throw ResidueError("solve_characteristic: chi_j sum rules violated");
    return rf;
}

// d^order/dt^order chi(t), order 0..3.  The imaginary residue of the root sum
// is checked against 1e-10 of the term magnitude before being discarded.
inline double chi(const ResponseFunction& rf, double t, int order = 0) {
    if (order < 0 || order > 3) throw std::invalid_argument("chi: order must be 0..3");
    cplx acc = 0.0;
    double mag = 0.0;
    for (int j = 0; j < 3; ++j) {
        cplx term = rf.weights[j] * std::exp(-rf.roots[j] * t);
        for (int n = 0; n < order; ++n) term *= -rf.roots[j];
        acc += term;
        mag += std::abs(term);
    }
    if (std::abs(acc.imag()) > 1e-10 * std::max(1e-300, mag))
        throw ResidueError("chi: imaginary residue " + std::to_string(acc.imag()) +
                           " exceeds tolerance at t=" + std::to_string(t));
    return acc.real();
}

// Laplace transform chi~(lambda) = (lambda + wD)/((lambda^2 + w0^2)(lambda + wD)
// + lambda gamma0 wD); also valid on the imaginary axis lambda = -i w.
inline cplx chi_laplace(const SystemParams& p, cplx lambda) {
    const cplx num = lambda + p.omega_d;
    const cplx den = (lambda * lambda + p.omega0 * p.omega0) * num +
                     lambda * p.gamma0 * p.omega_d;
    return num / den;
}

enum class ChiApprox { WeakUD, SUD, SUDFull, ODLargeCutoff };

// Closed-form limits of chi(t) in the named regimes; the caller is responsible
// for staying in the validity domain.
inline double chi_approx(const SystemParams& p, double t, ChiApprox which) {
    switch (which) {
        case ChiApprox::WeakUD:
            return std::exp(-0.5 * p.gamma0 * t) * std::sin(p.omega0 * t) / p.omega0;
        case ChiApprox::SUD: {
            const double om = p.big_omega();
            return std::exp(-0.5 * p.omega_d * t) * std::sin(om * t) / om;
        }
        case ChiApprox::SUDFull: {
            const double om = p.big_omega();
            const double r = p.omega_d / om;
            const double slow = p.omega0 * p.omega0 * p.omega_d / (om * om);
            return std::exp(-0.5 * p.omega_d * t) / om *
                       (std::sin(om * t) - r * std::cos(om * t)) +
                   p.omega_d / (om * om) * std::exp(-slow * t);
        }
        case ChiApprox::ODLargeCutoff: {
            const double half = 0.5 * p.gamma0;
            const double s2 = half * half - p.omega0 * p.omega0;
            if (s2 <= 0.0)
                throw std::domain_error("chi_approx: ODLargeCutoff needs gamma0 > 2 omega0");
            const double s = std::sqrt(s2);
            return std::exp(-half * t) * std::sinh(s * t) / s;
        }
    }
    return 0.0;
}

} // namespace qbatt

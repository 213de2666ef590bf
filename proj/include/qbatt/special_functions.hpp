#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "qbatt/errors.hpp"

namespace qbatt {

// Digamma for complex arguments in the right half plane: upward recurrence to
// |z| >= 10, then the Stirling-type series
//   psi(z) = ln z - 1/(2z) - sum_n B_2n / (2n z^2n).
inline std::complex<double> digamma(std::complex<double> z) {
    if (z.real() <= 0.0 && std::abs(z.imag()) < 1e-14) {
        const double r = z.real();
        if (std::abs(r - std::round(r)) < 1e-12)
            throw DigammaDomain("digamma: pole at nonpositive integer");
    }
    std::complex<double> acc = 0.0;
    while (std::abs(z) < 10.0) {
        acc -= 1.0 / z;
        z += 1.0;
    }
    // B_2n/(2n) for n = 1..7
    static constexpr double coef[7] = {1.0 / 12.0,   -1.0 / 120.0,    1.0 / 252.0,
                                       -1.0 / 240.0, 1.0 / 132.0,     -691.0 / 32760.0,
                                       1.0 / 12.0};
    const std::complex<double> u = 1.0 / (z * z);
    std::complex<double> series = 0.0;
    std::complex<double> up = u;
    for (int n = 0; n < 7; ++n) {
        series += coef[n] * up;
        up *= u;
    }
    return acc + std::log(z) - 0.5 / z - series;
}

// Real exponential integrals on x > 0.
// E1(x) = int_x^inf e^{-t}/t dt, Ei(x) = -PV int_{-x}^inf e^{-t}/t dt.
inline double expint_e1(double x) {
    if (!(x > 0.0)) throw std::domain_error("expint_e1: x must be > 0");
    constexpr double euler = 0.5772156649015328606;
    if (x <= 1.0) {
        double sum = 0.0, term = 1.0;
        for (int n = 1; n <= 40; ++n) {
            term *= -x / n;
            sum += term / n;
            if (std::abs(term / n) < 1e-18 * std::abs(sum)) break;
        }
        return -euler - std::log(x) - sum;
    }
    // modified Lentz continued fraction: E1 = e^{-x} * 1/(x+1- 1/(x+3- 4/(x+5- ...
    double b = x + 1.0, c = 1e308, d = 1.0 / b, h = d;
    for (int i = 1; i <= 200; ++i) {
        const double a = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x);
}

inline double expint_ei(double x) {
    if (!(x > 0.0)) throw std::domain_error("expint_ei: x must be > 0");
    constexpr double euler = 0.5772156649015328606;
    if (x < 40.0) {
        double sum = 0.0, term = 1.0;
        for (int n = 1; n <= 200; ++n) {
            term *= x / n;
            sum += term / n;
            if (term / n < 1e-18 * std::abs(sum) && n > static_cast<int>(x)) break;
        }
        return euler + std::log(x) + sum;
    }
    // asymptotic series, truncated at the smallest term
    double sum = 1.0, term = 1.0;
    for (int n = 1; n <= 60; ++n) {
        const double next = term * n / x;
        if (next >= term) break;
        term = next;
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return std::exp(x) / x * sum;
}

} // namespace qbatt

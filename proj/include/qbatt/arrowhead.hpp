#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qbatt/errors.hpp"

namespace qbatt {

// Eigen-decomposition of the symmetric arrowhead matrix
//   [ alpha  w^T ]
//   [ w      D   ],  D = diag(d_1 < d_2 < ... < d_N), w_i != 0,
// by the secular equation f(mu) = alpha - mu - sum_i w_i^2/(d_i - mu).
// Eigenvalues interlace the poles; each root is located by bisection plus
// Newton in the offset from its nearest pole, so near-pole distances keep full
// relative precision.  The couplings are then rebuilt from the computed
// spectrum (product identity w_i^2 = -prod_j (mu_j - d_i) / prod_{l != i}
// (d_l - d_i)), which makes the eigenvector set numerically orthogonal.
class ArrowheadEigen {
  public:
    ArrowheadEigen(double alpha, const std::vector<double>& d, const std::vector<double>& w)
        : n_(static_cast<int>(d.size()) + 1), d_(d), w_(w) {
        if (d.size() != w.size()) throw std::invalid_argument("arrowhead: size mismatch");
        for (std::size_t i = 1; i < d_.size(); ++i)
            if (!(d_[i] > d_[i - 1]))
                throw std::invalid_argument("arrowhead: poles must be strictly increasing");
        solve(alpha);
    }

    int size() const { return n_; }
    const std::vector<double>& eigenvalues() const { return mu_; }

    // eigenvector matrix element O[i][j] = <basis i | mode j>, i, j = 0..N
    double vector_element(int i, int j) const {
        if (i == 0) return norm_[j];
        return norm_[j] * wh_[i - 1] / offset(i - 1, j);
    }

    // mu_j - d_i at full precision
    double offset(int i, int j) const {
        // (origin pole of root j - d_i) + tau_j
        return (d_[org_[j]] - d_[i]) + tau_[j];
    }

  private:
    int n_;
    std::vector<double> d_, w_;
    std::vector<double> mu_;   // eigenvalues
    std::vector<int> org_;     // index of the origin pole of each root
    std::vector<double> tau_;  // mu_j = d_[org_j] + tau_j
    std::vector<double> wh_;   // rebuilt couplings
    std::vector<double> norm_; // eigenvector normalizations

    double secular(int org, double tau, double alpha) const {
        double s = alpha - (d_[org] + tau);
        for (std::size_t i = 0; i < d_.size(); ++i) {
            const double den = (d_[i] - d_[org]) - tau;
            s -= w_[i] * w_[i] / den;
        }
        return s;
    }

    double secular_deriv(int org, double tau) const {
        double s = -1.0;
        for (std::size_t i = 0; i < d_.size(); ++i) {
            const double den = (d_[i] - d_[org]) - tau;
            s -= w_[i] * w_[i] / (den * den);
        }
        return s;
    }

    // root with origin pole `org`, bracketed by taus (lo, hi), f(lo) > 0 > f(hi).
    // Safeguarded Newton: a Newton step is taken when it stays inside the
    // bracket, otherwise bisect; the bracket shrinks monotonically either way.
    double root_in(int org, double lo, double hi, double alpha) {
        double x = 0.5 * (lo + hi);
        for (int it = 0; it < 300; ++it) {
            const double f = secular(org, x, alpha);
            if (f > 0.0)
                lo = x;
            else
                hi = x;
            const double df = secular_deriv(org, x);
            double next = x - f / df;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (next == x || next == lo || next == hi) {
                const double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) break;
                next = mid;
                if (next == x) break;
            }
            x = next;
        }
        return x;
    }

    void solve(double alpha) {
        const int N = n_ - 1;
        mu_.resize(n_);
        org_.resize(n_);
        tau_.resize(n_);
        norm_.assign(n_, 0.0);
        wh_.resize(N);

        double wnorm2 = 0.0;
        for (double x : w_) wnorm2 += x * x;
        const double reach = std::sqrt(wnorm2) + std::abs(alpha) + 1.0;

        // exterior root below d_1
        {
            double lo = std::min(alpha, d_[0]) - reach; // f(lo) > 0
            org_[0] = 0;
            tau_[0] = root_in(0, lo - d_[0], -1e-300 * std::max(1.0, std::abs(d_[0])), alpha);
            // keep tau strictly negative
            if (tau_[0] >= 0.0) tau_[0] = -std::abs(tau_[0]) - 1e-300;
            mu_[0] = d_[0] + tau_[0];
        }
        // interior roots in (d_k, d_{k+1})
        for (int k = 0; k < N - 1; ++k) {
            const double gap = d_[k + 1] - d_[k];
            const double fm = secular(k, 0.5 * gap, alpha);
            if (fm > 0.0) {
                // root in right half: origin d_{k+1}, tau in (-gap/2, 0)
                org_[k + 1] = k + 1;
                tau_[k + 1] = root_in(k + 1, -0.5 * gap, -1e-300, alpha);
            } else {
                org_[k + 1] = k;
                tau_[k + 1] = root_in(k, 1e-300, 0.5 * gap, alpha);
            }
            mu_[k + 1] = d_[org_[k + 1]] + tau_[k + 1];
        }
        // exterior root above d_N
        {
            const double hi = std::max(alpha, d_[N - 1]) + reach; // f(hi) < 0
            org_[N] = N - 1;
            tau_[N] = root_in(N - 1, 1e-300, hi - d_[N - 1], alpha);
            mu_[N] = d_[N - 1] + tau_[N];
        }

        // rebuild couplings from the spectrum (scaled products)
        for (int i = 0; i < N; ++i) {
            double mant = 1.0;
            long ex = 0;
            auto mul = [&](double f) {
                mant *= f;
                if (std::abs(mant) > 1e200 || std::abs(mant) < 1e-200) {
                    int e2;
                    mant = std::frexp(mant, &e2);
                    ex += e2;
                }
            };
            for (int j = 0; j < n_; ++j) mul(offset(i, j));
            for (int l = 0; l < N; ++l)
                if (l != i) mul(1.0 / (d_[l] - d_[i]));
            double w2 = -std::ldexp(mant, static_cast<int>(std::max<long>(
                                              std::min<long>(ex, 2000), -2000)));
            if (w2 < 0.0) w2 = 0.0; // rounding at tiny couplings
            wh_[i] = std::copysign(std::sqrt(w2), w_[i]);
        }

        // normalizations
        for (int j = 0; j < n_; ++j) {
            double s = 1.0;
            for (int i = 0; i < N; ++i) {
                const double r = wh_[i] / offset(i, j);
                s += r * r;
            }
            norm_[j] = 1.0 / std::sqrt(s);
        }
    }
};

} // namespace qbatt

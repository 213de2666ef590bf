#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

#include "qbatt/errors.hpp"

namespace qbatt {

// Adaptive panel integrator built on a Gauss-Legendre 7/15 pair.  The 15-point
// rule gives the value, |G15 - G7| the panel error.  Nodes and weights are
// generated once by Newton iteration on P_n, so there are no tabulated
// constants to transcribe.
namespace quadrule {

template <int N>
struct GaussRule {
    std::array<double, N> x{};
    std::array<double, N> w{};
    GaussRule() {
        for (int i = 0; i < N; ++i) {
            // Chebyshev initial guess, Newton on P_N
            double xi = std::cos(M_PI * (i + 0.75) / (N + 0.5));
            double p0 = 0.0, p1 = 0.0;
            for (int it = 0; it < 100; ++it) {
                p0 = 1.0;
                p1 = xi;
                for (int n = 2; n <= N; ++n) {
                    const double p2 = ((2.0 * n - 1.0) * xi * p1 - (n - 1.0) * p0) / n;
                    p0 = p1;
                    p1 = p2;
                }
                const double dp = N * (xi * p1 - p0) / (xi * xi - 1.0);
                const double dx = p1 / dp;
                xi -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            // recompute derivative at the converged node
            p0 = 1.0;
            p1 = xi;
            for (int n = 2; n <= N; ++n) {
                const double p2 = ((2.0 * n - 1.0) * xi * p1 - (n - 1.0) * p0) / n;
                p0 = p1;
                p1 = p2;
            }
            const double dp = N * (xi * p1 - p0) / (xi * xi - 1.0);
            x[i] = xi;
            w[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
        }
    }
};

inline const GaussRule<7>& g7() {
    static const GaussRule<7> rule;
    return rule;
}
inline const GaussRule<15>& g15() {
    static const GaussRule<15> rule;
    return rule;
}

} // namespace quadrule

template <std::size_t K>
using QuadVec = std::array<double, K>;

template <std::size_t K>
struct QuadResult {
    QuadVec<K> value{};
    QuadVec<K> error{};
    long evaluations = 0;
    bool converged = false;
};

namespace detail {

template <std::size_t K, class F>
void panel_pair(F&& f, double a, double b, QuadVec<K>& coarse, QuadVec<K>& fine) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    coarse.fill(0.0);
    fine.fill(0.0);
    const auto& r7 = quadrule::g7();
    for (int i = 0; i < 7; ++i) {
        const QuadVec<K> v = f(mid + half * r7.x[i]);
        for (std::size_t k = 0; k < K; ++k) coarse[k] += r7.w[i] * v[k];
    }
    const auto& r15 = quadrule::g15();
    for (int i = 0; i < 15; ++i) {
        const QuadVec<K> v = f(mid + half * r15.x[i]);
        for (std::size_t k = 0; k < K; ++k) fine[k] += r15.w[i] * v[k];
    }
    for (std::size_t k = 0; k < K; ++k) {
        coarse[k] *= half;
        fine[k] *= half;
    }
}

template <std::size_t K>
struct Panel {
    double a, b;
    QuadVec<K> value;
    QuadVec<K> error;
    double badness; // max over components of the scaled error
};

} // namespace detail

// Integrate a vector-valued integrand over [a, b] subdivided at `breaks`
// (interior seed points, unsorted ok).  Tolerances apply per component against
// max(abs_tol, rel_tol * |I_k|).
template <std::size_t K, class F>
QuadResult<K> integrate_adaptive(F&& f, double a, double b, double rel_tol, double abs_tol,
                                 const std::vector<double>& breaks = {},
                                 int max_panels = 200000) {
    std::vector<double> pts;
    pts.push_back(a);
    for (double x : breaks)
        if (x > a && x < b) pts.push_back(x);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());

    auto cmp = [](const detail::Panel<K>& l, const detail::Panel<K>& r) {
        return l.badness < r.badness;
    };
    std::priority_queue<detail::Panel<K>, std::vector<detail::Panel<K>>, decltype(cmp)> heap(cmp);

    QuadResult<K> out;
    QuadVec<K> total{}, toterr{}, totabs{};
    total.fill(0.0);
    toterr.fill(0.0);
    totabs.fill(0.0); // integral of |f|, sets the roundoff floor

    auto push_panel = [&](double lo, double hi) {
        detail::Panel<K> p;
        p.a = lo;
        p.b = hi;
        QuadVec<K> coarse;
        detail::panel_pair<K>(f, lo, hi, coarse, p.value);
        out.evaluations += 22;
        p.badness = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            p.error[k] = std::abs(p.value[k] - coarse[k]);
            p.badness = std::max(p.badness, p.error[k]);
        }
        for (std::size_t k = 0; k < K; ++k) {
            total[k] += p.value[k];
            toterr[k] += p.error[k];
            totabs[k] += std::abs(p.value[k]);
        }
        const double badness = p.badness;
        heap.push(std::move(p));
        return badness;
    };

    // The last entry is the arithmetic noise floor: integrand evaluations are
    // accurate to ~2e-12 of their local magnitude (set by the guarded
    // exponential-window differences), so errors below 1e-11 of the |f| mass
    // are not resolvable and count as converged.
    auto tolerance = [&](std::size_t k) {
        return std::max({abs_tol, rel_tol * std::abs(total[k]), 1e-11 * totabs[k]});
    };

    for (std::size_t i = 0; i + 1 < pts.size(); ++i) push_panel(pts[i], pts[i + 1]);

    int n_panels = static_cast<int>(pts.size()) - 1;
    while (n_panels < max_panels) {
        bool ok = true;
        for (std::size_t k = 0; k < K; ++k)
            if (toterr[k] > tolerance(k)) ok = false;
        if (ok) break;
        detail::Panel<K> worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // interval at floating-point resolution; park it with zero badness
            worst.badness = 0.0;
            heap.push(std::move(worst));
            if (heap.top().badness == 0.0) break; // nothing left to split
            continue;
        }
        for (std::size_t k = 0; k < K; ++k) {
            total[k] -= worst.value[k];
            toterr[k] -= worst.error[k];
            totabs[k] -= std::abs(worst.value[k]);
        }
        push_panel(worst.a, mid);
        push_panel(mid, worst.b);
        ++n_panels;
    }

    out.value = total;
    out.error = toterr;
    out.converged = true;
    for (std::size_t k = 0; k < K; ++k)
        if (toterr[k] > 10.0 * tolerance(k)) out.converged = false;
    return out;
}

// Scalar convenience wrapper.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-10, double abs_tol = 0.0,
                 const std::vector<double>& breaks = {}, int max_panels = 200000) {
    auto wrap = [&](double x) { return QuadVec<1>{f(x)}; };
    auto r = integrate_adaptive<1>(wrap, a, b, rel_tol, abs_tol, breaks, max_panels);
    if (!r.converged)
        throw QuadratureFailure("integrate: failed to reach tolerance on [" +
                                std::to_string(a) + ", " + std::to_string(b) + "]");
    return r.value[0];
}

// Shared quadrature configuration threaded through the moment and spectral
// evaluations.
struct QuadratureSpec {
    double rel_tol = 1e-9;         // relative tolerance per integral
    double abs_tol = 0.0;          // absolute floor
    double tail_rel = 1e-10;       // stop extending when tail < tail_rel * |I|
    double omega_max_factor = 50.0; // w_max = factor * max(frequency scales)
    int max_panels = 400000;
    bool throw_on_failure = true;
};

} // namespace qbatt

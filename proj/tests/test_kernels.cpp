#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "qbatt/kernels.hpp"

using namespace qbatt;

static const SystemParams sud{1.0, 1.0, 300.0, 2.0, 0.1};

TEST_CASE("spectral density values and parity") {
    CHECK(spectral_density(0.0, sud) == 0.0);
    CHECK(spectral_density(sud.omega_d, sud) == doctest::Approx(300.0).epsilon(1e-14));
    for (double w : {0.3, 1.7, 24.0}) {
        CHECK(spectral_density(-w, sud) == doctest::Approx(-spectral_density(w, sud)));
    }
    // 1/w falloff past the cutoff
    const double w = 1e6;
    CHECK(spectral_density(w, sud) ==
          doctest::Approx(sud.mass * sud.gamma0 * sud.omega_d * sud.omega_d / w)
              .epsilon(1e-5));
}

TEST_CASE("damping kernel and its Laplace transform") {
    CHECK(damping_kernel(0.0, sud) == doctest::Approx(sud.big_omega_sq()));
    CHECK(damping_kernel_laplace({0.0, 0.0}, sud).real() == doctest::Approx(sud.gamma0));
    // Re gamma~(-i w) = J(w)/(m w)
    for (double w : {0.5, 2.0, 77.0}) {
        const auto g = damping_kernel_laplace({0.0, -w}, sud);
        CHECK(g.real() ==
              doctest::Approx(spectral_density(w, sud) / (sud.mass * w)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(damping_kernel_laplace({-sud.omega_d, 0.0}, sud), std::domain_error);
}

TEST_CASE("symmetrized noise kernel") {
    // removable limit at w = 0
    CHECK(noise_kernel_symmetric(0.0, sud) ==
          doctest::Approx(2.0 * sud.mass * sud.gamma0 * sud.temperature));
    CHECK(noise_kernel_symmetric(1e-9, sud) ==
          doctest::Approx(2.0 * sud.mass * sud.gamma0 * sud.temperature).epsilon(1e-12));
    // T = 0 reduces to |J|
    SystemParams zeroT = sud;
    zeroT.temperature = 0.0;
    CHECK(noise_kernel_symmetric(zeroT.omega_d, zeroT) ==
          doctest::Approx(spectral_density(zeroT.omega_d, zeroT)));
    // even in w
    for (double w : {1e-7, 0.3, 5.0, 100.0}) {
        CHECK(noise_kernel_symmetric(-w, sud) ==
              doctest::Approx(noise_kernel_symmetric(w, sud)).epsilon(1e-13));
        CHECK(noise_kernel_symmetric(-w, zeroT) ==
              doctest::Approx(noise_kernel_symmetric(w, zeroT)).epsilon(1e-13));
    }
    // continuity across the series-expansion switch
    SystemParams warm = sud;
    warm.temperature = 3.0;
    const double eps = 1e-6 / warm.beta();
    CHECK(noise_kernel_symmetric(eps * 0.999, warm) ==
          doctest::Approx(noise_kernel_symmetric(eps * 1.001, warm)).epsilon(1e-10));
}

TEST_CASE("discrete bath construction") {
    // single mode at the cutoff: counterterm = gamma0 omega_d / pi
    auto b1 = build_bath(sud, sud.omega_d, 1);
    CHECK(b1.counterterm ==
          doctest::Approx(sud.gamma0 * sud.omega_d / M_PI).epsilon(1e-14));

    // decoupled bath
    SystemParams free = sud;
    free.gamma0 = 0.0;
    auto b0 = build_bath(free, 0.1, 32);
    for (double c : b0.couplings) CHECK(c == 0.0);
    CHECK(b0.counterterm == 0.0);

    // counterterm vs the arctan closed form, and convergence to Omega^2
    SystemParams p = sud;
    for (double delta : {0.1, 0.05, 0.025}) {
        const int n = static_cast<int>(std::round(100.0 / delta));
        auto b = build_bath(p, delta, n);
        const double span = n * delta;
        const double closed =
            2.0 * p.gamma0 * p.omega_d / M_PI * std::atan(span / p.omega_d);
        CHECK(std::abs(b.counterterm - closed) <= delta * p.gamma0);
        CHECK(b.counterterm < p.big_omega_sq());
    }
    auto bwide = build_bath(p, 0.01, 400000);
    CHECK(bwide.counterterm == doctest::Approx(p.big_omega_sq()).epsilon(2e-3));

    // the comb reconstructs J: (pi/2) c_k^2/(m_k w_k) = Delta * J(w_k)
    auto b = build_bath(p, 0.05, 2000);
    for (int k : {0, 10, 499, 1999}) {
        const double lhs = 0.5 * M_PI * b.couplings[k] * b.couplings[k] /
                           (b.mode_masses[k] * b.mode_freqs[k]);
        CHECK(lhs == doctest::Approx(b.delta * spectral_density(b.mode_freqs[k], p))
                         .epsilon(1e-12));
    }

    CHECK_THROWS_AS(build_bath(p, -0.1, 10), std::invalid_argument);
    CHECK_THROWS_AS(build_bath(p, 0.1, 0), std::invalid_argument);
}

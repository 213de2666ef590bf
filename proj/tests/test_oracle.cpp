#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "qbatt/oracle.hpp"

using namespace qbatt;

static const SystemParams sud{1.0, 1.0, 300.0, 2.0, 0.1};
static const SystemParams mid{1.0, 1.0, 2.0, 5.0, 0.5};

TEST_CASE("arrowhead eigensolver against dense Jacobi") {
    SystemParams p = mid;
    auto bath = build_bath(p, 0.35, 24);
    const int n = bath.n_modes + 1;
    // dense stiffness
    std::vector<double> K(static_cast<std::size_t>(n) * n, 0.0);
    K[0] = p.omega0 * p.omega0 + bath.counterterm;
    for (int k = 0; k < bath.n_modes; ++k) {
        K[(k + 1) * n + (k + 1)] = bath.mode_freqs[k] * bath.mode_freqs[k];
        K[0 * n + (k + 1)] = K[(k + 1) * n + 0] = -bath.couplings[k] / p.mass;
    }
    std::vector<double> d(bath.n_modes), w(bath.n_modes);
    for (int k = 0; k < bath.n_modes; ++k) {
        d[k] = bath.mode_freqs[k] * bath.mode_freqs[k];
        w[k] = -bath.couplings[k] / p.mass;
    }
    ArrowheadEigen eig(K[0], d, w);
    std::vector<double> Kc = K, eval, V;
    testoracle::jacobi_eigen(Kc, n, eval, V);
    for (int j = 0; j < n; ++j)
        CHECK(eig.eigenvalues()[j] == doctest::Approx(eval[j]).epsilon(1e-12));

    // interlacing
    for (int k = 0; k < bath.n_modes; ++k) {
        CHECK(eig.eigenvalues()[k] < d[k]);
        CHECK(eig.eigenvalues()[k + 1] > d[k]);
    }

    // orthogonality and reconstruction
    double max_ortho = 0.0, max_rec = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            double dot = 0.0;
            for (int i = 0; i < n; ++i)
                dot += eig.vector_element(i, a) * eig.vector_element(i, b);
            max_ortho = std::max(max_ortho, std::abs(dot - (a == b ? 1.0 : 0.0)));
        }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double kij = 0.0;
            for (int a = 0; a < n; ++a)
                kij += eig.vector_element(i, a) * eig.eigenvalues()[a] *
                       eig.vector_element(j, a);
            max_rec = std::max(max_rec, std::abs(kij - K[i * n + j]));
        }
    CHECK(max_ortho < 1e-13);
    CHECK(max_rec < 1e-10 * (p.omega0 * p.omega0 + bath.counterterm +
                             d.back()));
}

TEST_CASE("N = 1 oracle matches the closed two-oscillator solution") {
    SystemParams p{1.0, 1.0, 4.0, 3.0, 0.3};
    auto bath = build_bath(p, 1.3, 1);
    DynamicsGenerator gen(bath, p);
    const double k01 = -bath.couplings[0];
    const double k00 = p.omega0 * p.omega0 + bath.counterterm;
    const double k11 = bath.mode_freqs[0] * bath.mode_freqs[0];
    for (double t : {0.0, 0.4, 1.3, 6.0, 17.0}) {
        auto obs = gen.observables(t);
        auto ref = testoracle::two_oscillator_moments(k00, k11, k01, p.omega0,
                                                      bath.mode_freqs[0],
                                                      p.temperature, t);
        CHECK(obs.ms.x2() == doctest::Approx(ref.xx).epsilon(1e-9));
        CHECK(obs.ms.v2() == doctest::Approx(ref.pp).epsilon(1e-9));
        CHECK(obs.ms.xv() == doctest::Approx(ref.xp).epsilon(1e-9));
        const double hc_ref = k01 * ref.xx1 + 0.5 * bath.counterterm * ref.xx;
        CHECK(obs.h_coupling == doctest::Approx(hc_ref).epsilon(1e-9));
        // the two routes to <H_C> agree identically
        CHECK(obs.h_coupling_eq20 == doctest::Approx(obs.h_coupling).epsilon(1e-9));
    }
}

TEST_CASE("resonant weak coupling produces full energy beats") {
    // mode degenerate with the battery, tiny coupling: complete energy swap at
    // t = pi / (eps+ - eps-)
    SystemParams p{1.0, 1.0, 0.0, 1.0, 0.0};
    BathDiscretization bath;
    bath.delta = 1.0;
    bath.n_modes = 1;
    bath.mode_freqs = {1.0};
    bath.mode_masses = {1.0};
    const double c = 1e-2;
    bath.couplings = {c};
    bath.counterterm = c * c / 1.0;
    DynamicsGenerator gen(bath, p);
    const auto& eps = gen.mode_frequencies();
    const double split = std::abs(eps[1] - eps[0]);
    CHECK(split == doctest::Approx(c).epsilon(1e-3)); // 2x(c/2 w0) at resonance
    // battery starts in vacuum, mode starts in vacuum too (T = 0): nothing
    // happens energetically at O(c), so drive the asymmetry thermally instead
    SystemParams pt = p;
    pt.temperature = 2.0;
    DynamicsGenerator gent(bath, pt);
    const double e0 = gent.observables(0.0).ms.v2();
    const double ehalf = gent.observables(M_PI / split).ms.v2();
    const double efull = gent.observables(2.0 * M_PI / split).ms.v2();
    CHECK(ehalf > 3.0 * e0);                          // absorbed the hot mode's energy
    CHECK(efull == doctest::Approx(e0).epsilon(0.01)); // and gave it back
}

TEST_CASE("gamma0 = 0 decouples the battery") {
    SystemParams p{1.0, 1.0, 0.0, 2.0, 0.9};
    auto bath = build_bath(p, 0.4, 16);
    DynamicsGenerator gen(bath, p);
    for (double t : {0.0, 0.7, 3.0}) {
        auto obs = gen.observables(t);
        CHECK(obs.ms.x2() == doctest::Approx(0.5 / p.omega0).epsilon(1e-12));
        CHECK(obs.ms.v2() == doctest::Approx(0.5 * p.omega0).epsilon(1e-12));
        CHECK(std::abs(obs.h_coupling) < 1e-14);
    }
}

TEST_CASE("t = 0 observables equal the continuum initial state exactly") {
    auto bath = build_bath(sud, 0.05, 400);
    DynamicsGenerator gen(bath, sud);
    auto obs = gen.observables(0.0);
    CHECK(obs.ms.x2() == doctest::Approx(0.5 / sud.omega0).epsilon(1e-11));
    CHECK(obs.ms.v2() == doctest::Approx(0.5 * sud.omega0).epsilon(1e-11));
    CHECK(std::abs(obs.ms.xv()) < 1e-12);
    CHECK(obs.led.det_sigma == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(obs.led.w_on == doctest::Approx(0.25 * bath.counterterm / sud.omega0));
    CHECK(obs.h_coupling == doctest::Approx(obs.led.w_on).epsilon(1e-10));
    CHECK(std::abs(obs.led.w_total) < 1e-9 * obs.led.w_on);
}

TEST_CASE("assembled energies conserve the total") {
    SystemParams p = mid;
    auto bath = build_bath(p, 0.25, 96);
    DynamicsGenerator gen(bath, p);
    const double etot0 = gen.total_energy();
    for (double t : {0.3, 1.1, 4.0}) {
        auto obs = gen.observables(t);
        auto modes = gen.mode_energies(t, 1);
        double hr = 0.0;
        for (std::size_t i = 0; i < modes.de_r.size(); ++i) hr += modes.de_r[i];
        // H_B + H_C + H_R constant: dE_B + dE_C + dE_R = 0 with
        // dE_C = <H_C(t)> - W_on
        const double resid = obs.led.de_battery + (obs.h_coupling - obs.led.w_on) + hr;
        CHECK(std::abs(resid) < 1e-9 * etot0);
        // balance identity route
        CHECK(obs.led.de_reservoir == doctest::Approx(hr).epsilon(1e-8));
        // mode-resolved coupling energies sum to the total
        double hc_sum = 0.0;
        for (std::size_t i = 0; i < modes.de_c.size(); ++i) hc_sum += modes.de_c[i];
        CHECK(hc_sum == doctest::Approx(obs.h_coupling - obs.led.w_on).epsilon(1e-8));
    }
}

TEST_CASE("materialized covariance agrees with the fused observable path") {
    SystemParams p = mid;
    auto bath = build_bath(p, 0.5, 20);
    DynamicsGenerator gen(bath, p);
    for (double t : {0.0, 0.9, 2.7}) {
        auto fused = gen.observables(t);
        auto st = gen.evolve(t); // also runs the symplecticity check
        auto direct = observables_from_state(st, t, bath, p);
        CHECK(fused.ms.x2() == doctest::Approx(direct.ms.x2()).epsilon(1e-11));
        CHECK(fused.ms.v2() == doctest::Approx(direct.ms.v2()).epsilon(1e-11));
        CHECK(fused.ms.xv() == doctest::Approx(direct.ms.xv()).epsilon(1e-10));
        CHECK(fused.h_coupling == doctest::Approx(direct.h_coupling).epsilon(1e-10));
        CHECK(fused.h_coupling_eq20 ==
              doctest::Approx(direct.h_coupling_eq20).epsilon(1e-10));
    }
}

TEST_CASE("normal-mode propagator equals the matrix exponential") {
    SystemParams p = mid;
    auto bath = build_bath(p, 0.7, 10);
    DynamicsGenerator gen(bath, p);
    const int n = bath.n_modes + 1;
    // generator in (q..., p...) block ordering: d/dt (q, p) = (p, -K q)
    std::vector<double> K(static_cast<std::size_t>(n) * n, 0.0);
    K[0] = p.omega0 * p.omega0 + bath.counterterm;
    for (int k = 0; k < bath.n_modes; ++k) {
        K[(k + 1) * n + (k + 1)] = bath.mode_freqs[k] * bath.mode_freqs[k];
        K[0 * n + (k + 1)] = K[(k + 1) * n + 0] = -bath.couplings[k] / p.mass;
    }
    const int dim = 2 * n;
    std::vector<double> A(static_cast<std::size_t>(dim) * dim, 0.0);
    for (int i = 0; i < n; ++i) {
        A[i * dim + (n + i)] = 1.0;
        for (int j = 0; j < n; ++j) A[(n + i) * dim + j] = -K[i * n + j];
    }
    const double t = 1.37;
    auto S = testoracle::expm(A, dim, t);
    auto st = gen.evolve(t);
    // compare <x^2>, <x p>, <p^2> propagated through S against the oracle
    // state: Cov(t) = S Cov0 S^T with Cov0 diagonal
    std::vector<double> diag0(dim);
    auto st0 = gen.evolve(0.0);
    for (int i = 0; i < n; ++i) {
        diag0[i] = st0.cov[(2 * i) * dim + (2 * i)];
        diag0[n + i] = st0.cov[(2 * i + 1) * dim + (2 * i + 1)];
    }
    auto cov_expm = [&](int a, int b) {
        double acc = 0.0;
        for (int l = 0; l < dim; ++l) acc += S[a * dim + l] * diag0[l] * S[b * dim + l];
        return acc;
    };
    CHECK(cov_expm(0, 0) == doctest::Approx(st.at(0, 0)).epsilon(1e-9));
    CHECK(cov_expm(n, n) == doctest::Approx(st.at(1, 1)).epsilon(1e-9));
    CHECK(cov_expm(0, n) == doctest::Approx(st.at(0, 1)).epsilon(1e-8));
    CHECK(cov_expm(0, 3) == doctest::Approx(st.at(0, 2 * 3)).epsilon(1e-8));
}

TEST_CASE("oracle respects frequency and mass scaling") {
    const double s = 2.6, mu = 1.9;
    SystemParams base{1.0, 1.0, 2.0, 5.0, 0.5};
    SystemParams scaled{s, mu, s * 2.0, s * 5.0, s * 0.5};
    auto b1 = build_bath(base, 0.6, 24);
    auto b2 = build_bath(scaled, s * 0.6, 24);
    DynamicsGenerator g1(b1, base), g2(b2, scaled);
    for (double t : {0.4, 1.1}) {
        auto o1 = g1.observables(t);
        auto o2 = g2.observables(t / s);
        CHECK(o2.led.de_battery == doctest::Approx(s * o1.led.de_battery).epsilon(1e-10));
        CHECK(o2.h_coupling == doctest::Approx(s * o1.h_coupling).epsilon(1e-10));
        CHECK(o2.led.det_sigma == doctest::Approx(o1.led.det_sigma).epsilon(1e-10));
    }
}

TEST_CASE("moderate-N oracle tracks the continuum pipeline") {
    // N Delta = 60, Delta = 0.06: recurrence time ~ 2 pi/Delta = 105 >> t_max.
    // The counterterm cancels mode-by-mode in the Langevin reduction, so the
    // reference dynamics keeps the raw gamma0; only the Hamiltonian bookkeeping
    // (W_on and the Omega^2/2 term of <H_C>) carries the finite-N counterterm.
    auto bath = build_bath(sud, 0.06, 1000);
    DynamicsGenerator gen(bath, sud);
    auto rf = solve_characteristic(sud);
    const double om = sud.big_omega();
    const double won = 0.25 * bath.counterterm / sud.omega0;
    for (int i = 1; i <= 8; ++i) {
        const double t = i * (4.0 * M_PI / om) / 8.0;
        auto o = gen.observables(t);
        auto ms = moments(rf, t);
        auto c = assemble_ledger(ms, sud, coupling_energy(ms, sud, bath.counterterm), won);
        CHECK(std::abs(o.led.de_battery - c.de_battery) / won < 0.02);
        CHECK(std::abs(o.led.w_total - c.w_total) / won < 0.02);
        if (o.led.eta_w && c.eta_w) CHECK(std::abs(*o.led.eta_w - *c.eta_w) < 0.02);
    }
}

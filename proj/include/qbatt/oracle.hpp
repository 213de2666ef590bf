#pragma once

#include <cmath>
#include <vector>

#include "qbatt/arrowhead.hpp"
#include "qbatt/energetics.hpp"
#include "qbatt/errors.hpp"
#include "qbatt/kernels.hpp"
#include "qbatt/params.hpp"
#include "qbatt/variances.hpp"

namespace qbatt {

// Full covariance of the battery + N bath modes over the phase-space ordering
// (x, p, x_1, p_1, ...), in mass-weighted coordinates (all masses scaled out).
struct GaussianState {
    int n_osc = 0;             // N + 1
    std::vector<double> cov;   // (2 n_osc)^2, row-major
    double at(int i, int j) const { return cov[i * 2 * n_osc + j]; }
};

// Battery-side observables extracted from the exact discrete dynamics.
struct OracleObservables {
    double t = 0.0;
    MomentSet ms;          // battery moments (only totals are filled, *_h slots)
    double h_coupling = 0.0;
    double h_coupling_eq20 = 0.0; // same quantity through the battery-only form
    EnergyLedger led;
};

// Exact Gaussian dynamics of the discretized model: the (N+1)-oscillator
// stiffness matrix is an arrowhead (battery row/column carries the couplings,
// modes are mutually uncoupled); one eigen-decomposition gives the exact
// propagator at any time, with no step error.
class DynamicsGenerator {
  public:
    DynamicsGenerator(const BathDiscretization& bath, const SystemParams& params)
        : p_(params), bath_(bath), n_(bath.n_modes + 1) {
        p_.validate();
        std::vector<double> d(bath.n_modes), w(bath.n_modes);
        for (int k = 0; k < bath.n_modes; ++k) {
            d[k] = bath.mode_freqs[k] * bath.mode_freqs[k];
            w[k] = -bath.couplings[k] / p_.mass;
        }
        const double alpha = p_.omega0 * p_.omega0 + bath.counterterm;
        ArrowheadEigen eig(alpha, d, w);
        eps_.resize(n_);
        for (int a = 0; a < n_; ++a) {
            const double mu = eig.eigenvalues()[a];
            if (!(mu > 0.0))
                throw PropagatorFailure("oracle: non-positive normal-mode frequency");
            eps_[a] = std::sqrt(mu);
        }
        O_.resize(static_cast<std::size_t>(n_) * n_);
        for (int i = 0; i < n_; ++i)
            for (int a = 0; a < n_; ++a) O_[idx(i, a)] = eig.vector_element(i, a);

        // initial diagonal covariances (mass-weighted): battery vacuum +
        // thermal modes at coth(beta w_k/2)/2 occupation
        x0_.resize(n_);
        p0_.resize(n_);
        x0_[0] = 0.5 / p_.omega0;
        p0_[0] = 0.5 * p_.omega0;
        for (int k = 0; k < bath.n_modes; ++k) {
            const double wk = bath.mode_freqs[k];
            double occ = 1.0;
            if (p_.temperature > 0.0) occ = 1.0 / std::tanh(0.5 * wk / p_.temperature);
            x0_[k + 1] = 0.5 * occ / wk;
            p0_[k + 1] = 0.5 * occ * wk;
        }
    }

    const SystemParams& params() const { return p_; }
    const BathDiscretization& bath() const { return bath_; }
    const std::vector<double>& mode_frequencies() const { return eps_; }
    double counterterm() const { return bath_.counterterm; }
    double w_on() const { return 0.25 * bath_.counterterm / p_.omega0; }

    // battery observables at time t (cost: a handful of O(N^2) passes)
    OracleObservables observables(double t) const {
        std::vector<double> g(n_), cg(n_), sg(n_), ag(n_);
        for (int a = 0; a < n_; ++a) {
            g[a] = O_[idx(0, a)];
            const double c = std::cos(eps_[a] * t), s = std::sin(eps_[a] * t);
            cg[a] = c * g[a];
            sg[a] = s / eps_[a] * g[a];
            ag[a] = -eps_[a] * s * g[a];
        }
        std::vector<double> c0 = apply_O(cg);   // C e_0
        std::vector<double> s0 = apply_O(sg);   // S e_0
        std::vector<double> a0 = apply_O(ag);   // -S~ e_0

        // <x~^2> = c0^T X0 c0 + s0^T P0 s0, etc.
        double xx = 0.0, pp = 0.0, xp = 0.0;
        for (int i = 0; i < n_; ++i) {
            xx += c0[i] * c0[i] * x0_[i] + s0[i] * s0[i] * p0_[i];
            pp += a0[i] * a0[i] * x0_[i] + c0[i] * c0[i] * p0_[i];
            xp += c0[i] * a0[i] * x0_[i] + s0[i] * c0[i] * p0_[i];
        }

        // row 0 of X(t): C X0 c0 + S P0 s0
        std::vector<double> v1(n_), v2(n_);
        for (int i = 0; i < n_; ++i) {
            v1[i] = x0_[i] * c0[i];
            v2[i] = p0_[i] * s0[i];
        }
        std::vector<double> row = apply_C(v1, t, false);
        std::vector<double> row2 = apply_C(v2, t, true);
        for (int i = 0; i < n_; ++i) row[i] += row2[i];

        OracleObservables out;
        out.t = t;
        const double m = p_.mass;
        out.ms.t = t;
        out.ms.x2_h = xx / m;      // totals stored in the homogeneous slots
        out.ms.v2_h = pp / m;      // <xdot^2> = <p~^2>/m
        out.ms.xv_h = xp / m;

        // <H_C> = sum_k w_k <x~ x~_k> + (Omega_N^2/2) <x~^2>  (mass-weighted)
        double hc = 0.5 * bath_.counterterm * xx;
        double wk_row = 0.0;
        for (int k = 0; k < bath_.n_modes; ++k)
            wk_row += (-bath_.couplings[k] / m) * row[k + 1];
        hc += wk_row;
        out.h_coupling = hc;

        // d2<x^2>/dt2 = 2<xdot^2> + 2<x xddot>, xddot from the equations of
        // motion: <x~ x~ddot> = -(w0^2 + Omega_N^2) <x~^2> - sum w_k <x~ x~_k>
        const double alpha = p_.omega0 * p_.omega0 + bath_.counterterm;
        out.ms.x2_ddot = (2.0 * pp - 2.0 * alpha * xx - 2.0 * wk_row) / m;

        // battery-only form of <H_C> must agree with the direct one
        out.h_coupling_eq20 =
            m * (out.ms.v2() - 0.5 * out.ms.x2_ddot -
                 (p_.omega0 * p_.omega0 + 0.5 * bath_.counterterm) * out.ms.x2());

        const double won = 0.25 * bath_.counterterm / p_.omega0;
        out.led = assemble_ledger(out.ms, p_, hc, won);
        return out;
    }

    struct ModeEnergies {
        std::vector<int> modes;
        std::vector<double> de_c; // coupling energy change per mode
        std::vector<double> de_r; // reservoir energy change per mode
    };

    ModeEnergies mode_energies(double t, int stride = 1) const {
        ModeEnergies out;
        // coupling part from row 0 (cheap for all modes)
        std::vector<double> g(n_), cg(n_), sg(n_);
        for (int a = 0; a < n_; ++a) {
            g[a] = O_[idx(0, a)];
            const double c = std::cos(eps_[a] * t), s = std::sin(eps_[a] * t);
            cg[a] = c * g[a];
            sg[a] = s / eps_[a] * g[a];
        }
        std::vector<double> c0 = apply_O(cg), s0 = apply_O(sg);
        std::vector<double> v1(n_), v2(n_);
        double xx = 0.0;
        for (int i = 0; i < n_; ++i) {
            xx += c0[i] * c0[i] * x0_[i] + s0[i] * s0[i] * p0_[i];
            v1[i] = x0_[i] * c0[i];
            v2[i] = p0_[i] * s0[i];
        }
        std::vector<double> row = apply_C(v1, t, false);
        std::vector<double> row2 = apply_C(v2, t, true);
        for (int i = 0; i < n_; ++i) row[i] += row2[i];

        const double m = p_.mass;
        for (int k = 0; k < bath_.n_modes; k += stride) {
            const double wk = -bath_.couplings[k] / m;
            const double ct = bath_.couplings[k] * bath_.couplings[k] /
                              (2.0 * bath_.mode_masses[k] * bath_.mode_freqs[k] *
                               bath_.mode_freqs[k]);
            // <H_C^k> = w_k <x~ x~_k> + (c_k^2 / 2 m_k w_k^2) <x^2>, minus t=0
            const double hck = wk * row[k + 1] + ct * xx / m;
            const double hck0 = ct * 0.5 / (m * p_.omega0);
            out.modes.push_back(k);
            out.de_c.push_back(hck - hck0);
            // reservoir mode energy needs X_kk and P_kk
            std::vector<double> gk(n_), cgk(n_), sgk(n_), agk(n_);
            for (int a = 0; a < n_; ++a) {
                gk[a] = O_[idx(k + 1, a)];
                const double c = std::cos(eps_[a] * t), s = std::sin(eps_[a] * t);
                cgk[a] = c * gk[a];
                sgk[a] = s / eps_[a] * gk[a];
                agk[a] = -eps_[a] * s * gk[a];
            }
            std::vector<double> ck = apply_O(cgk), sk = apply_O(sgk), ak = apply_O(agk);
            double xkk = 0.0, pkk = 0.0;
            for (int i = 0; i < n_; ++i) {
                xkk += ck[i] * ck[i] * x0_[i] + sk[i] * sk[i] * p0_[i];
                pkk += ak[i] * ak[i] * x0_[i] + ck[i] * ck[i] * p0_[i];
            }
            const double wk2 = bath_.mode_freqs[k] * bath_.mode_freqs[k];
            const double hrk = 0.5 * pkk + 0.5 * wk2 * xkk;
            const double hrk0 = 0.5 * (p0_[k + 1] + wk2 * x0_[k + 1]);
            out.de_r.push_back(hrk - hrk0);
        }
        return out;
    }

    // total energy from the normal-mode occupations (exactly conserved)
    double total_energy() const {
        double e = 0.0;
        for (int a = 0; a < n_; ++a) {
            double aa = 0.0, bb = 0.0;
            for (int i = 0; i < n_; ++i) {
                const double o = O_[idx(i, a)];
                aa += o * o * x0_[i];
                bb += o * o * p0_[i];
            }
            e += 0.5 * (eps_[a] * eps_[a] * aa + bb);
        }
        return e;
    }

    // materialized covariance (small N; ordering x, p, x_1, p_1, ...)
    GaussianState evolve(double t) const {
        GaussianState st;
        st.n_osc = n_;
        const int dim = 2 * n_;
        st.cov.assign(static_cast<std::size_t>(dim) * dim, 0.0);
        // propagator blocks: q(t) = C q0 + S p0, p(t) = A q0 + C p0
        std::vector<double> C(static_cast<std::size_t>(n_) * n_),
            S(static_cast<std::size_t>(n_) * n_), A(static_cast<std::size_t>(n_) * n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                double cij = 0.0, sij = 0.0, aij = 0.0;
                for (int a = 0; a < n_; ++a) {
                    const double oo = O_[idx(i, a)] * O_[idx(j, a)];
                    const double ph = eps_[a] * t;
                    cij += oo * std::cos(ph);
                    sij += oo * std::sin(ph) / eps_[a];
                    aij += -oo * eps_[a] * std::sin(ph);
                }
                C[idx(i, j)] = cij;
                S[idx(i, j)] = sij;
                A[idx(i, j)] = aij;
            }
        check_symplectic(C, S, A, t);
        // Cov(t): qq = C X0 C^T + S P0 S^T; pp = A X0 A^T + C P0 C^T;
        // qp = C X0 A^T + S P0 C^T
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                double qq = 0.0, ppv = 0.0, qp = 0.0;
                for (int l = 0; l < n_; ++l) {
                    qq += C[idx(i, l)] * x0_[l] * C[idx(j, l)] +
                          S[idx(i, l)] * p0_[l] * S[idx(j, l)];
                    ppv += A[idx(i, l)] * x0_[l] * A[idx(j, l)] +
                           C[idx(i, l)] * p0_[l] * C[idx(j, l)];
                    qp += C[idx(i, l)] * x0_[l] * A[idx(j, l)] +
                          S[idx(i, l)] * p0_[l] * C[idx(j, l)];
                }
                st.cov[(2 * i) * dim + (2 * j)] = qq;
                st.cov[(2 * i + 1) * dim + (2 * j + 1)] = ppv;
                st.cov[(2 * i) * dim + (2 * j + 1)] = qp;
                st.cov[(2 * j + 1) * dim + (2 * i)] = qp;
            }
        return st;
    }

    GaussianState initial_state() const { return evolve(0.0); }

  private:
    SystemParams p_;
    BathDiscretization bath_;
    int n_;
    std::vector<double> eps_;
    std::vector<double> O_;
    std::vector<double> x0_, p0_;

    std::size_t idx(int i, int a) const { return static_cast<std::size_t>(i) * n_ + a; }

    // y = O v
    std::vector<double> apply_O(const std::vector<double>& v) const {
        std::vector<double> y(n_, 0.0);
        for (int i = 0; i < n_; ++i) {
            const double* row = &O_[idx(i, 0)];
            double acc = 0.0;
            for (int a = 0; a < n_; ++a) acc += row[a] * v[a];
            y[i] = acc;
        }
        return y;
    }

    // y = O^T v
    std::vector<double> apply_Ot(const std::vector<double>& v) const {
        std::vector<double> y(n_, 0.0);
        for (int i = 0; i < n_; ++i) {
            const double* row = &O_[idx(i, 0)];
            const double vi = v[i];
            for (int a = 0; a < n_; ++a) y[a] += row[a] * vi;
        }
        return y;
    }

    // y = O f(eps) O^T v with f = cos(eps t) (use_sin = false) or sin(eps t)/eps
    std::vector<double> apply_C(const std::vector<double>& v, double t, bool use_sin) const {
        std::vector<double> m = apply_Ot(v);
        for (int a = 0; a < n_; ++a) {
            const double ph = eps_[a] * t;
            m[a] *= use_sin ? std::sin(ph) / eps_[a] : std::cos(ph);
        }
        return apply_O(m);
    }

    void check_symplectic(const std::vector<double>& C, const std::vector<double>& S,
                          const std::vector<double>& A, double t) const {
        // S(t)^T J S(t) = J reduces to C S^T = S C^T, C A^T = A C^T and
        // C C^T - S A^T = I on the blocks
        double frob = 0.0, ref = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                double cs = 0.0, id = 0.0;
                for (int l = 0; l < n_; ++l) {
                    cs += C[idx(i, l)] * S[idx(j, l)] - S[idx(i, l)] * C[idx(j, l)];
                    id += C[idx(i, l)] * C[idx(j, l)] - S[idx(i, l)] * A[idx(j, l)];
                }
                if (i == j) id -= 1.0;
                frob += cs * cs + id * id;
                ref += 1.0;
            }
        if (std::sqrt(frob / ref) > 1e-8)
            throw PropagatorFailure("oracle: propagator lost symplecticity at t = " +
                                    std::to_string(t));
    }
};

// Observables recomputed directly from a materialized covariance (test route;
// the coupling energy here uses the bilinear form of the Hamiltonian itself).
inline OracleObservables observables_from_state(const GaussianState& st, double t,
                                                const BathDiscretization& bath,
                                                const SystemParams& p) {
    OracleObservables out;
    out.t = t;
    const double m = p.mass;
    out.ms.t = t;
    out.ms.x2_h = st.at(0, 0) / m;
    out.ms.v2_h = st.at(1, 1) / m;
    out.ms.xv_h = st.at(0, 1) / m;
    double hc = 0.5 * bath.counterterm * st.at(0, 0);
    double wk_row = 0.0;
    for (int k = 0; k < bath.n_modes; ++k)
        wk_row += (-bath.couplings[k] / m) * st.at(0, 2 * (k + 1));
    hc += wk_row;
    out.h_coupling = hc;
    const double alpha = p.omega0 * p.omega0 + bath.counterterm;
    out.ms.x2_ddot = (2.0 * st.at(1, 1) - 2.0 * alpha * st.at(0, 0) - 2.0 * wk_row) / m;
    out.h_coupling_eq20 = m * (out.ms.v2() - 0.5 * out.ms.x2_ddot -
                               (p.omega0 * p.omega0 + 0.5 * bath.counterterm) * out.ms.x2());
    out.led = assemble_ledger(out.ms, p, hc, 0.25 * bath.counterterm / p.omega0);
    return out;
}

} // namespace qbatt

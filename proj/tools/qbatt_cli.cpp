// Command-line driver: charging traces, spectral decompositions, stationary
// state, the discrete-bath reference dynamics, regime queries, parameter
// sweeps and circuit mapping.  Output is deterministic CSV or JSON.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qbatt/asymptotics.hpp"
#include "qbatt/energetics.hpp"
#include "qbatt/oracle.hpp"
#include "qbatt/params.hpp"
#include "qbatt/spectral.hpp"

using namespace qbatt;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.11e", v);
    return buf;
}

int thread_count() {
    const char* env = std::getenv("QBATT_THREADS");
    if (!env) return 1;
    const int n = std::atoi(env);
    return n > 0 ? n : 1;
}

// columnar table with deterministic rendering; empty optional -> missing value
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::optional<double>>> rows;

    std::string to_csv() const {
        std::ostringstream os;
        for (std::size_t c = 0; c < columns.size(); ++c)
            os << columns[c] << (c + 1 < columns.size() ? "," : "\n");
        for (const auto& r : rows)
            for (std::size_t c = 0; c < r.size(); ++c) {
                if (r[c]) os << fmt(*r[c]);
                os << (c + 1 < r.size() ? "," : "\n");
            }
        return os.str();
    }

    std::string to_json() const {
        json out = json::array();
        for (const auto& r : rows) {
            json obj;
            for (std::size_t c = 0; c < r.size(); ++c) {
                if (r[c])
                    obj[columns[c]] = *r[c];
                else
                    obj[columns[c]] = nullptr;
            }
            out.push_back(obj);
        }
        return out.dump(2) + "\n";
    }
};

void emit(const Table& table, const std::string& path, const std::string& format) {
    const std::string body = format == "json" ? table.to_json() : table.to_csv();
    if (path.empty() || path == "-") {
        std::cout << body;
        return;
    }
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open output file " + path);
    f << body;
}

struct CommonOpts {
    SystemParams params;
    double tmax = 0.0;
    int steps = 2000;
    double qtol = 1e-9;
    double omega_max_factor = 50.0;
    std::string output;
    std::string format = "csv";
};

void add_physics(CLI::App* cmd, CommonOpts& o, bool needs_bathy = true) {
    cmd->add_option("--omega0", o.params.omega0, "battery frequency")->capture_default_str();
    cmd->add_option("--mass", o.params.mass, "battery mass")->capture_default_str();
    if (needs_bathy) {
        cmd->add_option("--gamma0", o.params.gamma0, "coupling strength")->required();
        cmd->add_option("--omegad", o.params.omega_d, "Drude cutoff")->required();
        cmd->add_option("--temp", o.params.temperature, "reservoir temperature")
            ->capture_default_str();
    }
}

void add_output(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("-o,--output", o.output, "output path ('-' = stdout)");
    cmd->add_option("--format", o.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd->add_option("--qtol", o.qtol, "quadrature relative tolerance")
        ->check(CLI::Range(1e-14, 1e-2))
        ->capture_default_str();
    cmd->add_option("--omega-max-factor", o.omega_max_factor,
                    "frequency window factor for the noise integrals")
        ->capture_default_str();
}

QuadratureSpec make_spec(const CommonOpts& o) {
    QuadratureSpec spec;
    spec.rel_tol = o.qtol;
    spec.omega_max_factor = o.omega_max_factor;
    return spec;
}

std::vector<double> time_grid(double tmax, int steps) {
    if (!(tmax > 0.0)) throw std::invalid_argument("tmax must be > 0");
    if (steps < 2) throw std::invalid_argument("steps must be >= 2");
    std::vector<double> ts(steps);
    for (int i = 0; i < steps; ++i) ts[i] = tmax * i / (steps - 1);
    return ts;
}

template <class F>
void parallel_rows(int n, F&& body) {
    const int nthreads = std::min(thread_count(), n);
    if (nthreads <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < nthreads; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                body(i);
            }
        });
    for (auto& th : pool) th.join();
}

const std::vector<std::string> kTraceColumns = {
    "t", "t_scaled", "dE_B", "dE_C", "dE_R", "W", "ergotropy", "eta_B", "eta_W", "det_sigma"};

std::vector<std::optional<double>> ledger_row(const EnergyLedger& led, double om) {
    std::vector<std::optional<double>> r;
    r.emplace_back(led.t);
    r.emplace_back(om * led.t / M_PI);
    r.emplace_back(led.de_battery);
    r.emplace_back(-led.w_total); // dE_C = -W
    r.emplace_back(led.de_reservoir);
    r.emplace_back(led.w_total);
    r.emplace_back(led.ergotropy);
    r.emplace_back(led.eta_b);
    if (led.eta_w)
        r.emplace_back(*led.eta_w);
    else
        r.emplace_back(std::nullopt);
    r.emplace_back(led.det_sigma);
    return r;
}

Table run_trace(const CommonOpts& o, bool analytic) {
    o.params.validate();
    auto rf = solve_characteristic(o.params);
    const double om = o.params.big_omega();
    const double tmax = o.tmax > 0.0 ? o.tmax : (om > 0.0 ? 4.0 * M_PI / om : 10.0);
    const auto ts = time_grid(tmax, o.steps);
    const auto spec = make_spec(o);

    Table table;
    table.columns = kTraceColumns;
    if (analytic)
        for (const char* c : {"dE_B_analytic", "W_analytic", "ergotropy_analytic",
                              "eta_W_analytic"})
            table.columns.push_back(c);
    table.rows.resize(ts.size());
    const auto regime = o.params.temperature > o.params.omega_d ? TemperatureRegime::High
                                                                : TemperatureRegime::Low;
    if (analytic && !sud_short_time(o.params, tmax, regime).in_domain)
        std::cerr << "warning: analytic columns outside their validity window "
                     "(needs Omega >> omega0, omega_d and omega_d t <~ 1)\n";
    parallel_rows(static_cast<int>(ts.size()), [&](int i) {
        auto row = ledger_row(ledger(rf, ts[i], spec), om);
        if (analytic) {
            const auto a = sud_short_time(o.params, ts[i], regime);
            row.emplace_back(a.h_b);
            row.emplace_back(a.w);
            row.emplace_back(a.ergotropy);
            row.emplace_back(a.eta_w);
        }
        table.rows[i] = std::move(row);
    });
    return table;
}

Table run_sweep(const CommonOpts& o, const std::string& par,
                const std::vector<double>& values, bool analytic) {
    Table table;
    bool first = true;
    for (double v : values) {
        CommonOpts cur = o;
        if (par == "gamma0")
            cur.params.gamma0 = v;
        else if (par == "omegad")
            cur.params.omega_d = v;
        else if (par == "temp")
            cur.params.temperature = v;
        else
            throw std::invalid_argument("sweep parameter must be gamma0, omegad or temp");
        Table one = run_trace(cur, analytic);
        if (first) {
            table.columns = {"sweep_param_is_" + par, "sweep_value"};
            for (const auto& c : one.columns) table.columns.push_back(c);
            first = false;
        }
        for (auto& r : one.rows) {
            std::vector<std::optional<double>> row;
            row.emplace_back(std::nullopt);
            row.emplace_back(v);
            for (auto& x : r) row.push_back(x);
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

Table run_steady(const CommonOpts& o) {
    o.params.validate();
    auto rf = solve_characteristic(o.params);
    auto ss = steady_state(rf);
    Table t;
    t.columns = {"x2_inf", "v2_inf", "h_b_inf", "ergotropy_inf", "h_c_inf", "w_inf",
                 "eta_w_inf"};
    t.rows.push_back({ss.x2_inf, ss.v2_inf, ss.h_b_inf, ss.ergotropy_inf, ss.h_c_inf,
                      ss.w_inf, ss.eta_w_inf});
    return t;
}

Table run_regime(const CommonOpts& o) {
    o.params.validate();
    const auto tag = classify_regime(o.params);
    std::cerr << "regime: " << to_string(tag.kind);
    if (tag.kind == DampingKind::Underdamped)
        std::cerr << " (" << to_string(tag.sub) << ")";
    std::cerr << "\n";
    Table t;
    t.columns = {"discriminant_scaled", "kind_ud1_od2_crit3", "sub_weak1_strong2_none0"};
    const double kind = tag.kind == DampingKind::Underdamped   ? 1.0
                        : tag.kind == DampingKind::Overdamped ? 2.0
                                                              : 3.0;
    const double sub = tag.sub == UnderdampedBand::WeaklyUnderdamped     ? 1.0
                       : tag.sub == UnderdampedBand::StronglyUnderdamped ? 2.0
                                                                         : 0.0;
    t.rows.push_back({tag.discriminant, kind, sub});
    if (tag.kind != DampingKind::CriticallyDamped) {
        auto rf = solve_characteristic(o.params);
        t.columns.insert(t.columns.end(),
                         {"lambda1_re", "lambda1_im", "lambda2_re", "lambda2_im",
                          "lambda3_re", "lambda3_im"});
        for (int j = 0; j < 3; ++j) {
            t.rows[0].push_back(rf.roots[j].real());
            t.rows[0].push_back(rf.roots[j].imag());
        }
    }
    return t;
}

Table run_circuit(double L, double C, double R, double CE) {
    CircuitParams c{L, C, R, CE};
    const auto p = circuit_to_params(c);
    Table t;
    t.columns = {"omega0_rad_s",     "f0_hz",           "gamma0_rad_s",
                 "omega_d_rad_s",    "gamma0_over_omega0", "omegad_over_omega0",
                 "bigomega_over_omega0"};
    t.rows.push_back({p.omega0, p.omega0 / (2.0 * M_PI), p.gamma0, p.omega_d,
                      p.gamma0 / p.omega0, p.omega_d / p.omega0,
                      p.big_omega() / p.omega0});
    return t;
}

Table run_spectral(const CommonOpts& o, double delta, int nmodes, int stride) {
    o.params.validate();
    auto rf = solve_characteristic(o.params);
    const double om = o.params.big_omega();
    if (delta <= 0.0) delta = om > 0.0 ? om / 1000.0 : 0.01;
    if (nmodes <= 0) nmodes = static_cast<int>(std::ceil(4.0 * om / delta));
    auto bath = build_bath(o.params, delta, nmodes);
    const double tmax = o.tmax > 0.0 ? o.tmax : 4.0 * M_PI / om;
    const auto ts = time_grid(tmax, o.steps);
    auto grid = spectral_grid(rf, bath, ts, make_spec(o), stride);

    Table t;
    t.columns = {"t", "omega_k", "dE_C_over_Delta", "dE_R_over_Delta"};
    const std::size_t nk = grid.mode_freqs.size();
    for (std::size_t i = 0; i < grid.times.size(); ++i)
        for (std::size_t k = 0; k < nk; ++k)
            t.rows.push_back({grid.times[i], grid.mode_freqs[k],
                              grid.de_c_over_delta[i * nk + k],
                              grid.de_r_over_delta[i * nk + k]});
    return t;
}

Table run_oracle(const CommonOpts& o, double delta, int nmodes,
                 const std::string& modes_out, int mode_stride,
                 const std::string& format) {
    o.params.validate();
    auto bath = build_bath(o.params, delta, nmodes);
    DynamicsGenerator gen(bath, o.params);
    const double om = o.params.big_omega();
    const double tmax = o.tmax > 0.0 ? o.tmax : (om > 0.0 ? 4.0 * M_PI / om : 10.0);
    const auto ts = time_grid(tmax, o.steps);
    Table t;
    t.columns = kTraceColumns;
    t.rows.resize(ts.size());
    parallel_rows(static_cast<int>(ts.size()), [&](int i) {
        t.rows[i] = ledger_row(gen.observables(ts[i]).led, om);
    });
    if (!modes_out.empty()) {
        Table m;
        m.columns = {"t", "omega_k", "dE_C_over_Delta", "dE_R_over_Delta"};
        for (double tv : ts) {
            auto me = gen.mode_energies(tv, mode_stride);
            for (std::size_t i = 0; i < me.modes.size(); ++i)
                m.rows.push_back({tv, bath.mode_freqs[me.modes[i]],
                                  me.de_c[i] / bath.delta, me.de_r[i] / bath.delta});
        }
        emit(m, modes_out, format);
    }
    return t;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"harmonic-oscillator quantum battery charged through a Drude-Ohmic reservoir"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from a key = value file");

    CommonOpts o;
    bool analytic = false;

    auto* trace = app.add_subcommand("trace", "energy ledger along a time grid");
    add_physics(trace, o);
    add_output(trace, o);
    trace->add_option("--tmax", o.tmax, "trace end time (default 4 pi/Omega)");
    trace->add_option("--steps", o.steps, "number of grid points")->capture_default_str();
    trace->add_flag("--analytic", analytic, "append the short-time closed-form columns");

    auto* sweep = app.add_subcommand("sweep", "repeat the trace over a parameter list");
    std::string sweep_par;
    std::vector<double> sweep_values;
    add_physics(sweep, o);
    add_output(sweep, o);
    sweep->add_option("--tmax", o.tmax, "trace end time");
    sweep->add_option("--steps", o.steps, "grid points")->capture_default_str();
    sweep->add_flag("--analytic", analytic, "append analytic columns");
    sweep->add_option("--param", sweep_par, "gamma0, omegad or temp")->required();
    sweep->add_option("--values", sweep_values, "comma-separated list")
        ->required()
        ->delimiter(',');

    auto* steady = app.add_subcommand("steady", "stationary state of the coupled battery");
    add_physics(steady, o);
    add_output(steady, o);

    auto* regime = app.add_subcommand("regime", "classify the damping regime");
    add_physics(regime, o);
    add_output(regime, o);

    auto* spectral = app.add_subcommand("spectral", "per-mode energy decomposition grid");
    double sp_delta = 0.0;
    int sp_modes = 0, sp_stride = 1, sp_steps = 48;
    add_physics(spectral, o);
    add_output(spectral, o);
    spectral->add_option("--tmax", o.tmax, "grid end time (default 4 pi/Omega)");
    spectral->add_option("--steps", sp_steps, "time grid points")->capture_default_str();
    spectral->add_option("--delta", sp_delta, "mode spacing (default Omega/1000)");
    spectral->add_option("--nmodes", sp_modes, "mode count (default spans 4 Omega)");
    spectral->add_option("--mode-stride", sp_stride, "store every n-th mode")
        ->capture_default_str();

    auto* oracle = app.add_subcommand("oracle", "exact discretized-bath dynamics");
    double or_delta = 0.025;
    int or_modes = 4000, or_stride = 50, or_steps = 200;
    std::string modes_out;
    add_physics(oracle, o);
    add_output(oracle, o);
    oracle->add_option("--tmax", o.tmax, "trace end time (default 4 pi/Omega)");
    oracle->add_option("--steps", or_steps, "grid points")->capture_default_str();
    oracle->add_option("--delta", or_delta, "bath mode spacing")->capture_default_str();
    oracle->add_option("--nmodes", or_modes, "bath mode count")->capture_default_str();
    oracle->add_option("--modes-out", modes_out, "also write per-mode energies to this path");
    oracle->add_option("--mode-stride", or_stride, "per-mode output stride")
        ->capture_default_str();

    auto* circuit = app.add_subcommand("circuit", "map lumped-circuit values to model parameters");
    double cL = 0.0, cC = 0.0, cR = 0.0, cCE = 0.0;
    circuit->add_option("--inductance", cL, "L in henry")->required();
    circuit->add_option("--capacitance", cC, "C in farad")->required();
    circuit->add_option("--resistance", cR, "environment R_E in ohm")->required();
    circuit->add_option("--env-capacitance", cCE, "environment C_E in farad")->required();
    add_output(circuit, o);

    CLI11_PARSE(app, argc, argv);

    try {
        Table table;
        if (*trace)
            table = run_trace(o, analytic);
        else if (*sweep)
            table = run_sweep(o, sweep_par, sweep_values, analytic);
        else if (*steady)
            table = run_steady(o);
        else if (*regime)
            table = run_regime(o);
        else if (*spectral) {
            o.steps = sp_steps;
            table = run_spectral(o, sp_delta, sp_modes, sp_stride);
        } else if (*oracle) {
            o.steps = or_steps;
            table = run_oracle(o, or_delta, or_modes, modes_out, or_stride, o.format);
        }
        else if (*circuit)
            table = run_circuit(cL, cC, cR, cCE);
        emit(table, o.output, o.format);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (!o.output.empty() && o.output != "-") std::remove(o.output.c_str());
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        if (!o.output.empty() && o.output != "-") std::remove(o.output.c_str());
        return 2;
    }
    return 0;
}

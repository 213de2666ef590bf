#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace qbatt {

// Physical parameters of the oscillator battery and its Drude-Ohmic reservoir.
// Units: hbar = k_B = 1, and by convention everything is quoted in units of the
// battery frequency omega0 (times in 1/omega0).
struct SystemParams {
    double omega0 = 1.0;      // battery frequency, > 0
    double mass = 1.0;        // battery mass, > 0
    double gamma0 = 0.0;      // coupling strength, >= 0
    double omega_d = 1.0;     // Drude cutoff, > 0
    double temperature = 0.0; // reservoir temperature, >= 0

    // Emergent frequency Omega = sqrt(gamma0 * omega_d); always recomputed.
    double big_omega_sq() const { return gamma0 * omega_d; }
    double big_omega() const { return std::sqrt(gamma0 * omega_d); }
    double beta() const { return 1.0 / temperature; }

    void validate() const {
        if (!(omega0 > 0.0)) throw std::invalid_argument("omega0 must be > 0");
        if (!(mass > 0.0)) throw std::invalid_argument("mass must be > 0");
        if (!(gamma0 >= 0.0)) throw std::invalid_argument("gamma0 must be >= 0");
        if (!(omega_d > 0.0)) throw std::invalid_argument("omega_d must be > 0");
        if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
    }
};

enum class DampingKind { Underdamped, Overdamped, CriticallyDamped };
enum class UnderdampedBand { WeaklyUnderdamped, StronglyUnderdamped, Unclassified };

struct RegimeTag {
    DampingKind kind = DampingKind::Underdamped;
    UnderdampedBand sub = UnderdampedBand::Unclassified;
    double discriminant = 0.0; // of the characteristic cubic, in units of scale^6
};

inline const char* to_string(DampingKind k) {
    switch (k) {
        case DampingKind::Underdamped: return "underdamped";
        case DampingKind::Overdamped: return "overdamped";
        case DampingKind::CriticallyDamped: return "critically-damped";
    }
    return "?";
}

inline const char* to_string(UnderdampedBand b) {
    switch (b) {
        case UnderdampedBand::WeaklyUnderdamped: return "weak";
        case UnderdampedBand::StronglyUnderdamped: return "strong";
        case UnderdampedBand::Unclassified: return "unclassified";
    }
    return "?";
}

// Nature of the roots of lambda^3 - omega_d lambda^2 + (omega0^2 + gamma0 omega_d) lambda
// - omega_d omega0^2.  Negative discriminant: one real root and a complex pair
// (underdamped).  Positive: three distinct real roots (overdamped).
inline RegimeTag classify_regime(const SystemParams& p, double tol = 1e-10) {
    p.validate();
    const double b = -p.omega_d;
    const double c = p.omega0 * p.omega0 + p.gamma0 * p.omega_d;
    const double d = -p.omega_d * p.omega0 * p.omega0;
    const double disc = 18.0 * b * c * d - 4.0 * b * b * b * d + b * b * c * c -
                        4.0 * c * c * c - 27.0 * d * d;
    // scale: a characteristic root magnitude, so disc/scale^6 is dimensionless
    const double scale = std::max({std::abs(b), std::sqrt(c), std::cbrt(std::abs(d))});
    const double scaled = disc / std::pow(scale, 6);

    RegimeTag tag;
    tag.discriminant = scaled;
    if (std::abs(scaled) < tol) {
        tag.kind = DampingKind::CriticallyDamped;
        tag.sub = UnderdampedBand::Unclassified;
        return tag;
    }
    tag.kind = scaled < 0.0 ? DampingKind::Underdamped : DampingKind::Overdamped;
    tag.sub = UnderdampedBand::Unclassified;
    if (tag.kind == DampingKind::Underdamped) {
        if (p.gamma0 > p.omega_d && p.gamma0 > p.omega0)
            tag.sub = UnderdampedBand::StronglyUnderdamped;
        else if (p.gamma0 < std::min(p.omega0, p.omega_d))
            tag.sub = UnderdampedBand::WeaklyUnderdamped;
    }
    return tag;
}

// Lumped-element description of an LC battery in a resistive-capacitive
// environment.  SI units.
struct CircuitParams {
    double inductance = 0.0;      // L [H]
    double capacitance = 0.0;     // C [F]
    double env_resistance = 0.0;  // R_E [Ohm]
    double env_capacitance = 0.0; // C_E [F]

    void validate() const {
        if (!(inductance > 0.0)) throw std::invalid_argument("L must be > 0");
        if (!(capacitance > 0.0)) throw std::invalid_argument("C must be > 0");
        if (!(env_resistance > 0.0)) throw std::invalid_argument("R_E must be > 0");
        if (!(env_capacitance > 0.0)) throw std::invalid_argument("C_E must be > 0");
    }
};

// Series-RLC identification: omega0 = 1/sqrt(LC), gamma0 = R_E/L, and the
// environment capacitance sets the cutoff omega_d = 1/(R_E C_E).  Temperature
// is left to the caller.  Result is in SI angular frequencies, mass = L.
inline SystemParams circuit_to_params(const CircuitParams& c) {
    c.validate();
    SystemParams p;
    p.omega0 = 1.0 / std::sqrt(c.inductance * c.capacitance);
    p.mass = c.inductance;
    p.gamma0 = c.env_resistance / c.inductance;
    p.omega_d = 1.0 / (c.env_resistance * c.env_capacitance);
    p.temperature = 0.0;
    return p;
}

} // namespace qbatt

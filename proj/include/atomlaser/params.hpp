#pragma once

// Physical inputs of the double-well atom laser and the closed-form model
// parameters derived from them (Gaussian-ansatz ground states).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "atomlaser/errors.hpp"

namespace atomlaser {

inline constexpr double hbar = 1.0545718e-34; // J s

/// Piecewise-linear trap separation eta(t). Held constant outside the knot range.
struct SeparationSchedule {
    std::vector<std::pair<double, double>> knots; // (t [s], eta), strictly increasing in t

    bool empty() const noexcept { return knots.empty(); }

    double at(double t) const
    {
        if (knots.size() == 1 || t <= knots.front().first) return knots.front().second;
        if (t >= knots.back().first) return knots.back().second;
        auto hi = std::upper_bound(knots.begin(), knots.end(), t,
                                   [](double x, const auto& k) { return x < k.first; });
        auto lo = std::prev(hi);
        double w = (t - lo->first) / (hi->first - lo->first);
        return lo->second + w * (hi->second - lo->second);
    }
};

struct PhysicalParams {
    double mass = 3.818e-26;             // kg (23Na)
    double scattering_length = 2.75e-9;  // m
    double omega_z = 200.0;              // rad/s, longitudinal trap frequency
    double aspect_ratio = 0.4;           // omega_z / omega_x
    double separation = 1.7;             // dimensionless trap separation eta
    double outcoupling = 100.0;          // s^-2, rectangular pulse strength Lambda
    double atom_number = 100.0;
    double initial_fraction_a = 0.7;
    double initial_fraction_b = 0.3;
    double initial_phase = 0.0;          // rad, phase of <b(0)> relative to <a(0)>
    double duration = 10.0;              // s, pulse length tau
    std::optional<double> kappa_override; // s^-1
    SeparationSchedule separation_schedule; // empty: constant `separation`

    double separation_at(double t) const
    {
        return separation_schedule.empty() ? separation : separation_schedule.at(t);
    }

    /// Throws ParameterError when an invariant is violated.
    void check() const
    {
        auto finite = [](double v, const char* name) {
            if (!std::isfinite(v)) throw ParameterError(std::string(name) + " must be finite");
        };
        finite(mass, "mass");
        finite(scattering_length, "scattering_length");
        finite(omega_z, "omega_z");
        finite(aspect_ratio, "aspect_ratio");
        finite(separation, "separation");
        finite(outcoupling, "outcoupling");
        finite(atom_number, "atom_number");
        finite(initial_fraction_a, "initial_fraction_a");
        finite(initial_fraction_b, "initial_fraction_b");
        finite(initial_phase, "initial_phase");
        finite(duration, "duration");
        if (kappa_override) finite(*kappa_override, "kappa_override");

        if (!(mass > 0)) throw ParameterError("mass must be > 0");
        if (!(omega_z > 0)) throw ParameterError("omega_z must be > 0");
        if (!(aspect_ratio > 0)) throw ParameterError("aspect_ratio must be > 0");
        if (separation < 0) throw ParameterError("separation must be >= 0");
        if (outcoupling < 0) throw ParameterError("outcoupling strength must be >= 0");
        if (!(duration > 0)) throw ParameterError("duration must be > 0");
        if (atom_number < 0) throw ParameterError("atom_number must be >= 0");
        if (scattering_length < 0) throw ParameterError("scattering_length must be >= 0");
        if (kappa_override && *kappa_override < 0) throw ParameterError("kappa_override must be >= 0");
        if (initial_fraction_a < 0 || initial_fraction_a > 1)
            throw ParameterError("initial_fraction_a must lie in [0, 1]");
        if (initial_fraction_b < 0 || initial_fraction_b > 1)
            throw ParameterError("initial_fraction_b must lie in [0, 1]");
        if (std::abs(initial_fraction_a + initial_fraction_b - 1.0) > 1e-12)
            throw ParameterError("initial fractions must sum to 1 (continuum starts empty)");
        for (std::size_t i = 0; i < separation_schedule.knots.size(); ++i) {
            const auto& [t, eta] = separation_schedule.knots[i];
            finite(t, "separation schedule time");
            finite(eta, "separation schedule value");
            if (eta < 0) throw ParameterError("separation schedule values must be >= 0");
            if (i > 0 && !(t > separation_schedule.knots[i - 1].first))
                throw ParameterError("separation schedule times must be strictly increasing");
        }
    }
};

struct DerivedParams {
    double oscillator_length = 0;   // m, sqrt(hbar / m omega_z)
    double josephson = 0;           // s^-1 at t = 0
    double kappa = 0;               // s^-1, onsite interaction per particle
    double max_atom_number = 0;     // two-mode validity bound
    double collapse_time = 0;       // s, infinite when kappa = 0
    double mu_a0 = 0;               // J
    double mu_b0 = 0;               // J
    double trap_frequency = 0;      // s^-1, omega_z / 2
    double josephson_offset = 0;    // J(eta) = (offset - slope * eta) exp(-eta^2)
    double josephson_slope = 0;

    double josephson_at(double eta) const
    {
        return (josephson_offset - josephson_slope * eta) * std::exp(-eta * eta);
    }
};

/// Josephson coupling between the two trap ground modes.
inline double josephson_coupling(double omega_z, double aspect_ratio, double separation)
{
    const double root_pi = std::sqrt(std::numbers::pi);
    return omega_z * (0.5 + 1.0 / aspect_ratio - separation / (aspect_ratio * root_pi)) *
           std::exp(-separation * separation);
}

inline DerivedParams derive(const PhysicalParams& p)
{
    p.check();
    if (!(p.aspect_ratio * std::sqrt(std::numbers::pi) > 0))
        throw ParameterError("aspect_ratio * sqrt(pi) must be > 0");

    DerivedParams d;
    const double sqrt_2pi = std::sqrt(2.0 * std::numbers::pi);
    d.oscillator_length = std::sqrt(hbar / (p.mass * p.omega_z));
    d.trap_frequency = 0.5 * p.omega_z;
    d.josephson_offset = p.omega_z * (0.5 + 1.0 / p.aspect_ratio);
    d.josephson_slope = p.omega_z / (p.aspect_ratio * std::sqrt(std::numbers::pi));
    d.josephson = d.josephson_at(p.separation_at(0.0));

    const double lz3 = d.oscillator_length * d.oscillator_length * d.oscillator_length;
    d.kappa = p.kappa_override ? *p.kappa_override
                               : hbar * p.scattering_length / (p.aspect_ratio * p.mass * sqrt_2pi * lz3);

    d.max_atom_number = p.scattering_length > 0
        ? std::cbrt(p.aspect_ratio) * sqrt_2pi * d.oscillator_length / p.scattering_length
        : std::numeric_limits<double>::infinity();

    d.collapse_time = (d.kappa > 0 && p.atom_number > 0)
        ? 1.0 / (2.0 * std::sqrt(p.atom_number) * d.kappa)
        : std::numeric_limits<double>::infinity();

    const double n_a0 = p.atom_number * p.initial_fraction_a;
    const double n_b0 = p.atom_number * p.initial_fraction_b;
    d.mu_a0 = hbar * p.omega_z / 2.0 + 2.0 * hbar * d.kappa * n_a0;
    d.mu_b0 = hbar * p.omega_z / 2.0 + 2.0 * hbar * d.kappa * n_b0;
    return d;
}

struct ValidationCheck {
    std::string name;
    bool passed = true;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;

    bool has_warnings() const
    {
        return std::any_of(checks.begin(), checks.end(), [](const auto& c) { return !c.passed; });
    }

    const ValidationCheck* find(const std::string& name) const
    {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

/// Lower edge of the separation range where the two-mode (weak overlap) picture is used.
inline constexpr double min_tunneling_separation = 1.0;

/// Model-validity checks. Never throws; failed checks are warnings.
inline ValidationReport validate(const PhysicalParams& p, const DerivedParams& d)
{
    ValidationReport r;

    ValidationCheck two_mode{"two-mode validity", true, ""};
    if (!(p.atom_number < 0.1 * d.max_atom_number)) {
        two_mode.passed = false;
        two_mode.message = "N = " + std::to_string(p.atom_number) +
                           " is not well below the interaction bound N_max = " +
                           std::to_string(d.max_atom_number);
    } else {
        two_mode.message = "N < 0.1 N_max";
    }
    r.checks.push_back(two_mode);

    ValidationCheck coherence{"coherence time", true, ""};
    if (p.duration > d.collapse_time) {
        coherence.passed = false;
        coherence.message = "tau exceeds t_collapse (" + std::to_string(d.collapse_time) +
                            " s); mean-field coherence assumes t << t_c";
    } else {
        coherence.message = "tau <= t_collapse";
    }
    r.checks.push_back(coherence);

    ValidationCheck range{"separation range", true, ""};
    double eta_min = p.separation, eta_max = p.separation;
    if (!p.separation_schedule.empty()) {
        eta_min = eta_max = p.separation_schedule.knots.front().second;
        for (const auto& k : p.separation_schedule.knots) {
            eta_min = std::min(eta_min, k.second);
            eta_max = std::max(eta_max, k.second);
        }
    }
    if (eta_min < min_tunneling_separation) {
        range.passed = false;
        range.message = "eta < 1: trap modes overlap strongly, two-mode picture questionable";
    } else if (!(d.josephson_at(eta_max) > 0)) {
        range.passed = false;
        range.message = "Josephson coupling is not positive at eta = " + std::to_string(eta_max);
    } else {
        range.message = "eta within tunneling range";
    }
    r.checks.push_back(range);
    return r;
}

} // namespace atomlaser

#pragma once

// One-dimensional free-atom continuum: density of states, the outcoupling
// spectral response, and its uniform discretization into M modes.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "atomlaser/errors.hpp"
#include "atomlaser/params.hpp"
#include "atomlaser/quadrature.hpp"

namespace atomlaser {

/// rho(omega) = sqrt(m / (2 hbar omega)) for omega > 0, zero otherwise.
inline double density_of_states(double omega, double mass)
{
    if (!(omega > 0)) return 0.0;
    return std::sqrt(mass / (2.0 * hbar * omega));
}

/// D(omega) = 2 |g(omega)|^2 rho(omega) for the Gaussian outcoupling profile.
inline double spectral_response(double omega, double outcoupling, double omega_z)
{
    if (!(omega > 0)) return 0.0;
    const double prefactor = std::sqrt(2.0) * outcoupling / std::sqrt(std::numbers::pi * omega_z);
    return prefactor * std::exp(-2.0 * omega / omega_z) / std::sqrt(omega);
}

/// Relative accuracy requested from the shift quadrature.
inline constexpr double shift_rel_tol = 1e-12;

/// Level shift from the modes above the cutoff: integral of D(omega)/omega over [omega_up, inf).
///
/// Evaluated in x = 2 omega / omega_z, where the integrand is exp(-x) x^{-3/2}. The range is
/// truncated at x0 + 50 and the tail bound exp(-X) X^{-3/2} is added to the error budget.
inline double compute_shift(double outcoupling, double omega_z, double omega_up)
{
    if (!(omega_up > 0)) throw ParameterError("omega_up must be > 0");
    if (!(omega_z > 0)) throw ParameterError("omega_z must be > 0");
    if (outcoupling == 0.0) return 0.0;

    const double x0 = 2.0 * omega_up / omega_z;
    const double x_end = x0 + 50.0;
    auto integrand = [](double x) { return std::exp(-x) / (x * std::sqrt(x)); };
    const auto r = quadrature::integrate(integrand, x0, x_end, shift_rel_tol);
    const double tail_bound = std::exp(-x_end) / (x_end * std::sqrt(x_end));
    const double total_error = r.error + tail_bound;
    if (!r.converged || total_error > 1e-8 * std::abs(r.value))
        throw NumericalError("shift quadrature did not converge");

    return 2.0 * outcoupling / (std::sqrt(std::numbers::pi) * omega_z) * r.value;
}

struct DiscretizedContinuum {
    std::size_t mode_count = 0;
    double spacing = 0;               // epsilon [s^-1]
    double omega_up = 0;              // upper cutoff = mode_count * spacing
    std::vector<double> frequencies;  // omega_j = j epsilon, j = 1..M
    std::vector<double> couplings;    // g_j = sqrt(D(omega_j) epsilon)
    double shift = 0;                 // S [s^-1]
};

inline DiscretizedContinuum discretize(double outcoupling, double omega_z, std::size_t mode_count,
                                       double omega_up)
{
    if (mode_count == 0) throw ParameterError("mode count must be >= 1");
    if (!(omega_up > 0) || !std::isfinite(omega_up)) throw ParameterError("omega_up must be > 0");
    if (!(outcoupling >= 0)) throw ParameterError("outcoupling strength must be >= 0");

    DiscretizedContinuum c;
    c.mode_count = mode_count;
    c.omega_up = omega_up;
    c.spacing = omega_up / static_cast<double>(mode_count);
    c.frequencies.resize(mode_count);
    c.couplings.resize(mode_count);
    for (std::size_t j = 0; j < mode_count; ++j)
        c.frequencies[j] = static_cast<double>(j + 1) * c.spacing;
    c.frequencies.back() = omega_up;
    for (std::size_t j = 0; j < mode_count; ++j)
        c.couplings[j] = std::sqrt(spectral_response(c.frequencies[j], outcoupling, omega_z) * c.spacing);
    c.shift = compute_shift(outcoupling, omega_z, omega_up);
    return c;
}

} // namespace atomlaser

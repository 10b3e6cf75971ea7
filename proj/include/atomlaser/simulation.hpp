#pragma once

// One complete run: derive parameters, discretize the continuum, integrate,
// and analyse the final spectrum. Also the registry of named scalar settings
// shared by configuration files and sweep axes.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "atomlaser/continuum.hpp"
#include "atomlaser/dynamics.hpp"
#include "atomlaser/errors.hpp"
#include "atomlaser/observables.hpp"
#include "atomlaser/params.hpp"

namespace atomlaser {

struct DiscretizationSettings {
    std::size_t mode_count = 1500;
    double omega_up = 300.0;
};

struct RunSettings {
    PhysicalParams physical;
    DiscretizationSettings discretization;
    IntegratorSettings integrator;
    PeakDetectionSettings analysis;
};

struct SimulationResult {
    DerivedParams derived;
    ValidationReport validation;
    DiscretizedContinuum continuum;
    Trajectory trajectory;
    SpectrumAnalysis spectrum;
    double wall_time = 0; // s
};

inline SimulationResult simulate(const RunSettings& run, double global_phase = 0.0)
{
    const auto start = std::chrono::steady_clock::now();
    SimulationResult r;
    r.derived = derive(run.physical);
    r.validation = validate(run.physical, r.derived);
    r.continuum = discretize(run.physical.outcoupling, run.physical.omega_z, run.discretization.mode_count,
                             run.discretization.omega_up);
    r.trajectory = integrate(run.physical, r.derived, r.continuum, run.integrator, global_phase);
    r.spectrum = spectrum(r.trajectory.final_state, r.continuum, run.analysis);
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

// ---------------------------------------------------------------------------
// Named scalar settings. Names carry their units and are the keys used in
// configuration files and sweep axes.

struct ScalarSetting {
    std::string_view section;
    std::string_view key;
    std::function<void(RunSettings&, double)> set;
    std::function<std::optional<double>(const RunSettings&)> get; // nullopt: unset optional
};

inline const std::vector<ScalarSetting>& scalar_settings()
{
    static const std::vector<ScalarSetting> table = [] {
        std::vector<ScalarSetting> t;
        auto add = [&](std::string_view section, std::string_view key, double PhysicalParams::*field) {
            t.push_back({section, key, [field](RunSettings& r, double v) { r.physical.*field = v; },
                         [field](const RunSettings& r) -> std::optional<double> { return r.physical.*field; }});
        };
        add("physical", "mass_kg", &PhysicalParams::mass);
        add("physical", "scattering_length_m", &PhysicalParams::scattering_length);
        add("physical", "omega_z_per_s", &PhysicalParams::omega_z);
        add("physical", "lambda_ratio", &PhysicalParams::aspect_ratio);
        add("physical", "eta", &PhysicalParams::separation);
        add("physical", "Lambda_per_s2", &PhysicalParams::outcoupling);
        add("physical", "N_total", &PhysicalParams::atom_number);
        add("physical", "alpha0_frac", &PhysicalParams::initial_fraction_a);
        add("physical", "beta0_frac", &PhysicalParams::initial_fraction_b);
        add("physical", "phi0_rad", &PhysicalParams::initial_phase);
        add("physical", "tau_s", &PhysicalParams::duration);
        t.push_back({"physical", "kappa_override_per_s",
                     [](RunSettings& r, double v) { r.physical.kappa_override = v; },
                     [](const RunSettings& r) { return r.physical.kappa_override; }});
        t.push_back({"discretization", "M",
                     [](RunSettings& r, double v) {
                         if (!(v >= 1) || v != std::floor(v) || v > 1e8)
                             throw ConfigError("M must be a positive integer");
                         r.discretization.mode_count = static_cast<std::size_t>(v);
                     },
                     [](const RunSettings& r) -> std::optional<double> {
                         return static_cast<double>(r.discretization.mode_count);
                     }});
        t.push_back({"discretization", "omega_up_per_s",
                     [](RunSettings& r, double v) { r.discretization.omega_up = v; },
                     [](const RunSettings& r) -> std::optional<double> { return r.discretization.omega_up; }});
        t.push_back({"integrator", "rtol", [](RunSettings& r, double v) { r.integrator.rtol = v; },
                     [](const RunSettings& r) -> std::optional<double> { return r.integrator.rtol; }});
        t.push_back({"integrator", "atol", [](RunSettings& r, double v) { r.integrator.atol = v; },
                     [](const RunSettings& r) -> std::optional<double> { return r.integrator.atol; }});
        t.push_back({"integrator", "sample_dt_s", [](RunSettings& r, double v) { r.integrator.sample_dt = v; },
                     [](const RunSettings& r) -> std::optional<double> { return r.integrator.sample_dt; }});
        t.push_back({"analysis", "peak_prominence_frac",
                     [](RunSettings& r, double v) { r.analysis.peak_prominence = v; },
                     [](const RunSettings& r) -> std::optional<double> { return r.analysis.peak_prominence; }});
        t.push_back({"analysis", "dip_prominence_frac",
                     [](RunSettings& r, double v) { r.analysis.dip_prominence = v; },
                     [](const RunSettings& r) -> std::optional<double> { return r.analysis.dip_prominence; }});
        t.push_back({"analysis", "omega_min_per_s", [](RunSettings& r, double v) { r.analysis.omega_min = v; },
                     [](const RunSettings& r) { return r.analysis.omega_min; }});
        t.push_back({"analysis", "omega_max_per_s", [](RunSettings& r, double v) { r.analysis.omega_max = v; },
                     [](const RunSettings& r) { return r.analysis.omega_max; }});
        return t;
    }();
    return table;
}

inline const ScalarSetting* find_scalar_setting(std::string_view key)
{
    for (const auto& s : scalar_settings())
        if (s.key == key) return &s;
    return nullptr;
}

inline void set_scalar(RunSettings& run, std::string_view key, double value)
{
    const ScalarSetting* s = find_scalar_setting(key);
    if (!s) throw ConfigError("unknown parameter '" + std::string(key) + "'");
    if (!std::isfinite(value)) throw ConfigError("parameter '" + std::string(key) + "' must be finite");
    s->set(run, value);
}

} // namespace atomlaser

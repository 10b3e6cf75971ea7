#pragma once

// Plot-ready output files: trajectory.csv, spectrum.csv, sweep.csv and meta.json.
// Numbers are written as %.15e; booleans as 0/1.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "atomlaser/config.hpp"
#include "atomlaser/simulation.hpp"
#include "atomlaser/sweep.hpp"

namespace atomlaser {

inline constexpr std::string_view version = "0.1.0";

namespace io_detail {

inline std::string num(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15e", v);
    return buf;
}

// RFC 4180 quoting.
inline std::string field(std::string_view s)
{
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline nlohmann::ordered_json finite_or_null(double v)
{
    return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

} // namespace io_detail

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj)
{
    using io_detail::num;
    out << "t_s,N_A,N_B,N_C,frac_A,frac_B,frac_C,phi_rad,p_tilde,H_c\r\n";
    const double n = traj.atom_number;
    for (const auto& s : traj.samples) {
        const double fa = n > 0 ? s.n_a / n : 0.0;
        const double fb = n > 0 ? s.n_b / n : 0.0;
        const double fc = n > 0 ? s.n_c / n : 0.0;
        out << num(s.t) << ',' << num(s.n_a) << ',' << num(s.n_b) << ',' << num(s.n_c) << ',' << num(fa) << ','
            << num(fb) << ',' << num(fc) << ',' << num(s.relative_phase) << ',' << num(s.p_tilde) << ','
            << num(s.h_c) << "\r\n";
    }
}

inline void write_spectrum_csv(std::ostream& out, const SpectrumAnalysis& sp)
{
    using io_detail::num;
    std::vector<char> is_peak(sp.omegas.size(), 0), is_dip(sp.omegas.size(), 0);
    for (const auto& p : sp.peaks) is_peak[p.index] = 1;
    for (const auto& d : sp.dips) is_dip[d.index] = 1;
    out << "omega_per_s,density_atoms_s,is_peak,is_dip\r\n";
    for (std::size_t j = 0; j < sp.omegas.size(); ++j)
        out << num(sp.omegas[j]) << ',' << num(sp.density[j]) << ',' << int(is_peak[j]) << ',' << int(is_dip[j])
            << "\r\n";
}

/// One row per grid point: axis values, summaries (empty when unavailable), status, norm drift.
inline void write_sweep_csv(std::ostream& out, const SweepResult& r)
{
    using io_detail::field;
    using io_detail::num;
    for (const auto& k : r.axis_keys) out << field(k) << ',';
    for (const auto& o : r.observables) out << field(o) << ',';
    out << "status,norm_drift\r\n";
    for (const auto& row : r.rows) {
        for (double c : row.coordinates) out << num(c) << ',';
        for (const auto& s : row.summaries) out << (s.value ? num(*s.value) : std::string()) << ',';
        out << field(row.ok ? "ok" : "failed: " + row.error) << ',' << (row.ok ? num(row.norm_drift) : "")
            << "\r\n";
    }
}

inline nlohmann::ordered_json derived_json(const RunConfig& cfg, const DerivedParams& d,
                                           const DiscretizedContinuum& cont)
{
    using io_detail::finite_or_null;
    nlohmann::ordered_json j;
    j["l_z_m"] = d.oscillator_length;
    j["J_per_s"] = d.josephson;
    j["kappa_per_s"] = d.kappa;
    j["S_per_s"] = cont.shift;
    j["epsilon_per_s"] = cont.spacing;
    j["N_max"] = finite_or_null(d.max_atom_number);
    j["t_collapse_s"] = finite_or_null(d.collapse_time);
    j["mu_A0_J"] = d.mu_a0;
    j["mu_B0_J"] = d.mu_b0;
    j["markovian_rate_per_s"] = markovian_reference(cfg.run.physical, d);
    j["interaction_free"] = d.kappa == 0.0;
    return j;
}

inline nlohmann::ordered_json validation_json(const ValidationReport& r)
{
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const auto& c : r.checks) a.push_back({{"name", c.name}, {"passed", c.passed}, {"message", c.message}});
    return a;
}

inline nlohmann::ordered_json meta_json(const RunConfig& cfg, const SimulationResult& sim)
{
    using io_detail::finite_or_null;
    nlohmann::ordered_json j;
    j["artifact"] = "atomlaser";
    j["version"] = std::string(version);
    j["resolved_config"] = to_json(cfg);
    j["derived"] = derived_json(cfg, sim.derived, sim.continuum);
    j["validation"] = validation_json(sim.validation);
    j["norm_drift_atoms"] = sim.trajectory.max_norm_drift;
    j["norm_drift_rel"] = cfg.run.physical.atom_number > 0
                              ? sim.trajectory.max_norm_drift / cfg.run.physical.atom_number
                              : 0.0;
    j["integrator"] = {{"accepted_steps", sim.trajectory.stats.accepted_steps},
                       {"rejected_steps", sim.trajectory.stats.rejected_steps},
                       {"rhs_evaluations", sim.trajectory.stats.rhs_evaluations}};
    auto& sp = j["spectrum"];
    sp["total_outcoupled"] = sim.spectrum.total_outcoupled;
    sp["peaks"] = nlohmann::ordered_json::array();
    for (const auto& p : sim.spectrum.peaks)
        sp["peaks"].push_back({{"omega_per_s", p.omega}, {"height", p.height}, {"prominence", p.prominence},
                               {"width_per_s", p.width}});
    sp["dips"] = nlohmann::ordered_json::array();
    for (const auto& d : sim.spectrum.dips)
        sp["dips"].push_back({{"omega_per_s", d.omega}, {"depth", d.depth}, {"relative_depth", d.relative_depth}});
    sp["peak_ratio"] = sim.spectrum.peak_ratio ? finite_or_null(*sim.spectrum.peak_ratio)
                                               : nlohmann::ordered_json(nullptr);
    j["wall_time_s"] = sim.wall_time;
    return j;
}

} // namespace atomlaser

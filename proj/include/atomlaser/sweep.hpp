#pragma once

// Parameter sweeps over a Cartesian grid of named settings, run on a pool of
// worker threads, with scalar summaries extracted from each run.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "atomlaser/errors.hpp"
#include "atomlaser/observables.hpp"
#include "atomlaser/simulation.hpp"
#include "atomlaser/state.hpp"

namespace atomlaser {

// ---------------------------------------------------------------------------
// Scalar summaries

struct SummaryValue {
    std::optional<double> value;
    std::string reason; // why value is missing
};

namespace detail {

inline std::vector<double> fraction_a(const Trajectory& traj)
{
    std::vector<double> x(traj.samples.size());
    const double n = traj.atom_number > 0 ? traj.atom_number : 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = traj.samples[i].n_a / n;
    return x;
}

} // namespace detail

/// Half the rise of N_A/N from the trough before the second maximum up to that maximum. Maxima
/// count when their prominence reaches 10% of the full N_A/N range.
inline SummaryValue oscillation_amplitude_second_peak(const Trajectory& traj)
{
    const auto x = detail::fraction_a(traj);
    if (x.size() < 3) return {std::nullopt, "trajectory too short"};
    const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
    if (*mx - *mn <= 1e-12) return {0.0, ""};
    // Fast transient ripples right after switch-on are not oscillation maxima.
    std::vector<std::size_t> peaks;
    for (std::size_t i : detail::local_maxima(x))
        if (detail::prominence(x, i).prominence >= 0.1 * (*mx - *mn)) peaks.push_back(i);
    if (peaks.size() < 2) return {std::nullopt, "fewer than two maxima in N_A(t)"};
    const double trough = *std::min_element(x.begin() + static_cast<std::ptrdiff_t>(peaks[0]),
                                            x.begin() + static_cast<std::ptrdiff_t>(peaks[1]));
    return {0.5 * (x[peaks[1]] - trough), ""};
}

inline SummaryValue steady_state_na(const Trajectory& traj)
{
    if (traj.samples.empty()) return {std::nullopt, "empty trajectory"};
    const double n = traj.atom_number > 0 ? traj.atom_number : 1.0;
    return {traj.samples.back().n_a / n, ""};
}

/// Times at which p_tilde changes sign, linearly interpolated between samples.
inline std::vector<double> imbalance_crossings(const Trajectory& traj)
{
    std::vector<double> out;
    const auto& s = traj.samples;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double p0 = s[i - 1].p_tilde, p1 = s[i].p_tilde;
        if (p0 == 0.0 && i == 1) continue;
        if ((p0 > 0 && p1 <= 0) || (p0 < 0 && p1 >= 0)) {
            if (p1 == 0.0 && i + 1 < s.size() && (s[i + 1].p_tilde > 0) == (p0 > 0)) continue; // touch
            out.push_back(detail::interpolate_crossing(s[i - 1].t, p0, s[i].t, p1, 0.0));
        }
    }
    return out;
}

inline SummaryValue peak_ratio_summary(const SpectrumAnalysis& sp)
{
    if (!sp.peak_ratio) return {std::nullopt, "fewer than two spectral peaks"};
    return {*sp.peak_ratio, ""};
}

inline SummaryValue dip_depth_summary(const SpectrumAnalysis& sp)
{
    if (sp.dips.empty()) return {std::nullopt, "no spectral dip"};
    const auto it = std::max_element(sp.dips.begin(), sp.dips.end(),
                                     [](const Dip& a, const Dip& b) { return a.relative_depth < b.relative_depth; });
    return {it->relative_depth, ""};
}

inline const std::vector<std::string_view>& summary_names()
{
    static const std::vector<std::string_view> names = {
        "oscillation_amplitude_second_peak", "oscillation_amplitude_second_peak_rel", "peak_ratio",
        "steady_state_NA", "dip_depth", "regime_transition_times"};
    return names;
}

inline bool is_summary_name(std::string_view name)
{
    const auto& n = summary_names();
    return std::find(n.begin(), n.end(), name) != n.end();
}

/// Single-run summary. The "_rel" amplitude needs a reference run and is handled by run_sweep.
inline SummaryValue extract_summary(const Trajectory& traj, const SpectrumAnalysis& sp, std::string_view name)
{
    if (name == "oscillation_amplitude_second_peak") return oscillation_amplitude_second_peak(traj);
    if (name == "peak_ratio") return peak_ratio_summary(sp);
    if (name == "steady_state_NA") return steady_state_na(traj);
    if (name == "dip_depth") return dip_depth_summary(sp);
    if (name == "regime_transition_times") {
        const auto c = imbalance_crossings(traj);
        if (c.empty()) return {std::nullopt, "no N_A = N_B crossing"};
        return {c.front(), ""};
    }
    throw ConfigError("unknown observable '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepAxis {
    std::string key;
    std::vector<double> values;
};

struct SweepSpec {
    RunSettings base;
    std::vector<SweepAxis> axes;
    std::vector<std::string> observables;
    std::size_t max_points = 100000;
};

struct SweepRow {
    std::vector<double> coordinates;
    std::vector<SummaryValue> summaries;
    bool ok = false;
    std::string error;
    double norm_drift = std::numeric_limits<double>::quiet_NaN();
    double wall_time = 0;
};

struct SweepResult {
    std::vector<std::string> axis_keys;
    std::vector<std::string> observables;
    std::vector<SweepRow> rows;
};

/// Inclusive linspace(a, b, n).
inline std::vector<double> linspace(double a, double b, std::size_t n)
{
    if (n == 0) return {};
    if (n == 1) return {a};
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    v.back() = b;
    return v;
}

inline std::size_t grid_size(const SweepSpec& spec)
{
    std::size_t n = 1;
    for (const auto& a : spec.axes) {
        if (a.values.empty()) return 0;
        if (n > spec.max_points / a.values.size() + 1) return std::numeric_limits<std::size_t>::max();
        n *= a.values.size();
    }
    return n;
}

/// Coordinates of grid point `index`; the last axis varies fastest.
inline std::vector<double> grid_point(const SweepSpec& spec, std::size_t index)
{
    std::vector<double> c(spec.axes.size());
    for (std::size_t k = spec.axes.size(); k-- > 0;) {
        const auto& v = spec.axes[k].values;
        c[k] = v[index % v.size()];
        index /= v.size();
    }
    return c;
}

/// Run settings at the given coordinates. Sweeping alpha0_frac without beta0_frac sets beta0 = 1 - alpha0.
inline RunSettings apply_point(const SweepSpec& spec, const std::vector<double>& coords)
{
    RunSettings run = spec.base;
    bool alpha = false, beta = false;
    for (std::size_t k = 0; k < spec.axes.size(); ++k) {
        set_scalar(run, spec.axes[k].key, coords[k]);
        alpha |= spec.axes[k].key == "alpha0_frac";
        beta |= spec.axes[k].key == "beta0_frac";
    }
    if (alpha && !beta) run.physical.initial_fraction_b = 1.0 - run.physical.initial_fraction_a;
    return run;
}

inline void check_sweep(const SweepSpec& spec)
{
    if (spec.axes.empty()) throw ConfigError("sweep needs at least one axis");
    for (const auto& a : spec.axes) {
        if (!find_scalar_setting(a.key)) throw ConfigError("unknown sweep axis '" + a.key + "'");
        if (a.values.empty()) throw ConfigError("sweep axis '" + a.key + "' has no values");
    }
    for (const auto& o : spec.observables)
        if (!is_summary_name(o)) throw ConfigError("unknown observable '" + o + "'");
    const std::size_t n = grid_size(spec);
    if (n > spec.max_points)
        throw ConfigError("sweep grid exceeds max_points (" + std::to_string(spec.max_points) + ")");
}

/// Called from worker threads after each successful grid point.
using PointCallback = std::function<void(std::size_t index, const RunSettings&, const SimulationResult&)>;

namespace detail {

template <class Job>
void run_parallel(std::size_t count, std::size_t workers, Job&& job)
{
    workers = std::max<std::size_t>(1, std::min(workers, count));
    std::atomic<std::size_t> next{0};
    auto loop = [&] {
        for (std::size_t i = next++; i < count; i = next++) job(i);
    };
    if (workers == 1) {
        loop();
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(loop);
    for (auto& th : pool) th.join();
}

} // namespace detail

/// Runs every grid point. Failures are recorded per row and do not stop the sweep.
/// Results are identical for any worker count.
inline SweepResult run_sweep(const SweepSpec& spec, std::size_t workers = 1, const PointCallback& on_point = {})
{
    check_sweep(spec);
    const std::size_t n = grid_size(spec);
    SweepResult result;
    for (const auto& a : spec.axes) result.axis_keys.push_back(a.key);
    result.observables = spec.observables;
    result.rows.resize(n);

    const bool want_rel = std::find(spec.observables.begin(), spec.observables.end(),
                                    "oscillation_amplitude_second_peak_rel") != spec.observables.end();
    std::vector<SummaryValue> raw_amplitude(n);

    detail::run_parallel(n, workers, [&](std::size_t i) {
        SweepRow& row = result.rows[i];
        row.coordinates = grid_point(spec, i);
        row.summaries.assign(spec.observables.size(), SummaryValue{std::nullopt, "run failed"});
        try {
            const RunSettings run = apply_point(spec, row.coordinates);
            run.physical.check();
            const SimulationResult sim = simulate(run);
            row.ok = true;
            row.norm_drift = sim.trajectory.max_norm_drift;
            row.wall_time = sim.wall_time;
            for (std::size_t k = 0; k < spec.observables.size(); ++k) {
                if (spec.observables[k] == "oscillation_amplitude_second_peak_rel") continue;
                row.summaries[k] = extract_summary(sim.trajectory, sim.spectrum, spec.observables[k]);
            }
            if (want_rel) raw_amplitude[i] = oscillation_amplitude_second_peak(sim.trajectory);
            if (on_point) on_point(i, run, sim);
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
    });

    if (want_rel) {
        // Reference amplitude: the same point with phi0_rad = 0, reused from the grid when present.
        const bool phi_axis = std::any_of(spec.axes.begin(), spec.axes.end(),
                                          [](const SweepAxis& a) { return a.key == "phi0_rad"; });
        const bool grid_has_reference = phi_axis || spec.base.physical.initial_phase == 0.0;
        std::map<std::vector<double>, std::size_t> index_of;
        for (std::size_t i = 0; i < n; ++i) index_of.emplace(result.rows[i].coordinates, i);
        auto reference_key = [&](std::vector<double> c) {
            for (std::size_t k = 0; k < spec.axes.size(); ++k)
                if (spec.axes[k].key == "phi0_rad") c[k] = 0.0;
            return c;
        };

        std::vector<std::vector<double>> extra;
        for (const auto& row : result.rows) {
            const auto c = reference_key(row.coordinates);
            const bool in_grid = grid_has_reference && index_of.count(c);
            if (row.ok && !in_grid && std::find(extra.begin(), extra.end(), c) == extra.end()) extra.push_back(c);
        }
        std::vector<SummaryValue> extra_amp(extra.size());
        detail::run_parallel(extra.size(), workers, [&](std::size_t m) {
            try {
                RunSettings run = apply_point(spec, extra[m]);
                run.physical.initial_phase = 0.0;
                run.physical.check();
                extra_amp[m] = oscillation_amplitude_second_peak(simulate(run).trajectory);
            } catch (const std::exception& e) {
                extra_amp[m] = {std::nullopt, std::string("reference run failed: ") + e.what()};
            }
        });

        const auto k_rel = static_cast<std::size_t>(
            std::find(spec.observables.begin(), spec.observables.end(), "oscillation_amplitude_second_peak_rel") -
            spec.observables.begin());
        for (std::size_t i = 0; i < n; ++i) {
            SweepRow& row = result.rows[i];
            if (!row.ok) continue;
            const auto c = reference_key(row.coordinates);
            SummaryValue ref;
            const auto m = std::find(extra.begin(), extra.end(), c);
            if (m != extra.end()) {
                ref = extra_amp[static_cast<std::size_t>(m - extra.begin())];
            } else {
                const std::size_t r = index_of.at(c);
                ref = result.rows[r].ok ? raw_amplitude[r] : SummaryValue{std::nullopt, "reference run failed"};
            }
            SummaryValue& out = row.summaries[k_rel];
            if (!raw_amplitude[i].value) {
                out = raw_amplitude[i];
            } else if (!ref.value) {
                out = {std::nullopt, ref.reason.empty() ? "no reference amplitude" : ref.reason};
            } else if (*ref.value == 0.0) {
                out = {std::nullopt, "reference amplitude is zero"};
            } else {
                out = {*raw_amplitude[i].value / *ref.value, ""};
            }
        }
    }
    return result;
}

} // namespace atomlaser

#pragma once

// Observables derived from mean-field states: populations, the Josephson /
// self-trapping indicator H_c, global-state populations, and the spectrum of
// outcoupled atoms with peak and dip detection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "atomlaser/continuum.hpp"
#include "atomlaser/params.hpp"
#include "atomlaser/state.hpp"

namespace atomlaser {

struct Populations {
    double n_a = 0, n_b = 0, n_c = 0;
    double frac_a = 0, frac_b = 0, frac_c = 0;
};

/// Fractions are relative to `atom_number`; they are left at zero when atom_number is zero.
inline Populations populations(const SystemState& s, double atom_number)
{
    Populations p;
    p.n_a = std::norm(s.amp_a);
    p.n_b = std::norm(s.amp_b);
    p.n_c = s.continuum_population();
    if (atom_number > 0) {
        p.frac_a = p.n_a / atom_number;
        p.frac_b = p.n_b / atom_number;
        p.frac_c = p.n_c / atom_number;
    }
    return p;
}

// ---------------------------------------------------------------------------
// Regime classification

enum class Regime { Josephson, SelfTrapping };

/// Denominator of the imbalance p. `Total` divides by N (the default); `Trapped` by N_A + N_B.
enum class ImbalanceNormalization { Total, Trapped };

struct RegimeRecord {
    double t = 0;
    double h_c = std::numeric_limits<double>::quiet_NaN();
    double p_tilde = 0;
    double nu = std::numeric_limits<double>::quiet_NaN();
    double phi = 0;
    Regime regime = Regime::Josephson;
    bool available = false; // false when J = 0
};

inline RegimeRecord regime_indicator(double n_a, double n_b, double phi, double josephson,
                                     double kappa, double atom_number,
                                     ImbalanceNormalization norm = ImbalanceNormalization::Total)
{
    RegimeRecord r;
    r.phi = phi;
    const double n_trap = n_a + n_b;
    const double denom = norm == ImbalanceNormalization::Total ? atom_number : n_trap;
    r.p_tilde = denom > 0 ? (n_a - n_b) / denom : 0.0;
    if (josephson == 0.0) return r;

    r.available = true;
    r.nu = kappa * n_trap / josephson;
    const double one_minus_p2 = std::max(0.0, 1.0 - r.p_tilde * r.p_tilde);
    r.h_c = 0.5 * r.nu * r.p_tilde * r.p_tilde + std::sqrt(one_minus_p2) * std::cos(phi);
    r.regime = r.h_c < 1.0 ? Regime::Josephson : Regime::SelfTrapping;
    return r;
}

inline double relative_phase(const SystemState& s) { return std::arg(std::conj(s.amp_a) * s.amp_b); }

/// H_c at the state's time. `eta` defaults to the separation at t = 0 (derived.josephson).
inline RegimeRecord classify(const SystemState& s, const DerivedParams& d, double atom_number,
                             std::optional<double> eta = std::nullopt,
                             ImbalanceNormalization norm = ImbalanceNormalization::Total)
{
    const double josephson = eta ? d.josephson_at(*eta) : d.josephson;
    RegimeRecord r = regime_indicator(std::norm(s.amp_a), std::norm(s.amp_b), relative_phase(s),
                                      josephson, d.kappa, atom_number, norm);
    r.t = s.t;
    return r;
}

/// Upper envelope: maximum over a sliding window of 2 * half_window + 1 samples.
inline std::vector<double> rolling_max(std::span<const double> values, std::size_t half_window)
{
    std::vector<double> out(values.size());
    std::deque<std::size_t> window; // indices with decreasing values
    const std::size_t n = values.size();
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t hi = std::min(n - 1, i + half_window);
        for (; next <= hi; ++next) {
            while (!window.empty() && values[window.back()] <= values[next]) window.pop_back();
            window.push_back(next);
        }
        while (window.front() + half_window < i) window.pop_front();
        out[i] = values[window.front()];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Global states |+-> = (|A> +- |B>)/sqrt(2)

struct GlobalStateRatio {
    double value = 0;   // P+/P-, +-inf when P- vanishes
    bool infinite = false;
};

inline GlobalStateRatio global_state_ratio(double fraction_a, double fraction_b, double phi)
{
    const double cross = 2.0 * std::sqrt(fraction_a * fraction_b) * std::cos(phi);
    const double num = 1.0 + cross;
    const double den = 1.0 - cross;
    if (std::abs(den) <= 1e-15) {
        return {std::copysign(std::numeric_limits<double>::infinity(), num), true};
    }
    return {num / den, false};
}

// ---------------------------------------------------------------------------
// Peaks and dips on a uniform grid

struct PeakDetectionSettings {
    double peak_prominence = 0.02; // fraction of the global maximum
    double dip_prominence = 0.02;  // fraction of the global maximum
    // Optional analysis window; the global maximum is then taken inside it.
    std::optional<double> omega_min;
    std::optional<double> omega_max;
};

struct Peak {
    std::size_t index = 0;
    double omega = 0;
    double height = 0;
    double prominence = 0;
    double width = 0; // full width at half prominence
};

struct Dip {
    std::size_t index = 0;
    double omega = 0;
    double depth = 0;          // prominence of the minimum (same units as density)
    double relative_depth = 0; // depth / lower of the two enclosing maxima; 1 for a perfect dark line
};

namespace detail {

// Local maxima of v (plateaus reported at their lowest index). Endpoints never qualify.
inline std::vector<std::size_t> local_maxima(std::span<const double> v)
{
    std::vector<std::size_t> out;
    const std::size_t n = v.size();
    std::size_t i = 1;
    while (i + 1 < n) {
        if (v[i - 1] < v[i]) {
            std::size_t ahead = i + 1;
            while (ahead + 1 < n && v[ahead] == v[i]) ++ahead;
            if (v[ahead] < v[i]) {
                out.push_back(i);
                i = ahead;
                continue;
            }
        }
        ++i;
    }
    return out;
}

inline std::vector<std::size_t> local_minima(std::span<const double> v)
{
    std::vector<double> neg(v.begin(), v.end());
    for (auto& x : neg) x = -x;
    return local_maxima(neg);
}

struct ProminenceInfo {
    double prominence;
    std::size_t left_base;
    std::size_t right_base;
};

inline ProminenceInfo prominence(std::span<const double> v, std::size_t i)
{
    const double h = v[i];
    std::size_t l = i, left_base = i;
    double left_min = h;
    while (l > 0) {
        --l;
        if (v[l] > h) break;
        if (v[l] < left_min) {
            left_min = v[l];
            left_base = l;
        }
    }
    std::size_t r = i, right_base = i;
    double right_min = h;
    while (r + 1 < v.size()) {
        ++r;
        if (v[r] > h) break;
        if (v[r] < right_min) {
            right_min = v[r];
            right_base = r;
        }
    }
    return {h - std::max(left_min, right_min), left_base, right_base};
}

inline double interpolate_crossing(double x0, double y0, double x1, double y1, double level)
{
    if (y1 == y0) return x0;
    return x0 + (level - y0) * (x1 - x0) / (y1 - y0);
}

} // namespace detail

/// Local maxima with prominence >= settings.peak_prominence * max(density), ordered by omega.
inline std::vector<Peak> detect_peaks(std::span<const double> density, std::span<const double> omegas,
                                      const PeakDetectionSettings& settings = {})
{
    std::vector<Peak> peaks;
    if (density.size() < 3) return peaks;
    const double global_max = *std::max_element(density.begin(), density.end());
    if (!(global_max > 0)) return peaks;
    const double threshold = settings.peak_prominence * global_max;

    for (std::size_t i : detail::local_maxima(density)) {
        const auto info = detail::prominence(density, i);
        if (info.prominence < threshold || info.prominence <= 0) continue;
        const double level = density[i] - 0.5 * info.prominence;

        std::size_t l = i;
        while (l > info.left_base && density[l] > level) --l;
        double w_left = density[l] > level ? omegas[l]
                                           : detail::interpolate_crossing(omegas[l], density[l], omegas[l + 1],
                                                                          density[l + 1], level);
        std::size_t r = i;
        while (r < info.right_base && density[r] > level) ++r;
        double w_right = density[r] > level ? omegas[r]
                                            : detail::interpolate_crossing(omegas[r - 1], density[r - 1],
                                                                           omegas[r], density[r], level);
        peaks.push_back({i, omegas[i], density[i], info.prominence, w_right - w_left});
    }
    return peaks;
}

/// Local minima strictly between the outermost detected peaks whose prominence (depth)
/// is at least settings.dip_prominence * max(density).
inline std::vector<Dip> detect_dips(std::span<const double> density, std::span<const double> omegas,
                                    std::span<const Peak> peaks, const PeakDetectionSettings& settings = {})
{
    std::vector<Dip> dips;
    if (peaks.size() < 2) return dips;
    const double global_max = *std::max_element(density.begin(), density.end());
    const double threshold = settings.dip_prominence * global_max;
    const std::size_t lo = peaks.front().index;
    const std::size_t hi = peaks.back().index;

    std::vector<double> neg(density.begin(), density.end());
    for (auto& x : neg) x = -x;
    for (std::size_t i : detail::local_maxima(neg)) {
        if (i <= lo || i >= hi) continue;
        const auto info = detail::prominence(neg, i);
        if (info.prominence < threshold || info.prominence <= 0) continue;
        const double enclosing = density[i] + info.prominence;
        dips.push_back({i, omegas[i], info.prominence, enclosing > 0 ? info.prominence / enclosing : 0.0});
    }
    return dips;
}

struct SpectrumAnalysis {
    std::vector<double> omegas;
    std::vector<double> density; // |c_j|^2 / epsilon, atoms per unit angular frequency
    double total_outcoupled = 0;
    std::vector<Peak> peaks;
    std::vector<Dip> dips;
    std::optional<double> peak_ratio; // right / left height of the two most prominent peaks
};

/// Right-to-left height ratio of the two most prominent peaks.
inline std::optional<double> doublet_ratio(std::span<const Peak> peaks)
{
    if (peaks.size() < 2) return std::nullopt;
    std::vector<Peak> sorted(peaks.begin(), peaks.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Peak& a, const Peak& b) { return a.prominence > b.prominence; });
    const Peak& p = sorted[0];
    const Peak& q = sorted[1];
    const Peak& left = p.omega < q.omega ? p : q;
    const Peak& right = p.omega < q.omega ? q : p;
    return right.height / left.height;
}

inline SpectrumAnalysis spectrum(const SystemState& final_state, const DiscretizedContinuum& cont,
                                 const PeakDetectionSettings& settings = {})
{
    SpectrumAnalysis s;
    s.omegas = cont.frequencies;
    s.density.resize(cont.mode_count);
    for (std::size_t j = 0; j < cont.mode_count; ++j) {
        const double n_j = j < final_state.amp_c.size() ? std::norm(final_state.amp_c[j]) : 0.0;
        s.density[j] = n_j / cont.spacing;
        s.total_outcoupled += n_j;
    }
    std::size_t lo = 0, hi = s.omegas.size();
    if (settings.omega_min)
        lo = static_cast<std::size_t>(std::lower_bound(s.omegas.begin(), s.omegas.end(), *settings.omega_min) -
                                      s.omegas.begin());
    if (settings.omega_max)
        hi = static_cast<std::size_t>(std::upper_bound(s.omegas.begin(), s.omegas.end(), *settings.omega_max) -
                                      s.omegas.begin());
    if (lo < hi) {
        const std::span<const double> dens(s.density.data() + lo, hi - lo);
        const std::span<const double> om(s.omegas.data() + lo, hi - lo);
        s.peaks = detect_peaks(dens, om, settings);
        s.dips = detect_dips(dens, om, s.peaks, settings);
        for (auto& p : s.peaks) p.index += lo;
        for (auto& d : s.dips) d.index += lo;
    }
    s.peak_ratio = doublet_ratio(s.peaks);
    return s;
}

} // namespace atomlaser

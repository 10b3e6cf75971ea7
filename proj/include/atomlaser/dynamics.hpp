#pragma once

// Mean-field dynamics of two tunnel-coupled condensates outcoupled into M
// discrete continuum modes.
//
// Integration runs in an interaction frame: both trap amplitudes are rotated by
// omega_z/2 and each continuum mode by its own omega_j, so the free rotation is
// exact and the adaptive stepper only sees the couplings. The frame phases
// exp(i (omega_j - omega_z/2) t) are generated by recurrence over the uniform grid.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "atomlaser/continuum.hpp"
#include "atomlaser/errors.hpp"
#include "atomlaser/observables.hpp"
#include "atomlaser/ode.hpp"
#include "atomlaser/params.hpp"
#include "atomlaser/state.hpp"

namespace atomlaser {

/// Rectangular outcoupling pulse: strength on [t_on, t_off], zero elsewhere.
struct PulseSchedule {
    double strength = 0; // s^-2
    double t_on = 0;
    double t_off = 0;

    double at(double t) const { return (t >= t_on && t <= t_off) ? strength : 0.0; }

    /// Lambda(t) / Lambda; couplings scale with its square root and the shift linearly.
    double factor(double t) const { return (strength > 0 && t >= t_on && t <= t_off) ? 1.0 : 0.0; }
};

inline PulseSchedule rectangular_pulse(const PhysicalParams& p) { return {p.outcoupling, 0.0, p.duration}; }

struct IntegratorSettings {
    double sample_dt = 1e-3;
    double rtol = 1e-9;
    double atol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
};

/// Lab-frame time derivative of the mean-field equations at fixed separation `eta`,
/// with the continuum couplings taken at full strength.
inline SystemState rhs(const SystemState& s, const DerivedParams& d, const DiscretizedContinuum& cont,
                       double eta)
{
    const cplx minus_i{0.0, -1.0};
    const double overlap = std::exp(-eta * eta);
    const double josephson = d.josephson_at(eta);
    const double tunnel = josephson - cont.shift * overlap;
    const double mu_a = d.trap_frequency + 2.0 * d.kappa * std::norm(s.amp_a);
    const double mu_b = d.trap_frequency + 2.0 * d.kappa * std::norm(s.amp_b);

    cplx coupled{};
    for (std::size_t j = 0; j < cont.mode_count; ++j) coupled += cont.couplings[j] * s.amp_c[j];

    SystemState out;
    out.t = s.t;
    out.amp_a = minus_i * ((mu_a - cont.shift) * s.amp_a + tunnel * s.amp_b + coupled);
    out.amp_b = minus_i * ((mu_b - cont.shift * overlap * overlap) * s.amp_b + tunnel * s.amp_a +
                           overlap * coupled);
    out.amp_c.resize(cont.mode_count);
    const cplx drive = s.amp_a + overlap * s.amp_b;
    for (std::size_t j = 0; j < cont.mode_count; ++j)
        out.amp_c[j] = minus_i * (cont.frequencies[j] * s.amp_c[j] + cont.couplings[j] * drive);
    return out;
}

/// Coherent initial state: <a> = sqrt(N alpha), <b> = sqrt(N beta) e^{i phi}, empty continuum.
/// `global_phase` rotates both trap amplitudes.
inline SystemState initial_state(const PhysicalParams& p, std::size_t mode_count, double global_phase = 0.0)
{
    SystemState s;
    s.t = 0;
    s.amp_a = std::polar(std::sqrt(p.atom_number * p.initial_fraction_a), global_phase);
    s.amp_b = std::polar(std::sqrt(p.atom_number * p.initial_fraction_b), global_phase + p.initial_phase);
    s.amp_c.assign(mode_count, cplx{});
    return s;
}

namespace detail {

// Interaction-frame right-hand side. State layout: [a, b, c_1 .. c_M].
class FrameModel {
public:
    FrameModel(const PhysicalParams& p, const DerivedParams& d, const DiscretizedContinuum& cont,
               PulseSchedule pulse)
        : params_(p), derived_(d), cont_(cont), pulse_(pulse)
    {
        for (double g : cont.couplings)
            if (g != 0.0) has_continuum_ = true;
    }

    double trap_frequency() const { return derived_.trap_frequency; }

    void operator()(double t, const std::vector<cplx>& y, std::vector<cplx>& dy) const
    {
        const double eta = params_.separation_at(t);
        const double overlap = std::exp(-eta * eta);
        const double josephson = derived_.josephson_at(eta);
        const double pulse = pulse_.factor(t);
        const double shift = cont_.shift * pulse;
        const double amp = std::sqrt(pulse);
        const double kappa2 = 2.0 * derived_.kappa;

        const cplx a = y[0];
        const cplx b = y[1];
        const cplx drive = a + overlap * b;
        const std::size_t m = cont_.mode_count;

        double s_re = 0, s_im = 0;
        if (has_continuum_ && amp > 0) {
            const double dr = amp * drive.real();
            const double di = amp * drive.imag();
            const double omega0 = derived_.trap_frequency;
            const double eps = cont_.spacing;
            const cplx step = std::polar(1.0, eps * t);
            const double zr = step.real(), zi = step.imag();
            constexpr std::size_t block = 64;
            for (std::size_t j0 = 0; j0 < m; j0 += block) {
                // Re-anchor the recurrence every block to bound rounding growth.
                const cplx anchor = std::polar(1.0, (static_cast<double>(j0 + 1) * eps - omega0) * t);
                double pr = anchor.real(), pi = anchor.imag();
                const std::size_t j1 = std::min(m, j0 + block);
                for (std::size_t j = j0; j < j1; ++j) {
                    const double g = cont_.couplings[j];
                    const double cr = y[j + 2].real(), ci = y[j + 2].imag();
                    // s += g c conj(p)
                    s_re += g * (cr * pr + ci * pi);
                    s_im += g * (ci * pr - cr * pi);
                    // dc = -i g p drive
                    const double qr = pr * dr - pi * di;
                    const double qi = pr * di + pi * dr;
                    dy[j + 2] = cplx{g * qi, -g * qr};
                    const double npr = pr * zr - pi * zi;
                    pi = pr * zi + pi * zr;
                    pr = npr;
                }
            }
        } else {
            for (std::size_t j = 0; j < m; ++j) dy[j + 2] = cplx{};
        }
        const cplx coupled = amp * cplx{s_re, s_im};
        const double tunnel = josephson - shift * overlap;
        const cplx ta = (kappa2 * std::norm(a) - shift) * a + tunnel * b + coupled;
        const cplx tb = (kappa2 * std::norm(b) - shift * overlap * overlap) * b + tunnel * a + overlap * coupled;
        dy[0] = cplx{ta.imag(), -ta.real()};
        dy[1] = cplx{tb.imag(), -tb.real()};
    }

    std::vector<cplx> to_frame(const SystemState& s) const
    {
        std::vector<cplx> y(cont_.mode_count + 2);
        const cplx r0 = std::polar(1.0, derived_.trap_frequency * s.t);
        y[0] = s.amp_a * r0;
        y[1] = s.amp_b * r0;
        for (std::size_t j = 0; j < cont_.mode_count; ++j)
            y[j + 2] = s.amp_c[j] * std::polar(1.0, cont_.frequencies[j] * s.t);
        return y;
    }

    SystemState from_frame(double t, const std::vector<cplx>& y) const
    {
        SystemState s;
        s.t = t;
        const cplx r0 = std::polar(1.0, -derived_.trap_frequency * t);
        s.amp_a = y[0] * r0;
        s.amp_b = y[1] * r0;
        s.amp_c.resize(cont_.mode_count);
        for (std::size_t j = 0; j < cont_.mode_count; ++j)
            s.amp_c[j] = y[j + 2] * std::polar(1.0, -cont_.frequencies[j] * t);
        return s;
    }

private:
    const PhysicalParams& params_;
    const DerivedParams& derived_;
    const DiscretizedContinuum& cont_;
    PulseSchedule pulse_;
    bool has_continuum_ = false;
};

inline ode::Settings ode_settings(const IntegratorSettings& s)
{
    ode::Settings o;
    o.tol.rtol = s.rtol;
    o.tol.atol = s.atol;
    o.max_step = s.max_step;
    return o;
}

} // namespace detail

/// Uniform sample times k * dt on [0, duration].
inline std::vector<double> sample_times(double duration, double dt)
{
    if (!(dt > 0)) throw ParameterError("sample_dt must be > 0");
    const auto count = static_cast<std::size_t>(std::floor(duration / dt * (1.0 + 1e-12)));
    std::vector<double> times(count + 1);
    for (std::size_t k = 0; k <= count; ++k) times[k] = std::min(duration, static_cast<double>(k) * dt);
    return times;
}

/// Integrates the full system over the pulse [0, tau] and samples observables every sample_dt.
inline Trajectory integrate(const PhysicalParams& p, const DerivedParams& d, const DiscretizedContinuum& cont,
                            const IntegratorSettings& settings = {}, double global_phase = 0.0)
{
    const detail::FrameModel model(p, d, cont, rectangular_pulse(p));
    const SystemState start = initial_state(p, cont.mode_count, global_phase);
    std::vector<cplx> y = model.to_frame(start);

    Trajectory traj;
    traj.sample_dt = settings.sample_dt;
    traj.atom_number = p.atom_number;
    const auto times = sample_times(p.duration, settings.sample_dt);
    traj.samples.reserve(times.size());

    auto observe = [&](double t, const std::vector<cplx>& state) {
        TrajectorySample smp;
        smp.t = t;
        smp.n_a = std::norm(state[0]);
        smp.n_b = std::norm(state[1]);
        double n_c = 0;
        for (std::size_t j = 2; j < state.size(); ++j) n_c += std::norm(state[j]);
        smp.n_c = n_c;
        smp.relative_phase = std::arg(std::conj(state[0]) * state[1]);
        const RegimeRecord r = regime_indicator(smp.n_a, smp.n_b, smp.relative_phase,
                                                d.josephson_at(p.separation_at(t)), d.kappa, p.atom_number);
        smp.h_c = r.h_c;
        smp.p_tilde = r.p_tilde;
        traj.max_norm_drift = std::max(traj.max_norm_drift, std::abs(smp.n_a + smp.n_b + smp.n_c - p.atom_number));
        traj.samples.push_back(smp);
    };

    const auto stats = ode::integrate(model, 0.0, y, p.duration, times, observe, detail::ode_settings(settings));
    traj.stats = {stats.accepted, stats.rejected, stats.evaluations};
    traj.final_state = model.from_frame(p.duration, y);
    return traj;
}

/// Propagates an arbitrary lab-frame state to t_end (forward or backward), pulse held on.
inline SystemState propagate(const SystemState& start, double t_end, const PhysicalParams& p,
                             const DerivedParams& d, const DiscretizedContinuum& cont,
                             const IntegratorSettings& settings = {})
{
    const PulseSchedule always_on{p.outcoupling, -std::numeric_limits<double>::infinity(),
                                  std::numeric_limits<double>::infinity()};
    const detail::FrameModel model(p, d, cont, always_on);
    std::vector<cplx> y = model.to_frame(start);
    ode::integrate(model, start.t, y, t_end, std::span<const double>{}, [](double, const auto&) {},
                   detail::ode_settings(settings));
    return model.from_frame(t_end, y);
}

/// Golden-rule decay rate of the total trapped population, pi D(omega_z / 2).
/// Each global state carries half of its weight in trap A, hence pi rather than 2 pi.
inline double markovian_reference(const PhysicalParams& p, const DerivedParams& d)
{
    return std::numbers::pi * spectral_response(d.trap_frequency, p.outcoupling, p.omega_z);
}

} // namespace atomlaser

#pragma once

// Dormand-Prince 5(4) with PI step-size control and the 4th-order continuous
// extension, for complex state vectors. Integrates forward or backward in time.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <string>
#include <vector>

#include "atomlaser/errors.hpp"

namespace atomlaser::ode {

using cplx = std::complex<double>;
using StateVector = std::vector<cplx>;

struct Tolerances {
    double rtol = 1e-9;
    double atol = 1e-12;
};

struct Statistics {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t evaluations = 0;
};

namespace dp5 {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
} // namespace dp5

struct Settings {
    Tolerances tol;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0; // 0: automatic
    std::size_t max_steps = 200'000'000;
};

/// Integrates dy/dt = rhs(t, y) from t0 to t1, overwriting y with y(t1).
///
/// `rhs(t, y, dy)` fills dy. `observe(t, y)` is called once for each entry of
/// `output_times` (ordered along the integration direction, inside [t0, t1]) with the
/// dense-output state at that time.
template <class Rhs, class Observer>
Statistics integrate(Rhs&& rhs, double t0, StateVector& y, double t1,
                     std::span<const double> output_times, Observer&& observe,
                     const Settings& settings = {})
{
    using namespace dp5;
    Statistics stats;
    const std::size_t n = y.size();
    const double dir = t1 >= t0 ? 1.0 : -1.0;
    const double rtol = settings.tol.rtol;
    const double atol = settings.tol.atol;

    std::size_t next_out = 0;
    auto emit_until = [&](double t_limit, auto&& state_at) {
        while (next_out < output_times.size() && (output_times[next_out] - t_limit) * dir <= 0) {
            state_at(output_times[next_out]);
            ++next_out;
        }
    };

    if (t0 == t1 || n == 0) {
        emit_until(t1, [&](double t) { observe(t, y); });
        return stats;
    }

    StateVector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);
    StateVector r2, r3, r4, r5, yout;

    auto error_norm = [&](const StateVector& a, const StateVector& b) {
        double sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sk = atol + rtol * std::max(std::abs(a[i]), std::abs(b[i]));
            sum += std::norm(ytmp[i]) / (sk * sk);
        }
        return std::sqrt(sum / static_cast<double>(n));
    };

    double t = t0;
    emit_until(t0, [&](double tt) { observe(tt, y); });

    rhs(t, std::as_const(y), k1);
    ++stats.evaluations;

    // Initial step guess (Hairer, Norsett & Wanner, II.4).
    double h = settings.initial_step;
    if (h == 0) {
        double d0 = 0, d1n = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sk = atol + rtol * std::abs(y[i]);
            d0 += std::norm(y[i]) / (sk * sk);
            d1n += std::norm(k1[i]) / (sk * sk);
        }
        d0 = std::sqrt(d0 / n);
        d1n = std::sqrt(d1n / n);
        double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
        h0 = std::min(h0, std::abs(t1 - t0));
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + (dir * h0) * k1[i];
        rhs(t + dir * h0, std::as_const(ytmp), k2);
        ++stats.evaluations;
        double d2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sk = atol + rtol * std::abs(y[i]);
            d2 += std::norm(k2[i] - k1[i]) / (sk * sk);
        }
        d2 = std::sqrt(d2 / n) / h0;
        const double dmax = std::max(d1n, d2);
        const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
        h = std::min(100 * h0, h1);
    }
    h = std::min({std::abs(h), settings.max_step, std::abs(t1 - t0)}) * dir;

    constexpr double beta = 0.04, safe = 0.9, fac_min = 0.2, fac_max = 10.0;
    const double expo1 = 0.2 - beta * 0.75;
    double fac_old = 1e-4;
    bool last_rejected = false;

    while (true) {
        if (stats.accepted + stats.rejected >= settings.max_steps)
            throw NumericalError("maximum number of integration steps exceeded at t = " +
                                     std::to_string(t), t);
        const double h_floor = 16.0 * std::numeric_limits<double>::epsilon() *
                               std::max(std::abs(t), std::abs(t1 - t0) * 1e-3);
        if (std::abs(h) < h_floor)
            throw NumericalError("step size underflow at t = " + std::to_string(t), t);

        bool last = false;
        if ((t + 1.01 * h - t1) * dir > 0) {
            h = t1 - t;
            last = true;
        }

        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a21 * k1[i]);
        rhs(t + c2 * h, std::as_const(ytmp), k2);
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs(t + c3 * h, std::as_const(ytmp), k3);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(t + c4 * h, std::as_const(ytmp), k4);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(t + c5 * h, std::as_const(ytmp), k5);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        rhs(t + h, std::as_const(ytmp), k6);
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        rhs(t + h, std::as_const(ynew), k7);
        stats.evaluations += 6;

        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double err = error_norm(y, ynew);
        if (!std::isfinite(err))
            throw NumericalError("non-finite state encountered at t = " + std::to_string(t), t);

        double fac = std::pow(err, expo1) / std::pow(fac_old, beta);
        fac = std::clamp(fac / safe, 1.0 / fac_max, 1.0 / fac_min);
        double h_new = h / fac;

        if (err <= 1.0) {
            fac_old = std::max(err, 1e-4);
            ++stats.accepted;
            const double t_new = t + h;

            if (next_out < output_times.size() && (output_times[next_out] - t_new) * dir <= 0) {
                if (r2.empty()) {
                    r2.resize(n);
                    r3.resize(n);
                    r4.resize(n);
                    r5.resize(n);
                    yout.resize(n);
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const cplx diff = ynew[i] - y[i];
                    const cplx bspl = h * k1[i] - diff;
                    r2[i] = diff;
                    r3[i] = bspl;
                    r4[i] = diff - h * k7[i] - bspl;
                    r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                                 d7 * k7[i]);
                }
                emit_until(t_new, [&](double tt) {
                    if (last && tt == t1) {
                        observe(tt, ynew);
                        return;
                    }
                    const double theta = (tt - t) / h;
                    const double theta1 = 1.0 - theta;
                    for (std::size_t i = 0; i < n; ++i)
                        yout[i] = y[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
                    observe(tt, std::as_const(yout));
                });
            }

            y.swap(ynew);
            k1.swap(k7);
            t = t_new;
            if (last) {
                t = t1;
                break;
            }
            h_new = dir * std::min(std::abs(h_new), settings.max_step);
            if (last_rejected) h_new = dir * std::min(std::abs(h_new), std::abs(h));
            last_rejected = false;
        } else {
            h_new = h / std::min(1.0 / fac_min, std::pow(err, expo1) / safe);
            ++stats.rejected;
            last_rejected = true;
        }
        h = h_new;
    }
    return stats;
}

} // namespace atomlaser::ode

#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

namespace atomlaser::quadrature {

struct Result {
    double value = 0;
    double error = 0;
    std::size_t evaluations = 0;
    bool converged = false;
};

namespace detail {

// Kronrod abscissae on [-1, 1] (non-negative half); odd indices are the Gauss-7 nodes.
inline constexpr std::array<double, 8> xk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> wk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment kronrod15(F& f, double a, double b)
{
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(centre);
    double kronrod = fc * wk[7];
    double gauss = fc * wg[3];
    for (int i = 0; i < 7; ++i) {
        const double dx = half * xk[i];
        const double sum = f(centre - dx) + f(centre + dx);
        kronrod += wk[i] * sum;
        if (i % 2 == 1) gauss += wg[i / 2] * sum;
    }
    return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

} // namespace detail

/// Integrate f over [a, b] until the summed error estimate is below
/// max(abs_tol, rel_tol * |value|) or max_segments is reached.
template <class F>
Result integrate(F&& f, double a, double b, double rel_tol = 1e-12, double abs_tol = 0.0,
                 std::size_t max_segments = 2000)
{
    Result r;
    if (a == b) {
        r.converged = true;
        return r;
    }
    std::priority_queue<detail::Segment> heap;
    heap.push(detail::kronrod15(f, a, b));
    r.evaluations = 15;
    double value = heap.top().value;
    double error = heap.top().error;

    while (error > std::max(abs_tol, rel_tol * std::abs(value)) && heap.size() < max_segments) {
        detail::Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > std::min(worst.a, worst.b) && mid < std::max(worst.a, worst.b))) {
            heap.push(worst);
            break; // interval cannot be split further in floating point
        }
        detail::Segment left = detail::kronrod15(f, worst.a, mid);
        detail::Segment right = detail::kronrod15(f, mid, worst.b);
        r.evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed the drift of the incremental updates.
    value = 0;
    error = 0;
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    r.value = value;
    r.error = error;
    r.converged = error <= std::max(abs_tol, rel_tol * std::abs(value));
    return r;
}

} // namespace atomlaser::quadrature

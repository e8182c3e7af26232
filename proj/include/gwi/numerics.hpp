#pragma once

// Adaptive Gauss-Kronrod quadrature and the few special functions the limit
// constants need.

#include "gwi/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <vector>

namespace gwi {

// Psi(x) = P(N >= x) for a standard normal N.
inline double normal_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;
    long evaluations = 0;
};

inline constexpr long kDefaultMaxEvaluations = 1'000'000;

namespace detail {

struct GkSegment {
    double a, b, value, error;
    bool operator<(const GkSegment& o) const { return error < o.error; }
};

// 15-point Kronrod rule with embedded 7-point Gauss rule (QUADPACK qk15 nodes).
template <typename F>
GkSegment gk15(F& f, double a, double b) {
    static constexpr double xgk[8] = {
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
    static constexpr double wgk[8] = {
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr double wg[4] = {
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kron = fc * wgk[7];
    double gauss = fc * wg[3];
    double absk = std::abs(kron);
    for (int j = 0; j < 7; ++j) {
        const double dx = half * xgk[j];
        const double f1 = f(center - dx);
        const double f2 = f(center + dx);
        kron += wgk[j] * (f1 + f2);
        absk += wgk[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) gauss += wg[j / 2] * (f1 + f2);
    }
    kron *= half;
    gauss *= half;
    absk *= std::abs(half);
    double err = std::abs(kron - gauss);
    // Round-off floor: differences below this are noise, not truncation error.
    const double floor = 50.0 * std::numeric_limits<double>::epsilon() * absk;
    if (err < floor) err = floor;
    return {a, b, kron, err};
}

}  // namespace detail

// Globally adaptive integration of f over [a, b] until the summed error
// estimate is below max(abs_tol, rel_tol |I|).
template <typename F>
QuadratureResult integrate(F&& f, double a, double b, double rel_tol = 1e-9, double abs_tol = 0.0,
                           long max_evaluations = kDefaultMaxEvaluations) {
    QuadratureResult out;
    if (a == b) return out;
    std::priority_queue<detail::GkSegment> heap;
    auto first = detail::gk15(f, a, b);
    out.evaluations = 15;
    double total = first.value;
    double total_err = first.error;
    heap.push(first);
    const double min_width = 64.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b));
    while (!(total_err <= std::max(abs_tol, rel_tol * std::abs(total)))) {
        if (!std::isfinite(total) || !std::isfinite(total_err))
            throw QuadratureFailure("non-finite integrand or error estimate");
        if (out.evaluations + 30 > max_evaluations)
            throw QuadratureFailure("tolerance not reached within " + std::to_string(max_evaluations) +
                                    " evaluations (error estimate " + std::to_string(total_err) + ")");
        auto worst = heap.top();
        if (std::abs(worst.b - worst.a) < min_width) break;
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        auto left = detail::gk15(f, worst.a, mid);
        auto right = detail::gk15(f, mid, worst.b);
        out.evaluations += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the running updates.
    total = 0.0;
    total_err = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        total_err += heap.top().error;
        heap.pop();
    }
    out.value = total;
    out.abs_error = total_err;
    return out;
}

// Integral over [a, inf) via t = a + (1 - v) / v on v in (0, 1].
template <typename F>
QuadratureResult integrate_to_infinity(F&& f, double a, double rel_tol = 1e-9, double abs_tol = 0.0,
                                       long max_evaluations = kDefaultMaxEvaluations) {
    auto mapped = [&](double v) {
        const double t = a + (1.0 - v) / v;
        const double y = f(t);
        return y == 0.0 ? 0.0 : y / (v * v);
    };
    return integrate(mapped, 0.0, 1.0, rel_tol, abs_tol, max_evaluations);
}

}  // namespace gwi

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hyponorm/errors.hpp"

namespace hyponorm::quad {

struct Result {
    double value;
    double abs_err;
};

namespace detail {

// Gauss 7 / Kronrod 15 node-weight table on [-1, 1] (positive half;
// nodes come in symmetric pairs, first row is the center).
// Columns: node, Gauss weight, Kronrod weight.
inline constexpr double kG7K15[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0,               0.204432940075298},
    {0.586087235467691, 0.0,               0.169004726639267},
    {0.864864423359769, 0.0,               0.104790010322250},
    {0.991455371120813, 0.0,               0.022935322010529},
};

template <class F>
Result g7k15_panel(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double f0 = f(c);
    double g7 = kG7K15[0][1] * f0;
    double k15 = kG7K15[0][2] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = h * kG7K15[i][0];
        const double fi = f(c + dx) + f(c - dx);
        g7 += kG7K15[i][1] * fi;
        k15 += kG7K15[i][2] * fi;
    }
    g7 *= h;
    k15 *= h;
    const double e = 200.0 * std::fabs(g7 - k15);
    return {k15, e * std::sqrt(e)};
}

} // namespace detail

/// Adaptive Gauss-Kronrod integration of f on [a, b]. The interval stack is
/// seeded with panels that shrink geometrically toward b so that endpoint
/// behavior like (1-x)^beta with beta in (-1, 0) refines without stalling.
/// Throws QuadratureNonConvergence when the panel budget is exhausted above
/// tolerance.
template <class F>
Result integrate(const F& f, double a, double b, double abs_tol,
                 std::size_t panel_budget = 10000) {
    struct Seg {
        double a, b;
    };
    std::vector<Seg> stack;
    // geometric cascade toward the right endpoint
    double left = a;
    for (int j = 0; j < 12 && left < b; ++j) {
        double right = b - (b - a) * std::ldexp(1.0, -(j + 1));
        if (j == 11 || right <= left) right = b;
        if (right > left) stack.push_back({left, right});
        left = right;
        if (right == b) break;
    }
    if (stack.empty()) stack.push_back({a, b});

    double sum = 0.0, err = 0.0;
    std::size_t panels = 0;
    const double per_panel = abs_tol / 64.0;
    while (!stack.empty()) {
        const Seg s = stack.back();
        stack.pop_back();
        const Result r = detail::g7k15_panel(f, s.a, s.b);
        ++panels;
        if (r.abs_err <= per_panel || r.abs_err <= 1e-3 * abs_tol * std::fabs(r.value)) {
            sum += r.value;
            err += r.abs_err;
            continue;
        }
        if (panels + stack.size() >= panel_budget) {
            // out of budget: keep the best we have and account for it
            sum += r.value;
            err += r.abs_err;
            for (const Seg& rest : stack) {
                const Result rr = detail::g7k15_panel(f, rest.a, rest.b);
                sum += rr.value;
                err += rr.abs_err;
            }
            if (err > abs_tol) {
                throw QuadratureNonConvergence(
                    "adaptive quadrature exceeded its panel budget");
            }
            return {sum, err};
        }
        const double mid = 0.5 * (s.a + s.b);
        stack.push_back({s.a, mid});
        stack.push_back({mid, s.b});
    }
    return {sum, err};
}

namespace detail {

// Integral over [lo, hi] of the quadratic through (x0,y0), (x1,y1), (x2,y2),
// in Newton form.
inline double quadratic_segment(double x0, double y0, double x1, double y1,
                                double x2, double y2, double lo, double hi) {
    const double f01 = (y1 - y0) / (x1 - x0);
    const double f12 = (y2 - y1) / (x2 - x1);
    const double f012 = (f12 - f01) / (x2 - x0);
    auto antider = [&](double x) {
        const double u = x - x0;
        // integral of y0 + f01*(x-x0) + f012*(x-x0)(x-x1)
        return y0 * x + f01 * 0.5 * u * u +
               f012 * (x * x * x / 3.0 - 0.5 * (x0 + x1) * x * x + x0 * x1 * x);
    };
    return antider(hi) - antider(lo);
}

} // namespace detail

/// Composite Simpson rule on a tabulated integrand (possibly non-uniform
/// grid), integrating the quadratic through each consecutive node triple.
/// `x` strictly increasing, `y` the integrand values.
inline double simpson_tabulated(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * (x[1] - x[0]) * (y[0] + y[1]);
    double sum = 0.0;
    std::size_t i = 0;
    for (; i + 2 < n; i += 2) {
        sum += detail::quadratic_segment(x[i], y[i], x[i + 1], y[i + 1], x[i + 2],
                                         y[i + 2], x[i], x[i + 2]);
    }
    if (i + 1 < n) {
        // odd interval count: close over the final interval with the quadratic
        // through the last three nodes
        sum += detail::quadratic_segment(x[n - 3], y[n - 3], x[n - 2], y[n - 2],
                                         x[n - 1], y[n - 1], x[n - 2], x[n - 1]);
    }
    return sum;
}

/// Simpson value on the supplied grid together with the Richardson
/// extrapolation against the half grid (every other node). The returned
/// abs_err is the raw full/half difference.
inline Result simpson_with_richardson(std::span<const double> x,
                                      std::span<const double> y) {
    const double full = simpson_tabulated(x, y);
    std::vector<double> hx, hy;
    for (std::size_t i = 0; i < x.size(); i += 2) {
        hx.push_back(x[i]);
        hy.push_back(y[i]);
    }
    if (hx.empty() || hx.back() != x.back()) {
        hx.push_back(x.back());
        hy.push_back(y.back());
    }
    const double half = simpson_tabulated(hx, hy);
    const double diff = full - half;
    return {full + diff / 15.0, std::fabs(diff)};
}

} // namespace hyponorm::quad

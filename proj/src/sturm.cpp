#include "hyponorm/sturm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hyponorm::sturm {

namespace {

double pivot_floor(const Chain& c) {
    double emax2 = 1.0;
    for (double e : c.offdiag) emax2 = std::max(emax2, e * e);
    return std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon() * emax2;
}

} // namespace

std::int64_t count_below(const Chain& c, double x) {
    const std::int64_t m = c.size();
    const double pivmin = pivot_floor(c);
    std::int64_t count = 0;
    double q = -x; // first diagonal entry is zero
    if (m == 1) q = c.last_diag - x;
    if (std::fabs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
    for (std::int64_t i = 1; i < m; ++i) {
        const double e = c.offdiag[static_cast<std::size_t>(i - 1)];
        const double d = (i == m - 1) ? c.last_diag : 0.0;
        q = (d - x) - e * e / q;
        if (std::fabs(q) < pivmin) q = -pivmin;
        if (q < 0.0) ++count;
    }
    return count;
}

double gershgorin_upper(const Chain& c) {
    const std::int64_t m = c.size();
    double bound = (m == 1) ? c.last_diag : 0.0;
    for (std::int64_t i = 0; i < m; ++i) {
        double row = (i == m - 1) ? c.last_diag : 0.0;
        if (i > 0) row += std::fabs(c.offdiag[static_cast<std::size_t>(i - 1)]);
        if (i + 1 < m) row += std::fabs(c.offdiag[static_cast<std::size_t>(i)]);
        bound = std::max(bound, row);
    }
    return bound;
}

Interval eigenvalue_from_top(const Chain& c, std::int64_t index, double abs_tol) {
    const std::int64_t m = c.size();
    if (index < 0 || index >= m) throw Error("eigenvalue index out of range");
    if (!(abs_tol > 0.0)) throw Error("bisection tolerance must be positive");
    const std::int64_t want = m - 1 - index; // eigenvalues strictly below target
    double hi = gershgorin_upper(c) * (1.0 + 4.0 * std::numeric_limits<double>::epsilon()) +
                std::numeric_limits<double>::min();
    double lo = -hi;
    // keep the invariant count(lo) <= want < count(hi)
    int guard = 0;
    while (count_below(c, hi) <= want) {
        hi += std::max(1.0, std::fabs(hi));
        if (++guard > 64) throw Error("sturm bisection failed to bracket from above");
    }
    guard = 0;
    while (count_below(c, lo) > want) {
        lo -= std::max(1.0, std::fabs(lo));
        if (++guard > 64) throw Error("sturm bisection failed to bracket from below");
    }
    for (int it = 0; it < 2048 && (hi - lo) > abs_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break; // hit floating resolution
        if (count_below(c, mid) > want) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return {lo, hi};
}

Interval largest_eigenvalue(const Chain& c, double abs_tol) {
    return eigenvalue_from_top(c, 0, abs_tol);
}

std::vector<double> all_eigenvalues(const Chain& c, double abs_tol, Exec exec) {
    const std::int64_t m = c.size();
    std::vector<double> vals(static_cast<std::size_t>(m));
    if (exec == Exec::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
        for (std::int64_t i = 0; i < m; ++i) {
            vals[static_cast<std::size_t>(i)] = eigenvalue_from_top(c, m - 1 - i, abs_tol).mid();
        }
    } else {
        for (std::int64_t i = 0; i < m; ++i) {
            vals[static_cast<std::size_t>(i)] = eigenvalue_from_top(c, m - 1 - i, abs_tol).mid();
        }
    }
    return vals;
}

std::vector<double> eigenvector(const Chain& c, const Interval& lambda) {
    const std::int64_t m = c.size();
    // Shift just above the bracket: T - sigma I is negative definite for the
    // top eigenvalue, so the unpivoted LDL^T sweep is stable.
    const double scale = std::max(1.0, std::fabs(lambda.hi));
    const double sigma = lambda.hi + std::max(4.0 * lambda.width(),
                                              64.0 * std::numeric_limits<double>::epsilon() * scale);

    std::vector<double> d(static_cast<std::size_t>(m));
    std::vector<double> x(static_cast<std::size_t>(m), 1.0 / std::sqrt(static_cast<double>(m)));

    auto solve_in_place = [&](std::vector<double>& rhs) {
        // forward elimination of (T - sigma I) with zero diagonal (+boundary)
        d[0] = ((m == 1) ? c.last_diag : 0.0) - sigma;
        for (std::int64_t i = 1; i < m; ++i) {
            const double e = c.offdiag[static_cast<std::size_t>(i - 1)];
            const double diag = (i == m - 1) ? c.last_diag : 0.0;
            const double l = e / d[static_cast<std::size_t>(i - 1)];
            d[static_cast<std::size_t>(i)] = (diag - sigma) - l * e;
            rhs[static_cast<std::size_t>(i)] -= l * rhs[static_cast<std::size_t>(i - 1)];
        }
        rhs[static_cast<std::size_t>(m - 1)] /= d[static_cast<std::size_t>(m - 1)];
        for (std::int64_t i = m - 2; i >= 0; --i) {
            rhs[static_cast<std::size_t>(i)] =
                (rhs[static_cast<std::size_t>(i)] -
                 c.offdiag[static_cast<std::size_t>(i)] * rhs[static_cast<std::size_t>(i + 1)]) /
                d[static_cast<std::size_t>(i)];
        }
    };

    for (int iter = 0; iter < 24; ++iter) {
        solve_in_place(x);
        double norm = 0.0;
        for (double v : x) norm += v * v;
        norm = std::sqrt(norm);
        for (double& v : x) v /= norm;
        // residual ||T x - lambda x||_inf against the bracket midpoint
        double resid = 0.0;
        const double lam = lambda.mid();
        for (std::int64_t i = 0; i < m; ++i) {
            double tv = 0.0;
            if (i > 0) tv += c.offdiag[static_cast<std::size_t>(i - 1)] * x[static_cast<std::size_t>(i - 1)];
            if (i + 1 < m) tv += c.offdiag[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i + 1)];
            if (i == m - 1) tv += c.last_diag * x[static_cast<std::size_t>(i)];
            resid = std::max(resid, std::fabs(tv - lam * x[static_cast<std::size_t>(i)]));
        }
        if (resid <= std::max(4.0 * lambda.width(), 1e-13 * scale)) break;
    }
    // fix the overall sign: the top eigenvector of a positive chain is signed
    double sum = 0.0;
    for (double v : x) sum += v;
    if (sum < 0.0) {
        for (double& v : x) v = -v;
    }
    return x;
}

} // namespace hyponorm::sturm

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hyponorm/jacobi.hpp"

namespace hyponorm::sturm {

/// Symmetric tridiagonal matrix with zero diagonal except possibly a single
/// value on the last diagonal slot (the boundary-absorption term the norm
/// certificates use). Size is offdiag.size() + 1.
struct Chain {
    std::span<const double> offdiag;
    double last_diag = 0.0;

    std::int64_t size() const { return static_cast<std::int64_t>(offdiag.size()) + 1; }
};

/// Number of eigenvalues strictly below x, by the sign count of the LDL^T
/// pivots of (T - xI). Scaled recurrence with a pivot floor, so it never
/// overflows or divides by zero.
std::int64_t count_below(const Chain& c, double x);

/// Gershgorin upper bound for the largest eigenvalue.
double gershgorin_upper(const Chain& c);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double mid() const { return 0.5 * (lo + hi); }
    double width() const { return hi - lo; }
};

/// Bisection bracket of width <= abs_tol around the index-th eigenvalue
/// counted from the top (0 = largest). The endpoints carry the sign-count
/// certificate: count_below(lo) <= size-1-index < count_below(hi).
Interval eigenvalue_from_top(const Chain& c, std::int64_t index, double abs_tol);

/// Bracket of the largest eigenvalue; equals the spectral norm of the
/// truncation when the diagonal is zero.
Interval largest_eigenvalue(const Chain& c, double abs_tol);

/// All eigenvalues, ascending, each located to abs_tol by independent
/// bisections. The parallel version distributes eigenvalue indices across
/// threads and is bitwise identical to the serial reference.
std::vector<double> all_eigenvalues(const Chain& c, double abs_tol,
                                    Exec exec = Exec::Parallel);

/// Inverse iteration for the eigenvector of an isolated eigenvalue lambda
/// (shift placed just outside the spectrum keeps the factorization definite).
/// Returns a unit vector with nonnegative dominant sign.
std::vector<double> eigenvector(const Chain& c, const Interval& lambda);

} // namespace hyponorm::sturm

#pragma once

#include <cmath>

// Stable differences of log-gamma and trigamma. The moment machinery needs
// lgamma(z + d) - lgamma(z) for z up to ~1e12 without forming the two huge
// values; the naive difference loses all significant digits long before that.

namespace hyponorm::special {

namespace detail {

// Stirling correction S(z) with lgamma(z) = (z-1/2)ln z - z + ln(2*pi)/2 + S(z).
inline double stirling_tail(double z) {
    const double w = 1.0 / (z * z);
    // Bernoulli series: 1/(12z) - 1/(360z^3) + 1/(1260z^5) - 1/(1680z^7)
    return (((-1.0 / 1680.0 * w + 1.0 / 1260.0) * w - 1.0 / 360.0) * w + 1.0 / 12.0) / z;
}

inline constexpr double kShiftThreshold = 32.0;

} // namespace detail

/// lgamma(z + d) - lgamma(z) for z > 0, d >= 0, accurate to a few ulp of the
/// (small) result even when both lgamma values are astronomically large.
inline double lgamma_diff(double z, double d) {
    if (d == 0.0) return 0.0;
    double acc = 0.0;
    // Shift z upward until Stirling applies; each step uses
    // lgamma(z) = lgamma(z+1) - ln z.
    while (z < detail::kShiftThreshold) {
        acc -= std::log1p(d / z);
        z += 1.0;
    }
    // (z+d-1/2)ln(z+d) - (z-1/2)ln z - d  ==  (z-1/2)log1p(d/z) + d(ln(z+d) - 1)
    const double main = (z - 0.5) * std::log1p(d / z) + d * (std::log(z + d) - 1.0);
    return acc + main + detail::stirling_tail(z + d) - detail::stirling_tail(z);
}

/// trigamma(z) - trigamma(z + d) for z > 0, d >= 0 (a positive quantity,
/// trigamma is decreasing). Same stability contract as lgamma_diff.
inline double trigamma_diff(double z, double d) {
    if (d == 0.0) return 0.0;
    double acc = 0.0;
    while (z < detail::kShiftThreshold) {
        // trigamma(z) = trigamma(z+1) + 1/z^2
        acc += d * (2.0 * z + d) / (z * z * (z + d) * (z + d));
        z += 1.0;
    }
    // Asymptotic trigamma(z) ~ 1/z + 1/(2z^2) + 1/(6z^3) - 1/(30z^5) + 1/(42z^7),
    // differenced term by term through f(z) - f(z+d) = f(z)*(-expm1(-m*log1p(d/z))).
    const double zd = z + d;
    double r = d / (z * zd);                                   // 1/z - 1/(z+d)
    r += d * (2.0 * z + d) / (2.0 * z * z * zd * zd);          // 1/2z^2 term
    const double l = std::log1p(d / z);
    auto pow_term = [&](double coef, double m) {
        return coef / std::pow(z, m) * (-std::expm1(-m * l));
    };
    r += pow_term(1.0 / 6.0, 3.0);
    r += pow_term(-1.0 / 30.0, 5.0);
    r += pow_term(1.0 / 42.0, 7.0);
    return acc + r;
}

} // namespace hyponorm::special

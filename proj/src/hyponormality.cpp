#include "hyponorm/hyponormality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hyponorm {

std::string to_string(Classification c) {
    switch (c) {
        case Classification::Hyponormal: return "Hyponormal";
        case Classification::NotHyponormal: return "NotHyponormal";
        case Classification::Undecided: return "Undecided";
    }
    return "?";
}

double quadratic_weight(const MomentProvider& mp, const SymbolParams& p, std::int64_t k) {
    check_symbol_params(p);
    if (k < 0) throw Error("coefficient index must be >= 0");
    const double n2 = 2.0 * p.n;
    const double t = 2.0 * static_cast<double>(k);
    if (k < p.n) return mp.gamma(t + n2);
    return mp.pair_integral(t - n2, n2, n2) / mp.gamma(t - n2);
}

double coupling_coefficient(const MomentProvider& mp, const SymbolParams& p, std::int64_t k) {
    check_symbol_params(p);
    if (k < 0) throw Error("coefficient index must be >= 0");
    const double t = 2.0 * static_cast<double>(k);
    return mp.pair_integral(t, 2.0 * p.n, p.s) / mp.gamma(t);
}

namespace {

void check_coefficients(std::span<const double> u) {
    bool any = false;
    for (double v : u) {
        if (!(v >= 0.0)) throw Error("coefficient vectors must be nonnegative");
        if (v > 0.0) any = true;
    }
    if (!any) throw ZeroVector("coefficient vector is identically zero");
}

} // namespace

double commutator_form(const MomentProvider& mp, const SymbolParams& p,
                       std::span<const double> u, double c) {
    check_symbol_params(p);
    if (!(c >= 0.0)) throw Error("coupling strength c must be >= 0");
    check_coefficients(u);
    const auto m = static_cast<std::int64_t>(u.size());
    double diag = 0.0, cross = 0.0;
    for (std::int64_t k = 0; k < m; ++k) {
        const double uk = u[static_cast<std::size_t>(k)];
        if (uk != 0.0) diag += uk * uk * quadratic_weight(mp, p, k);
        if (k + p.n < m) {
            const double un = u[static_cast<std::size_t>(k + p.n)];
            if (uk != 0.0 && un != 0.0) {
                cross += uk * un * coupling_coefficient(mp, p, k);
            }
        }
    }
    return diag - 2.0 * c * cross;
}

double rayleigh_kappa(const MomentProvider& mp, const SymbolParams& p,
                      std::span<const double> u) {
    check_symbol_params(p);
    check_coefficients(u);
    const auto m = static_cast<std::int64_t>(u.size());
    double diag = 0.0, cross = 0.0;
    for (std::int64_t k = 0; k < m; ++k) {
        const double uk = u[static_cast<std::size_t>(k)];
        if (uk != 0.0) diag += uk * uk * quadratic_weight(mp, p, k);
        if (k + p.n < m) {
            const double un = u[static_cast<std::size_t>(k + p.n)];
            if (uk != 0.0 && un != 0.0) {
                cross += uk * un * coupling_coefficient(mp, p, k);
            }
        }
    }
    if (!(diag > 0.0)) throw ZeroVector("quotient denominator vanished");
    return 2.0 * cross / diag;
}

double rayleigh_kappa(const MomentProvider& mp, const SymbolParams& p,
                      std::span<const std::pair<std::int64_t, double>> u) {
    check_symbol_params(p);
    double diag = 0.0, cross = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const auto [k, v] = u[i];
        if (k < 0) throw Error("coefficient index must be >= 0");
        if (i > 0 && k <= u[i - 1].first) throw Error("sparse coefficients must be sorted");
        if (!(v >= 0.0)) throw Error("coefficient vectors must be nonnegative");
        if (v == 0.0) continue;
        any = true;
        diag += v * v * quadratic_weight(mp, p, k);
        // partner at k + n, if present
        const std::int64_t want = k + p.n;
        for (std::size_t j = i + 1; j < u.size() && u[j].first <= want; ++j) {
            if (u[j].first == want && u[j].second != 0.0) {
                cross += v * u[j].second * coupling_coefficient(mp, p, k);
                break;
            }
        }
    }
    if (!any || !(diag > 0.0)) throw ZeroVector("quotient denominator vanished");
    return 2.0 * cross / diag;
}

double oracle_residual(const JacobiOperator& op, const NormEstimate& est) {
    const SectionRef& w = est.witness;
    if (w.length < 2) throw Error("norm estimate carries no usable witness section");
    const int n = op.band();
    // entries along the witness chain section
    const std::vector<double> off = materialize_entries(
        op, w.residue + w.start * n, n, w.length - 1, Exec::Parallel);
    const sturm::Chain chain{std::span(off.data(), off.size()), 0.0};
    const double bis = std::max(est.tol / 8.0, 1e-14);
    const sturm::Interval lam = sturm::largest_eigenvalue(chain, bis);
    const std::vector<double> v = sturm::eigenvector(chain, lam);

    // map back through v_j = u_j sqrt(d_j); clamp the tiny negative entries
    // inverse iteration can leave on a Perron vector
    std::vector<std::pair<std::int64_t, double>> u;
    u.reserve(v.size());
    const auto& mp = op.provider();
    const SymbolParams& p = op.params();
    for (std::size_t j = 0; j < v.size(); ++j) {
        const std::int64_t k = w.residue + (w.start + static_cast<std::int64_t>(j)) * n;
        const double d = quadratic_weight(mp, p, k);
        if (!(d > 0.0)) throw DegenerateDenominator("vanishing weight in the u-substitution");
        u.emplace_back(k, std::max(0.0, v[j]) / std::sqrt(d));
    }
    const double kappa = rayleigh_kappa(mp, p, std::span(u.data(), u.size()));
    return std::fabs(kappa - est.lower);
}

double oracle_crosscheck(const JacobiOperator& op, double tol, TruncationPolicy policy) {
    const NormEstimate est = operator_norm(op, tol, policy);
    return oracle_residual(op, est);
}

HyponormalityReport threshold(const JacobiOperator& op, double tol, TruncationPolicy policy) {
    HyponormalityReport rep;
    rep.params = op.params();
    rep.norm = operator_norm(op, tol, policy);
    rep.assumption_banner = rep.norm.banner;
    rep.threshold_lower = (rep.norm.upper > 0.0) ? 1.0 / rep.norm.upper : 0.0;
    rep.threshold_upper = (rep.norm.lower > 0.0)
                              ? 1.0 / rep.norm.lower
                              : std::numeric_limits<double>::infinity();
    rep.oracle_residual = oracle_residual(op, rep.norm);
    return rep;
}

Classification classify(const HyponormalityReport& report, double c_modulus) {
    if (!(c_modulus >= 0.0)) throw Error("|C| must be >= 0");
    if (c_modulus <= report.threshold_lower) return Classification::Hyponormal;
    if (c_modulus > report.threshold_upper) return Classification::NotHyponormal;
    return Classification::Undecided;
}

Classification classify(const HyponormalityReport& report, std::complex<double> c) {
    return classify(report, std::abs(c));
}

} // namespace hyponorm

#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hyponorm/jacobi.hpp"
#include "hyponorm/spectral.hpp"

namespace hyponorm {

enum class Classification { Hyponormal, NotHyponormal, Undecided };

std::string to_string(Classification c);

/// Decision record for the symbol z^n + C|z|^s: the operator is hyponormal
/// exactly when |C| <= 1/||J||, so the norm bracket [lower, upper] becomes
/// the threshold bracket [1/upper, 1/lower]. A supplied C whose modulus falls
/// inside the bracket stays Undecided until the tolerance is tightened.
struct HyponormalityReport {
    SymbolParams params;
    double threshold_lower = 0.0;
    double threshold_upper = 0.0;
    std::optional<double> c_modulus;
    std::optional<Classification> classification;
    double oracle_residual = 0.0;
    NormEstimate norm;
    std::optional<std::string> assumption_banner;
};

/// Quadratic-form weight d_k multiplying u_k^2: gamma_{2k+2n} for k < n and
/// gamma_{2k+2n} - gamma_{2k}^2/gamma_{2k-2n} from k = n on.
double quadratic_weight(const MomentProvider& mp, const SymbolParams& p, std::int64_t k);

/// Coupling coefficient w_k multiplying u_k u_{k+n}:
/// gamma_{2k+2n+s} - gamma_{2k+2n} gamma_{2k+s} / gamma_{2k}.
double coupling_coefficient(const MomentProvider& mp, const SymbolParams& p, std::int64_t k);

/// Q(u, c) = sum u_k^2 d_k - 2c sum u_k u_{k+n} w_k. The symbol with |C| = c
/// is hyponormal iff Q(u, c) >= 0 for every admissible u. Entries of u must
/// be nonnegative with at least one positive.
double commutator_form(const MomentProvider& mp, const SymbolParams& p,
                       std::span<const double> u, double c);

/// The Rayleigh-type quotient 2 sum u_k u_{k+n} w_k / sum u_k^2 d_k whose
/// supremum over admissible u equals ||J||. Dense vectors index from k = 0;
/// the sparse overload takes explicit (k, u_k) pairs (sorted, distinct).
double rayleigh_kappa(const MomentProvider& mp, const SymbolParams& p,
                      std::span<const double> u);
double rayleigh_kappa(const MomentProvider& mp, const SymbolParams& p,
                      std::span<const std::pair<std::int64_t, double>> u);

/// Recover the best coefficient vector from the witness section of a norm
/// estimate (top eigenvector mapped back through u_k = v_j / sqrt(d_k)) and
/// return |rayleigh_kappa(u) - norm.lower|. The two sides travel independent
/// arithmetic paths, so agreement validates the entry formulas end to end.
double oracle_residual(const JacobiOperator& op, const NormEstimate& est);

/// operator_norm followed by oracle_residual.
double oracle_crosscheck(const JacobiOperator& op, double tol, TruncationPolicy policy = {});

/// Full decision pipeline: certified norm bracket, reciprocal threshold
/// bracket, oracle cross-check, assumption banner.
HyponormalityReport threshold(const JacobiOperator& op, double tol,
                              TruncationPolicy policy = {});

Classification classify(const HyponormalityReport& report, double c_modulus);
Classification classify(const HyponormalityReport& report, std::complex<double> c);

} // namespace hyponorm

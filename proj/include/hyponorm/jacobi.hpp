#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "hyponorm/measures.hpp"

namespace hyponorm {

/// Symbol z^n + C|z|^s: the matrix depends on (n, s) only; C enters later.
struct SymbolParams {
    int n = 1;
    double s = 2.0;
};

/// Throws unless n >= 1 and s > 0 finite.
void check_symbol_params(const SymbolParams& p);

enum class Exec { Serial, Parallel };

/// Abstract source of the off-band entries a_k placed at (n+k, k) and
/// (k, n+k) of a banded self-adjoint matrix with zero diagonal. Entries are
/// strictly positive and tend to `asymptote()` as k grows. Tests inject
/// synthetic chains through this interface.
class EntrySource {
public:
    virtual ~EntrySource() = default;
    virtual int band() const = 0;
    virtual double asymptote() const = 0;
    virtual double entry(std::int64_t k) const = 0;
    /// Pure recomputation with no cache interaction; the bulk kernels call
    /// this from parallel loops.
    virtual double entry_uncached(std::int64_t k) const { return entry(k); }
    /// Relative accuracy model for computed entries; feeds the certified
    /// bracket's rounding allowance.
    virtual double entry_rel_accuracy(std::int64_t k) const {
        (void)k;
        return 1e-13;
    }
    /// Whether entries at very large k stay cheap and trustworthy
    /// (closed-form moments). Quadrature-backed sources return false and the
    /// spectral layer keeps truncations modest.
    virtual bool far_entries_cheap() const { return true; }
    virtual std::optional<std::string> banner() const { return std::nullopt; }
};

/// The banded matrix built from a validated measure and (n, s):
///
///              pair(2k, 2n, s) / gamma_{2k}
///   a_k = ---------------------------------------------  (k >= n uses the
///         sqrt(D1_k) * sqrt(pair(2k, 2n, 2n)/gamma_{2k})   left factor D1_k =
///                                                          pair(2k-2n,2n,2n)/
///   D1_k = gamma_{2k+2n} for k < n                         gamma_{2k-2n})
///
/// with pair(t0,p,q) = gamma_{t0+p+q}gamma_{t0} - gamma_{t0+p}gamma_{t0+q}.
/// All three factors are strictly positive for measures satisfying the
/// standing hypotheses; degenerate measures (e.g. a single atom) turn a root
/// argument to zero and entry() throws DegenerateDenominator.
class JacobiOperator final : public EntrySource {
public:
    JacobiOperator(std::shared_ptr<const MomentProvider> provider, SymbolParams params);

    int band() const override { return params_.n; }
    double asymptote() const override { return params_.s / (2.0 * params_.n); }
    double entry(std::int64_t k) const override;
    double entry_uncached(std::int64_t k) const override;
    double entry_rel_accuracy(std::int64_t k) const override;
    bool far_entries_cheap() const override;
    std::optional<std::string> banner() const override;

    const SymbolParams& params() const { return params_; }
    const MomentProvider& provider() const { return *provider_; }
    std::shared_ptr<const MomentProvider> provider_ptr() const { return provider_; }

private:
    std::shared_ptr<const MomentProvider> provider_;
    SymbolParams params_;
    mutable std::mutex memo_mutex_;
    mutable std::unordered_map<std::int64_t, double> memo_;
};

/// Finite N x N section: symmetric, zero diagonal, bandwidth exactly n,
/// entries a_0 .. a_{N-n-1} at (k+n, k).
struct TruncatedMatrix {
    std::int64_t size = 0;
    int band = 1;
    std::vector<double> entries;

    double at(std::int64_t i, std::int64_t j) const;
    /// Dense row-major copy, for dumps and small-N test oracles.
    std::vector<double> dense() const;
};

TruncatedMatrix build_truncated(const EntrySource& src, std::int64_t N);

/// The permutation similarity splitting the band-n matrix into n independent
/// zero-diagonal tridiagonal chains: chain r couples indices r, r+n, r+2n, ...
/// with off-diagonals a_r, a_{r+n}, ... The eigenvalues of the N x N section
/// are exactly the union over chains of the truncated chain eigenvalues.
struct ChainDecomposition {
    int band = 1;
    std::vector<std::vector<double>> offdiags; // offdiags[r][j] = a_{r + j n}
};

ChainDecomposition decouple(const EntrySource& src, std::int64_t N);

/// Bulk entry generation a_{k0 + j*stride} for j < count. Slots are
/// independent, so the parallel version is bitwise identical to the serial
/// one; the serial path is kept as the reference for tests and benchmarks.
std::vector<double> materialize_entries(const EntrySource& src, std::int64_t k0,
                                        std::int64_t stride, std::int64_t count,
                                        Exec exec = Exec::Parallel);

} // namespace hyponorm

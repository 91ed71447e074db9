#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hyponorm/jacobi.hpp"
#include "hyponorm/sturm.hpp"

namespace hyponorm {

/// Controls the truncation ladder of operator_norm.
struct TruncationPolicy {
    std::int64_t initial_slots = 64;            ///< first section length per chain
    std::int64_t max_slots = std::int64_t{1} << 20;
    double tail_margin = 1e-3;                  ///< slack over the asymptote when the tail is irregular
    int lookahead_factor = 4;                   ///< tail window length = factor * section
    bool window_refinement = true;              ///< allow deep principal-window lower bounds
    std::int64_t max_window_start = std::int64_t{1} << 42;
    std::int64_t quadrature_max_slots = std::int64_t{1} << 13;
};

struct TraceRecord {
    std::int64_t truncation; ///< matrix-size equivalent of the work done so far
    double lower;            ///< best certified lower bound after this step
};

/// Principal section that realized the final lower bound: chain `residue`,
/// chain positions [start, start+length). The oracle recovers its eigenvector.
struct SectionRef {
    int residue = 0;
    std::int64_t start = 0;
    std::int64_t length = 0;
};

/// Certified two-sided bracket for the operator norm.
///
/// `lower` comes from principal-section eigenvalues (true lower bounds by the
/// variational principle). `upper` combines three rigorous bounds: the
/// constant-chain majorant 2*sup(entries), the boundary-absorbed head
/// eigenvalue, and the explicit top of a constant tail with one boundary
/// defect. The tail supremum itself is inferred from a lookahead window, so
/// `certified` additionally requires the window to sit near the asymptote and
/// behave monotonically — the paper proves convergence of the entries but no
/// rate, and the certificate says exactly what was checked.
struct NormEstimate {
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    std::int64_t truncation_size = 0;
    bool certified = false;
    std::vector<TraceRecord> trace;
    std::optional<std::string> banner;
    SectionRef witness;
    double tol = 0.0;

    double gap() const { return upper - lower; }
};

NormEstimate operator_norm(const EntrySource& src, double tol, TruncationPolicy policy = {});

/// Edge s/n of the essential interval [-s/n, s/n] of the infinite operator.
double essential_edge(const EntrySource& src);
double essential_edge(const SymbolParams& p);

struct EigRecord {
    double value = 0.0;
    int residue = 0;
    bool outlier = false;
};

/// Full eigenvalue scan of the N x N section, sorted ascending, each value
/// tagged with its residue chain and flagged when it escapes
/// [-s/n - margin, s/n + margin]. Flagged values are candidates for discrete
/// spectrum of the infinite operator, never certificates: finite sections
/// can pollute near the essential edge.
struct SpectrumScan {
    std::int64_t size = 0;
    double essential_edge = 0.0;
    double margin = 0.0;
    std::vector<EigRecord> eigenvalues;
    std::optional<std::string> banner;
};

SpectrumScan spectrum_scan(const EntrySource& src, std::int64_t N, double tol = 1e-10,
                           double margin = -1.0, Exec exec = Exec::Parallel);

/// Largest eigenvalue of the zero-diagonal tridiagonal matrix with the given
/// off-diagonal entries, to absolute accuracy tol. Equals the spectral norm
/// of the truncation.
double chain_extreme_eigenvalue(const std::vector<double>& offdiag, double tol);

} // namespace hyponorm

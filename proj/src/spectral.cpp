#include "hyponorm/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace hyponorm {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct TailInfo {
    double sup_bound = 0.0; ///< inferred supremum of entries beyond the section
    bool certified = false; ///< window sat near the asymptote and was monotone
    double max_seen = 0.0;  ///< largest entry observed in the window
};

// Inspect entries c[m .. m+L) (chain positions) and infer a bound for the
// supremum of all entries from position m on. Monotone approach toward the
// asymptote lets the bound collapse to max(window, asymptote); otherwise a
// margin is charged and the certificate is withheld.
TailInfo infer_tail(const std::vector<double>& c, std::int64_t m, std::int64_t L,
                    double asymptote, double margin) {
    TailInfo info;
    const auto total = static_cast<std::int64_t>(c.size());
    const std::int64_t end = std::min(total, m + L);
    if (m >= end) {
        info.sup_bound = asymptote * (1.0 + margin);
        info.max_seen = asymptote;
        return info;
    }
    double wmax = 0.0;
    bool nondecreasing = true;
    bool nonincreasing = true;
    const double slack = 1e-12 * std::max(1.0, asymptote);
    for (std::int64_t j = m; j < end; ++j) {
        const double v = c[static_cast<std::size_t>(j)];
        wmax = std::max(wmax, v);
        if (j > m) {
            const double prev = c[static_cast<std::size_t>(j - 1)];
            if (v < prev - slack) nondecreasing = false;
            if (v > prev + slack) nonincreasing = false;
        }
    }
    info.max_seen = wmax;
    const double last = c[static_cast<std::size_t>(end - 1)];
    const bool near = std::fabs(last - asymptote) <= margin * std::max(1.0, asymptote);
    if (near && nondecreasing && wmax <= asymptote * (1.0 + 1e-11)) {
        // increasing toward the limit from below: the limit bounds the tail
        info.sup_bound = std::max(asymptote, wmax);
        info.certified = true;
    } else if (near && nonincreasing) {
        // decreasing toward the limit from above: the window head bounds the tail
        info.sup_bound = std::max(wmax, asymptote);
        info.certified = true;
    } else {
        info.sup_bound = std::max(wmax, asymptote) * (1.0 + margin);
        info.certified = false;
    }
    return info;
}

struct ChainBracket {
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    bool tail_certified = false;
    SectionRef witness;
    std::vector<TraceRecord> trace;
    std::int64_t slots = 0;
};

// Entries of chain `r` as a growable buffer: c[j] = entry(r + j*band).
class ChainEntries {
public:
    ChainEntries(const EntrySource& src, int residue)
        : src_(src), residue_(residue), band_(src.band()) {}

    // extend to at least `count` values; false when the source gave out
    // (quadrature breakdown) — the caller works with what exists. Extension
    // happens in chunks so partial progress survives a failure.
    bool ensure(std::int64_t count) {
        if (count <= static_cast<std::int64_t>(buf_.size())) return true;
        if (exhausted_) return false;
        while (static_cast<std::int64_t>(buf_.size()) < count) {
            const auto have = static_cast<std::int64_t>(buf_.size());
            const std::int64_t chunk = std::min<std::int64_t>(count - have, 4096);
            try {
                std::vector<double> more = materialize_entries(
                    src_, residue_ + have * band_, band_, chunk, Exec::Parallel);
                buf_.insert(buf_.end(), more.begin(), more.end());
            } catch (const QuadratureNonConvergence&) {
                exhausted_ = true;
                return false;
            } catch (const DegenerateDenominator&) {
                if (buf_.empty()) throw; // degenerate from the start: refuse
                exhausted_ = true;
                return false;
            }
        }
        return true;
    }

    const std::vector<double>& data() const { return buf_; }

    // far window [start, start+len) fetched without growing the prefix buffer
    std::optional<std::vector<double>> window(std::int64_t start, std::int64_t len) const {
        try {
            return materialize_entries(src_, residue_ + start * band_, band_, len,
                                       Exec::Parallel);
        } catch (const QuadratureNonConvergence&) {
            return std::nullopt;
        }
    }

    double rel_accuracy(std::int64_t max_pos) const {
        return src_.entry_rel_accuracy(residue_ + max_pos * band_);
    }

private:
    const EntrySource& src_;
    int residue_;
    int band_;
    std::vector<double> buf_;
    bool exhausted_ = false;
};

ChainBracket chain_bracket(const EntrySource& src, int residue, double tol,
                           const TruncationPolicy& policy) {
    const int band = src.band();
    const double A = src.asymptote();
    ChainBracket out;
    out.witness.residue = residue;

    const std::int64_t max_slots =
        src.far_entries_cheap() ? policy.max_slots
                                : std::min(policy.max_slots, policy.quadrature_max_slots);

    ChainEntries entries(src, residue);
    double max_entry_seen = 0.0;
    std::int64_t m = std::max<std::int64_t>(2, policy.initial_slots);
    double prev_lower = -std::numeric_limits<double>::infinity();
    int stagnant = 0;

    const double bisect_tol = std::max(tol / 8.0, 4.0 * std::numeric_limits<double>::epsilon());

    // window length that keeps the principal-window eigenvalue within tol/4
    // of twice the local entry level: 2*b*cos(pi/(w+1)) >= 2*b - tol/4
    const auto window_len = [&]() {
        const double need = kPi * std::sqrt(std::max(A, 0.5) * 8.0 / tol);
        return std::clamp<std::int64_t>(static_cast<std::int64_t>(need) + 1, 64, 1 << 17);
    }();

    while (true) {
        const std::int64_t lookahead = policy.lookahead_factor * m;
        entries.ensure(m + lookahead);
        const auto& c = entries.data();
        const auto have = static_cast<std::int64_t>(c.size());
        if (have < 2) break;
        const std::int64_t use = std::min(m, have);

        for (std::int64_t j = 0; j < use; ++j) {
            max_entry_seen = std::max(max_entry_seen, c[static_cast<std::size_t>(j)]);
        }
        const double eps_entry = 2.0 * max_entry_seen * entries.rel_accuracy(have);

        // ---- lower bound: leading principal section of `use` slots
        const sturm::Chain head{std::span(c.data(), static_cast<std::size_t>(use - 1)), 0.0};
        const sturm::Interval lam = sturm::largest_eigenvalue(head, bisect_tol);
        const double lower_cand = std::max(0.0, lam.lo - eps_entry);
        if (lower_cand > out.lower) {
            out.lower = lower_cand;
            out.witness = {residue, 0, use};
        }

        // ---- tail inference beyond the section
        const TailInfo tail = infer_tail(c, use, lookahead, A, policy.tail_margin);
        for (std::int64_t j = use; j < std::min(have, use + lookahead); ++j) {
            max_entry_seen = std::max(max_entry_seen, c[static_cast<std::size_t>(j)]);
        }

        // ---- upper bounds
        // (a) constant majorant of the whole chain
        const double u_const = 2.0 * std::max(tail.sup_bound, max_entry_seen) + eps_entry;
        // (b) boundary-absorbed split at the section edge: the coupling entry
        //     is moved onto the diagonals of both halves, so
        //     ||chain|| <= max( lam_max(head + b_cut e_last), top(tail + b_cut e_first) ),
        //     and the tail factor is majorized by a constant chain with one
        //     boundary defect, whose top is explicit.
        double u_split = std::numeric_limits<double>::infinity();
        if (use < have) {
            const double b_cut = c[static_cast<std::size_t>(use - 1)];
            const sturm::Chain headb{std::span(c.data(), static_cast<std::size_t>(use - 1)),
                                     b_cut};
            const sturm::Interval lamb = sturm::largest_eigenvalue(headb, bisect_tol);
            const double T = tail.sup_bound;
            const double rho_tail = (b_cut <= T) ? 2.0 * T : b_cut + T * T / b_cut;
            u_split = std::max(lamb.hi + eps_entry, rho_tail + eps_entry);
        }
        const double upper_cand = std::min(u_const, u_split);
        if (upper_cand < out.upper) {
            out.upper = upper_cand;
            out.tail_certified = tail.certified;
        }

        out.slots = use;
        out.trace.push_back({use * band, out.lower});

        if (out.upper - out.lower <= tol) break;
        if (out.lower - prev_lower <= tol / 4.0) {
            ++stagnant;
        } else {
            stagnant = 0;
        }
        prev_lower = out.lower;

        // ---- deep-window refinement: principal sections far down the chain
        // close the lower bound in O(window) work instead of O(edge position)
        const bool window_ready = m >= 2048 || stagnant >= 2 || m >= max_slots;
        if (policy.window_refinement && src.far_entries_cheap() && window_ready &&
            out.upper - out.lower > tol) {
            int flat = 0;
            for (std::int64_t K = std::max<std::int64_t>(2 * m, window_len);
                 K <= policy.max_window_start; K *= 2) {
                const auto w = entries.window(K, window_len);
                if (!w) break;
                double wmin = (*w)[0];
                for (double v : *w) wmin = std::min(wmin, v);
                const sturm::Chain sec{std::span(w->data(), w->size() - 1), 0.0};
                const sturm::Interval wl = sturm::largest_eigenvalue(sec, bisect_tol);
                const double allowance =
                    2.0 * wmin * entries.rel_accuracy(K + window_len) * 2.0;
                const double cand = std::max(0.0, wl.lo - allowance);
                if (cand > out.lower + tol / 16.0) {
                    flat = 0;
                } else {
                    ++flat;
                }
                if (cand > out.lower) {
                    out.lower = cand;
                    out.witness = {residue, K, window_len};
                    out.trace.push_back({(K + window_len) * band, out.lower});
                }
                if (out.upper - out.lower <= tol) break;
                if (flat >= 2) break;
            }
        }

        if (out.upper - out.lower <= tol) break;
        if (m >= max_slots || have < m + 1) break;
        m = std::min(max_slots, m * 2);
    }
    return out;
}

} // namespace

NormEstimate operator_norm(const EntrySource& src, double tol, TruncationPolicy policy) {
    if (!(tol > 0.0)) throw Error("norm tolerance must be positive");
    const int n = src.band();
    NormEstimate est;
    est.tol = tol;
    est.banner = src.banner();

    std::vector<ChainBracket> brackets;
    brackets.reserve(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) {
        brackets.push_back(chain_bracket(src, r, tol, policy));
    }

    bool tails_ok = true;
    double lower = 0.0, upper = 0.0;
    std::int64_t total_slots = 0;
    for (const ChainBracket& b : brackets) {
        if (b.lower > lower) {
            lower = b.lower;
            est.witness = b.witness;
        }
        upper = std::max(upper, b.upper);
        tails_ok = tails_ok && b.tail_certified;
        total_slots += b.slots;
    }
    est.lower = lower;
    est.upper = upper;
    est.truncation_size = total_slots;
    est.certified = tails_ok && (upper - lower <= tol);

    // merge per-chain traces into one monotone record, ordered by work
    std::vector<TraceRecord> merged;
    for (const ChainBracket& b : brackets) {
        merged.insert(merged.end(), b.trace.begin(), b.trace.end());
    }
    std::sort(merged.begin(), merged.end(),
              [](const TraceRecord& a, const TraceRecord& b) {
                  return a.truncation < b.truncation;
              });
    double best = 0.0;
    for (TraceRecord& t : merged) {
        best = std::max(best, t.lower);
        t.lower = best;
        est.trace.push_back(t);
    }
    return est;
}

double essential_edge(const EntrySource& src) { return 2.0 * src.asymptote(); }

double essential_edge(const SymbolParams& p) {
    check_symbol_params(p);
    return p.s / p.n;
}

SpectrumScan spectrum_scan(const EntrySource& src, std::int64_t N, double tol, double margin,
                           Exec exec) {
    if (!(tol > 0.0)) throw Error("scan tolerance must be positive");
    if (margin < 0.0) margin = 10.0 * tol;
    SpectrumScan scan;
    scan.size = N;
    scan.essential_edge = essential_edge(src);
    scan.margin = margin;
    scan.banner = src.banner();

    const ChainDecomposition dec = decouple(src, N);
    for (int r = 0; r < dec.band; ++r) {
        const auto& off = dec.offdiags[static_cast<std::size_t>(r)];
        const sturm::Chain chain{std::span(off.data(), off.size()), 0.0};
        const std::vector<double> vals = sturm::all_eigenvalues(chain, tol, exec);
        for (double v : vals) {
            scan.eigenvalues.push_back(
                {v, r, std::fabs(v) > scan.essential_edge + margin});
        }
    }
    std::sort(scan.eigenvalues.begin(), scan.eigenvalues.end(),
              [](const EigRecord& a, const EigRecord& b) { return a.value < b.value; });
    return scan;
}

double chain_extreme_eigenvalue(const std::vector<double>& offdiag, double tol) {
    if (offdiag.empty()) throw Error("chain needs at least one off-diagonal entry");
    for (double e : offdiag) {
        if (!(e > 0.0)) throw Error("chain off-diagonal entries must be positive");
    }
    const sturm::Chain c{std::span(offdiag.data(), offdiag.size()), 0.0};
    return sturm::largest_eigenvalue(c, tol).mid();
}

} // namespace hyponorm

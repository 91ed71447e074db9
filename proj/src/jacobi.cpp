#include "hyponorm/jacobi.hpp"

#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hyponorm {

void check_symbol_params(const SymbolParams& p) {
    if (p.n < 1) throw Error("symbol power n must be >= 1");
    if (!(p.s > 0.0) || !std::isfinite(p.s)) throw Error("symbol power s must be finite and > 0");
}

JacobiOperator::JacobiOperator(std::shared_ptr<const MomentProvider> provider,
                               SymbolParams params)
    : provider_(std::move(provider)), params_(params) {
    if (!provider_) throw Error("null moment provider");
    check_symbol_params(params_);
    if (!provider_->validation().hypotheses_ok() && !provider_->forced()) {
        throw HypothesesViolated(provider_->validation().banner().value_or("hypotheses violated"));
    }
}

double JacobiOperator::entry_uncached(std::int64_t k) const {
    if (k < 0) throw Error("entry index must be >= 0");
    const auto& mp = *provider_;
    const double n2 = 2.0 * params_.n;
    const double s = params_.s;
    const double t = 2.0 * static_cast<double>(k);

    const double g2k = mp.gamma(t);
    const double num = mp.pair_integral(t, n2, s) / g2k;
    const double d2 = mp.pair_integral(t, n2, n2) / g2k;
    double d1;
    if (k < params_.n) {
        d1 = mp.gamma(t + n2);
    } else {
        const double g_prev = mp.gamma(t - n2);
        d1 = mp.pair_integral(t - n2, n2, n2) / g_prev;
    }

    // Root arguments vanish only for hypothesis-violating measures. Closed
    // forms evaluate the pair integrals to full relative precision, so only
    // genuine underflow counts as zero there; the generic moment-product path
    // cannot distinguish values below its own cancellation noise from zero.
    const double eps = std::numeric_limits<double>::epsilon();
    double floor_d = 1e-300;
    if (mp.method() == MomentMethod::Quadrature) {
        const double rel = mp.gamma_rel_accuracy(t + n2 + n2) + 8.0 * eps;
        floor_d = std::max(floor_d, 8.0 * rel * mp.gamma(t + n2) * mp.gamma(t + n2) / g2k);
    }
    if (!(d1 > floor_d) || !(d2 > floor_d) || !(num > 0.0)) {
        throw DegenerateDenominator(
            "matrix entry degenerates at k = " + std::to_string(k) +
            " (measure violates the standing hypotheses)");
    }
    return num / (std::sqrt(d1) * std::sqrt(d2));
}

double JacobiOperator::entry(std::int64_t k) const {
    {
        std::lock_guard<std::mutex> lk(memo_mutex_);
        auto it = memo_.find(k);
        if (it != memo_.end()) return it->second;
    }
    const double v = entry_uncached(k);
    {
        std::lock_guard<std::mutex> lk(memo_mutex_);
        memo_.emplace(k, v);
    }
    return v;
}

double JacobiOperator::entry_rel_accuracy(std::int64_t k) const {
    const double t = 2.0 * static_cast<double>(k) + 4.0 * params_.n + params_.s;
    const double g_acc = provider_->gamma_rel_accuracy(t);
    if (provider_->method() == MomentMethod::ClosedForm) {
        // pair integrals are evaluated cancellation-free; a few ulp each,
        // three of them per entry
        return 16.0 * g_acc;
    }
    // generic moment products lose ~ t^2/(pq) relative digits to cancellation
    const double amplify = t * t / std::max(1.0, 4.0 * params_.n * std::min(params_.s, 2.0 * params_.n));
    return std::min(1.0, 4.0 * g_acc * amplify);
}

bool JacobiOperator::far_entries_cheap() const { return provider_->closed_form_far_moments(); }

std::optional<std::string> JacobiOperator::banner() const {
    return provider_->validation().banner();
}

double TruncatedMatrix::at(std::int64_t i, std::int64_t j) const {
    if (i < 0 || j < 0 || i >= size || j >= size) throw Error("index out of range");
    if (i > j) std::swap(i, j);
    if (j - i != band) return 0.0;
    return entries[static_cast<std::size_t>(i)];
}

std::vector<double> TruncatedMatrix::dense() const {
    std::vector<double> d(static_cast<std::size_t>(size) * static_cast<std::size_t>(size), 0.0);
    for (std::int64_t k = 0; k + band < size; ++k) {
        d[static_cast<std::size_t>(k * size + k + band)] = entries[static_cast<std::size_t>(k)];
        d[static_cast<std::size_t>((k + band) * size + k)] = entries[static_cast<std::size_t>(k)];
    }
    return d;
}

TruncatedMatrix build_truncated(const EntrySource& src, std::int64_t N) {
    const int n = src.band();
    if (N < n + 1) throw Error("truncation size must be at least n + 1");
    TruncatedMatrix t;
    t.size = N;
    t.band = n;
    t.entries = materialize_entries(src, 0, 1, N - n);
    return t;
}

ChainDecomposition decouple(const EntrySource& src, std::int64_t N) {
    const int n = src.band();
    if (N < n + 1) throw Error("truncation size must be at least n + 1");
    ChainDecomposition dec;
    dec.band = n;
    dec.offdiags.resize(static_cast<std::size_t>(n));
    const std::vector<double> all = materialize_entries(src, 0, 1, N - n);
    for (int r = 0; r < n; ++r) {
        auto& chain = dec.offdiags[static_cast<std::size_t>(r)];
        for (std::int64_t k = r; k + n < N; k += n) {
            chain.push_back(all[static_cast<std::size_t>(k)]);
        }
    }
    return dec;
}

std::vector<double> materialize_entries(const EntrySource& src, std::int64_t k0,
                                        std::int64_t stride, std::int64_t count,
                                        Exec exec) {
    if (count < 0) throw Error("negative entry count");
    std::vector<double> out(static_cast<std::size_t>(count));
    if (exec == Exec::Parallel) {
        // exceptions cannot cross the omp region; stash the first and rethrow
        std::exception_ptr failure = nullptr;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::int64_t j = 0; j < count; ++j) {
            try {
                out[static_cast<std::size_t>(j)] = src.entry_uncached(k0 + j * stride);
            } catch (...) {
#ifdef _OPENMP
#pragma omp critical(hyponorm_entry_failure)
#endif
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    } else {
        for (std::int64_t j = 0; j < count; ++j) {
            out[static_cast<std::size_t>(j)] = src.entry_uncached(k0 + j * stride);
        }
    }
    return out;
}

} // namespace hyponorm

#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hyponorm/errors.hpp"

namespace hyponorm {

enum class MeasureKind { Area, BetaWeight, Atoms, SampledDensity };

struct Atom {
    double x;
    double mass;
};

/// A radial probability measure mu on [0,1].
///
///  - Area: d(mu) = 2r dr, i.e. nu is normalized area measure on the disk.
///  - BetaWeight(beta): d(mu) = (beta+1)(1-r^2)^beta * 2r dr, beta > -1.
///  - Atoms: finite list of point masses, strictly increasing positions.
///  - SampledDensity: tabulated density w(x) on a strictly increasing grid.
struct MeasureSpec {
    MeasureKind kind = MeasureKind::Area;
    double beta = 0.0;
    std::vector<Atom> atoms;
    std::vector<double> grid_x;
    std::vector<double> grid_w;
    bool normalized = false; // set when validate() rescaled the mass to 1

    static MeasureSpec area();
    static MeasureSpec beta_weight(double beta);
    static MeasureSpec from_atoms(std::vector<Atom> atoms);
    static MeasureSpec from_density(std::vector<double> x, std::vector<double> w);

    /// CSV loaders. Atoms files have header "x,mass", densities "x,w".
    static MeasureSpec load_atoms_csv(const std::string& path);
    static MeasureSpec load_density_csv(const std::string& path);

    std::string describe() const;
};

/// Outcome of checking the standing hypotheses: total mass 1, 1 in supp(mu),
/// mu({1}) = 0.
struct ValidationReport {
    bool mass_ok = false;
    bool atom_at_one = false;
    bool sup_support_lt_one = false;
    std::vector<std::string> warnings;

    bool hypotheses_ok() const { return mass_ok && !atom_at_one && !sup_support_lt_one; }
    std::optional<std::string> banner() const;
};

/// Validates `m` in place. With normalize the total mass is rescaled to 1
/// (and the flag recorded); without it a mass off by more than 1e-12 relative
/// throws NonProbabilityMass. Hypothesis violations (atom at 1, support
/// bounded away from 1) throw unless `force`; with force the report carries
/// the violation and downstream results get a banner.
ValidationReport validate(MeasureSpec& m, bool normalize, bool force);

enum class MomentMethod { ClosedForm, Quadrature };

struct Moment {
    double value;
    double abs_err;
};

/// Evaluator of the moment functional t -> gamma_t = integral of x^t d(mu)
/// over [0,1], for real t >= 0, with first-class support for the pair
/// integrals
///
///     pair_integral(t0, p, q)
///         = 1/2 * double integral of (xy)^t0 (x^p - y^p)(x^q - y^q)
///         = gamma_{t0+p+q} gamma_{t0} - gamma_{t0+p} gamma_{t0+q},
///
/// which appear under every matrix-entry root and cancel down to
/// O(pq/t0^2) relative size. Analytic families and atomic measures evaluate
/// these cancellation-free; tabulated densities fall back to the moment
/// products and flag the precision loss.
///
/// Thread safety: safe for concurrent reads after construction. The moment
/// cache may duplicate work under contention but never returns torn values.
class MomentProvider {
public:
    struct Options {
        bool normalize = false;
        bool force = false;
        double quad_abs_tol = 1e-10;
    };

    explicit MomentProvider(MeasureSpec measure) : MomentProvider(std::move(measure), Options{}) {}
    MomentProvider(MeasureSpec measure, Options opt);

    const MeasureSpec& measure() const { return measure_; }
    const ValidationReport& validation() const { return validation_; }
    MomentMethod method() const { return method_; }
    bool forced() const { return opt_.force; }

    /// gamma_t with an absolute error estimate; cached per exact binary t.
    Moment moment(double t) const;
    double gamma(double t) const { return moment(t).value; }

    /// gamma_{2k+t} / gamma_{2k}, the coefficient of the projection of
    /// z^k |z|^t back onto z^k.
    double projection_coefficient(std::int64_t k, double t) const;

    /// gamma_{t0+p+q} gamma_{t0} - gamma_{t0+p} gamma_{t0+q}; see class docs.
    double pair_integral(double t0, double p, double q) const;

    /// pair_integral at base exponent 2k (the form the matrix entries use).
    double symmetrized_pair_integral(std::int64_t k, double p, double q) const;

    /// k-th roots of the double integral of (xy)^k (x^{2n}-y^{2n})^2, the
    /// subexponential-decay diagnostic; tends to 1 for valid measures and to
    /// (sup supp)^2 < 1 for truncated-support ones.
    std::vector<double> subexponential_diagnostic(int n,
                                                  const std::vector<std::int64_t>& ks) const;

    /// Coarse relative-accuracy model for gamma(t), used by the spectral layer
    /// to budget certified brackets.
    double gamma_rel_accuracy(double t) const;

    /// True when moments come from closed forms cheap at arbitrarily large t
    /// (analytic families, atoms); false for quadrature-backed tabulations.
    bool closed_form_far_moments() const;

    /// Count of pair-integral evaluations that lost more than 8 significant
    /// digits to cancellation.
    std::uint64_t cancellation_warnings() const { return cancel_count_.load(); }

private:
    double gamma_uncached(double t, double* abs_err) const;
    double pair_integral_generic(double t0, double p, double q) const;

    MeasureSpec measure_;
    Options opt_;
    ValidationReport validation_;
    MomentMethod method_;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::uint64_t, Moment> cache_;
    mutable std::atomic<std::uint64_t> cancel_count_{0};
};

} // namespace hyponorm

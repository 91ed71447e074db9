#include "hyponorm/measures.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "hyponorm/quadrature.hpp"
#include "hyponorm/special.hpp"

namespace hyponorm {

namespace {

constexpr double kMassTol = 1e-12;
constexpr double kCancelThreshold = 1e-8; // more than 8 digits lost

std::uint64_t bit_key(double t) { return std::bit_cast<std::uint64_t>(t); }

// x^t for x in [0,1], t >= 0 without pow's poor corner handling.
double pow01(double x, double t) {
    if (t == 0.0) return 1.0;
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    return std::exp(t * std::log(x));
}

// log gamma_t for the beta family: gamma_t = Gamma(b+1) Gamma(z) / Gamma(z+b)
// with z = t/2 + 1, b = beta + 1. Area measure is beta = 0.
double log_gamma_beta(double t, double b) {
    const double z = 0.5 * t + 1.0;
    return std::lgamma(b + 1.0) - special::lgamma_diff(z, b);
}

std::vector<std::pair<double, double>> parse_two_column_csv(const std::string& path,
                                                            const char* header) {
    std::ifstream in(path);
    if (!in) throw BadInputFile("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw BadInputFile("empty file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) {
        throw BadInputFile(path + ": expected header \"" + header + "\", got \"" + line + "\"");
    }
    std::vector<std::pair<double, double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        double a, b;
        char comma;
        if (!(ss >> a >> comma >> b) || comma != ',') {
            throw BadInputFile(path + ": bad row at line " + std::to_string(lineno));
        }
        rows.emplace_back(a, b);
    }
    return rows;
}

} // namespace

MeasureSpec MeasureSpec::area() {
    MeasureSpec m;
    m.kind = MeasureKind::Area;
    return m;
}

MeasureSpec MeasureSpec::beta_weight(double beta) {
    if (!(beta > -1.0) || !std::isfinite(beta)) {
        throw Error("beta weight requires beta > -1");
    }
    MeasureSpec m;
    m.kind = MeasureKind::BetaWeight;
    m.beta = beta;
    return m;
}

MeasureSpec MeasureSpec::from_atoms(std::vector<Atom> atoms) {
    MeasureSpec m;
    m.kind = MeasureKind::Atoms;
    m.atoms = std::move(atoms);
    return m;
}

MeasureSpec MeasureSpec::from_density(std::vector<double> x, std::vector<double> w) {
    MeasureSpec m;
    m.kind = MeasureKind::SampledDensity;
    m.grid_x = std::move(x);
    m.grid_w = std::move(w);
    return m;
}

MeasureSpec MeasureSpec::load_atoms_csv(const std::string& path) {
    std::vector<Atom> atoms;
    for (auto [x, mass] : parse_two_column_csv(path, "x,mass")) atoms.push_back({x, mass});
    return from_atoms(std::move(atoms));
}

MeasureSpec MeasureSpec::load_density_csv(const std::string& path) {
    std::vector<double> xs, ws;
    for (auto [x, w] : parse_two_column_csv(path, "x,w")) {
        xs.push_back(x);
        ws.push_back(w);
    }
    return from_density(std::move(xs), std::move(ws));
}

std::string MeasureSpec::describe() const {
    switch (kind) {
        case MeasureKind::Area: return "area";
        case MeasureKind::BetaWeight: {
            std::ostringstream ss;
            ss << "beta:" << beta;
            return ss.str();
        }
        case MeasureKind::Atoms: return "atoms[" + std::to_string(atoms.size()) + "]";
        case MeasureKind::SampledDensity:
            return "density[" + std::to_string(grid_x.size()) + " nodes]";
    }
    return "?";
}

std::optional<std::string> ValidationReport::banner() const {
    if (hypotheses_ok()) return std::nullopt;
    std::string b = "assumptions violated:";
    if (!mass_ok) b += " mass!=1";
    if (atom_at_one) b += " atom-at-1";
    if (sup_support_lt_one) b += " sup-supp<1";
    return b;
}

ValidationReport validate(MeasureSpec& m, bool normalize, bool force) {
    ValidationReport rep;
    switch (m.kind) {
        case MeasureKind::Area:
            rep.mass_ok = true;
            break;
        case MeasureKind::BetaWeight:
            if (!(m.beta > -1.0)) throw Error("beta weight requires beta > -1");
            rep.mass_ok = true; // (beta+1)(1-r^2)^beta 2r dr integrates to 1 exactly
            break;
        case MeasureKind::Atoms: {
            if (m.atoms.empty()) throw EmptySupport("atom list is empty");
            double prev = -1.0;
            double mass = 0.0;
            for (const Atom& a : m.atoms) {
                if (!(a.x >= 0.0 && a.x <= 1.0)) throw Error("atom position outside [0,1]");
                if (!(a.mass > 0.0)) throw Error("atom mass must be positive");
                if (a.x <= prev) throw Error("atom positions must be strictly increasing");
                prev = a.x;
                mass += a.mass;
            }
            if (std::fabs(mass - 1.0) > kMassTol * std::max(1.0, mass)) {
                if (!normalize) {
                    throw NonProbabilityMass("atom masses sum to " + std::to_string(mass));
                }
                for (Atom& a : m.atoms) a.mass /= mass;
                m.normalized = true;
            }
            rep.mass_ok = true;
            const Atom& last = m.atoms.back();
            if (last.x == 1.0) {
                rep.atom_at_one = true;
                rep.warnings.push_back("measure has an atom at x=1 (mu({1}) must be 0)");
            } else {
                rep.sup_support_lt_one = true;
                rep.warnings.push_back("sup supp(mu) = " + std::to_string(last.x) +
                                       " < 1 (hypothesis 1 in supp(mu) fails)");
            }
            break;
        }
        case MeasureKind::SampledDensity: {
            const auto& x = m.grid_x;
            const auto& w = m.grid_w;
            if (x.size() != w.size()) throw Error("density grid size mismatch");
            if (x.size() < 3) throw Error("density grid needs at least 3 nodes");
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (!(x[i] >= 0.0 && x[i] <= 1.0)) throw Error("grid node outside [0,1]");
                if (i > 0 && x[i] <= x[i - 1]) throw Error("grid must be strictly increasing");
                if (!(w[i] >= 0.0)) throw Error("density values must be nonnegative");
            }
            const double mass = quad::simpson_tabulated(x, w);
            if (mass <= 0.0) throw EmptySupport("tabulated density carries no mass");
            if (std::fabs(mass - 1.0) > kMassTol * std::max(1.0, mass)) {
                if (!normalize) {
                    throw NonProbabilityMass("tabulated density mass is " + std::to_string(mass));
                }
                for (double& wi : m.grid_w) wi /= mass;
                m.normalized = true;
            }
            rep.mass_ok = true;
            // Support reaching 1 is detectable only from the tabulation: the
            // last node must be 1 and the final 5% of the grid must carry
            // nonzero density values.
            bool tail_alive = false;
            if (x.back() == 1.0) {
                const double cutoff = 0.95;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    if (x[i] >= cutoff && w[i] > 0.0) {
                        tail_alive = true;
                        break;
                    }
                }
            }
            if (!tail_alive) {
                rep.sup_support_lt_one = true;
                rep.warnings.push_back(
                    "tabulated density vanishes near x=1 (hypothesis 1 in supp(mu) fails)");
            }
            break;
        }
    }
    if (!rep.hypotheses_ok() && !force) {
        if (rep.atom_at_one) throw AtomAtOne("measure has an atom at x=1; pass force to proceed");
        throw HypothesesViolated(rep.banner().value_or("hypotheses violated") +
                                 "; pass force to proceed");
    }
    return rep;
}

MomentProvider::MomentProvider(MeasureSpec measure, Options opt)
    : measure_(std::move(measure)), opt_(opt) {
    validation_ = validate(measure_, opt_.normalize, opt_.force);
    method_ = (measure_.kind == MeasureKind::SampledDensity) ? MomentMethod::Quadrature
                                                             : MomentMethod::ClosedForm;
}

double MomentProvider::gamma_uncached(double t, double* abs_err) const {
    if (abs_err) *abs_err = 0.0;
    if (!(t >= 0.0) || !std::isfinite(t)) throw Error("moment exponent must be finite and >= 0");
    if (t == 0.0) return 1.0;
    switch (measure_.kind) {
        case MeasureKind::Area:
            return 2.0 / (t + 2.0);
        case MeasureKind::BetaWeight:
            return std::exp(log_gamma_beta(t, measure_.beta + 1.0));
        case MeasureKind::Atoms: {
            double sum = 0.0;
            for (const Atom& a : measure_.atoms) sum += a.mass * pow01(a.x, t);
            return sum;
        }
        case MeasureKind::SampledDensity: {
            const auto& x = measure_.grid_x;
            std::vector<double> y(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) {
                y[i] = pow01(x[i], t) * measure_.grid_w[i];
            }
            const quad::Result r = quad::simpson_with_richardson(x, y);
            if (abs_err) *abs_err = r.abs_err;
            return r.value;
        }
    }
    throw Error("unreachable measure kind");
}

Moment MomentProvider::moment(double t) const {
    if (!(t >= 0.0) || !std::isfinite(t)) throw Error("moment exponent must be finite and >= 0");
    const std::uint64_t key = bit_key(t);
    {
        std::lock_guard<std::mutex> lk(cache_mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    double err = 0.0;
    const double v = gamma_uncached(t, &err);
    if (method_ == MomentMethod::Quadrature && err > opt_.quad_abs_tol) {
        throw QuadratureNonConvergence("tabulated grid cannot resolve x^t at t = " +
                                       std::to_string(t) + " (error estimate " +
                                       std::to_string(err) + ")");
    }
    const Moment m{v, err};
    {
        std::lock_guard<std::mutex> lk(cache_mutex_);
        cache_.emplace(key, m);
    }
    return m;
}

double MomentProvider::projection_coefficient(std::int64_t k, double t) const {
    if (k < 0) throw Error("projection coefficient needs k >= 0");
    const double g2k = gamma(2.0 * static_cast<double>(k));
    if (g2k <= 0.0) throw DegenerateDenominator("gamma_{2k} vanished");
    return gamma(2.0 * static_cast<double>(k) + t) / g2k;
}

double MomentProvider::pair_integral_generic(double t0, double p, double q) const {
    const double a = gamma(t0 + p + q) * gamma(t0);
    const double b = gamma(t0 + p) * gamma(t0 + q);
    const double d = a - b;
    if (std::fabs(d) < kCancelThreshold * (std::fabs(a) + std::fabs(b))) {
        cancel_count_.fetch_add(1, std::memory_order_relaxed);
    }
    return d;
}

double MomentProvider::pair_integral(double t0, double p, double q) const {
    if (!(t0 >= 0.0) || !(p > 0.0) || !(q > 0.0)) {
        throw Error("pair integral needs t0 >= 0 and p, q > 0");
    }
    switch (measure_.kind) {
        case MeasureKind::Area:
        case MeasureKind::BetaWeight: {
            const double b = (measure_.kind == MeasureKind::Area) ? 1.0 : measure_.beta + 1.0;
            // gamma_{t0+p+q} gamma_{t0} / (gamma_{t0+p} gamma_{t0+q}) telescopes
            // into a finite product when p/2 (or q/2) is a positive integer:
            //   ln R = sum_{i<n} log1p( h*b / ((z+i)(z+h+b+i)) ),
            // z = t0/2+1, h = q/2. Every term is positive, so no digits cancel.
            double pp = p, qq = q;
            double n_real = pp / 2.0;
            if (std::fabs(n_real - std::round(n_real)) > 1e-9 || std::round(n_real) < 1.0) {
                std::swap(pp, qq);
                n_real = pp / 2.0;
            }
            const double z = 0.5 * t0 + 1.0;
            const double h = 0.5 * qq;
            if (std::fabs(n_real - std::round(n_real)) <= 1e-9 && std::round(n_real) >= 1.0) {
                const auto n = static_cast<std::int64_t>(std::llround(n_real));
                double lnR = 0.0;
                for (std::int64_t i = n - 1; i >= 0; --i) {
                    const double zi = z + static_cast<double>(i);
                    lnR += std::log1p(h * b / (zi * (zi + h + b)));
                }
                const double lg = log_gamma_beta(t0 + pp, b) + log_gamma_beta(t0 + qq, b);
                return std::exp(lg) * std::expm1(lnR);
            }
            // Neither power is an even integer: integrate the second difference
            // of ln gamma_t through trigamma, ln R = 1/4 * int_0^p int_0^q
            // (psi'(u/2+1) - psi'(u/2+1+b)) at u = t0+x+y. Positive smooth
            // integrand; 12x12 Gauss-Legendre is exact to machine precision.
            static constexpr double gl_x[6] = {0.03376524289842398, 0.16939530676686776,
                                               0.38069040695840155, 0.6199793683634100,
                                               0.8306046932331322,  0.9662347571015760};
            static constexpr double gl_w[6] = {0.08566224618958517, 0.18038078652406930,
                                               0.23395696728634552, 0.23395696728634552,
                                               0.18038078652406930, 0.08566224618958517};
            double lnR = 0.0;
            for (int i = 0; i < 6; ++i) {
                for (int j = 0; j < 6; ++j) {
                    const double u = t0 + p * gl_x[i] + q * gl_x[j];
                    lnR += gl_w[i] * gl_w[j] *
                           special::trigamma_diff(0.5 * u + 1.0, b);
                }
            }
            lnR *= 0.25 * p * q;
            const double lg = log_gamma_beta(t0 + p, b) + log_gamma_beta(t0 + q, b);
            return std::exp(lg) * std::expm1(lnR);
        }
        case MeasureKind::Atoms: {
            // 1/2 sum_{i,j} w_i w_j (x_i x_j)^t0 (x_i^p - x_j^p)(x_i^q - x_j^q);
            // only i<j pairs survive and every factor is formed difference-free.
            double sum = 0.0;
            const auto& atoms = measure_.atoms;
            for (std::size_t i = 0; i < atoms.size(); ++i) {
                for (std::size_t j = i + 1; j < atoms.size(); ++j) {
                    const double xi = atoms[i].x, xj = atoms[j].x;
                    if (xi == 0.0) {
                        if (t0 > 0.0) continue;
                        sum += atoms[i].mass * atoms[j].mass * pow01(xj, p) * pow01(xj, q);
                        continue;
                    }
                    const double lr = std::log(xi / xj); // < 0
                    const double base = pow01(xi * xj, t0);
                    const double dp = pow01(xj, p) * (-std::expm1(p * lr));
                    const double dq = pow01(xj, q) * (-std::expm1(q * lr));
                    sum += atoms[i].mass * atoms[j].mass * base * dp * dq;
                }
            }
            return sum;
        }
        case MeasureKind::SampledDensity:
            return pair_integral_generic(t0, p, q);
    }
    throw Error("unreachable measure kind");
}

double MomentProvider::symmetrized_pair_integral(std::int64_t k, double p, double q) const {
    if (k < 0) throw Error("symmetrized pair integral needs k >= 0");
    return pair_integral(2.0 * static_cast<double>(k), p, q);
}

std::vector<double> MomentProvider::subexponential_diagnostic(
    int n, const std::vector<std::int64_t>& ks) const {
    if (n < 1) throw Error("band n must be >= 1");
    std::vector<double> out;
    out.reserve(ks.size());
    std::int64_t prev = 0;
    for (std::int64_t k : ks) {
        if (k <= prev) throw Error("k list must be positive and increasing");
        prev = k;
        const double d = 2.0 * pair_integral(static_cast<double>(k), 2.0 * n, 2.0 * n);
        out.push_back(d <= 0.0 ? 0.0
                               : std::exp(std::log(d) / static_cast<double>(k)));
    }
    return out;
}

double MomentProvider::gamma_rel_accuracy(double t) const {
    const double eps = std::numeric_limits<double>::epsilon();
    switch (measure_.kind) {
        case MeasureKind::Area:
            return 4.0 * eps;
        case MeasureKind::BetaWeight:
            // lgamma differences keep absolute log error near (b+1)ln(t) * eps
            return 8.0 * eps * std::max(1.0, std::log1p(t));
        case MeasureKind::Atoms:
            return 8.0 * eps * std::max(1.0, std::log1p(t));
        case MeasureKind::SampledDensity: {
            const Moment m = moment(t);
            return (m.value > 0.0) ? std::max(16.0 * eps, m.abs_err / m.value) : 1.0;
        }
    }
    return 1.0;
}

bool MomentProvider::closed_form_far_moments() const {
    return measure_.kind != MeasureKind::SampledDensity;
}

} // namespace hyponorm

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <random>

#include "hyponorm/measures.hpp"
#include "hyponorm/quadrature.hpp"
#include "oracles.hpp"

using namespace hyponorm;

namespace {

MomentProvider make_area() { return MomentProvider(MeasureSpec::area()); }

MomentProvider make_beta(double b) { return MomentProvider(MeasureSpec::beta_weight(b)); }

MomentProvider make_atoms_forced(std::vector<Atom> atoms) {
    MomentProvider::Options o;
    o.force = true;
    o.normalize = true;
    return MomentProvider(MeasureSpec::from_atoms(std::move(atoms)), o);
}

// density grid for w(x) = 2x on a uniform mesh; recovers the area measure
MeasureSpec linear_density(int nodes) {
    std::vector<double> x(nodes), w(nodes);
    for (int i = 0; i < nodes; ++i) {
        x[i] = static_cast<double>(i) / (nodes - 1);
        w[i] = 2.0 * x[i];
    }
    return MeasureSpec::from_density(std::move(x), std::move(w));
}

} // namespace

TEST_CASE("validate: area measure satisfies every hypothesis") {
    MeasureSpec m = MeasureSpec::area();
    const ValidationReport rep = validate(m, false, false);
    CHECK(rep.mass_ok);
    CHECK_FALSE(rep.atom_at_one);
    CHECK_FALSE(rep.sup_support_lt_one);
    CHECK(rep.hypotheses_ok());
    CHECK_FALSE(rep.banner().has_value());
}

TEST_CASE("validate: an atom at x=1 is refused without force") {
    MeasureSpec m = MeasureSpec::from_atoms({{1.0, 1.0}});
    CHECK_THROWS_AS(validate(m, false, false), AtomAtOne);
    MeasureSpec m2 = MeasureSpec::from_atoms({{1.0, 1.0}});
    const ValidationReport rep = validate(m2, false, true);
    CHECK(rep.atom_at_one);
    CHECK(rep.banner().has_value());
}

TEST_CASE("validate: support bounded away from 1 warns and needs force") {
    MeasureSpec m = MeasureSpec::from_atoms({{0.5, 0.3}, {0.9, 0.7}});
    CHECK_THROWS_AS(validate(m, false, false), HypothesesViolated);
    MeasureSpec m2 = MeasureSpec::from_atoms({{0.5, 0.3}, {0.9, 0.7}});
    const ValidationReport rep = validate(m2, false, true);
    CHECK(rep.sup_support_lt_one);
    CHECK(!rep.warnings.empty());
}

TEST_CASE("validate: mass handling") {
    MeasureSpec m = MeasureSpec::from_atoms({{0.25, 1.0}, {0.5, 3.0}});
    CHECK_THROWS_AS(validate(m, false, true), NonProbabilityMass);
    MeasureSpec m2 = MeasureSpec::from_atoms({{0.25, 1.0}, {0.5, 3.0}});
    validate(m2, true, true);
    CHECK(m2.normalized);
    CHECK(m2.atoms[0].mass == doctest::Approx(0.25).epsilon(1e-14));
    MeasureSpec empty = MeasureSpec::from_atoms({});
    CHECK_THROWS_AS(validate(empty, false, true), EmptySupport);
}

TEST_CASE("validate: structural errors") {
    MeasureSpec unsorted = MeasureSpec::from_atoms({{0.5, 0.5}, {0.25, 0.5}});
    CHECK_THROWS_AS(validate(unsorted, false, true), Error);
    MeasureSpec badw = MeasureSpec::from_atoms({{0.5, 0.0}});
    CHECK_THROWS_AS(validate(badw, false, true), Error);
}

TEST_CASE("moment: closed forms hit the known values") {
    auto area = make_area();
    CHECK(area.gamma(0.0) == 1.0);
    CHECK(area.gamma(3.0) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(area.gamma(2.0) == doctest::Approx(0.5).epsilon(1e-15));

    auto b1 = make_beta(1.0);
    CHECK(b1.gamma(0.0) == 1.0);
    CHECK(b1.gamma(2.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    // the closed form is only trusted against direct quadrature
    CHECK(std::fabs(b1.gamma(2.0) - oracles::quad_gamma_beta(1.0, 2.0)) <= 1e-10);
}

TEST_CASE("moment: gamma_0 = 1 for every measure kind") {
    CHECK(make_area().gamma(0.0) == 1.0);
    CHECK(make_beta(-0.5).gamma(0.0) == 1.0);
    CHECK(make_atoms_forced({{0.3, 0.5}, {0.8, 0.5}}).gamma(0.0) == 1.0);
    MomentProvider::Options o;
    o.normalize = true;
    MomentProvider dens(linear_density(801), o);
    CHECK(dens.gamma(0.0) == 1.0);
}

TEST_CASE("moment: closed form vs quadrature across t in [0, 60]") {
    auto area = make_area();
    for (double t = 0.0; t <= 60.0; t += 3.7) {
        CHECK(std::fabs(area.gamma(t) - oracles::quad_gamma_area(t)) <= 1e-10);
    }
    for (double beta : {-0.5, 0.0, 1.0, 3.0}) {
        auto mp = make_beta(beta);
        for (double t = 0.0; t <= 60.0; t += 7.3) {
            CHECK(std::fabs(mp.gamma(t) - oracles::quad_gamma_beta(beta, t)) <= 1e-10);
        }
    }
}

TEST_CASE("moment: tabulated density recovers the area measure") {
    MomentProvider::Options o;
    o.normalize = true;
    o.quad_abs_tol = 1e-8;
    MomentProvider dens(linear_density(2001), o);
    CHECK(dens.method() == MomentMethod::Quadrature);
    for (double t : {0.5, 1.0, 2.0, 3.0, 10.0}) {
        const Moment m = dens.moment(t);
        CHECK(std::fabs(m.value - 2.0 / (t + 2.0)) <= 1e-8);
    }
    // an exponent far beyond the grid resolution must refuse, not lie
    CHECK_THROWS_AS(dens.moment(5e7), QuadratureNonConvergence);
}

TEST_CASE("moment: cache returns bit-identical values") {
    auto mp = make_beta(0.7);
    const double a = mp.gamma(13.37);
    const double b = mp.gamma(13.37);
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);
}

TEST_CASE("moment: monotonicity and log-convexity grids") {
    std::vector<std::unique_ptr<MomentProvider>> providers;
    providers.push_back(std::make_unique<MomentProvider>(MeasureSpec::area()));
    providers.push_back(std::make_unique<MomentProvider>(MeasureSpec::beta_weight(-0.5)));
    providers.push_back(std::make_unique<MomentProvider>(MeasureSpec::beta_weight(3.0)));
    {
        MomentProvider::Options o;
        o.force = true;
        o.normalize = true;
        providers.push_back(std::make_unique<MomentProvider>(
            MeasureSpec::from_atoms({{0.2, 0.25}, {0.7, 0.5}, {0.95, 0.25}}), o));
        providers.push_back(std::make_unique<MomentProvider>(linear_density(1601), o));
    }
    for (const auto& mp : providers) {
        double prev = mp->gamma(0.0);
        for (double t = 0.5; t <= 40.0; t += 0.5) {
            const double g = mp->gamma(t);
            CHECK(g < prev); // strictly decreasing
            prev = g;
        }
        for (double eta : {0.25, 1.0, 3.7}) {
            for (double t = 0.0; t <= 40.0; t += 0.5) {
                const double lhs =
                    mp->gamma(t) * mp->gamma(t + 2.0 * eta) - std::pow(mp->gamma(t + eta), 2);
                CHECK(lhs >= -1e-12);
            }
        }
    }
}

TEST_CASE("projection coefficient: area values and the t -> 0 limit") {
    auto area = make_area();
    CHECK(area.projection_coefficient(0, 2.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(area.projection_coefficient(1, 2.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(area.projection_coefficient(5, 1e-12) == doctest::Approx(1.0).epsilon(1e-9));
    const double p = area.projection_coefficient(3, 4.0);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
}

TEST_CASE("pair integral: area k=0 p=q=2 equals 1/12 and the 2-D quadrature") {
    auto area = make_area();
    const double v = area.symmetrized_pair_integral(0, 2.0, 2.0);
    CHECK(v == doctest::Approx(1.0 / 12.0).epsilon(1e-13));
    CHECK(std::fabs(v - oracles::brute_area_pair_integral(0.0, 2.0, 2.0)) <= 1e-10);
}

TEST_CASE("pair integral: nonnegative whenever p = q") {
    auto area = make_area();
    auto b = make_beta(0.5);
    for (int k : {0, 1, 3, 10, 100}) {
        for (double p : {0.7, 2.0, 5.0}) {
            CHECK(area.symmetrized_pair_integral(k, p, p) >= 0.0);
            CHECK(b.symmetrized_pair_integral(k, p, p) >= 0.0);
        }
    }
}

TEST_CASE("pair integral: non-integer p and q agree with moment products") {
    auto b = make_beta(1.5);
    for (double t0 : {0.0, 2.0, 7.0}) {
        const double stable = b.pair_integral(t0, 1.3, 0.9);
        const double naive = b.gamma(t0 + 2.2) * b.gamma(t0) - b.gamma(t0 + 1.3) * b.gamma(t0 + 0.9);
        CHECK(stable == doctest::Approx(naive).epsilon(1e-9));
    }
}

TEST_CASE("pair integral: single atom vanishes, two atoms match brute force") {
    auto single = make_atoms_forced({{0.6, 1.0}});
    CHECK(single.symmetrized_pair_integral(2, 2.0, 2.0) == 0.0);

    std::vector<Atom> two = {{0.5, 0.5}, {0.9, 0.5}};
    auto mp = make_atoms_forced(two);
    for (int k : {0, 1, 5}) {
        const double got = mp.symmetrized_pair_integral(k, 2.0, 3.0);
        const double want = oracles::brute_atom_pair_integral(two, 2.0 * k, 2.0, 3.0);
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("subexponential diagnostic: area tends to 1 from below") {
    auto area = make_area();
    const auto roots = area.subexponential_diagnostic(1, {10, 100, 1000});
    // independent evaluation: D_k = 2(g(k+4)g(k) - g(k+2)^2), g(t) = 2/(t+2)
    auto exact_root = [](double k) {
        auto g = [](double t) { return 2.0 / (t + 2.0); };
        const double d = 2.0 * (g(k + 4.0) * g(k) - g(k + 2.0) * g(k + 2.0));
        return std::exp(std::log(d) / k);
    };
    REQUIRE(roots.size() == 3);
    CHECK(roots[0] == doctest::Approx(exact_root(10)).epsilon(1e-12));
    CHECK(roots[1] == doctest::Approx(exact_root(100)).epsilon(1e-12));
    CHECK(roots[2] == doctest::Approx(exact_root(1000)).epsilon(1e-12));
    // frozen reference values
    CHECK(roots[0] == doctest::Approx(0.49312755169973653).epsilon(1e-12));
    CHECK(roots[1] == doctest::Approx(0.85974918464870877).epsilon(1e-12));
    CHECK(roots[2] == doctest::Approx(0.97610877466228734).epsilon(1e-12));
    CHECK(roots[0] < roots[1]);
    CHECK(roots[1] < roots[2]);
    CHECK(roots[2] < 1.0);
}

TEST_CASE("subexponential diagnostic: truncated support stays below 1") {
    std::vector<Atom> two = {{0.5, 0.5}, {0.9, 0.5}};
    auto mp = make_atoms_forced(two);
    const auto roots = mp.subexponential_diagnostic(1, {50, 200, 800});
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const double k = (i == 0) ? 50.0 : (i == 1 ? 200.0 : 800.0);
        const double want =
            std::exp(std::log(2.0 * oracles::brute_atom_pair_integral(two, k, 2.0, 2.0)) / k);
        CHECK(roots[i] == doctest::Approx(want).epsilon(1e-10));
        CHECK(roots[i] < 1.0);
    }
    // approaches (0.5 * 0.9) = 0.45, the dominant pair product
    CHECK(roots[2] == doctest::Approx(0.45).epsilon(0.01));

    auto single = make_atoms_forced({{0.6, 1.0}});
    const auto degenerate = single.subexponential_diagnostic(1, {10});
    CHECK(degenerate[0] == 0.0);
}

TEST_CASE("sampled density: support heuristic flags a vanishing tail") {
    std::vector<double> x(101), w(101);
    for (int i = 0; i <= 100; ++i) {
        x[i] = i / 100.0;
        w[i] = (x[i] < 0.9) ? 1.0 : 0.0; // dies before the final 5%
    }
    MeasureSpec m = MeasureSpec::from_density(x, w);
    CHECK_THROWS_AS(validate(m, true, false), HypothesesViolated);
    MeasureSpec m2 = MeasureSpec::from_density(x, w);
    const ValidationReport rep = validate(m2, true, true);
    CHECK(rep.sup_support_lt_one);
}

TEST_CASE("sampled density: cancellation warnings are counted") {
    MomentProvider::Options o;
    o.normalize = true;
    MomentProvider dens(linear_density(2001), o);
    CHECK(dens.cancellation_warnings() == 0);
    // the products cancel to ~pq/t0^2 relative size; p = q = 0.01 at t0 = 100
    // loses more than 8 digits while the moments themselves stay resolvable
    (void)dens.pair_integral(100.0, 0.01, 0.01);
    CHECK(dens.cancellation_warnings() >= 1);
}

TEST_CASE("csv loaders: round trip and malformed input") {
    {
        std::ofstream f("/tmp/hyponorm_test_atoms.csv");
        f << "x,mass\n0.25,0.5\n0.75,0.5\n";
    }
    MeasureSpec atoms = MeasureSpec::load_atoms_csv("/tmp/hyponorm_test_atoms.csv");
    REQUIRE(atoms.atoms.size() == 2);
    CHECK(atoms.atoms[1].x == 0.75);

    {
        std::ofstream f("/tmp/hyponorm_test_dens.csv");
        f << "x,w\n";
        for (int i = 0; i <= 100; ++i) {
            f << i / 100.0 << "," << 2.0 * i / 100.0 << "\n";
        }
    }
    MeasureSpec dens = MeasureSpec::load_density_csv("/tmp/hyponorm_test_dens.csv");
    CHECK(dens.grid_x.size() == 101);

    {
        std::ofstream f("/tmp/hyponorm_test_bad.csv");
        f << "a,b\n1,2\n";
    }
    CHECK_THROWS_AS(MeasureSpec::load_atoms_csv("/tmp/hyponorm_test_bad.csv"), BadInputFile);
    CHECK_THROWS_AS(MeasureSpec::load_atoms_csv("/tmp/does_not_exist.csv"), BadInputFile);
}

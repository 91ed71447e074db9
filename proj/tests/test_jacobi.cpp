#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <random>

#include "hyponorm/jacobi.hpp"
#include "oracles.hpp"

using namespace hyponorm;

namespace {

std::shared_ptr<JacobiOperator> area_op(int n, double s) {
    auto mp = std::make_shared<MomentProvider>(MeasureSpec::area());
    return std::make_shared<JacobiOperator>(mp, SymbolParams{n, s});
}

std::shared_ptr<JacobiOperator> beta_op(double beta, int n, double s) {
    auto mp = std::make_shared<MomentProvider>(MeasureSpec::beta_weight(beta));
    return std::make_shared<JacobiOperator>(mp, SymbolParams{n, s});
}

} // namespace

TEST_CASE("entry: area n=1 s=2 matches sqrt(6)/6 and 1/sqrt(3)") {
    auto op = area_op(1, 2.0);
    CHECK(op->entry(0) == doctest::Approx(std::sqrt(6.0) / 6.0).epsilon(1e-14));
    CHECK(op->entry(1) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
}

TEST_CASE("entry: raw moments equal the closed form, k <= 50") {
    for (int n : {1, 2, 3}) {
        for (double s : {0.5, 1.0, 2.0, 5.0}) {
            auto op = area_op(n, s);
            for (std::int64_t k = 0; k <= 50; ++k) {
                const double raw = op->entry(k);
                const double closed = oracles::area_entry_closed(n, s, k);
                CHECK(std::fabs(raw - closed) <= 1e-12 * closed);
            }
        }
    }
}

TEST_CASE("entry: branch switch happens exactly at k = n") {
    // the two branches differ by the factor (k+1)/n, which is 1 at k = n-1
    // and (n+1)/n at k = n; applying the first branch one index too long is
    // the natural off-by-one and must show up at k = n
    for (int n : {2, 3}) {
        const double s = 1.5;
        auto op = area_op(n, s);
        auto first_branch = [&](std::int64_t k) {
            const double kk = static_cast<double>(k);
            return s * std::sqrt((kk + n + 1.0) * (kk + 2.0 * n + 1.0)) /
                   (2.0 * (kk + 1.0 + 0.5 * s) * (kk + n + 1.0 + 0.5 * s));
        };
        CHECK(op->entry(n - 1) == doctest::Approx(first_branch(n - 1)).epsilon(1e-13));
        CHECK(op->entry(n) ==
              doctest::Approx(first_branch(n) * (n + 1.0) / n).epsilon(1e-13));
        CHECK(std::fabs(op->entry(n) - first_branch(n)) > 1e-3);
    }
}

TEST_CASE("entry: positive for valid measures up to k = 1e4") {
    for (auto op : {area_op(1, 2.0), area_op(3, 0.75), beta_op(-0.5, 2, 3.0),
                    beta_op(2.0, 1, 0.5)}) {
        for (std::int64_t k : {0, 1, 7, 100, 2500, 10000}) {
            CHECK(op->entry(k) > 0.0);
        }
    }
}

TEST_CASE("entry: asymptote s/(2n) with O(1/k) rate for the area measure") {
    CHECK(area_op(1, 2.0)->asymptote() == doctest::Approx(1.0));
    CHECK(area_op(3, 2.0)->asymptote() == doctest::Approx(1.0 / 3.0));
    CHECK(area_op(2, 4.0)->asymptote() == doctest::Approx(1.0));
    for (int n : {1, 2, 3}) {
        for (double s : {0.5, 1.0, 2.0}) {
            auto op = area_op(n, s);
            const double a = op->asymptote();
            for (std::int64_t k : {100, 316, 1000, 10000}) {
                CHECK(std::fabs(op->entry(k) - a) <= 10.0 / static_cast<double>(k));
            }
        }
    }
}

TEST_CASE("entry: below s/(2n) throughout when s >= 2n (area measure)") {
    for (int n : {1, 2, 3}) {
        for (double s : {2.0 * n, 2.0 * n + 0.5, 4.0 * n}) {
            auto op = area_op(n, s);
            const double a = op->asymptote();
            for (std::int64_t k = 0; k <= 200; ++k) CHECK(op->entry(k) < a);
            for (std::int64_t k : {1000, 10000}) CHECK(op->entry(k) < a);
        }
    }
}

TEST_CASE("entry: cache agrees with recomputation") {
    auto op = beta_op(1.0, 2, 3.0);
    const double first = op->entry(17);
    const double second = op->entry(17);
    CHECK(std::memcmp(&first, &second, sizeof first) == 0);
    CHECK(op->entry_uncached(17) == first);
}

TEST_CASE("entry: single atom degenerates") {
    MomentProvider::Options o;
    o.force = true;
    o.normalize = true;
    auto mp = std::make_shared<MomentProvider>(MeasureSpec::from_atoms({{0.5, 1.0}}), o);
    JacobiOperator op(mp, SymbolParams{1, 2.0});
    CHECK(op.banner().has_value());
    CHECK_THROWS_AS(op.entry(0), DegenerateDenominator);
}

TEST_CASE("operator construction refuses invalid measures without force") {
    CHECK_THROWS(MomentProvider(MeasureSpec::from_atoms({{0.5, 1.0}})));
}

TEST_CASE("build_truncated: structure and small examples") {
    auto op = area_op(1, 2.0);
    const TruncatedMatrix t = build_truncated(*op, 3);
    REQUIRE(t.entries.size() == 2);
    CHECK(t.entries[0] == doctest::Approx(std::sqrt(6.0) / 6.0).epsilon(1e-14));
    CHECK(t.entries[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(t.at(0, 1) == t.entries[0]);
    CHECK(t.at(1, 0) == t.entries[0]);
    CHECK(t.at(0, 0) == 0.0);
    CHECK(t.at(0, 2) == 0.0); // beyond the band for n=1

    // smallest admissible truncation: a single entry
    const TruncatedMatrix small = build_truncated(*op, 2);
    REQUIRE(small.entries.size() == 1);
    CHECK_THROWS(build_truncated(*op, 1));

    // n=2, s=1: entries sit at (0,2) and (1,3)
    auto op2 = area_op(2, 1.0);
    const TruncatedMatrix t2 = build_truncated(*op2, 4);
    REQUIRE(t2.entries.size() == 2);
    CHECK(t2.at(0, 2) == doctest::Approx(oracles::area_entry_closed(2, 1.0, 0)).epsilon(1e-13));
    CHECK(t2.at(1, 3) == doctest::Approx(oracles::area_entry_closed(2, 1.0, 1)).epsilon(1e-13));
    CHECK(t2.at(0, 1) == 0.0);
    CHECK(t2.at(0, 3) == 0.0);
}

TEST_CASE("decouple: chain bookkeeping") {
    auto op = area_op(1, 2.0);
    const ChainDecomposition one = decouple(*op, 6);
    REQUIRE(one.offdiags.size() == 1);
    CHECK(one.offdiags[0].size() == 5);

    auto op2 = area_op(2, 1.0);
    const ChainDecomposition two = decouple(*op2, 5);
    REQUIRE(two.offdiags.size() == 2);
    // chains over indices {0,2,4} and {1,3}: off-diagonals (a_0, a_2), (a_1)
    REQUIRE(two.offdiags[0].size() == 2);
    REQUIRE(two.offdiags[1].size() == 1);
    CHECK(two.offdiags[0][0] == doctest::Approx(op2->entry(0)));
    CHECK(two.offdiags[0][1] == doctest::Approx(op2->entry(2)));
    CHECK(two.offdiags[1][0] == doctest::Approx(op2->entry(1)));
}

TEST_CASE("decouple: eigenvalue multiset equals the dense truncation") {
    // the n=2, N=4 case has the closed answer {±a_0} ∪ {±a_1}
    auto op2 = area_op(2, 1.0);
    const auto dense = oracles::dense_eigenvalues(build_truncated(*op2, 4));
    const double a0 = op2->entry(0), a1 = op2->entry(1);
    std::vector<double> expect = {-a1, -a0, a0, a1};
    std::sort(expect.begin(), expect.end());
    REQUIRE(dense.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(dense[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    }

    // randomized decoupling check across n <= 4, N <= 40
    std::mt19937 rng(20240817);
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 4);
        const std::int64_t N = n + 1 + static_cast<std::int64_t>(rng() % (40 - n));
        const double s = 0.5 + 4.0 * (rng() % 1000) / 1000.0;
        auto op = area_op(n, s);
        const auto dense_vals = oracles::dense_eigenvalues(build_truncated(*op, N));
        std::vector<double> chains;
        for (const auto& off : decouple(*op, N).offdiags) {
            const auto vals = oracles::dense_chain_eigenvalues(off);
            chains.insert(chains.end(), vals.begin(), vals.end());
        }
        std::sort(chains.begin(), chains.end());
        REQUIRE(chains.size() == dense_vals.size());
        for (std::size_t i = 0; i < chains.size(); ++i) {
            CHECK(std::fabs(chains[i] - dense_vals[i]) <= 1e-10);
        }
    }
}

TEST_CASE("truncation spectrum is antisymmetric") {
    auto op = area_op(2, 3.0);
    const auto vals = oracles::dense_eigenvalues(build_truncated(*op, 24));
    const std::size_t m = vals.size();
    for (std::size_t i = 0; i < m; ++i) {
        CHECK(std::fabs(vals[i] + vals[m - 1 - i]) <= 1e-10);
    }
}

TEST_CASE("materialize_entries: serial and parallel agree bitwise") {
    auto op = beta_op(0.5, 2, 1.7);
    const auto par = materialize_entries(*op, 0, 1, 512, Exec::Parallel);
    const auto ser = materialize_entries(*op, 0, 1, 512, Exec::Serial);
    REQUIRE(par.size() == ser.size());
    for (std::size_t i = 0; i < par.size(); ++i) {
        CHECK(std::memcmp(&par[i], &ser[i], sizeof(double)) == 0);
    }
}

TEST_CASE("symbol params validation") {
    CHECK_THROWS(check_symbol_params(SymbolParams{0, 1.0}));
    CHECK_THROWS(check_symbol_params(SymbolParams{1, 0.0}));
    CHECK_THROWS(check_symbol_params(SymbolParams{1, -2.0}));
    CHECK_NOTHROW(check_symbol_params(SymbolParams{1, 0.25}));
}

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "orbitctl/orbit_enum.hpp"

using namespace orbitctl;
using std::numbers::pi;

namespace {

RationalMap quad(cplx c) { return RationalMap({c, 0.0, 1.0}); }

bool contains(const std::vector<cplx>& pts, cplx z, double tol = 1e-9)
{
    return std::any_of(pts.begin(), pts.end(), [&](cplx p) { return std::abs(p - z) < tol; });
}

// Moebius function by trial division.
int mobius(int n)
{
    int result = 1;
    for (int p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        n /= p;
        if (n % p == 0) return 0;
        result = -result;
    }
    return n > 1 ? -result : result;
}

// Number of primitive cycles of period n of z^d: necklace count.
long necklaces(int d, int n)
{
    long s = 0;
    for (int m = 1; m <= n; ++m)
        if (n % m == 0) s += mobius(n / m) * static_cast<long>(std::pow(d, m));
    return s / n;
}

} // namespace

TEST(FixedPoints, SquareLevelTwo)
{
    for (auto method : {FixedPointMethod::backward, FixedPointMethod::roots}) {
        auto fp = fixed_points(quad(0.0), 2, method);
        ASSERT_EQ(fp.points.size(), 4u) << to_string(method);
        EXPECT_EQ(fp.deficiency, 0u);
        for (cplx z : {cplx(0.0), cplx(1.0), std::polar(1.0, 2 * pi / 3), std::polar(1.0, -2 * pi / 3)})
            EXPECT_TRUE(contains(fp.points, z)) << to_string(method) << " missing " << z;
    }
}

TEST(FixedPoints, BasilicaLevelTwo)
{
    const double s5 = std::sqrt(5.0);
    for (auto method : {FixedPointMethod::backward, FixedPointMethod::roots}) {
        auto fp = fixed_points(quad(-1.0), 2, method);
        ASSERT_EQ(fp.points.size(), 4u);
        for (cplx z : {cplx(0.0), cplx(-1.0), cplx((1 + s5) / 2), cplx((1 - s5) / 2)})
            EXPECT_TRUE(contains(fp.points, z)) << to_string(method) << " missing " << z;
    }
}

TEST(FixedPoints, MethodsAgreeForQuadraticAtSix)
{
    auto fp = fixed_points(quad(0.1), 6, FixedPointMethod::both);
    EXPECT_EQ(fp.points.size(), 64u);
    ASSERT_TRUE(fp.agreement);
    EXPECT_EQ(fp.agreement->unmatched_backward, 0u);
    EXPECT_EQ(fp.agreement->unmatched_roots, 0u);
    EXPECT_LE(fp.agreement->max_distance, 1e-9);
    for (cplx z : fp.points) EXPECT_LT(std::abs(iterate(quad(0.1), z, 6) - z), 1e-9);
}

TEST(FixedPoints, CubicAndRational)
{
    auto cubic = RationalMap({cplx(0.2, 0.1), 0.0, 0.0, 1.0});
    auto fp = fixed_points(cubic, 3, FixedPointMethod::both);
    EXPECT_EQ(fp.points.size(), 27u);
    EXPECT_EQ(fp.agreement->unmatched_backward + fp.agreement->unmatched_roots, 0u);

    // z^2/(1 + 0.5 z^2)... written as a rational map with infinity not fixed: count is d^n + 1
    RationalMap r({0.0, 0.0, 1.0}, {1.0, 0.0, 0.5});
    EXPECT_EQ(expected_fixed_point_count(r, 3), 9u);
    auto rp = fixed_points(r, 3, FixedPointMethod::roots);
    EXPECT_EQ(rp.points.size() + rp.deficiency, 9u);
    for (cplx z : rp.points) EXPECT_LT(std::abs(iterate(r, z, 3) - z), 1e-9 * std::max(1.0, std::abs(z)));
}

TEST(FixedPoints, BackwardNeedsClosedFormBranches)
{
    RationalMap g({0.0, 1.0, 0.0, 1.0});
    EXPECT_THROW(backward_word_points(g, 2, {}), BranchCutError);
    EXPECT_THROW(roots_method_points(quad(0.1), 13, {}), DegreeOverflowError);
}

TEST(Classify, SquareLevelTwo)
{
    auto f = quad(0.0);
    auto fp = fixed_points(f, 2, FixedPointMethod::roots);
    auto orbits = classify_orbits(f, fp.points, 2);
    ASSERT_EQ(orbits.size(), 3u);
    EXPECT_EQ(orbits[0].period, 1);
    EXPECT_FALSE(orbits[0].repelling); // 0
    EXPECT_TRUE(std::isinf(orbits[0].log_abs_multiplier));
    EXPECT_EQ(orbits[1].period, 1);
    EXPECT_TRUE(orbits[1].repelling); // 1
    EXPECT_NEAR(orbits[1].log_abs_multiplier, std::log(2.0), 1e-12);
    EXPECT_EQ(orbits[2].period, 2);
    EXPECT_TRUE(orbits[2].primitive);
    EXPECT_NEAR(orbits[2].log_abs_multiplier, std::log(4.0), 1e-12);
    EXPECT_NEAR(orbits[2].representative.imag(), -std::sqrt(3.0) / 2, 1e-12);
}

TEST(Classify, BasilicaSuperattractingTwoCycle)
{
    auto f = quad(-1.0);
    auto fp = fixed_points(f, 2, FixedPointMethod::roots);
    auto orbits = classify_orbits(f, fp.points, 2);
    int prim_rep = 0, prim_nonrep = 0;
    for (const auto& o : orbits) {
        if (o.period != 2) continue;
        (o.repelling ? prim_rep : prim_nonrep)++;
        EXPECT_NEAR(std::abs(o.representative - cplx(-1.0)), 0.0, 1e-12);
    }
    EXPECT_EQ(prim_rep, 0);
    EXPECT_EQ(prim_nonrep, 1);
}

TEST(Classify, RejectsForeignPoints)
{
    auto f = quad(0.0);
    std::vector<cplx> pts{0.0, 1.0, cplx(0.3, 0.4)};
    EXPECT_THROW(classify_orbits(f, pts, 2), OrbitMatchingError);
}

TEST(Enumerate, SquareNecklaceCounts)
{
    auto f = quad(0.0);
    auto db = OrbitDatabase::for_map(f);
    EXPECT_EQ(enumerate_primitive(f, 1, db).size(), 1u);
    for (int n = 2; n <= 10; ++n) {
        auto orbits = enumerate_primitive(f, n, db);
        EXPECT_EQ(static_cast<long>(orbits.size()), necklaces(2, n)) << n;
        for (const auto& o : orbits) {
            EXPECT_NEAR(o.log_abs_multiplier, n * std::log(2.0), 1e-9);
            EXPECT_NEAR(std::min(o.holonomy_angle, two_pi - o.holonomy_angle), 0.0, 1e-9);
        }
    }
}

TEST(Enumerate, CubeNecklaceCounts)
{
    auto f = RationalMap({0.0, 0.0, 0.0, 1.0});
    auto db = OrbitDatabase::for_map(f);
    // the superattracting fixed point 0 is the only non-repelling cycle
    for (int n = 1; n <= 6; ++n)
        EXPECT_EQ(static_cast<long>(enumerate_primitive(f, n, db).size()), necklaces(3, n) - (n == 1)) << n;
}

TEST(Enumerate, BasilicaMatchesRootsCensusAtEight)
{
    auto f = quad(-1.0);
    auto db = OrbitDatabase::for_map(f);
    auto orbits = enumerate_primitive(f, 8, db);

    // Independent count: Moebius inversion over repelling fixed points from the roots method.
    long total = 0;
    for (int m = 1; m <= 8; ++m) {
        if (8 % m) continue;
        auto fp = fixed_points(f, m, FixedPointMethod::roots);
        long repelling = 0;
        for (cplx z : fp.points)
            if (std::abs(iterate_with_derivative(f, z, m).second) > 1.0) ++repelling;
        total += mobius(8 / m) * repelling;
    }
    EXPECT_EQ(static_cast<long>(orbits.size()), total / 8);
}

TEST(Enumerate, CensusIdentityAndDisjointPeriods)
{
    auto f = quad(0.1);
    auto db = OrbitDatabase::for_map(f);
    for (int n = 1; n <= 8; ++n) {
        enumerate_primitive(f, n, db);
        EXPECT_TRUE(db.complete(n));
        EXPECT_EQ(census_count(db, n), std::size_t{1} << n);
    }
    for (int n = 1; n <= 8; ++n)
        for (const auto& o : db.entry(n).orbits) {
            EXPECT_EQ(o.period, n);
            EXPECT_TRUE(o.primitive);
            for (int m = 1; m < n; ++m) {
                if (n % m == 0) {
                    EXPECT_GT(std::abs(iterate(f, o.representative, m) - o.representative), 1e-9);
                }
            }
        }
}

TEST(Enumerate, DivisorConsistency)
{
    auto f = quad(cplx(-0.12, 0.74)); // rabbit
    auto db = OrbitDatabase::for_map(f);
    enumerate_primitive(f, 6, db);
    auto fp = fixed_points(f, 6, FixedPointMethod::backward);
    for (int m : {1, 2, 3})
        for (const auto& o : db.entry(m).orbits) EXPECT_TRUE(contains(fp.points, o.representative)) << m;
}

TEST(Enumerate, MultiplierInvariants)
{
    auto f = quad(-1.0);
    auto db = OrbitDatabase::for_map(f);
    auto orbits = enumerate_primitive(f, 7, db);
    for (const auto& o : orbits) {
        auto [zn, chain] = iterate_with_derivative(f, o.representative, 7);
        EXPECT_NEAR(std::exp(o.log_abs_multiplier) / std::abs(chain), 1.0, 1e-9);
        // basepoint invariance
        const cplx w = f(o.representative);
        auto other = cycle_multiplier(f, w, 7);
        EXPECT_NEAR(other.log_abs, o.log_abs_multiplier, 1e-8);
        EXPECT_NEAR(circular_distance(other.holonomy_angle, o.holonomy_angle), 0.0, 1e-8);
        // representative is lexicographically least
        cplx z = o.representative;
        for (int j = 0; j < 7; ++j) {
            z = f(z);
            EXPECT_FALSE(lex_less(z, o.representative) && std::abs(z - o.representative) > 1e-12);
        }
    }
}

TEST(Enumerate, RejectsForeignDatabase)
{
    auto db = OrbitDatabase::for_map(quad(0.0));
    EXPECT_THROW(enumerate_primitive(quad(0.1), 2, db), FingerprintMismatchError);
}

TEST(Enumerate, CompleteEntriesAreNotOverwritten)
{
    auto f = quad(0.0);
    auto db = OrbitDatabase::for_map(f);
    enumerate_primitive(f, 3, db);
    PeriodEntry bogus;
    bogus.n = 3;
    db.put(bogus);
    EXPECT_EQ(db.entry(3).orbits.size(), 2u);
}

TEST(CriticalOrbits, DetectsAttractingCycles)
{
    auto co = critical_orbits(quad(-1.0), 1000);
    ASSERT_EQ(co.size(), 1u);
    EXPECT_EQ(co[0].fate, CriticalFate::attracting_cycle);
    EXPECT_EQ(co[0].cycle.size(), 2u);

    auto esc = critical_orbits(quad(1.0), 1000);
    EXPECT_EQ(esc[0].fate, CriticalFate::escapes);
}

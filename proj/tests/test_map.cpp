#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "orbitctl/map.hpp"

using namespace orbitctl;
using std::numbers::pi;

namespace {

RationalMap quad(cplx c) { return RationalMap({c, 0.0, 1.0}); }

const cplx omega = std::polar(1.0, 2.0 * pi / 3.0);

} // namespace

TEST(Evaluate, Polynomials)
{
    EXPECT_EQ(quad(0.0).evaluate(2.0), cplx(4.0));
    EXPECT_EQ(quad(-1.0).evaluate(0.0), cplx(-1.0));
}

TEST(Evaluate, RationalAndPole)
{
    RationalMap f({1.0, 0.0, 1.0}, {0.0, 2.0});
    EXPECT_LT(std::abs(f.evaluate(cplx(0, 1))), 1e-15);
    EXPECT_THROW(f.evaluate(0.0), PoleError);
}

TEST(Construction, RejectsBadMaps)
{
    EXPECT_THROW(RationalMap({0.0, 1.0}), InvalidMapError);
    EXPECT_THROW(RationalMap({0.0, 0.0}), InvalidMapError);
    // (z^2 - 1)/(z - 1) shares the root 1
    EXPECT_THROW(RationalMap({-1.0, 0.0, 1.0}, {-1.0, 1.0}), InvalidMapError);
}

TEST(DistortionRotation, Examples)
{
    auto f = quad(0.0);
    auto a = distortion_rotation(f, 1.0);
    EXPECT_NEAR(a.r, std::log(2.0), 1e-15);
    EXPECT_NEAR(a.theta, 0.0, 1e-15);
    auto b = distortion_rotation(f, cplx(0, 1));
    EXPECT_NEAR(b.r, std::log(2.0), 1e-15);
    EXPECT_NEAR(b.theta, pi / 2, 1e-15);
    EXPECT_THROW(distortion_rotation(quad(-1.0), 0.0), CriticalPointError);
}

TEST(DistortionRotation, ThetaStoredInZeroTwoPi)
{
    auto f = quad(0.0);
    auto a = distortion_rotation(f, cplx(0, -1));
    EXPECT_NEAR(a.theta, 1.5 * pi, 1e-14);
}

TEST(BirkhoffSums, FixedPointOfSquare)
{
    auto s = birkhoff_sums(quad(0.0), 1.0, 5);
    EXPECT_NEAR(s.r, 5 * std::log(2.0), 1e-14);
    EXPECT_NEAR(s.theta_lifted, 0.0, 1e-15);
}

TEST(BirkhoffSums, TwoCycleOfSquareReducesToZero)
{
    auto s = birkhoff_sums(quad(0.0), omega, 2);
    EXPECT_NEAR(s.r, 2 * std::log(2.0), 1e-14);
    // per-step principal values 2pi/3 and -2pi/3
    EXPECT_NEAR(wrap_angle(s.theta_lifted + 1e-13), 0.0, 1e-12);
}

TEST(BirkhoffSums, SingleStepMatchesDistortion)
{
    RationalMap f({cplx(0.3, 0.2), 1.0, cplx(0.5, -0.1), 1.0});
    for (cplx z : {cplx(0.4, 0.7), cplx(-1.1, 0.2), cplx(0.1, -0.9)}) {
        auto s = birkhoff_sums(f, z, 1);
        auto d = distortion_rotation(f, z);
        EXPECT_NEAR(s.r, d.r, 1e-15);
        EXPECT_NEAR(wrap_angle(s.theta_lifted), d.theta, 1e-14);
    }
}

TEST(BirkhoffSums, Additive)
{
    RationalMap f({cplx(-0.12, 0.74), 0.0, 1.0});
    const cplx z(0.3, 0.1);
    for (int n : {1, 3, 5})
        for (int m : {1, 2, 4}) {
            auto whole = birkhoff_sums(f, z, n + m);
            auto head = birkhoff_sums(f, z, n);
            auto tail = birkhoff_sums(f, iterate(f, z, n), m);
            EXPECT_NEAR(whole.r, head.r + tail.r, 1e-10);
            EXPECT_NEAR(whole.theta_lifted, head.theta_lifted + tail.theta_lifted, 1e-10);
        }
}

TEST(BirkhoffSums, ReportsOrbitIndex)
{
    // 1 -> 0 under z^2 - 1; 0 is critical
    try {
        birkhoff_sums(quad(-1.0), 1.0, 3);
        FAIL();
    } catch (const CriticalPointError& e) {
        EXPECT_NE(std::string(e.what()).find("index 1"), std::string::npos);
    }
}

TEST(CycleMultiplier, Examples)
{
    auto a = cycle_multiplier(quad(0.0), 1.0, 1);
    EXPECT_NEAR(a.log_abs, std::log(2.0), 1e-15);
    EXPECT_NEAR(a.holonomy_angle, 0.0, 1e-15);
    auto b = cycle_multiplier(quad(0.0), omega, 2);
    EXPECT_NEAR(b.log_abs, std::log(4.0), 1e-14);
    EXPECT_NEAR(std::min(b.holonomy_angle, two_pi - b.holonomy_angle), 0.0, 1e-12);
    EXPECT_THROW(cycle_multiplier(quad(-1.0), 0.0, 2), SuperattractingError);
    EXPECT_THROW(cycle_multiplier(quad(0.0), 0.5, 1), NotPeriodicError);
}

TEST(CycleMultiplier, AgreesWithChainRuleProduct)
{
    auto f = quad(-1.0);
    const cplx phi = (1.0 + std::sqrt(5.0)) / 2.0;
    auto m = cycle_multiplier(f, phi, 1);
    const cplx direct = 2.0 * phi;
    EXPECT_NEAR(m.log_abs, std::log(std::abs(direct)), 1e-12);
    const cplx rebuilt = std::exp(cplx(m.log_abs, m.holonomy_angle));
    EXPECT_LT(std::abs(rebuilt - direct) / std::abs(direct), 1e-9);
}

TEST(Angles, Helpers)
{
    EXPECT_NEAR(wrap_angle(-0.5), two_pi - 0.5, 1e-15);
    EXPECT_NEAR(principal_angle(1.5 * pi), -0.5 * pi, 1e-15);
    EXPECT_NEAR(principal_angle(pi), pi, 1e-15);
    EXPECT_NEAR(circular_distance(0.1, two_pi - 0.1), 0.2, 1e-14);
}

TEST(Map, CriticalAndFixedPoints)
{
    auto f = quad(-1.0);
    auto cps = f.critical_points();
    ASSERT_EQ(cps.size(), 1u);
    EXPECT_LT(std::abs(cps[0]), 1e-14);
    auto fps = f.fixed_points();
    ASSERT_EQ(fps.size(), 2u);
    for (cplx z : fps) EXPECT_LT(std::abs(f(z) - z), 1e-13);

    // Newton map of z^3 - 1 has critical points at the cube roots of unity and 0
    RationalMap g({1.0, 0.0, 0.0, 2.0}, {0.0, 0.0, 3.0});
    EXPECT_EQ(g.critical_points().size(), 4u);
}

TEST(Map, PreimagesSolveTheEquation)
{
    RationalMap f({cplx(0.1, 0.2), 0.0, 1.0}, {1.0, cplx(0.0, 0.3)});
    const cplx w(0.4, -0.8);
    auto ys = f.preimages(w);
    ASSERT_EQ(ys.size(), 2u);
    for (cplx y : ys) EXPECT_LT(std::abs(f(y) - w), 1e-12);
}

TEST(Map, UnicriticalForm)
{
    auto u = quad(cplx(-0.12, 0.74)).unicritical_form();
    ASSERT_TRUE(u);
    EXPECT_EQ(u->degree, 2);
    EXPECT_NEAR(std::abs(u->critical_value - cplx(-0.12, 0.74)), 0.0, 1e-15);
    // 2 (z - 1)^3 + 5 = 2z^3 - 6z^2 + 6z + 3
    auto v = RationalMap({3.0, 6.0, -6.0, 2.0}).unicritical_form();
    ASSERT_TRUE(v);
    EXPECT_NEAR(std::abs(v->center - 1.0), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(v->critical_value - 5.0), 0.0, 1e-13);
    EXPECT_FALSE(RationalMap({0.0, 1.0, 0.0, 1.0}).unicritical_form());
}

TEST(Map, FingerprintDistinguishesMaps)
{
    EXPECT_EQ(quad(0.1).fingerprint(), quad(0.1).fingerprint());
    EXPECT_NE(quad(0.1).fingerprint(), quad(0.1000000001).fingerprint());
    EXPECT_EQ(quad(0.1).fingerprint().size(), 16u);
}

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "orbitctl/counting.hpp"

using namespace orbitctl;
using std::numbers::pi;

namespace {

RationalMap quad(double c) { return RationalMap({c, 0.0, 1.0}); }

OrbitDatabase census(const RationalMap& f, int n_max)
{
    auto db = OrbitDatabase::for_map(f);
    for (int n = 1; n <= n_max; ++n) enumerate_primitive(f, n, db);
    return db;
}

const OrbitDatabase& basilica()
{
    static const auto db = census(quad(-1.0), 12);
    return db;
}

const OrbitDatabase& square()
{
    static const auto db = census(quad(0.0), 10);
    return db;
}

double maxent() { return maxent_alpha(basilica(), 12); }

// li(x) - li(2) from the Ramanujan-free series gamma + ln ln x + sum (ln x)^k / (k k!)
double li_series(double x)
{
    auto li = [](double y) {
        const double L = std::log(y);
        double term = 1.0, sum = 0.0;
        for (int k = 1; k < 400; ++k) {
            term *= L / k;
            sum += term / k;
            if (term / k < 1e-18 * sum) break;
        }
        return 0.57721566490153286061 + std::log(L) + sum;
    };
    return li(x) - li(2.0);
}

} // namespace

TEST(Count, SquareExample)
{
    EXPECT_EQ(count_orbits(square(), {3, std::log(2.0), -0.5, 0.5, 0.0, 1.0}), 2);
}

TEST(Count, EmptyWindow)
{
    EXPECT_EQ(count_orbits(basilica(), {10, 0.7, 0.123456789, 0.123456789, 0.0, 1.0}), 0);
}

TEST(Count, BruteForceRefilter)
{
    const auto f = quad(-1.0);
    const double alpha = maxent();
    const CountQuery q{8, alpha, -1.0, 1.0, 0.0, 0.5};
    long brute = 0;
    for (const auto& o : basilica().entry(8).orbits) {
        cplx z = o.representative, lambda = 1.0;
        for (int j = 0; j < 8; ++j) {
            lambda *= 2.0 * z;
            z = z * z - 1.0;
        }
        const double dev = std::log(std::abs(lambda)) - 8 * alpha;
        double ang = std::arg(lambda); // right half circle: |angle| <= pi/2
        if (dev >= -1.0 && dev <= 1.0 && std::abs(ang) <= pi / 2) ++brute;
    }
    EXPECT_EQ(count_orbits(basilica(), q), brute);
    EXPECT_GT(brute, 0);
}

TEST(Count, MonotoneAndAdditive)
{
    const double alpha = maxent();
    for (int n = 8; n <= 12; ++n) {
        const long small = count_orbits(basilica(), {n, alpha, -0.5, 0.5, 1.0, 0.25});
        const long wider = count_orbits(basilica(), {n, alpha, -1.0, 1.0, 1.0, 0.25});
        const long fuller = count_orbits(basilica(), {n, alpha, -1.0, 1.0, 1.0, 0.75});
        EXPECT_LE(small, wider);
        EXPECT_LE(wider, fuller);
        // split at a point no deviation hits exactly
        const double cut = 0.1234567;
        EXPECT_EQ(count_orbits(basilica(), {n, alpha, -1.0, cut, 0.0, 1.0}) +
                      count_orbits(basilica(), {n, alpha, std::nextafter(cut, 2.0), 1.0, 0.0, 1.0}),
                  count_orbits(basilica(), {n, alpha, -1.0, 1.0, 0.0, 1.0}));
    }
}

TEST(Count, FullWindowCountsEverything)
{
    for (int n = 1; n <= 12; ++n)
        EXPECT_EQ(count_orbits(basilica(), {n, 0.0, -1e3, 1e3, 2.0, 1.0}),
                  static_cast<long>(basilica().entry(n).orbits.size()));
}

TEST(Count, RejectsBadQueries)
{
    EXPECT_THROW(count_orbits(basilica(), {5, 0.0, 1.0, -1.0, 0.0, 1.0}), DomainError);
    EXPECT_THROW(count_orbits(basilica(), {5, 0.0, -1.0, 1.0, 0.0, 1.5}), DomainError);
    EXPECT_THROW(count_orbits(basilica(), {13, 0.0, -1.0, 1.0, 0.0, 1.0}), IncompleteCensusError);
}

TEST(Predict, ArithmeticOracle)
{
    ThermoProfile p;
    p.sigma2 = 1.0;
    p.H = std::log(2.0);
    EXPECT_NEAR(predict(p, {10, 0.0, 0.0, 1.0, 0.0, 1.0}), 12.9184385127432, 1e-10);
    EXPECT_EQ(predict(p, {10, 0.0, 0.0, 1.0, 0.0, 0.0}), 0.0);
    p.sigma2 = 0.0;
    EXPECT_THROW(predict(p, {10, 0.0, 0.0, 1.0, 0.0, 1.0}), DegenerateError);
}

TEST(Predict, ContinuousAtZeroXi)
{
    const double a = -0.7, b = 1.3;
    EXPECT_NEAR(tilted_length(1e-12, a, b), b - a, 1e-10);
    EXPECT_NEAR(tilted_length(-1e-12, a, b), b - a, 1e-10);
    // both sides of the series/closed-form switch against the third-order expansion
    auto series = [&](double x) {
        return (b - a) - x * (b * b - a * a) / 2 + x * x * (b * b * b - a * a * a) / 6 -
               x * x * x * (b * b * b * b - a * a * a * a) / 24;
    };
    EXPECT_NEAR(tilted_length(0.9999e-6, a, b), series(0.9999e-6), 1e-15);
    EXPECT_NEAR(tilted_length(1.0001e-6, a, b), series(1.0001e-6), 1e-10);
    const double xi = 0.3;
    EXPECT_NEAR(tilted_length(xi, a, b), (std::exp(-xi * a) - std::exp(-xi * b)) / xi, 1e-15);
}

TEST(Predict, ShrinkingMatchesMidpointRule)
{
    const auto p = thermo_profile(basilica(), 1.0, 12);
    ASSERT_GT(std::abs(p.xi), 0.1);
    for (double l : {0.5, 1.0, 2.0}) {
        auto s = WindowSchedule::fixed(0.3 - l / 2, 0.3 + l / 2, 0.0, 0.5);
        for (int n : {8, 12}) {
            const double exact = predict(p, s.query(n, 1.0));
            const double mid = predict_shrinking(p, s, n);
            EXPECT_LE(std::abs(mid - exact) / exact,
                      p.xi * p.xi * l * l / 8 * std::exp(std::abs(p.xi) * l / 2) + 1e-12);
        }
    }
}

TEST(Predict, ShrinkingHandEvaluation)
{
    const double alpha = maxent();
    const auto p = thermo_profile(basilica(), alpha, 12);
    WindowSchedule s;
    s.center = Sequence::constant(0.2);
    s.length = Sequence::power(1.0, -0.5);
    s.arc_width = Sequence::power(1.0, -0.25);
    s.k_lo = -1;
    s.k_hi = 1;
    const int n = 14;
    const double hand = std::pow(14.0, -0.25) * std::pow(14.0, -0.5) * std::exp(-p.xi * 0.2) * std::exp(p.H * 14) /
                        (std::sqrt(p.sigma2) * std::sqrt(2 * pi) * std::pow(14.0, 1.5));
    EXPECT_NEAR(predict_shrinking(p, s, n) / hand, 1.0, 1e-12);
}

TEST(Schedule, ExponentialShrinkageRejected)
{
    const auto p = thermo_profile(basilica(), maxent(), 12);
    WindowSchedule s;
    s.length = Sequence::exponential(1.0, -1.0);
    EXPECT_FALSE(check_schedule(s).ok);
    EXPECT_THROW(predict_shrinking(p, s, 12), ScheduleError);
}

TEST(Schedule, ContainmentInK)
{
    auto s = WindowSchedule::fixed(-1.0, 1.0);
    s.k_lo = -0.5;
    const auto c = check_schedule(s);
    EXPECT_FALSE(c.contained);
    EXPECT_FALSE(c.ok);
}

TEST(Bump, SandwichOnDenseSample)
{
    const int N = 4096;
    for (double eta : {0.05, 0.1, 0.5}) {
        const auto outer = make_bump(WindowKind::interval_bump, eta, true);
        const auto inner = make_bump(WindowKind::interval_bump, eta, false);
        double integral = 0.0;
        const double lo = -1.5, hi = 1.5, h = (hi - lo) / N;
        for (int i = 0; i <= N; ++i) {
            const double x = lo + i * h;
            const double v = outer(x), w = inner(x);
            const bool target = std::abs(x) <= 0.5;
            if (target) {
                EXPECT_GE(v, 1.0) << x;
            }
            EXPECT_LE(v, 1.0 + eta);
            if (std::abs(x) > 0.5 + eta) {
                EXPECT_EQ(v, 0.0) << x;
            }
            EXPECT_LE(w, target ? 1.0 : 0.0) << x;
            EXPECT_GE(w, 0.0);
            integral += v * h;
        }
        EXPECT_LE(integral, 1.0 + eta) << eta;
        EXPECT_NEAR(outer(0.0), 1.0 + eta / 4, 1e-15);
    }
}

TEST(Bump, FourthDifferencesBounded)
{
    const auto outer = make_bump(WindowKind::interval_bump, 0.1, true);
    auto max_d4 = [&](double h) {
        double m = 0.0;
        for (double x = -1.0; x <= 1.0; x += h) {
            const double d4 = outer(x - 2 * h) - 4 * outer(x - h) + 6 * outer(x) - 4 * outer(x + h) + outer(x + 2 * h);
            m = std::max(m, std::abs(d4) / std::pow(h, 4));
        }
        return m;
    };
    // a jump in the 4th derivative would make these grow like 1/h
    const double coarse = max_d4(1.0 / 2048), fine = max_d4(1.0 / 8192);
    EXPECT_TRUE(std::isfinite(fine));
    EXPECT_LT(fine, 1.2 * coarse);
}

TEST(Bump, ArcWindows)
{
    EXPECT_TRUE(make_bump(WindowKind::arc_bump, 0.1, true, 1.0).constant);
    EXPECT_TRUE(make_bump(WindowKind::arc_bump, 0.1, true, 0.99).constant);
    EXPECT_FALSE(make_bump(WindowKind::arc_bump, 0.1, true, 0.5).constant);
    EXPECT_NEAR(arc_coordinate(0.1, 2 * pi - 0.1, 0.25), 0.2 / (2 * pi * 0.25), 1e-12);
    EXPECT_THROW(make_bump(WindowKind::interval_bump, 1.5), DomainError);
}

TEST(Smoothed, DominatesSharpCount)
{
    const double alpha = maxent();
    for (int n = 8; n <= 12; ++n)
        for (double w : {0.25, 0.5, 1.0}) {
            const auto s = WindowSchedule::fixed(-1.0, 1.0, 0.7, w);
            const long sharp = count_orbits(basilica(), s.query(n, alpha));
            const auto out = smoothed_count(basilica(), n, alpha, make_bump(WindowKind::interval_bump, 0.1, true),
                                            make_bump(WindowKind::arc_bump, 0.1, true, w), s);
            const auto in = smoothed_count(basilica(), n, alpha, make_bump(WindowKind::interval_bump, 0.1, false),
                                           make_bump(WindowKind::arc_bump, 0.1, false, w), s);
            EXPECT_GE(out.primitive, sharp);
            EXPECT_LE(in.primitive, sharp);
        }
}

TEST(Smoothed, FullCircleIsHolonomyFree)
{
    const double alpha = maxent();
    const auto s = WindowSchedule::fixed(-1.0, 1.0, 0.0, 1.0);
    const auto phi = make_bump(WindowKind::interval_bump, 0.1, true);
    const auto sc = smoothed_count(basilica(), 10, alpha, phi, make_bump(WindowKind::arc_bump, 0.1, true, 1.0), s);
    double direct = 0.0;
    for (const auto& o : basilica().entry(10).orbits) direct += phi((o.log_abs_multiplier - 10 * alpha) / 2.0);
    EXPECT_NEAR(sc.primitive, direct, 1e-9);
}

TEST(Smoothed, PrimitiveGapIsSquareRootSized)
{
    const double alpha = maxent();
    const auto p = thermo_profile(basilica(), alpha, 12);
    const auto s = WindowSchedule::fixed(-1.0, 1.0, 0.0, 0.5);
    for (int n = 8; n <= 12; ++n) {
        const auto sc = smoothed_count(basilica(), n, alpha, make_bump(WindowKind::interval_bump, 0.1, true),
                                       make_bump(WindowKind::arc_bump, 0.1, true, 0.5), s);
        EXPECT_LT(std::abs(sc.gap) / std::exp(p.H * n / 2), 2.0) << n;
    }
}

TEST(Weyl, SquareNeverEquidistributes)
{
    for (const auto& w : weyl_sums(square(), 10, std::log(2.0), -1.0, 1.0, 5)) EXPECT_NEAR(w.magnitude, 1.0, 1e-12);
    for (const auto& w : weyl_sums(basilica(), 10, maxent(), -1.0, 1.0, 0, 0)) EXPECT_EQ(w.magnitude, 1.0);
}

TEST(Weyl, EmptySelectionFlagged)
{
    const auto ws = weyl_sums(basilica(), 10, maxent(), 50.0, 60.0, 3);
    ASSERT_EQ(ws.size(), 3u);
    for (const auto& w : ws) {
        EXPECT_TRUE(std::isnan(w.magnitude));
        EXPECT_EQ(w.sample_size, 0);
    }
}

TEST(Weyl, BasilicaBelowBound)
{
    for (const auto& w : weyl_sums(basilica(), 12, maxent(), -1.0, 1.0, 5)) EXPECT_LT(w.magnitude, 0.2) << w.k;
}

TEST(Li, SeriesOracle)
{
    EXPECT_EQ(logarithmic_integral(2.0), 0.0);
    EXPECT_NEAR(logarithmic_integral(10.0), 5.1204357246698, 1e-9);
    for (double x : {2.5, 10.0, 1e3, 1e6, 1e12})
        EXPECT_NEAR(logarithmic_integral(x) / li_series(x), 1.0, 1e-10) << x;
    EXPECT_THROW(logarithmic_integral(1.9), DomainError);
}

TEST(OwCount, SquareClosedForm)
{
    // multipliers are exactly 2^n; #P_n for n = 1..5 is 1, 1, 2, 3, 6 (0 is superattracting)
    EXPECT_EQ(ow_count(square(), std::pow(2.0, 5.5)), 13);
    long expect = 0;
    for (int m = 1; m <= 8; ++m) {
        expect += static_cast<long>(square().entry(m).orbits.size());
        EXPECT_EQ(ow_count(square(), std::pow(2.0, m + 0.5)), expect);
    }
}

TEST(OwCount, TruncationDetected)
{
    EXPECT_THROW(ow_count(square(), std::pow(2.0, 10.5)), TruncationError);
    EXPECT_NO_THROW(ow_count(square(), std::pow(2.0, 10.5), true));
    // the basilica has slowly expanding orbits near the critical cycle
    EXPECT_THROW(ow_count(basilica(), std::exp(maxent() * 8)), TruncationError);
}

TEST(Convergence, UndefinedRatiosAndMonotoneRows)
{
    const auto p = thermo_profile(basilica(), maxent(), 12);
    const auto zero = convergence_report(basilica(), p, WindowSchedule::fixed(-1.0, 1.0, 0.0, 0.0), 8, 12);
    for (const auto& r : zero.rows) {
        EXPECT_FALSE(r.defined);
        EXPECT_TRUE(std::isnan(r.ratio));
    }
    EXPECT_FALSE(zero.improving);
    const auto narrow = convergence_report(basilica(), p, WindowSchedule::fixed(-0.5, 0.5, 0.0, 0.5), 8, 12);
    const auto wide = convergence_report(basilica(), p, WindowSchedule::fixed(-1.0, 1.0, 0.0, 0.5), 8, 12);
    for (std::size_t i = 0; i < wide.rows.size(); ++i) EXPECT_LE(narrow.rows[i].count, wide.rows[i].count);
}

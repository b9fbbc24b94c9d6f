#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "orbitctl/counting.hpp"
#include "orbitctl/orbit_enum.hpp"
#include "orbitctl/thermo.hpp"
#include "orbitctl/transfer_op.hpp"

namespace orbitctl {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

namespace acceptance {

inline RationalMap quadratic(double c) { return RationalMap({c, 0.0, 1.0}); }

inline RationalMap monomial(int d)
{
    std::vector<cplx> c(d + 1, 0.0);
    c[d] = 1.0;
    return RationalMap(c);
}

inline std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

inline OrbitDatabase census(const RationalMap& f, int n_max)
{
    auto db = OrbitDatabase::for_map(f);
    for (int n = 1; n <= n_max; ++n) enumerate_primitive(f, n, db);
    return db;
}

/// The basilica census to period 14 with the Legendre data every
/// trend criterion shares.
struct BasilicaData {
    RationalMap map;
    OrbitDatabase db;
    double alpha = 0.0;
    ThermoProfile profile;
    double enumeration_seconds = 0.0;
    static constexpr int top = 14;

    explicit BasilicaData(RationalMap f) : map(std::move(f))
    {
        const auto t0 = std::chrono::steady_clock::now();
        db = census(map, top);
        enumeration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        alpha = maxent_alpha(db, top);
        profile = thermo_profile(db, alpha, top);
    }

    double ratio(const CountQuery& q) const { return count_orbits(db, q) / predict(profile, q); }
};

inline CriterionResult census_exactness()
{
    CriterionResult r{1, "census exactness", true, "", 0.0};
    std::ostringstream d;
    std::size_t pairs = 0;
    for (double c : {0.0, 0.1}) {
        const auto f = quadratic(c);
        auto db = OrbitDatabase::for_map(f);
        for (int n = 1; n <= 12; ++n) {
            enumerate_primitive(f, n, db);
            if (!db.complete(n) || census_count(db, n) != (std::size_t{1} << n)) {
                r.pass = false;
                d << "identity fails for c=" << c << " n=" << n << "; ";
            }
            const auto bw = fixed_points(f, n, FixedPointMethod::backward);
            const auto rt = fixed_points(f, n, FixedPointMethod::roots);
            const auto agree = detail::compare_sets(bw.points, rt.points, 1e-9);
            pairs += agree.matched;
            if (agree.unmatched_backward || agree.unmatched_roots || bw.points.size() != rt.points.size()) {
                r.pass = false;
                d << "methods disagree for c=" << c << " n=" << n << "; ";
            }
        }
    }
    d << "identity exact for n<=12 on z^2 and z^2+0.1; " << pairs << " points paired within 1e-9";
    r.detail = d.str();
    return r;
}

inline CriterionResult degenerate_pressure()
{
    CriterionResult r{2, "degenerate pressure closed form", true, "", 0.0};
    double worst = 0.0;
    for (int d : {2, 3}) {
        const auto db = census(monomial(d), 10);
        const double ld = std::log(static_cast<double>(d));
        for (double alpha : {0.0, 0.5})
            for (double t : {-1.0, -0.5, 0.0, 0.5, 1.0})
                worst = std::max(worst, std::abs(pressure_estimate(db, t, alpha, 10) - (ld + t * (ld - alpha))));
    }
    r.pass = worst < 1e-3;
    r.detail = "max |q - closed form| = " + fmt("%.3e", worst) + " (< 1e-3)";
    return r;
}

inline CriterionResult legendre_anchor(const OrbitDatabase& db)
{
    CriterionResult r{3, "Legendre anchor", false, "", 0.0};
    const double alpha = maxent_alpha(db, 12);
    const auto p = thermo_profile(db, alpha, 12);
    r.pass = std::abs(p.xi) < 1e-3 && std::abs(p.H - std::log(2.0)) < 1e-2;
    r.detail = "alpha=" + fmt("%.6f", alpha) + " xi=" + fmt("%.2e", p.xi) + " |H-log2|=" +
               fmt("%.2e", std::abs(p.H - std::log(2.0)));
    return r;
}

inline CriterionResult dimension_dual(const OrbitDatabase& basilica_db, const RationalMap& basilica)
{
    CriterionResult r{4, "dimension dual-method", true, "", 0.0};
    std::ostringstream d;
    auto dual = [&](const char* name, const RationalMap& f, const OrbitDatabase& db) {
        const double a = bowen_dimension(db, 12).delta;
        const double b = transfer_dimension(build_mesh(f, 12)).delta;
        const bool ok = std::abs(a - b) < 1e-2;
        r.pass = r.pass && ok;
        d << name << ": orbit " << fmt("%.5f", a) << " transfer " << fmt("%.5f", b) << "; ";
    };
    dual("z^2+0.05", quadratic(0.05), census(quadratic(0.05), 12));
    dual("z^2-1", basilica, basilica_db);
    for (int deg : {2, 3}) {
        const int n = deg == 2 ? 12 : 10;
        const double a = bowen_dimension(census(monomial(deg), n), n).delta;
        const double b = transfer_dimension(build_mesh(monomial(deg), deg == 2 ? 12 : 8)).delta;
        const bool ok = std::abs(a - 1.0) < 1e-4 && std::abs(b - 1.0) < 1e-4;
        r.pass = r.pass && ok;
        d << "z^" << deg << ": |delta-1| " << fmt("%.1e", std::abs(a - 1.0)) << " / " << fmt("%.1e", std::abs(b - 1.0))
          << "; ";
    }
    r.detail = d.str();
    return r;
}

inline CriterionResult local_clt(const BasilicaData& bd)
{
    CriterionResult r{5, "local-CLT headline", false, "", 0.0};
    std::vector<double> dev(15, 0.0);
    double top = 0.0;
    for (int n = 9; n <= 14; ++n) {
        const double ratio = bd.ratio({n, bd.alpha, -1.0, 1.0, 0.0, 0.5});
        dev[n] = std::abs(ratio - 1.0);
        if (n == 14) top = ratio;
    }
    const double late = (dev[12] + dev[13] + dev[14]) / 3.0, early = (dev[9] + dev[10] + dev[11]) / 3.0;
    r.pass = top >= 0.7 && top <= 1.3 && late < early && bd.enumeration_seconds < 300.0;
    r.detail = "ratio(14)=" + fmt("%.4f", top) + " mean|r-1| 12-14 " + fmt("%.4f", late) + " vs 9-11 " +
               fmt("%.4f", early) + "; census to 14 in " + fmt("%.2f", bd.enumeration_seconds) + " s";
    return r;
}

inline WindowSchedule shrinking_schedule()
{
    WindowSchedule s;
    s.center = Sequence::constant(0.0);
    s.length = Sequence::power(1.0, -0.5);
    s.arc_center = Sequence::constant(0.0);
    s.arc_width = Sequence::constant(0.5);
    s.k_lo = -1.0;
    s.k_hi = 1.0;
    s.n_lo = 8;
    s.n_hi = 14;
    return s;
}

inline CriterionResult shrinking_windows(const BasilicaData& bd)
{
    CriterionResult r{6, "shrinking windows", false, "", 0.0};
    const auto s = shrinking_schedule();
    const auto chk = check_schedule(s);
    std::ostringstream d;
    d << "schedule check " << (chk.ok ? "ok" : chk.reason) << " (max |log l_n|/n " << fmt("%.3f", chk.max_length_rate)
      << "); ratios";
    double top = 0.0;
    for (int n = 10; n <= 14; ++n) {
        const long c = count_orbits(bd.db, s.query(n, bd.alpha));
        const double ratio = c / predict_shrinking(bd.profile, s, n);
        d << " n" << n << "=" << fmt("%.3f", ratio);
        if (n == 14) top = ratio;
    }
    r.pass = chk.ok && top >= 0.6 && top <= 1.4;
    r.detail = d.str();
    return r;
}

inline CriterionResult equidistribution(const BasilicaData& bd)
{
    CriterionResult r{7, "holonomy equidistribution", true, "", 0.0};
    const auto w14 = weyl_sums(bd.db, 14, bd.alpha, -1.0, 1.0, 5);
    const auto w10 = weyl_sums(bd.db, 10, bd.alpha, -1.0, 1.0, 5);
    std::ostringstream d;
    d << "k=1..5 at n=14:";
    for (std::size_t i = 0; i < w14.size(); ++i) {
        d << ' ' << fmt("%.4f", w14[i].magnitude) << "(" << fmt("%.4f", w10[i].magnitude) << ")";
        if (!(w14[i].magnitude < 0.2) || !(w14[i].magnitude < w10[i].magnitude)) r.pass = false;
    }
    const auto control = weyl_sums(census(quadratic(0.0), 10), 10, std::log(2.0), -1.0, 1.0, 5);
    double worst = 0.0;
    for (const auto& w : control) worst = std::max(worst, std::abs(w.magnitude - 1.0));
    if (!(worst < 1e-9)) r.pass = false;
    d << " [n=10 in parens]; z^2 control max |W-1| " << fmt("%.1e", worst);
    r.detail = d.str();
    return r;
}

inline CriterionResult decay(const RationalMap& basilica)
{
    CriterionResult r{8, "spectral decay probe", true, "", 0.0};
    const auto op = normalize(build_mesh(basilica, 12), 0.0, 0.0);
    std::ostringstream d;
    const double unit = decay_probe(op, 0.0, 0, 40);
    if (!(std::abs(unit - 1.0) < 1e-6)) r.pass = false;
    d << "(0,0) " << fmt("%.9f", unit);
    for (auto [b, k] : {std::pair{5.0, 0}, std::pair{0.0, 1}, std::pair{3.0, 2}}) {
        const double rate = decay_probe(op, b, k, 40);
        if (!(rate < 0.99)) r.pass = false;
        d << "; (" << b << "," << k << ") " << fmt("%.4f", rate);
    }
    r.detail = d.str();
    return r;
}

inline CriterionResult sandwich(const BasilicaData& bd)
{
    CriterionResult r{9, "smoothed sandwich", true, "", 0.0};
    const double eta = 0.1;
    struct Window {
        double a, b, center, width;
    };
    const std::vector<Window> windows{{-1, 1, 0, 0.5},      {-1, 1, 0, 1},         {-0.5, 0.5, 0, 0.5},
                                      {0, 2, std::numbers::pi, 0.25}, {-2, -1, 1.0, 0.5}, {-0.25, 0.25, 0, 1},
                                      {0.5, 1.5, 4.0, 0.1}};
    long checks = 0, violations = 0;
    for (int n = 10; n <= 14; ++n)
        for (const auto& w : windows) {
            const auto s = WindowSchedule::fixed(w.a, w.b, w.center, w.width);
            const long sharp = count_orbits(bd.db, s.query(n, bd.alpha));
            const auto outer = smoothed_count(bd.db, n, bd.alpha, make_bump(WindowKind::interval_bump, eta, true),
                                              make_bump(WindowKind::arc_bump, eta, true, w.width), s);
            const auto inner = smoothed_count(bd.db, n, bd.alpha, make_bump(WindowKind::interval_bump, eta, false),
                                              make_bump(WindowKind::arc_bump, eta, false, w.width), s);
            checks += 2;
            if (outer.primitive < sharp) ++violations;
            if (inner.primitive > sharp) ++violations;
        }
    r.pass = violations == 0;
    r.detail = std::to_string(violations) + " violations in " + std::to_string(checks) + " comparisons (eta = 0.1)";
    return r;
}

inline CriterionResult multiplier_count(const BasilicaData& bd)
{
    CriterionResult r{10, "multiplier-ordered count trend", false, "", 0.0};
    const double chi = bd.alpha;
    const double delta = bowen_dimension(bd.db, BasilicaData::top).delta;
    std::ostringstream d;
    bool truncated = false;
    try {
        ow_count(bd.db, std::exp(chi * 8));
    } catch (const TruncationError&) {
        truncated = true;
    }
    std::vector<double> ratios;
    for (int n = 8; n <= 13; ++n) {
        const double t = std::exp(chi * n);
        ratios.push_back(ow_count(bd.db, t, true) / logarithmic_integral(std::pow(t, delta)));
    }
    const double hi = *std::max_element(ratios.begin(), ratios.end());
    const double lo = *std::min_element(ratios.begin(), ratios.end());
    bool increasing = true, decreasing = true;
    for (std::size_t i = 1; i < ratios.size(); ++i) {
        increasing = increasing && ratios[i] > ratios[i - 1];
        decreasing = decreasing && ratios[i] < ratios[i - 1];
    }
    r.pass = hi / lo < 2.0 && !increasing && !decreasing;
    d << "delta=" << fmt("%.4f", delta) << " ratios n=8..13:";
    for (double x : ratios) d << ' ' << fmt("%.3f", x);
    d << "; spread x" << fmt("%.2f", hi / lo);
    if (increasing || decreasing) d << ", monotone";
    if (truncated) d << "; census to 14 does not cover |lambda| < t (orbits of longer period are missing)";
    r.detail = d.str();
    return r;
}

} // namespace acceptance

/// Runs criteria 1-10; `basilica` defaults to z^2 - 1. Each result is passed
/// to `on_result` as soon as it is known.
inline std::vector<CriterionResult> run_acceptance(std::optional<RationalMap> basilica = std::nullopt,
                                                   const std::function<void(const CriterionResult&)>& on_result = {})
{
    using namespace acceptance;
    const RationalMap bmap = basilica ? *basilica : quadratic(-1.0);
    std::vector<CriterionResult> out;
    std::unique_ptr<BasilicaData> bd;
    std::string bd_error;
    try {
        bd = std::make_unique<BasilicaData>(bmap);
    } catch (const std::exception& e) {
        bd_error = e.what();
    }

    auto run = [&](int id, const char* name, auto&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = fn();
        } catch (const std::exception& e) {
            r = CriterionResult{id, name, false, std::string("error: ") + e.what(), 0.0};
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(r);
        if (on_result) on_result(r);
    };
    auto need = [&]() -> const BasilicaData& {
        if (!bd) throw std::runtime_error("census of the acceptance map failed: " + bd_error);
        return *bd;
    };

    run(1, "census exactness", [&] {
        auto r = census_exactness();
        return r;
    });
    run(2, "degenerate pressure closed form", [&] { return degenerate_pressure(); });
    run(3, "Legendre anchor", [&] { return legendre_anchor(need().db); });
    run(4, "dimension dual-method", [&] { return dimension_dual(need().db, bmap); });
    run(5, "local-CLT headline", [&] { return local_clt(need()); });
    run(6, "shrinking windows", [&] { return shrinking_windows(need()); });
    run(7, "holonomy equidistribution", [&] { return equidistribution(need()); });
    run(8, "spectral decay probe", [&] { return decay(bmap); });
    run(9, "smoothed sandwich", [&] { return sandwich(need()); });
    run(10, "multiplier-ordered count trend", [&] { return multiplier_count(need()); });

    // wall-clock limits
    if (out[0].seconds >= 60.0) {
        out[0].pass = false;
        out[0].detail += "; exceeded 1 min";
    }
    if (out[3].seconds >= 120.0) {
        out[3].pass = false;
        out[3].detail += "; exceeded 2 min";
    }
    return out;
}

inline std::string format_result(const CriterionResult& r)
{
    char head[96];
    std::snprintf(head, sizeof head, "[%s] %2d %-32s (%.1fs) ", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                  r.seconds);
    return head + r.detail;
}

} // namespace orbitctl

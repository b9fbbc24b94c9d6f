#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "orbitctl/errors.hpp"
#include "orbitctl/map.hpp"
#include "orbitctl/roots.hpp"
#include "orbitctl/spatial.hpp"

namespace orbitctl {

enum class FixedPointMethod { backward, roots, both, automatic };

inline const char* to_string(FixedPointMethod m)
{
    switch (m) {
    case FixedPointMethod::backward: return "backward";
    case FixedPointMethod::roots: return "roots";
    case FixedPointMethod::both: return "both";
    case FixedPointMethod::automatic: return "auto";
    }
    return "?";
}

inline FixedPointMethod method_from_string(const std::string& s)
{
    if (s == "backward") return FixedPointMethod::backward;
    if (s == "roots") return FixedPointMethod::roots;
    if (s == "both") return FixedPointMethod::both;
    if (s == "auto") return FixedPointMethod::automatic;
    throw ConfigError("unknown enumeration method '" + s + "'");
}

struct EnumerationOptions {
    FixedPointMethod method = FixedPointMethod::automatic;
    double pairing_tol = 1e-9;
    std::size_t max_roots_degree = 4096;
    int backward_max_iter = 200;
    double backward_step_tol = 1e-13;
    int critical_orbit_iter = 4000;
    bool roots_fallback = true; // backward: fill a short census with the roots method when feasible
};

/// d^n, or d^n + 1 for rational maps that do not fix infinity. Saturates.
inline std::size_t expected_fixed_point_count(const RationalMap& f, int n)
{
    std::size_t count = 1;
    for (int k = 0; k < n; ++k) {
        if (count > std::numeric_limits<std::size_t>::max() / static_cast<std::size_t>(f.degree()))
            return std::numeric_limits<std::size_t>::max();
        count *= static_cast<std::size_t>(f.degree());
    }
    if (!f.is_polynomial() && f.numerator().size() <= f.denominator().size()) ++count;
    return count;
}

// ---------------------------------------------------------------------------
// Critical orbits and non-repelling cycles

enum class CriticalFate { attracting_cycle, escapes, undecided };

struct CriticalOrbit {
    cplx critical_point;
    CriticalFate fate = CriticalFate::undecided;
    std::vector<cplx> cycle; // when fate == attracting_cycle, starting at the polished limit point
    double log_abs_multiplier = 0.0;
    int steps = 0; // iterations used before classification
};

/// Radius outside which a polynomial doubles |z| at every step.
inline double escape_radius(const RationalMap& f)
{
    const auto p = f.numerator();
    double lower = 0.0;
    for (std::size_t k = 0; k + 1 < p.size(); ++k) lower += std::abs(p[k]);
    return std::max(1.0, (2.0 + lower) / std::abs(p.back()));
}

inline std::vector<CriticalOrbit> critical_orbits(const RationalMap& f, int max_iter, int max_period = 64)
{
    std::vector<CriticalOrbit> out;
    const double esc = f.is_polynomial() ? escape_radius(f) : std::numeric_limits<double>::infinity();
    for (cplx c : f.critical_points()) {
        CriticalOrbit co;
        co.critical_point = c;
        cplx z = c;
        bool escaped = false;
        try {
            for (int k = 0; k < max_iter; ++k) {
                z = f.evaluate(z);
                co.steps = k + 1;
                if (std::abs(z) > esc) {
                    escaped = true;
                    break;
                }
            }
        } catch (const PoleError&) {
            out.push_back(co);
            continue;
        }
        if (escaped) {
            co.fate = CriticalFate::escapes;
            out.push_back(co);
            continue;
        }
        for (int p = 1; p <= max_period; ++p) {
            cplx w = z;
            try {
                w = iterate(f, z, p);
            } catch (const PoleError&) {
                break;
            }
            if (std::abs(w - z) > 1e-8 * std::max(1.0, std::abs(z))) continue;
            cplx y = z;
            for (int it = 0; it < 20; ++it) {
                auto [fy, dfy] = iterate_with_derivative(f, y, p);
                const cplx step = (fy - y) / (dfy - 1.0);
                y -= step;
                if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(y))) break;
            }
            const auto [fy, dfy] = iterate_with_derivative(f, y, p);
            if (std::abs(dfy) >= 1.0) break; // neutral or worse: leave undecided
            co.fate = CriticalFate::attracting_cycle;
            co.log_abs_multiplier = std::abs(dfy) > 0.0 ? std::log(std::abs(dfy)) : -std::numeric_limits<double>::infinity();
            co.cycle.push_back(y);
            for (int j = 1; j < p; ++j) co.cycle.push_back(f.evaluate(co.cycle.back()));
            break;
        }
        out.push_back(co);
    }
    return out;
}

/// Distinct attracting cycles reached by critical orbits.
inline std::vector<std::vector<cplx>> attracting_cycles(const RationalMap& f, int max_iter, double tol)
{
    std::vector<std::vector<cplx>> cycles;
    for (const auto& co : critical_orbits(f, max_iter)) {
        if (co.fate != CriticalFate::attracting_cycle) continue;
        bool seen = false;
        for (const auto& cyc : cycles)
            for (cplx z : cyc)
                if (std::abs(z - co.cycle.front()) <= tol * std::max(1.0, std::abs(z))) seen = true;
        if (!seen) cycles.push_back(co.cycle);
    }
    return cycles;
}

// ---------------------------------------------------------------------------
// Inverse branches

/// Repelling fixed point with the largest multiplier modulus; ties go to the
/// larger real part, then imaginary part.
inline std::optional<cplx> dominant_repelling_fixed_point(const RationalMap& f)
{
    std::optional<cplx> best;
    double best_mod = 1.0;
    for (cplx z : f.fixed_points()) {
        double m = 0.0;
        try {
            m = std::abs(f.derivative(z));
        } catch (const PoleError&) {
            continue;
        }
        const bool better = !best || m > best_mod * (1.0 + 1e-12) ||
                            (std::abs(m - best_mod) <= 1e-12 * best_mod &&
                             (z.real() > best->real() + 1e-12 ||
                              (std::abs(z.real() - best->real()) <= 1e-12 && z.imag() > best->imag())));
        if (m > 1.0 && better) {
            best = z;
            best_mod = m;
        }
    }
    return best;
}

/// Closed-form inverse branches y_k(w), k = 0..d-1, of f(z) = a (z - z0)^d + c.
///
/// The branch cut in the w-plane is the ray from the critical value through the
/// dominant repelling fixed point, so the sectors that the branches map onto
/// are bounded by preimages of that fixed point and symbolic words code the
/// periodic points one-to-one.
class InverseBranches {
public:
    explicit InverseBranches(const RationalMap& f)
    {
        auto form = f.unicritical_form();
        if (!form) throw BranchCutError("no closed-form inverse branches for this map");
        form_ = *form;
        auto beta = dominant_repelling_fixed_point(f);
        if (!beta) throw BranchCutError("no repelling fixed point to anchor the branch cut");
        anchor_ = *beta;
        cut_ = std::arg((anchor_ - form_.critical_value) / form_.scale);
    }

    int count() const noexcept { return form_.degree; }
    cplx anchor() const noexcept { return anchor_; }

    cplx operator()(int k, cplx w) const
    {
        const cplx u = (w - form_.critical_value) / form_.scale;
        const double psi = cut_ + wrap_angle(std::arg(u) - cut_);
        const double d = static_cast<double>(form_.degree);
        return form_.center + std::polar(std::pow(std::abs(u), 1.0 / d), (psi + two_pi * k) / d);
    }

private:
    UnicriticalForm form_{};
    cplx anchor_;
    double cut_ = 0.0;
};

/// Level-`depth` preimages f^{-depth}(seed), in branch order.
inline std::vector<cplx> backward_tree(const RationalMap& f, cplx seed, int depth)
{
    std::vector<cplx> level{seed};
    std::optional<InverseBranches> br;
    try {
        br.emplace(f);
    } catch (const BranchCutError&) {
    }
    for (int k = 0; k < depth; ++k) {
        std::vector<cplx> next;
        next.reserve(level.size() * static_cast<std::size_t>(f.degree()));
        for (cplx w : level) {
            if (br) {
                for (int b = 0; b < br->count(); ++b) next.push_back((*br)(b, w));
            } else {
                for (cplx y : f.preimages(w)) next.push_back(y);
            }
        }
        level = std::move(next);
    }
    return level;
}

// ---------------------------------------------------------------------------
// Fixed points of f^n

struct MethodAgreement {
    std::size_t matched = 0;
    std::size_t unmatched_backward = 0;
    std::size_t unmatched_roots = 0;
    double max_distance = 0.0;
};

struct FixedPointSet {
    std::vector<cplx> points;
    std::size_t expected = 0;
    std::size_t deficiency = 0; // expected - distinct points found
    FixedPointMethod method = FixedPointMethod::roots;
    std::size_t failed_words = 0;
    int aberth_iterations = 0;
    std::optional<MethodAgreement> agreement;
};

/// Newton ratio of P_n(z) - z Q_n(z), evaluated through the map's homogeneous
/// form with per-step rescaling so nothing overflows.
class FixedPointEquation {
public:
    FixedPointEquation(const RationalMap& f, int n) : n_(n), d_(f.degree())
    {
        p_.assign(f.numerator().begin(), f.numerator().end());
        q_.assign(f.denominator().begin(), f.denominator().end());
        p_.resize(d_ + 1, 0.0);
        q_.resize(d_ + 1, 0.0);
    }

    cplx newton_ratio(cplx z) const
    {
        cplx x = z, y = 1.0, dx = 1.0, dy = 0.0;
        std::vector<cplx> xp(d_ + 1), yp(d_ + 1);
        for (int step = 0; step < n_; ++step) {
            xp[0] = yp[0] = 1.0;
            for (int j = 1; j <= d_; ++j) {
                xp[j] = xp[j - 1] * x;
                yp[j] = yp[j - 1] * y;
            }
            cplx P = 0.0, Px = 0.0, Py = 0.0, Q = 0.0, Qx = 0.0, Qy = 0.0;
            for (int j = 0; j <= d_; ++j) {
                const cplx mono = xp[j] * yp[d_ - j];
                P += p_[j] * mono;
                Q += q_[j] * mono;
                if (j > 0) {
                    const cplx m = static_cast<double>(j) * xp[j - 1] * yp[d_ - j];
                    Px += p_[j] * m;
                    Qx += q_[j] * m;
                }
                if (j < d_) {
                    const cplx m = static_cast<double>(d_ - j) * xp[j] * yp[d_ - j - 1];
                    Py += p_[j] * m;
                    Qy += q_[j] * m;
                }
            }
            const cplx ndx = Px * dx + Py * dy;
            const cplx ndy = Qx * dx + Qy * dy;
            const double s = std::max(std::abs(P), std::abs(Q));
            if (!(s > 0.0) || !std::isfinite(s)) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
            x = P / s;
            y = Q / s;
            dx = ndx / s;
            dy = ndy / s;
        }
        return (x - z * y) / (dx - y - z * dy);
    }

private:
    int n_, d_;
    std::vector<cplx> p_, q_;
};

namespace detail {

inline bool polish_fixed_point(const RationalMap& f, cplx& z, int n)
{
    try {
        for (int it = 0; it < 12; ++it) {
            auto [fz, dfz] = iterate_with_derivative(f, z, n);
            const cplx step = (fz - z) / (dfz - 1.0);
            if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return false;
            z -= step;
            if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        auto [fz, dfz] = iterate_with_derivative(f, z, n);
        return std::abs(fz - z) <= 1e-9 * std::max(1.0, std::abs(z)) * std::max(1.0, std::abs(dfz - 1.0)) * 1e-3;
    } catch (const Error&) {
        return false;
    }
}

inline std::vector<int> divisors(int n)
{
    std::vector<int> out;
    for (int m = 1; m <= n; ++m)
        if (n % m == 0) out.push_back(m);
    return out;
}

inline MethodAgreement compare_sets(std::span<const cplx> backward, std::span<const cplx> roots, double tol)
{
    MethodAgreement a;
    if (roots.empty() || backward.empty()) {
        a.unmatched_backward = backward.size();
        a.unmatched_roots = roots.size();
        return a;
    }
    PointGrid rg(roots), bg(backward);
    for (cplx z : backward) {
        auto [i, dist] = rg.nearest(z);
        if (dist <= tol * std::max(1.0, std::abs(z))) {
            ++a.matched;
            a.max_distance = std::max(a.max_distance, dist);
        } else {
            ++a.unmatched_backward;
        }
    }
    for (cplx z : roots) {
        auto [i, dist] = bg.nearest(z);
        if (dist > tol * std::max(1.0, std::abs(z))) ++a.unmatched_roots;
    }
    return a;
}

} // namespace detail

/// Repelling fixed points of f^n from symbolic words over the inverse branches.
/// Words whose contraction does not settle are counted, not fatal.
inline std::vector<cplx> backward_word_points(const RationalMap& f, int n, const EnumerationOptions& opt,
                                              std::size_t* failed_words = nullptr)
{
    InverseBranches br(f);
    const std::size_t d = static_cast<std::size_t>(br.count());
    std::size_t words = 1;
    for (int k = 0; k < n; ++k) words *= d;
    std::vector<int> digits(n);
    std::vector<cplx> found;
    found.reserve(words);
    std::size_t failed = 0;
    const cplx seed = br.anchor();
    for (std::size_t w = 0; w < words; ++w) {
        std::size_t rest = w;
        for (int j = 0; j < n; ++j) {
            digits[j] = static_cast<int>(rest % d);
            rest /= d;
        }
        cplx z = seed;
        bool converged = false;
        for (int it = 0; it < opt.backward_max_iter; ++it) {
            cplx y = z;
            for (int j = n; j-- > 0;) y = br(digits[j], y);
            const double step = std::abs(y - z);
            z = y;
            if (step < opt.backward_step_tol * std::max(1.0, std::abs(z))) {
                converged = true;
                break;
            }
        }
        cplx polished = z;
        if (!converged || !detail::polish_fixed_point(f, polished, n) ||
            std::abs(polished - z) > 1e-6 * std::max(1.0, std::abs(z))) {
            ++failed;
            continue;
        }
        found.push_back(polished);
    }
    if (failed_words) *failed_words = failed;
    return found;
}

/// All roots of f^n(z) = z by Aberth-Ehrlich iteration on the implicit
/// polynomial P_n - z Q_n.
inline std::vector<cplx> roots_method_points(const RationalMap& f, int n, const EnumerationOptions& opt,
                                             int* iterations = nullptr)
{
    const std::size_t D = expected_fixed_point_count(f, n);
    if (D > opt.max_roots_degree)
        throw DegreeOverflowError("roots method needs degree " + std::to_string(D) + " > " +
                                  std::to_string(opt.max_roots_degree));
    FixedPointEquation eq(f, n);

    // Start from the level-n backward tree of a Julia point: same distribution
    // as the roots, pairwise distinct.
    std::vector<cplx> guesses;
    if (auto beta = dominant_repelling_fixed_point(f)) {
        try {
            guesses = backward_tree(f, *beta, n);
        } catch (const Error&) {
            guesses.clear();
        }
    }
    guesses = deduplicate(guesses, 1e-6);
    double rmax = 1.0;
    for (cplx g : guesses) rmax = std::max(rmax, std::abs(g));
    for (std::size_t k = 0; guesses.size() < D; ++k) {
        const double ang = 0.7 + two_pi * static_cast<double>(k) / static_cast<double>(D);
        guesses.push_back(std::polar(1.3 * rmax, ang));
    }
    guesses.resize(D);

    AberthOptions ao;
    ao.max_iter = 400;
    ao.tol = 1e-14;
    auto res = aberth([&](cplx z) { return eq.newton_ratio(z); }, std::move(guesses), ao);
    if (iterations) *iterations = res.iterations;
    for (auto& z : res.roots) {
        for (int k = 0; k < 3; ++k) {
            const cplx s = eq.newton_ratio(z);
            if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) break;
            z -= s;
        }
        const cplx s = eq.newton_ratio(z);
        if (!(std::abs(s) <= 1e-10 * std::max(1.0, std::abs(z))))
            throw NonConvergenceError("roots method: approximation did not settle on a root of f^" +
                                      std::to_string(n) + "(z) = z");
    }
    return res.roots;
}

namespace detail {

inline FixedPointSet backward_census(const RationalMap& f, int n, const EnumerationOptions& opt)
{
    FixedPointSet out;
    out.expected = expected_fixed_point_count(f, n);
    out.method = FixedPointMethod::backward;
    std::vector<cplx> pts = backward_word_points(f, n, opt, &out.failed_words);

    // Non-repelling cycles never come out of contracting words.
    for (const auto& cyc : attracting_cycles(f, opt.critical_orbit_iter, opt.pairing_tol))
        if (n % static_cast<int>(cyc.size()) == 0) pts.insert(pts.end(), cyc.begin(), cyc.end());
    pts = deduplicate(pts, opt.pairing_tol);

    // Periodic points sitting on a branch cut can be missed by their words;
    // they reappear from the lower levels they belong to.
    if (pts.size() < out.expected) {
        for (int m : divisors(n)) {
            if (m == n) continue;
            for (cplx z : backward_word_points(f, m, opt)) {
                cplx y = z;
                for (int j = 0; j < m; ++j) {
                    cplx w = y;
                    if (polish_fixed_point(f, w, n)) pts.push_back(w);
                    y = f.evaluate(y);
                }
            }
        }
        pts = deduplicate(pts, opt.pairing_tol);
    }
    if (pts.size() < out.expected && opt.roots_fallback && out.expected <= opt.max_roots_degree) {
        auto extra = roots_method_points(f, n, opt, &out.aberth_iterations);
        pts.insert(pts.end(), extra.begin(), extra.end());
        pts = deduplicate(pts, opt.pairing_tol);
        out.method = FixedPointMethod::both;
    }
    out.points = std::move(pts);
    out.deficiency = out.expected > out.points.size() ? out.expected - out.points.size() : 0;
    return out;
}

} // namespace detail

/// Solutions of f^n(z) = z in the plane, without multiplicity.
inline FixedPointSet fixed_points(const RationalMap& f, int n, FixedPointMethod method,
                                  const EnumerationOptions& opt = {})
{
    if (n < 1) throw DomainError("fixed_points needs n >= 1");
    if (method == FixedPointMethod::automatic)
        method = f.unicritical_form() ? FixedPointMethod::backward : FixedPointMethod::roots;

    if (method == FixedPointMethod::backward) return detail::backward_census(f, n, opt);

    FixedPointSet out;
    out.expected = expected_fixed_point_count(f, n);
    auto roots = roots_method_points(f, n, opt, &out.aberth_iterations);
    out.points = deduplicate(roots, opt.pairing_tol);
    out.method = FixedPointMethod::roots;
    if (method == FixedPointMethod::both) {
        EnumerationOptions bo = opt;
        bo.roots_fallback = false;
        auto words = backward_word_points(f, n, bo, &out.failed_words);
        words = deduplicate(words, opt.pairing_tol);
        // Compare on the repelling part of the roots set only.
        std::vector<cplx> repelling;
        for (cplx z : out.points) {
            auto [fz, dfz] = iterate_with_derivative(f, z, n);
            if (std::abs(dfz) > 1.0) repelling.push_back(z);
        }
        out.agreement = detail::compare_sets(words, repelling, opt.pairing_tol);
        out.method = FixedPointMethod::both;
    }
    out.deficiency = out.expected > out.points.size() ? out.expected - out.points.size() : 0;
    return out;
}

// ---------------------------------------------------------------------------
// Cycles

struct PeriodicOrbit {
    int period = 0;            // least period
    cplx representative;       // lexicographically least (re, im) point of the cycle
    double log_abs_multiplier = 0.0; // -inf for superattracting cycles
    double holonomy_angle = 0.0;     // arg of the multiplier, [0, 2pi)
    bool primitive = false;          // least period equals the level it was classified at
    bool repelling = false;
};

inline bool lex_less(cplx a, cplx b)
{
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
}

/// Groups fixed points of f^n into cycles and attaches multiplier data.
inline std::vector<PeriodicOrbit> classify_orbits(const RationalMap& f, std::span<const cplx> points, int n,
                                                  double pairing_tol = 1e-9)
{
    std::vector<PeriodicOrbit> out;
    if (points.empty()) return out;
    PointGrid grid(points);
    std::vector<char> used(points.size(), 0);
    std::size_t nonrepelling = 0;

    for (std::size_t i = 0; i < points.size(); ++i) {
        if (used[i]) continue;
        std::vector<std::size_t> cycle{i};
        used[i] = 1;
        std::size_t cur = i;
        for (int step = 1; step <= n; ++step) {
            const cplx image = f.evaluate(points[cur]);
            auto [j, dist] = grid.nearest(image);
            if (j == PointGrid::npos || dist > pairing_tol * std::max(1.0, std::abs(image)) * 1e3)
                throw OrbitMatchingError("image of a listed point is not in the list (step " +
                                         std::to_string(step) + ")");
            if (j == i) break;
            if (used[j])
                throw OrbitMatchingError("forward orbit merges into a different cycle");
            used[j] = 1;
            cycle.push_back(j);
            cur = j;
        }
        const int m = static_cast<int>(cycle.size());
        if (n % m != 0) throw OrbitMatchingError("cycle length " + std::to_string(m) + " does not divide " + std::to_string(n));

        PeriodicOrbit orb;
        orb.period = m;
        orb.primitive = (m == n);
        orb.representative = points[cycle[0]];
        for (auto k : cycle)
            if (lex_less(points[k], orb.representative)) orb.representative = points[k];
        try {
            const auto cm = cycle_multiplier(f, orb.representative, m);
            orb.log_abs_multiplier = cm.log_abs;
            orb.holonomy_angle = cm.holonomy_angle;
        } catch (const SuperattractingError&) {
            orb.log_abs_multiplier = -std::numeric_limits<double>::infinity();
            orb.holonomy_angle = 0.0;
        }
        orb.repelling = orb.log_abs_multiplier > 0.0;
        if (!orb.repelling) ++nonrepelling;
        out.push_back(orb);
    }
    if (nonrepelling > static_cast<std::size_t>(2 * f.degree() - 2))
        throw OrbitMatchingError("more than 2d-2 non-repelling cycles; map is not hyperbolic or points are spurious");
    std::sort(out.begin(), out.end(), [](const PeriodicOrbit& a, const PeriodicOrbit& b) {
        if (a.period != b.period) return a.period < b.period;
        return lex_less(a.representative, b.representative);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Database

struct CensusTolerances {
    double pairing = 1e-9;
    double closure = 1e-9;
    double critical_floor = 1e-12;
    double pole_floor = 1e-12;
};

struct PeriodEntry {
    int n = 0;
    std::vector<PeriodicOrbit> orbits;       // primitive repelling, least period n
    std::vector<PeriodicOrbit> nonrepelling; // primitive non-repelling, least period n
    bool complete = false;
    FixedPointMethod method = FixedPointMethod::backward;
};

class OrbitDatabase {
public:
    OrbitDatabase() = default;
    OrbitDatabase(std::string fingerprint, int degree, CensusTolerances tol = {})
        : fingerprint_(std::move(fingerprint)), degree_(degree), tol_(tol) {}

    static OrbitDatabase for_map(const RationalMap& f)
    {
        CensusTolerances t;
        t.closure = f.tolerances().closure;
        t.critical_floor = f.tolerances().critical_floor;
        t.pole_floor = f.tolerances().pole_floor;
        return OrbitDatabase(f.fingerprint(), f.degree(), t);
    }

    const std::string& fingerprint() const noexcept { return fingerprint_; }
    int degree() const noexcept { return degree_; }
    const CensusTolerances& tolerances() const noexcept { return tol_; }
    const std::map<int, PeriodEntry>& entries() const noexcept { return entries_; }

    bool complete(int n) const
    {
        auto it = entries_.find(n);
        return it != entries_.end() && it->second.complete;
    }

    const PeriodEntry& entry(int n) const
    {
        auto it = entries_.find(n);
        if (it == entries_.end()) throw IncompleteCensusError("no census for period " + std::to_string(n));
        return it->second;
    }

    const PeriodEntry& require_complete(int n) const
    {
        const auto& e = entry(n);
        if (!e.complete) throw IncompleteCensusError("census for period " + std::to_string(n) + " is incomplete");
        return e;
    }

    /// Complete entries are never replaced.
    void put(PeriodEntry e)
    {
        auto it = entries_.find(e.n);
        if (it != entries_.end() && it->second.complete) return;
        entries_[e.n] = std::move(e);
    }

    /// Largest N with every period 1..N complete (0 if none).
    int complete_prefix() const
    {
        int n = 0;
        while (complete(n + 1)) ++n;
        return n;
    }

    int largest_complete() const
    {
        int best = 0;
        for (const auto& [n, e] : entries_)
            if (e.complete) best = std::max(best, n);
        return best;
    }

    bool operator==(const OrbitDatabase&) const = default;

private:
    std::string fingerprint_;
    int degree_ = 0;
    CensusTolerances tol_;
    std::map<int, PeriodEntry> entries_;
};

inline bool operator==(const PeriodicOrbit& a, const PeriodicOrbit& b)
{
    auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    return a.period == b.period && a.representative == b.representative &&
           same(a.log_abs_multiplier, b.log_abs_multiplier) && same(a.holonomy_angle, b.holonomy_angle) &&
           a.primitive == b.primitive && a.repelling == b.repelling;
}

inline bool operator==(const PeriodEntry& a, const PeriodEntry& b)
{
    return a.n == b.n && a.orbits == b.orbits && a.nonrepelling == b.nonrepelling && a.complete == b.complete &&
           a.method == b.method;
}

inline bool operator==(const CensusTolerances& a, const CensusTolerances& b)
{
    return a.pairing == b.pairing && a.closure == b.closure && a.critical_floor == b.critical_floor &&
           a.pole_floor == b.pole_floor;
}

/// Left side of the census identity for period n, from the entries m | n.
inline std::size_t census_count(const OrbitDatabase& db, int n)
{
    std::size_t total = 0;
    for (int m : detail::divisors(n)) {
        const auto& e = db.entry(m);
        total += static_cast<std::size_t>(m) * (e.orbits.size() + e.nonrepelling.size());
    }
    return total;
}

/// Computes (and caches) the census at period n and every divisor; returns the
/// primitive repelling orbits of least period n.
inline std::vector<PeriodicOrbit> enumerate_primitive(const RationalMap& f, int n, OrbitDatabase& db,
                                                      const EnumerationOptions& opt = {})
{
    if (n < 1) throw DomainError("period must be >= 1");
    if (db.fingerprint() != f.fingerprint())
        throw FingerprintMismatchError("orbit database belongs to a different map");

    for (int m : detail::divisors(n)) {
        if (db.complete(m)) continue;
        const auto fps = fixed_points(f, m, opt.method, opt);
        const auto cycles = classify_orbits(f, fps.points, m, opt.pairing_tol);
        PeriodEntry e;
        e.n = m;
        e.method = fps.method;
        for (const auto& c : cycles) {
            if (c.period != m) continue;
            (c.repelling ? e.orbits : e.nonrepelling).push_back(c);
        }
        std::size_t lower = 0;
        for (int k : detail::divisors(m)) {
            if (k == m) continue;
            const auto& le = db.entry(k);
            lower += static_cast<std::size_t>(k) * (le.orbits.size() + le.nonrepelling.size());
        }
        const std::size_t total = lower + static_cast<std::size_t>(m) * (e.orbits.size() + e.nonrepelling.size());
        e.complete = (total == expected_fixed_point_count(f, m));
        db.put(e);
        if (!e.complete)
            throw IncompleteCensusError("census identity fails at period " + std::to_string(m) + ": " +
                                        std::to_string(total) + " of " + std::to_string(fps.expected) +
                                        " fixed points accounted for");
    }
    return db.entry(n).orbits;
}

} // namespace orbitctl

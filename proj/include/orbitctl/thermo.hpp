#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <vector>

#include "orbitctl/errors.hpp"
#include "orbitctl/map.hpp"
#include "orbitctl/orbit_enum.hpp"

namespace orbitctl {

/// Birkhoff data of every repelling fixed point of f^n, grouped by cycle:
/// each primitive orbit of period m | n stands for m points with
/// r^n = (n/m) log|lambda| and theta^n = (n/m) theta mod 2pi.
struct FixedPointSpectrum {
    int n = 0;
    std::vector<double> r;
    std::vector<double> theta;
    std::vector<double> weight;
};

inline FixedPointSpectrum fixed_point_spectrum(const OrbitDatabase& db, int n)
{
    if (n < 1) throw DomainError("period must be >= 1");
    FixedPointSpectrum s;
    s.n = n;
    for (int m : detail::divisors(n)) {
        const auto& e = db.require_complete(m);
        const double rep = static_cast<double>(n / m);
        for (const auto& o : e.orbits) {
            s.r.push_back(rep * o.log_abs_multiplier);
            s.theta.push_back(wrap_angle(rep * o.holonomy_angle));
            s.weight.push_back(static_cast<double>(m));
        }
    }
    return s;
}

/// Z_n = exp(log_scale) * sum.
struct ScaledSum {
    double log_scale = 0.0;
    cplx sum;
};

inline ScaledSum zn_sum_scaled(const FixedPointSpectrum& sp, cplx s, int k, double alpha)
{
    ScaledSum out;
    if (sp.r.empty()) {
        out.log_scale = -std::numeric_limits<double>::infinity();
        return out;
    }
    double shift = -std::numeric_limits<double>::infinity();
    for (double r : sp.r) shift = std::max(shift, s.real() * (r - sp.n * alpha));
    out.log_scale = shift;
    for (std::size_t i = 0; i < sp.r.size(); ++i) {
        const double R = sp.r[i] - sp.n * alpha;
        const double phase = s.imag() * R + k * sp.theta[i];
        out.sum += sp.weight[i] * std::exp(s.real() * R - shift) * cplx(std::cos(phase), std::sin(phase));
    }
    return out;
}

inline cplx zn_sum(const OrbitDatabase& db, int n, cplx s, int k, double alpha)
{
    const auto sc = zn_sum_scaled(fixed_point_spectrum(db, n), s, k, alpha);
    const cplx z = std::exp(sc.log_scale) * sc.sum;
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw OverflowGuardError("Z_n overflows double precision; use the scaled form");
    return z;
}

namespace detail {

inline double log_zn(const FixedPointSpectrum& sp, double t, double alpha)
{
    const auto sc = zn_sum_scaled(sp, t, 0, alpha);
    const double v = sc.log_scale + std::log(sc.sum.real());
    if (!std::isfinite(v)) throw OverflowGuardError("log Z_n is not finite");
    return v;
}

} // namespace detail

inline double pressure_estimate(const FixedPointSpectrum& sp, double t, double alpha)
{
    return detail::log_zn(sp, t, alpha) / sp.n;
}

/// (1/n) log Z_n(t), or log(Z_n / Z_{n-1}) when extrapolating.
inline double pressure_estimate(const OrbitDatabase& db, double t, double alpha, int n, bool extrapolate = false)
{
    if (!extrapolate) return pressure_estimate(fixed_point_spectrum(db, n), t, alpha);
    if (n < 2) throw DomainError("extrapolated pressure needs n >= 2");
    return detail::log_zn(fixed_point_spectrum(db, n), t, alpha) -
           detail::log_zn(fixed_point_spectrum(db, n - 1), t, alpha);
}

struct PressureDerivatives {
    double q1 = 0.0;
    double q2 = 0.0;
};

/// Tilted mean and variance of R^n = r^n - n alpha, divided by n.
inline PressureDerivatives pressure_derivatives(const FixedPointSpectrum& sp, double t, double alpha)
{
    if (sp.r.empty()) throw IncompleteCensusError("no repelling fixed points at this period");
    double shift = -std::numeric_limits<double>::infinity();
    for (double r : sp.r) shift = std::max(shift, t * (r - sp.n * alpha));
    double w0 = 0, w1 = 0;
    for (std::size_t i = 0; i < sp.r.size(); ++i) {
        const double R = sp.r[i] - sp.n * alpha;
        const double w = sp.weight[i] * std::exp(t * R - shift);
        w0 += w;
        w1 += w * R;
    }
    const double mean = w1 / w0;
    double w2 = 0;
    for (std::size_t i = 0; i < sp.r.size(); ++i) {
        const double R = sp.r[i] - sp.n * alpha;
        w2 += sp.weight[i] * std::exp(t * R - shift) * (R - mean) * (R - mean);
    }
    PressureDerivatives d{mean / sp.n, std::max(0.0, w2 / w0) / sp.n};
    if (!std::isfinite(d.q1) || !std::isfinite(d.q2)) throw OverflowGuardError("pressure derivatives not finite");
    return d;
}

inline PressureDerivatives pressure_derivatives(const OrbitDatabase& db, double t, double alpha, int n)
{
    return pressure_derivatives(fixed_point_spectrum(db, n), t, alpha);
}

struct PressureSample {
    double t = 0.0;
    double q = 0.0;
    double q1 = 0.0;
    double q2 = 0.0;
    int n_used = 0;
};

struct PressureCurve {
    double alpha = 0.0;
    bool extrapolated = false;
    std::vector<PressureSample> samples;
};

inline PressureCurve pressure_curve(const OrbitDatabase& db, const std::vector<double>& ts, double alpha, int n,
                                    bool extrapolate = false)
{
    PressureCurve c;
    c.alpha = alpha;
    c.extrapolated = extrapolate;
    const auto sp = fixed_point_spectrum(db, n);
    for (double t : ts) {
        const auto d = pressure_derivatives(sp, t, alpha);
        c.samples.push_back({t, pressure_estimate(db, t, alpha, n, extrapolate), d.q1, d.q2, n});
    }
    return c;
}

/// Mean of r over the measure of maximal entropy, estimated at period n.
inline double maxent_alpha(const OrbitDatabase& db, int n) { return pressure_derivatives(db, 0.0, 0.0, n).q1; }

struct ThermoProfile {
    double alpha = 0.0;
    double xi = 0.0;
    double sigma2 = 0.0;
    double H = 0.0;
    double residual = 0.0;
    int n_used = 0;
    int iterations = 0;
};

struct ProfileOptions {
    double degenerate_q2 = 1e-10;
    double max_bracket = 64.0;
    double residual_tol = 1e-8;
    bool extrapolate = false;
};

/// Legendre data at mean alpha: xi solves q'(xi) = 0 for q(t) = P(t(r - alpha)).
inline ThermoProfile thermo_profile(const OrbitDatabase& db, double alpha, int n, const ProfileOptions& opt = {})
{
    const auto sp = fixed_point_spectrum(db, n);
    auto q1 = [&](double t) { return pressure_derivatives(sp, t, alpha); };

    if (q1(0.0).q2 <= opt.degenerate_q2)
        throw DegenerateError("multiplier moduli are lattice-distributed (q'' vanishes); no Legendre data");

    double lo = -1.0, hi = 1.0;
    while (q1(lo).q1 > 0.0) {
        lo *= 2.0;
        if (-lo > opt.max_bracket) throw AlphaOutOfRangeError("alpha below the sampled range of mean expansion rates");
    }
    while (q1(hi).q1 < 0.0) {
        hi *= 2.0;
        if (hi > opt.max_bracket) throw AlphaOutOfRangeError("alpha above the sampled range of mean expansion rates");
    }

    ThermoProfile p;
    p.alpha = alpha;
    p.n_used = n;
    double x = 0.0 > lo && 0.0 < hi ? 0.0 : 0.5 * (lo + hi);
    PressureDerivatives d = q1(x);
    for (int it = 0; it < 200; ++it) {
        p.iterations = it + 1;
        if (std::abs(d.q1) < 1e-13) break;
        if (d.q1 > 0.0) hi = x; else lo = x;
        double next = d.q2 > 0.0 ? x - d.q1 / d.q2 : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo < 1e-15 * std::max(1.0, std::abs(x))) break;
        x = next;
        d = q1(x);
    }
    p.xi = x;
    p.residual = std::abs(d.q1);
    p.sigma2 = d.q2;
    if (p.residual >= opt.residual_tol) throw NonConvergenceError("Legendre solve did not reach the residual tolerance");
    if (p.sigma2 <= opt.degenerate_q2) throw DegenerateError("q'' vanishes at the optimum");
    p.H = pressure_estimate(db, p.xi, alpha, n, opt.extrapolate);
    return p;
}

/// Range of the pressure slope over t in [-t_span, t_span] (alpha = 0): an
/// inner approximation of the admissible means.
inline std::pair<double, double> alpha_range(const OrbitDatabase& db, int n, double t_span)
{
    if (!(t_span >= 0.0) || t_span > 1e6) throw OverflowGuardError("t_span outside the guarded range");
    const auto sp = fixed_point_spectrum(db, n);
    return {pressure_derivatives(sp, -t_span, 0.0).q1, pressure_derivatives(sp, t_span, 0.0).q1};
}

enum class DimensionMethod { orbit_sums, transfer_op, both };

inline const char* to_string(DimensionMethod m)
{
    switch (m) {
    case DimensionMethod::orbit_sums: return "orbit-sums";
    case DimensionMethod::transfer_op: return "transfer-op";
    case DimensionMethod::both: return "both";
    }
    return "?";
}

struct DimensionResult {
    double delta = 0.0;
    double residual = 0.0;
    int n_used = 0;
    DimensionMethod method = DimensionMethod::orbit_sums;
};

/// Root of a decreasing function on (0, 2) by bisection.
template <class F>
DimensionResult bowen_root(F&& pressure_at, double tol = 1e-10)
{
    double lo = 0.0, hi = 2.0;
    double plo = pressure_at(lo), phi = pressure_at(hi);
    if (!(plo > 0.0 && phi < 0.0)) throw BracketError("pressure does not change sign on (0, 2)");
    DimensionResult r;
    double mid = 0.5 * (lo + hi), pm = pressure_at(mid);
    for (int it = 0; it < 200; ++it) {
        if (std::abs(pm) < tol && hi - lo < 1e-12) break;
        if (pm > 0.0) lo = mid; else hi = mid;
        if (hi - lo < 1e-15) break;
        mid = 0.5 * (lo + hi);
        pm = pressure_at(mid);
    }
    r.delta = mid;
    r.residual = std::abs(pm);
    if (!(r.delta > 0.0 && r.delta < 2.0)) throw BracketError("dimension estimate left (0, 2)");
    return r;
}

/// Bowen's equation P(-delta r) = 0 from periodic-orbit sums. By default the
/// pressure is the mean of the order-n and order-(n-1) estimates, which cancels
/// the even/odd oscillation a negative subleading eigenvalue puts on single
/// orders; `paired = false` uses order n alone.
inline DimensionResult bowen_dimension(const OrbitDatabase& db, int n, bool paired = true)
{
    if (paired && n < 2) paired = false;
    const auto sp = fixed_point_spectrum(db, n);
    std::optional<FixedPointSpectrum> prev;
    if (paired) prev = fixed_point_spectrum(db, n - 1);
    auto r = bowen_root([&](double t) {
        const double q = pressure_estimate(sp, -t, 0.0);
        return prev ? 0.5 * (q + pressure_estimate(*prev, -t, 0.0)) : q;
    });
    r.n_used = n;
    r.method = DimensionMethod::orbit_sums;
    return r;
}

/// |exp(q(xi + it)) - exp(q(xi)) (1 - sigma^2 t^2 / 2)| per grid point, with
/// q at complex argument taken as (1/n) Log Z_n relative to the real axis.
inline std::vector<double> expansion_check(const OrbitDatabase& db, double alpha, const ThermoProfile& profile,
                                           const std::vector<double>& t_grid, int n)
{
    const auto sp = fixed_point_spectrum(db, n);
    const auto base = zn_sum_scaled(sp, profile.xi, 0, alpha);
    const double q0 = (base.log_scale + std::log(base.sum.real())) / n;
    std::vector<double> out;
    for (double t : t_grid) {
        const auto z = zn_sum_scaled(sp, cplx(profile.xi, t), 0, alpha);
        // same shift on both sums since it depends on Re s only
        const cplx ratio = z.sum / base.sum;
        const cplx e = std::exp(q0 + std::log(ratio) / static_cast<double>(n));
        out.push_back(std::abs(e - std::exp(q0) * (1.0 - profile.sigma2 * t * t / 2.0)));
    }
    return out;
}

} // namespace orbitctl

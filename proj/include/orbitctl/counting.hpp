#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "orbitctl/errors.hpp"
#include "orbitctl/map.hpp"
#include "orbitctl/orbit_enum.hpp"
#include "orbitctl/thermo.hpp"

namespace orbitctl {

/// Window (n, alpha, I, S): log|lambda| - n alpha in [a, b] and the holonomy
/// inside the closed arc of normalized length `arc_width` centred at `arc_center`.
struct CountQuery {
    int n = 1;
    double alpha = 0.0;
    double a = -1.0, b = 1.0;
    double arc_center = 0.0;
    double arc_width = 1.0; // fraction of the circle, in [0, 1]
};

inline void validate(const CountQuery& q)
{
    if (q.n < 1) throw DomainError("query period must be >= 1");
    if (!(q.a <= q.b)) throw DomainError("query interval needs a <= b");
    if (!(q.arc_width >= 0.0 && q.arc_width <= 1.0)) throw DomainError("arc width must lie in [0, 1]");
}

inline bool in_arc(double theta, double center, double width)
{
    if (width >= 1.0) return true;
    return circular_distance(theta, center) <= width * std::numbers::pi;
}

inline bool in_window(const PeriodicOrbit& o, const CountQuery& q)
{
    const double dev = o.log_abs_multiplier - q.n * q.alpha;
    return dev >= q.a && dev <= q.b && in_arc(o.holonomy_angle, q.arc_center, q.arc_width);
}

inline long count_orbits(const OrbitDatabase& db, const CountQuery& q)
{
    validate(q);
    long c = 0;
    for (const auto& o : db.require_complete(q.n).orbits)
        if (in_window(o, q)) ++c;
    return c;
}

/// Integral of exp(-xi x) over [a, b], stable near xi = 0.
inline double tilted_length(double xi, double a, double b)
{
    if (std::abs(xi) < 1e-12) return b - a;
    if (std::abs(xi) < 1e-6)
        return (b - a) - xi * (b * b - a * a) / 2.0 + xi * xi * (b * b * b - a * a * a) / 6.0;
    return (std::exp(-xi * a) - std::exp(-xi * b)) / xi;
}

inline double local_clt_scale(const ThermoProfile& p, int n)
{
    if (!(p.sigma2 > 0.0)) throw DegenerateError("prediction needs sigma^2 > 0");
    return std::exp(p.H * n) / (std::sqrt(p.sigma2) * std::sqrt(2.0 * std::numbers::pi) * std::pow(n, 1.5));
}

/// Local-CLT asymptotic for count_orbits.
inline double predict(const ThermoProfile& p, const CountQuery& q)
{
    validate(q);
    const double scale = local_clt_scale(p, q.n);
    if (q.arc_width == 0.0) return 0.0;
    return q.arc_width * tilted_length(p.xi, q.a, q.b) * scale;
}

/// s(n) = scale * n^exponent, or scale * exp(exponent * n).
struct Sequence {
    enum class Kind { power, exponential };
    Kind kind = Kind::power;
    double scale = 1.0;
    double exponent = 0.0;

    static Sequence constant(double v) { return {Kind::power, v, 0.0}; }
    static Sequence power(double scale, double e) { return {Kind::power, scale, e}; }
    static Sequence exponential(double scale, double e) { return {Kind::exponential, scale, e}; }

    double operator()(int n) const
    {
        return kind == Kind::power ? scale * std::pow(static_cast<double>(n), exponent) : scale * std::exp(exponent * n);
    }
};

/// Shrinking windows I_n = [p_n - l_n/2, p_n + l_n/2], arcs of width kappa_n at theta_n.
struct WindowSchedule {
    Sequence center = Sequence::constant(0.0);
    Sequence length = Sequence::constant(2.0);
    Sequence arc_center = Sequence::constant(0.0);
    Sequence arc_width = Sequence::constant(1.0);
    double k_lo = -10.0, k_hi = 10.0; // compact set containing every I_n
    int n_lo = 8, n_hi = 14;          // declared range for the growth check
    double growth_bound = 0.2;        // max |log l_n| / n and |log kappa_n| / n

    static WindowSchedule fixed(double a, double b, double arc_center_v = 0.0, double arc_width_v = 1.0)
    {
        WindowSchedule s;
        s.center = Sequence::constant(0.5 * (a + b));
        s.length = Sequence::constant(b - a);
        s.arc_center = Sequence::constant(arc_center_v);
        s.arc_width = Sequence::constant(arc_width_v);
        s.k_lo = std::min(a, -10.0);
        s.k_hi = std::max(b, 10.0);
        return s;
    }

    CountQuery query(int n, double alpha) const
    {
        const double p = center(n), l = length(n);
        return {n, alpha, p - l / 2.0, p + l / 2.0, wrap_angle(arc_center(n)), arc_width(n)};
    }
};

struct ScheduleCheck {
    double max_length_rate = 0.0;
    double max_width_rate = 0.0;
    bool contained = true;
    bool ok = true;
    std::string reason;
};

inline ScheduleCheck check_schedule(const WindowSchedule& s)
{
    ScheduleCheck c;
    if (s.n_lo < 1 || s.n_hi < s.n_lo) {
        c.ok = false;
        c.reason = "empty declared range";
        return c;
    }
    for (int n = s.n_lo; n <= s.n_hi; ++n) {
        const double l = s.length(n), k = s.arc_width(n);
        if (!(l > 0.0) || !(k > 0.0) || k > 1.0) {
            c.ok = false;
            c.reason = "window length or arc width out of range at n = " + std::to_string(n);
            return c;
        }
        c.max_length_rate = std::max(c.max_length_rate, std::abs(std::log(l)) / n);
        c.max_width_rate = std::max(c.max_width_rate, std::abs(std::log(k)) / n);
        const double p = s.center(n);
        if (p - l / 2.0 < s.k_lo || p + l / 2.0 > s.k_hi) c.contained = false;
    }
    if (c.max_length_rate > s.growth_bound || c.max_width_rate > s.growth_bound) {
        c.ok = false;
        c.reason = "window shrinks exponentially on the declared range";
    } else if (!c.contained) {
        c.ok = false;
        c.reason = "some I_n leaves the compact set K";
    }
    return c;
}

inline double predict_shrinking(const ThermoProfile& p, const WindowSchedule& s, int n)
{
    const auto chk = check_schedule(s);
    if (!chk.ok) throw ScheduleError(chk.reason);
    return s.arc_width(n) * s.length(n) * std::exp(-p.xi * s.center(n)) * local_clt_scale(p, n);
}

// ---------------------------------------------------------------------------
// Smooth windows

/// Polynomial mollifier c (1 - u^2)^6 on [-1, 1] and its distribution function.
struct Mollifier {
    static constexpr int power = 6;

    static double cdf(double u)
    {
        if (u <= -1.0) return 0.0;
        if (u >= 1.0) return 1.0;
        // antiderivative of (1 - u^2)^6 = sum_k C(6,k) (-1)^k u^(2k+1) / (2k+1)
        static constexpr std::array<double, 7> binom{1, 6, 15, 20, 15, 6, 1};
        double acc = 0.0, up = u;
        for (int k = 0; k <= power; ++k) {
            acc += (k % 2 ? -1.0 : 1.0) * binom[k] * up / (2 * k + 1);
            up *= u * u;
        }
        return 0.5 + acc / total();
    }

    static double density(double u)
    {
        if (std::abs(u) >= 1.0) return 0.0;
        return std::pow(1.0 - u * u, power) / total();
    }

    static double total() { return 2048.0 / 3003.0; } // integral of (1 - u^2)^6 over [-1, 1]
};

enum class WindowKind { interval_bump, arc_bump };

/// height * (indicator of [-half, half] convolved with the mollifier at scale eps),
/// in scaled coordinates where the target is [-1/2, 1/2]. On the circle the
/// scaled coordinate is the holonomy offset divided by the arc length.
struct SmoothedWindow {
    WindowKind kind = WindowKind::interval_bump;
    bool dominating = true; // true: >= target indicator; false: <= it
    double eta = 0.1;
    double height = 1.0;
    double half_plateau = 0.5;
    double eps = 0.0;
    bool constant = false; // arc covering the whole circle

    double operator()(double x) const
    {
        if (constant) return height;
        if (eps <= 0.0) return std::abs(x) <= half_plateau ? height : 0.0;
        return height * (Mollifier::cdf((x + half_plateau) / eps) - Mollifier::cdf((x - half_plateau) / eps));
    }

    double support_radius() const { return constant ? std::numeric_limits<double>::infinity() : half_plateau + eps; }
};

/// Dominating ("outer") or dominated ("inner") C^5 bump for the target
/// [-1/2, 1/2]; `arc_width` is only used for arc windows, whose scaled
/// support must fit on the circle.
inline SmoothedWindow make_bump(WindowKind kind, double eta, bool dominating = true, double arc_width = 0.5)
{
    if (!(eta > 0.0 && eta < 1.0)) throw DomainError("bump parameter eta must lie in (0, 1)");
    SmoothedWindow w;
    w.kind = kind;
    w.eta = eta;
    w.dominating = dominating;
    if (dominating) {
        w.height = 1.0 + eta / 4.0;
        w.half_plateau = 0.5 + eta / 8.0;
        w.eps = eta / 8.0;
    } else {
        w.height = 1.0;
        w.half_plateau = 0.5 - eta / 4.0;
        w.eps = eta / 4.0;
    }
    if (kind == WindowKind::arc_bump) {
        if (arc_width >= 1.0) {
            w.constant = true;
            w.height = 1.0;
        } else if (dominating && arc_width * 2.0 * w.support_radius() >= 1.0) {
            // support would wrap around the circle
            w.constant = true;
        }
    }
    return w;
}

/// Scaled holonomy offset for an arc window.
inline double arc_coordinate(double theta, double center, double width)
{
    return principal_angle(theta - center) / (two_pi * width);
}

struct SmoothedCount {
    double primitive = 0.0;    // sum over primitive orbits of period n
    double fixed_points = 0.0; // (1/n) sum over repelling fixed points of f^n
    double gap = 0.0;          // fixed_points - primitive
};

inline SmoothedCount smoothed_count(const OrbitDatabase& db, int n, double alpha, const SmoothedWindow& phi,
                                    const SmoothedWindow& psi, const WindowSchedule& schedule)
{
    const double p = schedule.center(n), l = schedule.length(n);
    const double c = wrap_angle(schedule.arc_center(n)), k = schedule.arc_width(n);
    auto weight = [&](double r, double theta) {
        const double x = (r - n * alpha - p) / l;
        const double y = psi.constant ? 0.0 : arc_coordinate(theta, c, k);
        return phi(x) * psi(y);
    };
    SmoothedCount out;
    for (const auto& o : db.require_complete(n).orbits) out.primitive += weight(o.log_abs_multiplier, o.holonomy_angle);
    const auto sp = fixed_point_spectrum(db, n);
    for (std::size_t i = 0; i < sp.r.size(); ++i) out.fixed_points += sp.weight[i] * weight(sp.r[i], sp.theta[i]);
    out.fixed_points /= n;
    out.gap = out.fixed_points - out.primitive;
    return out;
}

struct WeylSum {
    int k = 0;
    double magnitude = std::numeric_limits<double>::quiet_NaN(); // NaN when nothing is selected
    long sample_size = 0;
};

/// |mean of exp(i k theta)| over primitive orbits in the interval window, k = 1..k_max.
inline std::vector<WeylSum> weyl_sums(const OrbitDatabase& db, int n, double alpha, double a, double b, int k_max,
                                      int k_min = 1)
{
    CountQuery q{n, alpha, a, b, 0.0, 1.0};
    validate(q);
    std::vector<double> thetas;
    for (const auto& o : db.require_complete(n).orbits)
        if (in_window(o, q)) thetas.push_back(o.holonomy_angle);
    std::vector<WeylSum> out;
    for (int k = k_min; k <= k_max; ++k) {
        WeylSum w;
        w.k = k;
        w.sample_size = static_cast<long>(thetas.size());
        if (!thetas.empty()) {
            double re = 0, im = 0;
            for (double t : thetas) {
                re += std::cos(k * t);
                im += std::sin(k * t);
            }
            w.magnitude = std::hypot(re, im) / thetas.size();
        }
        out.push_back(w);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Multiplier-ordered counting

namespace detail {

// 15-point Kronrod / 7-point Gauss on [a, b]; returns {integral, error estimate}.
template <class F>
std::pair<double, double> gauss_kronrod(F&& f, double a, double b)
{
    static constexpr std::array<double, 8> xk{0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                              0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                              0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                              0.207784955007898467600689403773245, 0.0};
    static constexpr std::array<double, 8> wk{0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                              0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                              0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                              0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr std::array<double, 4> wg{0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                              0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double k = wk[7] * f(c), g = wg[3] * f(c);
    for (int i = 0; i < 7; ++i) {
        const double v = f(c - h * xk[i]) + f(c + h * xk[i]);
        k += wk[i] * v;
        if (i % 2 == 1) g += wg[i / 2] * v;
    }
    return {k * h, std::abs((k - g) * h)};
}

template <class F>
double adaptive_integral(F&& f, double a, double b, double rel_tol, int depth = 0)
{
    auto [whole, err] = gauss_kronrod(f, a, b);
    if (err <= rel_tol * std::abs(whole) || depth > 40) return whole;
    const double m = 0.5 * (a + b);
    return adaptive_integral(f, a, m, rel_tol, depth + 1) + adaptive_integral(f, m, b, rel_tol, depth + 1);
}

} // namespace detail

/// Li(x) = integral from 2 to x of du / log u, via v = log u.
inline double logarithmic_integral(double x)
{
    if (!(x >= 2.0)) throw DomainError("Li(x) needs x >= 2");
    if (x == 2.0) return 0.0;
    const double lo = std::log(2.0), hi = std::log(x);
    // split so each panel spans at most one unit of v; keeps the integrand's growth per panel bounded
    const int panels = std::max(1, static_cast<int>(std::ceil(hi - lo)));
    double total = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double a = lo + (hi - lo) * i / panels, b = lo + (hi - lo) * (i + 1) / panels;
        total += detail::adaptive_integral([](double v) { return std::exp(v) / v; }, a, b, 1e-13);
    }
    return total;
}

/// #{primitive repelling orbits with |lambda| < t}.
inline long ow_count(const OrbitDatabase& db, double t, bool allow_truncated = false)
{
    const int N = db.complete_prefix();
    if (N == 0) throw IncompleteCensusError("no complete periods in the database");
    const double log_t = std::log(t);
    if (!allow_truncated) {
        double min_top = std::numeric_limits<double>::infinity();
        for (const auto& o : db.entry(N).orbits) min_top = std::min(min_top, o.log_abs_multiplier);
        if (!(min_top > log_t))
            throw TruncationError("orbits of period > " + std::to_string(N) + " may have |lambda| < t");
    }
    long c = 0;
    for (int n = 1; n <= N; ++n)
        for (const auto& o : db.entry(n).orbits)
            if (o.log_abs_multiplier < log_t) ++c;
    return c;
}

struct ConvergenceRow {
    int n = 0;
    long count = 0;
    double prediction = 0.0;
    double ratio = std::numeric_limits<double>::quiet_NaN();
    bool defined = false;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    bool improving = false; // |ratio - 1| non-increasing over the top half of the range
};

inline ConvergenceReport convergence_report(const OrbitDatabase& db, const ThermoProfile& profile,
                                            const WindowSchedule& schedule, int n_lo, int n_hi)
{
    ConvergenceReport rep;
    for (int n = n_lo; n <= n_hi; ++n) {
        ConvergenceRow row;
        row.n = n;
        const auto q = schedule.query(n, profile.alpha);
        row.count = count_orbits(db, q);
        row.prediction = predict(profile, q);
        if (row.prediction > 0.0) {
            row.ratio = row.count / row.prediction;
            row.defined = true;
        }
        rep.rows.push_back(row);
    }
    std::vector<double> dev;
    for (std::size_t i = rep.rows.size() / 2; i < rep.rows.size(); ++i)
        if (rep.rows[i].defined) dev.push_back(std::abs(rep.rows[i].ratio - 1.0));
    rep.improving = dev.size() >= 2;
    for (std::size_t i = 1; i < dev.size(); ++i)
        if (dev[i] > dev[i - 1]) rep.improving = false;
    return rep;
}

} // namespace orbitctl

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace orbitctl {

using cplx = std::complex<double>;

struct AberthOptions {
    int max_iter = 500;
    double tol = 1e-14; // relative step size at which a root is frozen
};

struct AberthResult {
    std::vector<cplx> roots;
    int iterations = 0;
    std::size_t unconverged = 0;
};

/// Simultaneous Aberth-Ehrlich iteration (Gauss-Seidel ordering).
///
/// `newton_ratio(z)` must return p(z)/p'(z) for the polynomial whose roots are
/// sought; the polynomial itself never has to be materialized, which is what
/// makes degree-4096 iterates of a map tractable in double precision.
/// Frozen roots keep repelling the active ones.
template <class NewtonRatio>
AberthResult aberth(NewtonRatio&& newton_ratio, std::vector<cplx> z, const AberthOptions& opt = {})
{
    const std::size_t m = z.size();
    std::vector<char> frozen(m, 0);
    std::size_t active = m;
    AberthResult out;

    for (int it = 0; it < opt.max_iter && active > 0; ++it) {
        out.iterations = it + 1;
        for (std::size_t i = 0; i < m; ++i) {
            if (frozen[i]) continue;
            const cplx w = newton_ratio(z[i]);
            if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) {
                // Landed on a singular point of the evaluator: nudge and retry next sweep.
                z[i] *= cplx(1.0 + 1e-7, 1e-7);
                continue;
            }
            const double xi = z[i].real(), yi = z[i].imag();
            double sr = 0.0, si = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                if (j == i) continue;
                const double dx = xi - z[j].real();
                const double dy = yi - z[j].imag();
                const double inv = 1.0 / (dx * dx + dy * dy);
                sr += dx * inv;
                si -= dy * inv;
            }
            const cplx corr = w / (1.0 - w * cplx(sr, si));
            z[i] -= corr;
            if (std::abs(corr) <= opt.tol * std::max(1.0, std::abs(z[i]))) {
                frozen[i] = 1;
                --active;
            }
        }
    }
    out.unconverged = active;
    out.roots = std::move(z);
    return out;
}

/// p(z) and p'(z) by Horner; coefficients in ascending degree.
inline std::pair<cplx, cplx> horner_with_derivative(std::span<const cplx> c, cplx z)
{
    cplx p = 0.0, dp = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) {
        dp = dp * z + p;
        p = p * z + c[k];
    }
    return {p, dp};
}

inline cplx horner(std::span<const cplx> c, cplx z)
{
    cplx p = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) p = p * z + c[k];
    return p;
}

/// Drops (numerically) zero leading coefficients.
inline std::vector<cplx> trim_polynomial(std::vector<cplx> c, double eps = 0.0)
{
    while (!c.empty() && std::abs(c.back()) <= eps) c.pop_back();
    return c;
}

/// All roots of a small explicit polynomial (ascending coefficients), with
/// multiplicity. Meant for degrees up to a few dozen.
inline std::vector<cplx> polynomial_roots(std::vector<cplx> coeffs)
{
    coeffs = trim_polynomial(std::move(coeffs));
    if (coeffs.size() <= 1) return {};
    const std::size_t deg = coeffs.size() - 1;
    if (deg == 1) return {-coeffs[0] / coeffs[1]};

    // Fujiwara-type bound on the root moduli.
    const cplx lead = coeffs.back();
    double radius = 0.0;
    for (std::size_t k = 0; k < deg; ++k) {
        const double a = std::abs(coeffs[k] / lead);
        if (a > 0.0) radius = std::max(radius, std::pow(a, 1.0 / static_cast<double>(deg - k)));
    }
    radius = radius > 0.0 ? 2.0 * radius : 1.0;

    std::vector<cplx> guesses(deg);
    for (std::size_t k = 0; k < deg; ++k) {
        const double ang = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(deg) + 0.4;
        guesses[k] = std::polar(radius * 0.5, ang);
    }
    auto ratio = [&](cplx z) {
        auto [p, dp] = horner_with_derivative(coeffs, z);
        return p / dp;
    };
    AberthOptions opt;
    opt.tol = 1e-15;
    auto roots = aberth(ratio, std::move(guesses), opt).roots;
    for (auto& r : roots) {
        for (int k = 0; k < 3; ++k) {
            auto [p, dp] = horner_with_derivative(coeffs, r);
            if (std::abs(dp) == 0.0) break;
            const cplx step = p / dp;
            if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
            r -= step;
        }
    }
    return roots;
}

/// Coefficients of the derivative.
inline std::vector<cplx> polynomial_derivative(std::span<const cplx> c)
{
    std::vector<cplx> d;
    for (std::size_t k = 1; k < c.size(); ++k) d.push_back(c[k] * static_cast<double>(k));
    return d;
}

inline std::vector<cplx> polynomial_multiply(std::span<const cplx> a, std::span<const cplx> b)
{
    if (a.empty() || b.empty()) return {};
    std::vector<cplx> r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

inline std::vector<cplx> polynomial_subtract(std::span<const cplx> a, std::span<const cplx> b)
{
    std::vector<cplx> r(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
    return r;
}

} // namespace orbitctl

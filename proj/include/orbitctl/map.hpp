#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "orbitctl/errors.hpp"
#include "orbitctl/roots.hpp"

namespace orbitctl {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduces an angle to [0, 2pi).
inline double wrap_angle(double a)
{
    double r = std::fmod(a, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
}

/// Reduces an angle to (-pi, pi].
inline double principal_angle(double a)
{
    double r = wrap_angle(a);
    if (r > std::numbers::pi) r -= two_pi;
    return r;
}

/// Length of the shorter arc between two angles, in [0, pi].
inline double circular_distance(double a, double b)
{
    return std::abs(principal_angle(a - b));
}

struct MapTolerances {
    double pole_floor = 1e-12;     // |Q(z)| below this is a pole
    double critical_floor = 1e-12; // |f'(z)| below this is a critical point
    double closure = 1e-9;         // |f^n(z) - z| accepted as periodic (relative)
};

/// f(z) = a (z - z0)^d + c, the polynomials whose inverse branches have a
/// closed form.
struct UnicriticalForm {
    cplx scale;
    cplx center;
    cplx critical_value;
    int degree;
};

/// A rational map f = P/Q with complex coefficients in ascending degree.
class RationalMap {
public:
    explicit RationalMap(std::vector<cplx> numerator, std::vector<cplx> denominator = {cplx(1.0)},
                         MapTolerances tol = {})
        : tol_(tol)
    {
        numerator_ = trim_polynomial(std::move(numerator));
        denominator_ = trim_polynomial(std::move(denominator));
        if (numerator_.empty()) throw InvalidMapError("numerator is identically zero");
        if (denominator_.empty()) throw InvalidMapError("denominator is identically zero");
        if (denominator_.size() == 1) {
            const cplx q0 = denominator_[0];
            for (auto& c : numerator_) c /= q0;
            denominator_ = {cplx(1.0)};
        }
        degree_ = static_cast<int>(std::max(numerator_.size(), denominator_.size())) - 1;
        if (degree_ < 2) throw InvalidMapError("map degree must be at least 2");
        check_coprime();
    }

    int degree() const noexcept { return degree_; }
    bool is_polynomial() const noexcept { return denominator_.size() == 1; }
    std::span<const cplx> numerator() const noexcept { return numerator_; }
    std::span<const cplx> denominator() const noexcept { return denominator_; }
    const MapTolerances& tolerances() const noexcept { return tol_; }

    cplx evaluate(cplx z) const
    {
        const cplx q = horner(denominator_, z);
        if (std::abs(q) < tol_.pole_floor) throw PoleError("denominator vanishes at the evaluation point");
        return horner(numerator_, z) / q;
    }

    cplx operator()(cplx z) const { return evaluate(z); }

    /// f(z) and f'(z) by the quotient rule on exact coefficient derivatives.
    std::pair<cplx, cplx> value_and_derivative(cplx z) const
    {
        auto [p, dp] = horner_with_derivative(numerator_, z);
        if (is_polynomial()) return {p, dp};
        auto [q, dq] = horner_with_derivative(denominator_, z);
        if (std::abs(q) < tol_.pole_floor) throw PoleError("denominator vanishes at the evaluation point");
        return {p / q, (dp * q - p * dq) / (q * q)};
    }

    cplx derivative(cplx z) const { return value_and_derivative(z).second; }

    /// Finite critical points: zeros of P'Q - PQ'.
    std::vector<cplx> critical_points() const
    {
        const auto dp = polynomial_derivative(numerator_);
        if (is_polynomial()) return polynomial_roots(dp);
        const auto dq = polynomial_derivative(denominator_);
        const auto w = polynomial_subtract(polynomial_multiply(dp, denominator_),
                                           polynomial_multiply(numerator_, dq));
        return polynomial_roots(w);
    }

    /// The d solutions y of f(y) = w, Newton-polished.
    std::vector<cplx> preimages(cplx w) const
    {
        std::vector<cplx> eq = numerator_;
        eq.resize(std::max(numerator_.size(), denominator_.size()), 0.0);
        for (std::size_t k = 0; k < denominator_.size(); ++k) eq[k] -= w * denominator_[k];
        return polynomial_roots(std::move(eq));
    }

    /// Fixed points of f in the plane (roots of P - zQ).
    std::vector<cplx> fixed_points() const
    {
        std::vector<cplx> zq(denominator_.size() + 1, 0.0);
        for (std::size_t k = 0; k < denominator_.size(); ++k) zq[k + 1] = denominator_[k];
        return polynomial_roots(polynomial_subtract(numerator_, zq));
    }

    std::optional<UnicriticalForm> unicritical_form() const
    {
        if (!is_polynomial()) return std::nullopt;
        const int d = degree_;
        const cplx a = numerator_[d];
        const cplx z0 = -numerator_[d - 1] / (static_cast<double>(d) * a);
        // Expand a (z - z0)^d and compare all non-constant coefficients.
        std::vector<cplx> expanded(d + 1, 0.0);
        double binom = 1.0;
        double scale = 0.0;
        for (int k = 0; k <= d; ++k) {
            expanded[k] = a * binom * std::pow(-z0, d - k);
            binom = binom * (d - k) / (k + 1);
            scale = std::max(scale, std::abs(numerator_[k]));
        }
        for (int k = 1; k <= d; ++k) {
            if (std::abs(expanded[k] - numerator_[k]) > 1e-12 * std::max(1.0, scale)) return std::nullopt;
        }
        return UnicriticalForm{a, z0, numerator_[0] - expanded[0], d};
    }

    /// Stable hex digest of the coefficient lists.
    std::string fingerprint() const
    {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](std::uint64_t v) {
            for (int b = 0; b < 8; ++b) {
                h ^= (v >> (8 * b)) & 0xffu;
                h *= 1099511628211ull;
            }
        };
        auto mix_list = [&](std::span<const cplx> cs) {
            mix(cs.size());
            for (auto c : cs) {
                mix(std::bit_cast<std::uint64_t>(c.real() + 0.0));
                mix(std::bit_cast<std::uint64_t>(c.imag() + 0.0));
            }
        };
        mix_list(numerator_);
        mix_list(denominator_);
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

private:
    void check_coprime() const
    {
        if (is_polynomial()) return;
        const auto& small = numerator_.size() <= denominator_.size() ? numerator_ : denominator_;
        const auto& other = numerator_.size() <= denominator_.size() ? denominator_ : numerator_;
        for (cplx r : polynomial_roots(small)) {
            double scale = 0.0;
            for (std::size_t k = 0; k < other.size(); ++k)
                scale += std::abs(other[k]) * std::pow(std::abs(r), static_cast<double>(k));
            if (std::abs(horner(other, r)) <= 1e-9 * std::max(1.0, scale))
                throw InvalidMapError("numerator and denominator share a root");
        }
    }

    std::vector<cplx> numerator_;
    std::vector<cplx> denominator_;
    int degree_ = 0;
    MapTolerances tol_;
};

inline cplx evaluate(const RationalMap& f, cplx z) { return f.evaluate(z); }

struct DistortionRotation {
    double r;     // log |f'(z)|
    double theta; // arg f'(z) in [0, 2pi)
};

inline DistortionRotation distortion_rotation(const RationalMap& f, cplx z)
{
    const cplx d = f.derivative(z);
    if (std::abs(d) < f.tolerances().critical_floor) throw CriticalPointError("f' vanishes at the point");
    return {std::log(std::abs(d)), wrap_angle(std::arg(d))};
}

struct BirkhoffSums {
    double r;             // sum of log |f'| along the orbit
    double theta_lifted;  // sum of per-step principal arguments in (-pi, pi]
};

/// Birkhoff sums of the distortion and rotation functions over z, ..., f^{n-1}(z).
inline BirkhoffSums birkhoff_sums(const RationalMap& f, cplx z, int n)
{
    if (n < 1) throw DomainError("birkhoff_sums needs n >= 1");
    BirkhoffSums s{0.0, 0.0};
    for (int j = 0; j < n; ++j) {
        std::pair<cplx, cplx> vd;
        try {
            vd = f.value_and_derivative(z);
        } catch (const PoleError&) {
            throw PoleError("orbit hits a pole at index " + std::to_string(j));
        }
        if (std::abs(vd.second) < f.tolerances().critical_floor)
            throw CriticalPointError("orbit hits a critical point at index " + std::to_string(j));
        s.r += std::log(std::abs(vd.second));
        s.theta_lifted += principal_angle(std::arg(vd.second));
        z = vd.first;
    }
    return s;
}

inline cplx iterate(const RationalMap& f, cplx z, int n)
{
    for (int j = 0; j < n; ++j) z = f.evaluate(z);
    return z;
}

/// f^n(z) and (f^n)'(z) by the chain rule.
inline std::pair<cplx, cplx> iterate_with_derivative(const RationalMap& f, cplx z, int n)
{
    cplx d = 1.0;
    for (int j = 0; j < n; ++j) {
        auto [v, dv] = f.value_and_derivative(z);
        d *= dv;
        z = v;
    }
    return {z, d};
}

struct CycleMultiplier {
    double log_abs;        // log |lambda|
    double holonomy_angle; // arg lambda in [0, 2pi)
};

/// Multiplier data of the cycle through z, which must satisfy f^n(z) = z.
inline CycleMultiplier cycle_multiplier(const RationalMap& f, cplx z, int n)
{
    if (n < 1) throw DomainError("cycle_multiplier needs n >= 1");
    const cplx back = iterate(f, z, n);
    if (std::abs(back - z) > f.tolerances().closure * std::max(1.0, std::abs(z)))
        throw NotPeriodicError("f^n(z) does not return to z");
    BirkhoffSums s;
    try {
        s = birkhoff_sums(f, z, n);
    } catch (const CriticalPointError& e) {
        throw SuperattractingError(std::string("cycle contains a critical point: ") + e.what());
    }
    return {s.r, wrap_angle(s.theta_lifted)};
}

} // namespace orbitctl

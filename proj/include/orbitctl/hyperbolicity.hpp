#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "orbitctl/orbit_enum.hpp"

namespace orbitctl {

enum class Verdict { hyperbolic_evidence, inconclusive, fails };

inline const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::hyperbolic_evidence: return "hyperbolic-evidence";
    case Verdict::inconclusive: return "inconclusive";
    case Verdict::fails: return "fails";
    }
    return "?";
}

inline const char* to_string(CriticalFate f)
{
    switch (f) {
    case CriticalFate::attracting_cycle: return "attracting-cycle";
    case CriticalFate::escapes: return "escapes";
    case CriticalFate::undecided: return "undecided";
    }
    return "?";
}

struct HyperbolicityReport {
    Verdict verdict = Verdict::inconclusive;
    double expansion_base = 0.0;  // gamma
    double expansion_const = 0.0; // c, with log|lambda| >= log c + n log gamma on every sample
    double min_log_multiplier_rate = std::numeric_limits<double>::quiet_NaN();
    std::vector<CriticalOrbit> critical_orbits;
    std::string reason;
};

struct ProbeOptions {
    double min_rate = 0.05; // smaller per-step expansion is treated as too close to a bifurcation
    EnumerationOptions enumeration{};
};

/// Empirical check of uniform expansion on sampled periodic orbits plus
/// critical-orbit bookkeeping. Evidence, not proof.
inline HyperbolicityReport hyperbolicity_probe(const RationalMap& f, int max_iter, const std::vector<int>& sample_periods,
                                               const ProbeOptions& opt = {})
{
    HyperbolicityReport rep;
    rep.critical_orbits = critical_orbits(f, max_iter);

    bool neutral = false, undecided = false;
    for (const auto& co : rep.critical_orbits) {
        if (co.fate != CriticalFate::undecided) continue;
        undecided = true;
    }

    // Lower envelope of log|lambda| against period over the sampled repelling orbits.
    std::vector<double> periods, mins;
    double min_rate = std::numeric_limits<double>::infinity();
    try {
        auto db = OrbitDatabase::for_map(f);
        for (int n : sample_periods) {
            auto orbits = enumerate_primitive(f, n, db, opt.enumeration);
            for (const auto& o : db.entry(n).nonrepelling)
                if (std::isfinite(o.log_abs_multiplier) && o.log_abs_multiplier > -1e-6) neutral = true;
            if (orbits.empty()) continue;
            double m = std::numeric_limits<double>::infinity();
            for (const auto& o : orbits) {
                m = std::min(m, o.log_abs_multiplier);
                min_rate = std::min(min_rate, o.log_abs_multiplier / o.period);
            }
            periods.push_back(n);
            mins.push_back(m);
        }
    } catch (const Error& e) {
        rep.verdict = Verdict::inconclusive;
        rep.reason = std::string("orbit sampling failed: ") + e.what();
        return rep;
    }
    if (std::isfinite(min_rate)) rep.min_log_multiplier_rate = min_rate;

    if (periods.size() >= 2) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < periods.size(); ++i) {
            mx += periods[i];
            my += mins[i];
        }
        mx /= periods.size();
        my /= periods.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < periods.size(); ++i) {
            sxy += (periods[i] - mx) * (mins[i] - my);
            sxx += (periods[i] - mx) * (periods[i] - mx);
        }
        const double slope = sxx > 0 ? sxy / sxx : 0.0;
        double intercept = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < periods.size(); ++i) intercept = std::min(intercept, mins[i] - slope * periods[i]);
        rep.expansion_base = std::exp(slope);
        rep.expansion_const = std::exp(intercept);
    } else if (periods.size() == 1) {
        rep.expansion_base = std::exp(mins[0] / periods[0]);
        rep.expansion_const = 1.0;
    }

    if (neutral) {
        rep.verdict = Verdict::fails;
        rep.reason = "neutral cycle found";
    } else if (undecided) {
        rep.reason = "a critical orbit neither escapes nor settles on an attracting cycle";
    } else if (periods.empty()) {
        rep.reason = "no repelling orbits sampled";
    } else if (!(rep.expansion_base > 1.0)) {
        rep.reason = "no expansion in the sampled multipliers";
    } else if (min_rate < opt.min_rate) {
        rep.reason = "weakly repelling orbit (log|lambda|/n = " + std::to_string(min_rate) + ")";
    } else {
        rep.verdict = Verdict::hyperbolic_evidence;
    }
    return rep;
}

} // namespace orbitctl

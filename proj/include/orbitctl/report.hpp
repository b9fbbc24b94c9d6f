#pragma once

#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

#include "orbitctl/counting.hpp"
#include "orbitctl/thermo.hpp"

namespace orbitctl {

/// Minimal CSV emitter: round-trip precision for reals, empty field for NaN.
class CsvWriter {
public:
    CsvWriter(std::ostream& os, std::initializer_list<const char*> header) : os_(os)
    {
        bool first = true;
        for (const char* h : header) {
            if (!first) os_ << ',';
            os_ << h;
            first = false;
        }
        os_ << '\n';
    }

    CsvWriter& operator<<(double v)
    {
        sep();
        if (std::isnan(v)) return *this;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os_ << buf;
        return *this;
    }
    CsvWriter& operator<<(long v)
    {
        sep();
        os_ << v;
        return *this;
    }
    CsvWriter& operator<<(int v) { return *this << static_cast<long>(v); }
    CsvWriter& operator<<(std::size_t v) { return *this << static_cast<long>(v); }
    CsvWriter& operator<<(bool v)
    {
        sep();
        os_ << (v ? "true" : "false");
        return *this;
    }
    CsvWriter& operator<<(const std::string& s)
    {
        sep();
        os_ << s;
        return *this;
    }
    CsvWriter& operator<<(const char* s) { return *this << std::string(s); }

    void end_row()
    {
        os_ << '\n';
        fresh_ = true;
    }

private:
    void sep()
    {
        if (!fresh_) os_ << ',';
        fresh_ = false;
    }

    std::ostream& os_;
    bool fresh_ = true;
};

inline void write_pressure_csv(std::ostream& os, const PressureCurve& c)
{
    CsvWriter w(os, {"t", "q", "q1", "q2", "n_used"});
    for (const auto& s : c.samples) {
        w << s.t << s.q << s.q1 << s.q2 << s.n_used;
        w.end_row();
    }
}

inline void write_profile_csv(std::ostream& os, const std::vector<ThermoProfile>& ps)
{
    CsvWriter w(os, {"alpha", "xi", "sigma2", "H", "residual", "n_used"});
    for (const auto& p : ps) {
        w << p.alpha << p.xi << p.sigma2 << p.H << p.residual << p.n_used;
        w.end_row();
    }
}

struct DecayRow {
    double b;
    int k;
    int depth;
    int n_steps;
    double rate;
};

inline void write_decay_csv(std::ostream& os, const std::vector<DecayRow>& rows)
{
    CsvWriter w(os, {"b", "k", "depth", "n_steps", "rate"});
    for (const auto& r : rows) {
        w << r.b << r.k << r.depth << r.n_steps << r.rate;
        w.end_row();
    }
}

inline void write_convergence_csv(std::ostream& os, const ConvergenceReport& rep, const ThermoProfile& p,
                                  const WindowSchedule& s)
{
    CsvWriter w(os, {"n", "count", "prediction", "ratio", "alpha", "xi", "sigma2", "H", "interval_a", "interval_b",
                     "arc_center", "arc_width"});
    for (const auto& r : rep.rows) {
        const auto q = s.query(r.n, p.alpha);
        w << r.n << r.count << r.prediction << r.ratio << p.alpha << p.xi << p.sigma2 << p.H << q.a << q.b
          << q.arc_center << q.arc_width;
        w.end_row();
    }
}

inline void write_weyl_csv(std::ostream& os, int n, const std::vector<WeylSum>& sums)
{
    CsvWriter w(os, {"n", "k", "magnitude", "sample_size"});
    for (const auto& s : sums) {
        w << n << s.k << s.magnitude << s.sample_size;
        w.end_row();
    }
}

inline void write_dimension_csv(std::ostream& os, const std::vector<DimensionResult>& rs)
{
    CsvWriter w(os, {"method", "delta", "residual", "n_used"});
    for (const auto& r : rs) {
        w << to_string(r.method) << r.delta << r.residual << r.n_used;
        w.end_row();
    }
}

} // namespace orbitctl

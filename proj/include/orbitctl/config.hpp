#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "orbitctl/counting.hpp"
#include "orbitctl/errors.hpp"
#include "orbitctl/map.hpp"
#include "orbitctl/orbit_enum.hpp"

namespace orbitctl {

struct RunConfig {
    std::string map_path;
    std::string cache_dir = ".orbitctl-cache";
    int n_min = 1;
    int n_max = 0;
    std::optional<double> alpha; // empty: max-entropy mean, resolved against the census
    double interval_a = -1.0, interval_b = 1.0;
    double arc_center = 0.0, arc_width = 1.0;
    std::optional<WindowSchedule> schedule;
    int mesh_depth = 12;
    std::string output_dir; // empty: reports go to stdout
    CensusTolerances tolerances;
    FixedPointMethod method = FixedPointMethod::automatic;
    bool override_hyperbolicity = false;
    double budget = 131072.0; // cap on d^n_max
    bool override_budget = false;
    double eta = 0.1;
    int k_max = 5;
};

namespace detail {

class ConfigReader {
public:
    ConfigReader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    [[noreturn]] static void fail(const std::string& path, const std::string& why)
    {
        throw ConfigError((path.empty() ? std::string("<root>") : path) + ": " + why);
    }

    std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    bool has(const std::string& k)
    {
        seen_.insert(k);
        return j_.contains(k);
    }

    const nlohmann::json& at(const std::string& k)
    {
        seen_.insert(k);
        return j_.at(k);
    }

    template <class T>
    T get(const std::string& k)
    {
        const auto& v = at(k);
        try {
            return v.get<T>();
        } catch (const nlohmann::json::exception&) {
            fail(key(k), "wrong type");
        }
    }

    double number(const std::string& k)
    {
        const auto& v = at(k);
        if (!v.is_number()) fail(key(k), "expected a number");
        return v.get<double>();
    }

    int integer(const std::string& k)
    {
        const auto& v = at(k);
        if (!v.is_number_integer()) fail(key(k), "expected an integer");
        return v.get<int>();
    }

    bool boolean(const std::string& k)
    {
        const auto& v = at(k);
        if (!v.is_boolean()) fail(key(k), "expected true or false");
        return v.get<bool>();
    }

    std::pair<double, double> pair(const std::string& k)
    {
        const auto& v = at(k);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            fail(key(k), "expected [number, number]");
        return {v[0].get<double>(), v[1].get<double>()};
    }

    void reject_unknown() const
    {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) fail(key(k), "unknown key");
    }

private:
    const nlohmann::json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline Sequence parse_sequence(const nlohmann::json& j, const std::string& path)
{
    if (j.is_number()) return Sequence::constant(j.get<double>());
    ConfigReader r(j, path);
    Sequence s;
    const std::string kind = r.has("kind") ? r.get<std::string>("kind") : "power";
    if (kind == "power" || kind == "constant")
        s.kind = Sequence::Kind::power;
    else if (kind == "exponential")
        s.kind = Sequence::Kind::exponential;
    else
        ConfigReader::fail(r.key("kind"), "expected constant, power or exponential");
    s.scale = r.has("scale") ? r.number("scale") : 1.0;
    s.exponent = r.has("exponent") ? r.number("exponent") : 0.0;
    if (kind == "constant" && s.exponent != 0.0) ConfigReader::fail(r.key("exponent"), "constant sequences have no exponent");
    r.reject_unknown();
    return s;
}

inline WindowSchedule parse_schedule(const nlohmann::json& j, const std::string& path)
{
    ConfigReader r(j, path);
    WindowSchedule s;
    if (r.has("center")) s.center = parse_sequence(r.at("center"), r.key("center"));
    if (r.has("length")) s.length = parse_sequence(r.at("length"), r.key("length"));
    if (r.has("arc_center")) s.arc_center = parse_sequence(r.at("arc_center"), r.key("arc_center"));
    if (r.has("arc_width")) s.arc_width = parse_sequence(r.at("arc_width"), r.key("arc_width"));
    if (r.has("K")) std::tie(s.k_lo, s.k_hi) = r.pair("K");
    if (r.has("range")) {
        auto [lo, hi] = r.pair("range");
        s.n_lo = static_cast<int>(lo);
        s.n_hi = static_cast<int>(hi);
    }
    if (r.has("growth_bound")) s.growth_bound = r.number("growth_bound");
    r.reject_unknown();
    if (s.k_lo > s.k_hi) ConfigReader::fail(r.key("K"), "K must be an interval lo <= hi");
    return s;
}

} // namespace detail

inline RunConfig parse_config(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("<root>: not valid JSON: ") + e.what());
    }
    detail::ConfigReader r(j, "");
    RunConfig c;
    if (!r.has("map")) detail::ConfigReader::fail("map", "required key missing");
    c.map_path = r.get<std::string>("map");
    if (r.has("cache_dir")) c.cache_dir = r.get<std::string>("cache_dir");
    if (r.has("n_min")) c.n_min = r.integer("n_min");
    if (!r.has("n_max")) detail::ConfigReader::fail("n_max", "required key missing");
    c.n_max = r.integer("n_max");
    if (r.has("alpha")) {
        const auto& a = r.at("alpha");
        if (a.is_string() && a.get<std::string>() == "maxent")
            c.alpha.reset();
        else if (a.is_number())
            c.alpha = a.get<double>();
        else
            detail::ConfigReader::fail("alpha", "expected \"maxent\" or a number");
    }
    if (r.has("interval")) std::tie(c.interval_a, c.interval_b) = r.pair("interval");
    if (r.has("arc")) {
        detail::ConfigReader a(r.at("arc"), "arc");
        if (a.has("center")) c.arc_center = a.number("center");
        if (a.has("width")) c.arc_width = a.number("width");
        a.reject_unknown();
    }
    if (r.has("schedule")) c.schedule = detail::parse_schedule(r.at("schedule"), "schedule");
    if (r.has("mesh_depth")) c.mesh_depth = r.integer("mesh_depth");
    if (r.has("output_dir")) c.output_dir = r.get<std::string>("output_dir");
    if (r.has("tolerances")) {
        detail::ConfigReader t(r.at("tolerances"), "tolerances");
        if (t.has("pairing")) c.tolerances.pairing = t.number("pairing");
        if (t.has("closure")) c.tolerances.closure = t.number("closure");
        if (t.has("critical_floor")) c.tolerances.critical_floor = t.number("critical_floor");
        if (t.has("pole_floor")) c.tolerances.pole_floor = t.number("pole_floor");
        t.reject_unknown();
    }
    if (r.has("method")) {
        try {
            c.method = method_from_string(r.get<std::string>("method"));
        } catch (const ConfigError&) {
            detail::ConfigReader::fail("method", "expected backward, roots, both or auto");
        }
    }
    if (r.has("override_hyperbolicity")) c.override_hyperbolicity = r.boolean("override_hyperbolicity");
    if (r.has("budget")) c.budget = r.number("budget");
    if (r.has("override_budget")) c.override_budget = r.boolean("override_budget");
    if (r.has("eta")) c.eta = r.number("eta");
    if (r.has("k_max")) c.k_max = r.integer("k_max");
    r.reject_unknown();

    if (c.n_min < 1) detail::ConfigReader::fail("n_min", "must be >= 1");
    if (c.n_min > c.n_max) detail::ConfigReader::fail("n_min", "n_min > n_max");
    if (c.interval_a > c.interval_b) detail::ConfigReader::fail("interval", "needs a <= b");
    if (!(c.arc_width >= 0.0 && c.arc_width <= 1.0)) detail::ConfigReader::fail("arc.width", "must lie in [0, 1]");
    if (c.mesh_depth < 0) detail::ConfigReader::fail("mesh_depth", "must be >= 0");
    if (!(c.eta > 0.0 && c.eta < 1.0)) detail::ConfigReader::fail("eta", "must lie in (0, 1)");
    if (c.k_max < 1) detail::ConfigReader::fail("k_max", "must be >= 1");
    return c;
}

/// d^n_max against the configured budget.
inline void check_budget(const RunConfig& c, int degree)
{
    if (c.override_budget) return;
    const double work = std::pow(static_cast<double>(degree), c.n_max);
    if (work > c.budget)
        throw ConfigError("n_max: d^n_max = " + std::to_string(static_cast<long long>(work)) + " exceeds budget " +
                          std::to_string(static_cast<long long>(c.budget)));
}

namespace detail {

inline std::vector<cplx> parse_coefficients(const nlohmann::json& j, const std::string& path)
{
    if (!j.is_array() || j.empty()) ConfigReader::fail(path, "expected a non-empty coefficient list");
    std::vector<cplx> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& c = j[i];
        if (c.is_number())
            out.emplace_back(c.get<double>(), 0.0);
        else if (c.is_array() && c.size() == 2 && c[0].is_number() && c[1].is_number())
            out.emplace_back(c[0].get<double>(), c[1].get<double>());
        else
            ConfigReader::fail(path + "[" + std::to_string(i) + "]", "expected [re, im]");
    }
    return out;
}

} // namespace detail

/// Map file: {"numerator": [[re, im], ...], "denominator": [[re, im], ...]}.
inline RationalMap parse_map(const std::string& text, MapTolerances tol = {})
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("<map>: not valid JSON: ") + e.what());
    }
    detail::ConfigReader r(j, "");
    if (!r.has("numerator")) detail::ConfigReader::fail("numerator", "required key missing");
    auto num = detail::parse_coefficients(r.at("numerator"), "numerator");
    std::vector<cplx> den{1.0};
    if (r.has("denominator")) den = detail::parse_coefficients(r.at("denominator"), "denominator");
    r.reject_unknown();
    return RationalMap(std::move(num), std::move(den), tol);
}

inline std::string read_text(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline RationalMap load_map(const std::string& path, MapTolerances tol = {}) { return parse_map(read_text(path), tol); }

} // namespace orbitctl

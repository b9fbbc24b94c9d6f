#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "orbitctl/errors.hpp"
#include "orbitctl/orbit_enum.hpp"

namespace orbitctl {

inline constexpr int db_format_version = 1;

namespace detail {

inline nlohmann::json orbit_record(const PeriodicOrbit& o, bool nonrepelling)
{
    nlohmann::json j;
    j["n"] = o.period;
    j["z"] = {o.representative.real(), o.representative.imag()};
    if (std::isfinite(o.log_abs_multiplier)) j["log_abs"] = o.log_abs_multiplier;
    j["theta"] = o.holonomy_angle;
    j["primitive"] = o.primitive;
    j["repelling"] = o.repelling;
    if (nonrepelling) j["nonrepelling"] = true;
    return j;
}

inline PeriodicOrbit parse_orbit(const nlohmann::json& j)
{
    PeriodicOrbit o;
    o.period = j.at("n").get<int>();
    const auto& z = j.at("z");
    o.representative = {z.at(0).get<double>(), z.at(1).get<double>()};
    o.log_abs_multiplier = j.contains("log_abs") ? j["log_abs"].get<double>()
                                                 : -std::numeric_limits<double>::infinity();
    o.holonomy_angle = j.at("theta").get<double>();
    o.primitive = j.at("primitive").get<bool>();
    o.repelling = j.at("repelling").get<bool>();
    return o;
}

} // namespace detail

/// One JSON object per line: a header, then for each period a period record
/// followed by its orbit records.
inline void write_db(std::ostream& os, const OrbitDatabase& db)
{
    nlohmann::json header;
    header["version"] = db_format_version;
    header["fingerprint"] = db.fingerprint();
    header["degree"] = db.degree();
    header["tolerances"] = {{"pairing", db.tolerances().pairing},
                            {"closure", db.tolerances().closure},
                            {"critical_floor", db.tolerances().critical_floor},
                            {"pole_floor", db.tolerances().pole_floor}};
    os << header.dump() << '\n';
    for (const auto& [n, e] : db.entries()) {
        nlohmann::json pr{{"period", n}, {"complete", e.complete}, {"method", to_string(e.method)},
                          {"orbits", e.orbits.size()}, {"nonrepelling_orbits", e.nonrepelling.size()}};
        os << pr.dump() << '\n';
        for (const auto& o : e.orbits) os << detail::orbit_record(o, false).dump() << '\n';
        for (const auto& o : e.nonrepelling) os << detail::orbit_record(o, true).dump() << '\n';
    }
}

inline OrbitDatabase read_db(std::istream& is, const std::optional<std::string>& expected_fingerprint = std::nullopt)
{
    std::string line;
    if (!std::getline(is, line)) throw VersionMismatchError("orbit cache has no header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
        throw VersionMismatchError("orbit cache header is not valid JSON");
    }
    if (!header.is_object() || !header.contains("version") || !header["version"].is_number_integer() ||
        header["version"].get<int>() != db_format_version)
        throw VersionMismatchError("unsupported orbit cache version");

    OrbitDatabase db;
    try {
        CensusTolerances tol;
        const auto& t = header.at("tolerances");
        tol.pairing = t.at("pairing").get<double>();
        tol.closure = t.at("closure").get<double>();
        tol.critical_floor = t.at("critical_floor").get<double>();
        tol.pole_floor = t.at("pole_floor").get<double>();
        db = OrbitDatabase(header.at("fingerprint").get<std::string>(), header.at("degree").get<int>(), tol);
    } catch (const nlohmann::json::exception& e) {
        throw VersionMismatchError(std::string("malformed orbit cache header: ") + e.what());
    }
    if (expected_fingerprint && *expected_fingerprint != db.fingerprint())
        throw FingerprintMismatchError("orbit cache fingerprint " + db.fingerprint() + " does not match map " +
                                       *expected_fingerprint);

    std::optional<PeriodEntry> cur;
    std::size_t lineno = 1;
    try {
        while (std::getline(is, line)) {
            ++lineno;
            if (line.empty()) continue;
            const auto j = nlohmann::json::parse(line);
            if (j.contains("period")) {
                if (cur) db.put(std::move(*cur));
                cur.emplace();
                cur->n = j.at("period").get<int>();
                cur->complete = j.at("complete").get<bool>();
                cur->method = method_from_string(j.at("method").get<std::string>());
                continue;
            }
            if (!cur) throw IoError("orbit record before any period record (line " + std::to_string(lineno) + ")");
            auto o = detail::parse_orbit(j);
            if (j.value("nonrepelling", false))
                cur->nonrepelling.push_back(o);
            else
                cur->orbits.push_back(o);
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError("orbit cache line " + std::to_string(lineno) + ": " + e.what());
    }
    if (cur) db.put(std::move(*cur));
    return db;
}

/// Writes through a temporary file and renames, so readers never see a torn file.
inline void save_db(const OrbitDatabase& db, const std::filesystem::path& path)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot write " + tmp.string());
        write_db(os, db);
        if (!os) throw IoError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline OrbitDatabase load_db(const std::filesystem::path& path,
                             const std::optional<std::string>& expected_fingerprint = std::nullopt)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot read " + path.string());
    return read_db(is, expected_fingerprint);
}

} // namespace orbitctl

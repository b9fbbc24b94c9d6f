#include <fcntl.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "orbitctl/orbitctl.hpp"

namespace fs = std::filesystem;
using namespace orbitctl;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failed = 1; // acceptance failures, unexpected exceptions
constexpr int exit_config = 2;
constexpr int exit_domain = 3;
constexpr int exit_incomplete = 4;
constexpr int exit_io = 5;

int exit_code(ErrorClass c)
{
    switch (c) {
    case ErrorClass::config: return exit_config;
    case ErrorClass::math_domain: return exit_domain;
    case ErrorClass::incomplete_census: return exit_incomplete;
    case ErrorClass::io: return exit_io;
    }
    return exit_failed;
}

const char* class_name(ErrorClass c)
{
    switch (c) {
    case ErrorClass::config: return "config";
    case ErrorClass::math_domain: return "math-domain";
    case ErrorClass::incomplete_census: return "incomplete-census";
    case ErrorClass::io: return "io";
    }
    return "internal";
}

int report_error(const std::string& kind, const std::string& cls, const std::string& message, int code)
{
    nlohmann::json j{{"error", kind}, {"class", cls}, {"message", message}, {"exit_code", code}};
    std::cerr << j.dump() << '\n';
    return code;
}

void note(const std::string& s) { std::cerr << "orbitctl: " << s << '\n'; }

struct Args {
    std::string config, map, n, cache, alpha, out, method;
    std::vector<double> interval, arc;
    bool override_hyperbolicity = false;
    bool override_budget = false;
    bool enumerate = false;
    int mesh_depth = -1;
    int k_max = -1;
};

std::pair<int, int> parse_range(const std::string& s)
{
    auto to_int = [&](const std::string& t) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(t, &used);
            if (used != t.size()) throw std::invalid_argument(t);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("n: expected N or A..B, got '" + s + "'");
        }
    };
    const auto dots = s.find("..");
    if (dots == std::string::npos) return {1, to_int(s)};
    return {to_int(s.substr(0, dots)), to_int(s.substr(dots + 2))};
}

RunConfig resolve(const Args& a, bool need_n)
{
    RunConfig c;
    if (!a.config.empty()) {
        c = parse_config(read_text(a.config));
        const fs::path mp(c.map_path);
        if (mp.is_relative() && !fs::exists(mp)) c.map_path = (fs::path(a.config).parent_path() / mp).string();
    }
    if (const char* env = std::getenv("ORBITCTL_CACHE"); env && *env) c.cache_dir = env;
    if (!a.map.empty()) c.map_path = a.map;
    if (!a.cache.empty()) c.cache_dir = a.cache;
    if (!a.out.empty()) c.output_dir = a.out;
    if (!a.method.empty()) {
        try {
            c.method = method_from_string(a.method);
        } catch (const ConfigError&) {
            throw ConfigError("method: expected backward, roots, both or auto");
        }
    }
    if (!a.n.empty()) std::tie(c.n_min, c.n_max) = parse_range(a.n);
    if (!a.alpha.empty()) {
        if (a.alpha == "maxent")
            c.alpha.reset();
        else
            try {
                c.alpha = std::stod(a.alpha);
            } catch (const std::exception&) {
                throw ConfigError("alpha: expected \"maxent\" or a number");
            }
    }
    if (a.interval.size() == 2) std::tie(c.interval_a, c.interval_b) = std::pair(a.interval[0], a.interval[1]);
    if (a.arc.size() == 2) std::tie(c.arc_center, c.arc_width) = std::pair(a.arc[0], a.arc[1]);
    if (a.mesh_depth >= 0) c.mesh_depth = a.mesh_depth;
    if (a.k_max > 0) c.k_max = a.k_max;
    c.override_hyperbolicity = c.override_hyperbolicity || a.override_hyperbolicity;
    c.override_budget = c.override_budget || a.override_budget;

    if (c.map_path.empty()) throw ConfigError("map: required (--map or config)");
    if (need_n && c.n_max < 1) throw ConfigError("n_max: required (--n or config)");
    if (need_n && (c.n_min < 1 || c.n_min > c.n_max)) throw ConfigError("n: needs 1 <= n_min <= n_max");
    if (c.interval_a > c.interval_b) throw ConfigError("interval: needs a <= b");
    if (!(c.arc_width >= 0.0 && c.arc_width <= 1.0)) throw ConfigError("arc.width: must lie in [0, 1]");
    return c;
}

/// Advisory lock: <cache>/<fingerprint>.lock exists while a writer runs.
class CacheLock {
public:
    explicit CacheLock(fs::path p) : path_(std::move(p))
    {
        const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd < 0)
            throw IoError("cache is locked: " + path_.string() + " exists (remove it if no other orbitctl is running)");
        const std::string pid = std::to_string(::getpid()) + "\n";
        [[maybe_unused]] auto w = ::write(fd, pid.data(), pid.size());
        ::close(fd);
    }
    ~CacheLock()
    {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    CacheLock(const CacheLock&) = delete;
    CacheLock& operator=(const CacheLock&) = delete;

private:
    fs::path path_;
};

struct Session {
    RunConfig cfg;
    RationalMap map;
    fs::path cache_file;
    OrbitDatabase db;
    EnumerationOptions enum_opt;

    explicit Session(RunConfig c)
        : cfg(std::move(c)), map(load_map(cfg.map_path, MapTolerances{cfg.tolerances.pole_floor,
                                                                      cfg.tolerances.critical_floor,
                                                                      cfg.tolerances.closure}))
    {
        cache_file = fs::path(cfg.cache_dir) / (map.fingerprint() + ".jsonl");
        std::error_code ec;
        if (fs::exists(cache_file, ec)) {
            db = load_db(cache_file, map.fingerprint());
        } else {
            db = OrbitDatabase::for_map(map);
        }
        enum_opt.method = cfg.method;
        enum_opt.pairing_tol = cfg.tolerances.pairing;
    }

    void gate() const
    {
        int top = 1;
        while (top < 8 && std::pow(static_cast<double>(map.degree()), top + 1) <= 4096.0) ++top;
        std::vector<int> periods;
        for (int n = 1; n <= top; ++n) periods.push_back(n);
        ProbeOptions opt;
        opt.enumeration = enum_opt;
        const auto rep = hyperbolicity_probe(map, 4000, periods, opt);
        note(std::string("hyperbolicity probe: ") + to_string(rep.verdict) + " (gamma " +
             std::to_string(rep.expansion_base) + ", min rate " + std::to_string(rep.min_log_multiplier_rate) + ")");
        if (rep.verdict == Verdict::hyperbolic_evidence) return;
        if (cfg.override_hyperbolicity) {
            note("continuing under --override-hyperbolicity: " + rep.reason);
            return;
        }
        throw NotHyperbolicError(std::string("probe verdict ") + to_string(rep.verdict) + ": " + rep.reason +
                                 " (pass --override-hyperbolicity to proceed)");
    }

    /// Enumerates periods 1..n_max that are missing, saving after each one.
    void fill(int n_max)
    {
        if (db.complete_prefix() >= n_max) return;
        check_budget(cfg, map.degree());
        fs::create_directories(cfg.cache_dir);
        CacheLock lock(fs::path(cfg.cache_dir) / (map.fingerprint() + ".lock"));
        for (int n = 1; n <= n_max; ++n) {
            if (db.complete(n)) continue;
            try {
                enumerate_primitive(map, n, db, enum_opt);
            } catch (const IncompleteCensusError&) {
                save_db(db, cache_file);
                throw;
            }
            const auto& e = db.entry(n);
            note("period " + std::to_string(n) + ": " + std::to_string(e.orbits.size()) + " primitive repelling, " +
                 std::to_string(e.nonrepelling.size()) + " non-repelling; identity " +
                 std::to_string(census_count(db, n)) + " = " + std::to_string(expected_fixed_point_count(map, n)) +
                 " via " + to_string(e.method));
            save_db(db, cache_file);
        }
    }

    void require(int n_max, bool enumerate)
    {
        if (db.complete_prefix() >= n_max) return;
        if (!enumerate)
            throw IncompleteCensusError("census in " + cache_file.string() + " is complete only to period " +
                                        std::to_string(db.complete_prefix()) + "; run `orbitctl enumerate --n 1.." +
                                        std::to_string(n_max) + "` first or pass --enumerate");
        gate();
        fill(n_max);
    }

    double alpha() const { return cfg.alpha ? *cfg.alpha : maxent_alpha(db, cfg.n_max); }
};

/// Report sink: stdout, or <output_dir>/<name> when an output directory is set.
class Sink {
public:
    Sink(const RunConfig& c, const std::string& name)
    {
        if (c.output_dir.empty()) return;
        fs::create_directories(c.output_dir);
        path_ = fs::path(c.output_dir) / name;
        file_ = std::make_unique<std::ofstream>(path_, std::ios::binary);
        if (!*file_) throw IoError("cannot write " + path_.string());
    }
    std::ostream& os() { return file_ ? *file_ : std::cout; }
    ~Sink()
    {
        if (file_) note("wrote " + path_.string());
    }

private:
    fs::path path_;
    std::unique_ptr<std::ofstream> file_;
};

int cmd_enumerate(const Args& a)
{
    Session s(resolve(a, true));
    check_budget(s.cfg, s.map.degree());
    s.gate();
    s.fill(s.cfg.n_max);
    Sink out(s.cfg, "census.csv");
    CsvWriter w(out.os(), {"n", "primitive_repelling", "nonrepelling", "fixed_points", "expected", "complete", "method"});
    for (int n = s.cfg.n_min; n <= s.cfg.n_max; ++n) {
        const auto& e = s.db.entry(n);
        w << n << e.orbits.size() << e.nonrepelling.size() << census_count(s.db, n)
          << static_cast<std::size_t>(expected_fixed_point_count(s.map, n)) << e.complete << to_string(e.method);
        w.end_row();
    }
    return exit_ok;
}

int cmd_profile(const Args& a, const std::vector<std::string>& alphas)
{
    Session s(resolve(a, true));
    s.require(s.cfg.n_max, a.enumerate);
    std::vector<ThermoProfile> rows;
    if (alphas.empty()) {
        rows.push_back(thermo_profile(s.db, s.alpha(), s.cfg.n_max));
    } else {
        for (const auto& v : alphas) {
            double x;
            try {
                x = v == "maxent" ? maxent_alpha(s.db, s.cfg.n_max) : std::stod(v);
            } catch (const std::invalid_argument&) {
                throw ConfigError("alphas: expected numbers or \"maxent\", got '" + v + "'");
            }
            rows.push_back(thermo_profile(s.db, x, s.cfg.n_max));
        }
    }
    Sink out(s.cfg, "profile.csv");
    write_profile_csv(out.os(), rows);
    return exit_ok;
}

int cmd_pressure(const Args& a, std::vector<double> ts, bool extrapolate)
{
    Session s(resolve(a, true));
    s.require(s.cfg.n_max, a.enumerate);
    if (ts.empty())
        for (int i = -8; i <= 8; ++i) ts.push_back(i / 8.0);
    Sink out(s.cfg, "pressure.csv");
    write_pressure_csv(out.os(), pressure_curve(s.db, ts, s.alpha(), s.cfg.n_max, extrapolate));
    return exit_ok;
}

int cmd_dimension(const Args& a, bool skip_transfer)
{
    Session s(resolve(a, true));
    s.require(s.cfg.n_max, a.enumerate);
    std::vector<DimensionResult> rows{bowen_dimension(s.db, s.cfg.n_max)};
    if (!skip_transfer) {
        s.gate();
        rows.push_back(transfer_dimension(build_mesh(s.map, s.cfg.mesh_depth)));
    }
    Sink out(s.cfg, "dimension.csv");
    write_dimension_csv(out.os(), rows);
    return exit_ok;
}

int cmd_count(const Args& a)
{
    Session s(resolve(a, true));
    s.require(s.cfg.n_max, a.enumerate);
    const auto profile = thermo_profile(s.db, s.alpha(), s.cfg.n_max);
    WindowSchedule sched;
    if (s.cfg.schedule) {
        sched = *s.cfg.schedule;
        const auto chk = check_schedule(sched);
        if (!chk.ok) throw ScheduleError(chk.reason);
    } else {
        sched = WindowSchedule::fixed(s.cfg.interval_a, s.cfg.interval_b, s.cfg.arc_center, s.cfg.arc_width);
    }
    const auto rep = convergence_report(s.db, profile, sched, s.cfg.n_min, s.cfg.n_max);
    note(std::string("ratio trend over the upper half of the range: ") + (rep.improving ? "improving" : "not improving"));
    Sink out(s.cfg, "convergence.csv");
    write_convergence_csv(out.os(), rep, profile, sched);
    return exit_ok;
}

int cmd_weyl(const Args& a)
{
    Session s(resolve(a, true));
    s.require(s.cfg.n_max, a.enumerate);
    const double alpha = s.alpha();
    Sink out(s.cfg, "weyl.csv");
    CsvWriter w(out.os(), {"n", "k", "magnitude", "sample_size"});
    for (int n = s.cfg.n_min; n <= s.cfg.n_max; ++n)
        for (const auto& ws : weyl_sums(s.db, n, alpha, s.cfg.interval_a, s.cfg.interval_b, s.cfg.k_max)) {
            w << n << ws.k << ws.magnitude << ws.sample_size;
            w.end_row();
        }
    return exit_ok;
}

int cmd_owcount(const Args& a, std::vector<double> ts, bool allow_truncated)
{
    Session s(resolve(a, true));
    s.require(s.cfg.n_max, a.enumerate);
    const double chi = maxent_alpha(s.db, s.cfg.n_max);
    const double delta = bowen_dimension(s.db, s.cfg.n_max).delta;
    if (ts.empty())
        for (int n = s.cfg.n_min; n < s.cfg.n_max; ++n) ts.push_back(std::exp(chi * n));
    Sink out(s.cfg, "owcount.csv");
    CsvWriter w(out.os(), {"t", "count", "li", "ratio", "delta"});
    for (double t : ts) {
        const long c = ow_count(s.db, t, allow_truncated);
        const double x = std::pow(t, delta);
        const double li = x >= 2.0 ? logarithmic_integral(x) : std::numeric_limits<double>::quiet_NaN();
        w << t << c << li << c / li << delta;
        w.end_row();
    }
    return exit_ok;
}

int cmd_decay(const Args& a, std::vector<double> bs, std::vector<int> ks, double xi, int steps)
{
    Session s(resolve(a, false));
    s.gate();
    if (bs.size() != ks.size()) throw ConfigError("b, k: give the same number of values");
    if (bs.empty()) {
        bs = {0.0, 5.0, 0.0, 3.0};
        ks = {0, 0, 1, 2};
    }
    const double alpha = s.cfg.alpha.value_or(0.0);
    const auto op = normalize(build_mesh(s.map, s.cfg.mesh_depth), xi, alpha);
    std::vector<DecayRow> rows;
    for (std::size_t i = 0; i < bs.size(); ++i)
        rows.push_back({bs[i], ks[i], s.cfg.mesh_depth, steps, decay_probe(op, bs[i], ks[i], steps)});
    Sink out(s.cfg, "decay.csv");
    write_decay_csv(out.os(), rows);
    return exit_ok;
}

int cmd_verify(const Args& a)
{
    std::optional<RationalMap> basilica;
    if (!a.map.empty() || !a.config.empty()) {
        const auto cfg = resolve(a, false);
        basilica = load_map(cfg.map_path);
    }
    bool all = true;
    run_acceptance(basilica, [&](const CriterionResult& r) {
        std::cout << format_result(r) << std::endl;
        all = all && r.pass;
    });
    return all ? exit_ok : exit_failed;
}

void add_common(CLI::App* sub, Args& a, bool census)
{
    sub->add_option("--config", a.config, "run configuration (JSON)");
    sub->add_option("--map", a.map, "map file (JSON)");
    sub->add_option("--cache", a.cache, "cache directory (default .orbitctl-cache, env ORBITCTL_CACHE)");
    sub->add_option("--out", a.out, "write the report into this directory instead of stdout");
    sub->add_option("--alpha", a.alpha, "mean: a number or \"maxent\"");
    sub->add_option("--method", a.method, "fixed-point method: backward, roots, both, auto");
    sub->add_option("--mesh-depth", a.mesh_depth, "backward-tree depth of the collocation mesh");
    sub->add_flag("--override-hyperbolicity", a.override_hyperbolicity, "proceed when the probe is not conclusive");
    if (census) {
        sub->add_option("--n", a.n, "periods N or A..B");
        sub->add_option("--interval", a.interval, "a,b")->delimiter(',')->expected(2);
        sub->add_option("--arc", a.arc, "center,width (width as a fraction of the circle)")->delimiter(',')->expected(2);
        sub->add_flag("--override-budget", a.override_budget, "allow d^n_max above the budget");
        sub->add_flag("--enumerate", a.enumerate, "fill missing periods instead of failing");
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"orbitctl: periodic orbits, pressure and orbit counting for hyperbolic rational maps"};
    app.require_subcommand(1);
    Args args;

    auto* enumerate = app.add_subcommand("enumerate", "enumerate primitive periodic orbits into the cache");
    add_common(enumerate, args, true);

    std::vector<std::string> alphas;
    auto* profile = app.add_subcommand("profile", "Legendre data xi, sigma^2, H at alpha");
    add_common(profile, args, true);
    profile->add_option("--alphas", alphas, "several alphas")->delimiter(',');

    std::vector<double> ts;
    bool extrapolate = false;
    auto* pressure = app.add_subcommand("pressure", "pressure estimate q(t) and derivatives");
    add_common(pressure, args, true);
    pressure->add_option("--t", ts, "t values")->delimiter(',');
    pressure->add_flag("--extrapolate", extrapolate, "ratio-extrapolate between periods n-1 and n");

    bool skip_transfer = false;
    auto* dimension = app.add_subcommand("dimension", "Bowen dimension from orbit sums and the transfer operator");
    add_common(dimension, args, true);
    dimension->add_flag("--orbit-only", skip_transfer, "skip the transfer-operator estimate");

    auto* count = app.add_subcommand("count", "orbit counts against the local-CLT prediction");
    add_common(count, args, true);

    auto* weyl = app.add_subcommand("weyl", "normalized Weyl sums of holonomies");
    add_common(weyl, args, true);
    weyl->add_option("--k-max", args.k_max, "largest frequency")->check(CLI::PositiveNumber);

    std::vector<double> ow_ts;
    bool allow_truncated = false;
    auto* owcount = app.add_subcommand("owcount", "multiplier-ordered counts against Li(t^delta)");
    add_common(owcount, args, true);
    owcount->add_option("--t", ow_ts, "thresholds (default e^{chi n} over the range)")->delimiter(',');
    owcount->add_flag("--allow-truncated", allow_truncated, "count even when longer periods could qualify");

    std::vector<double> bs;
    std::vector<int> ks;
    double xi = 0.0;
    int steps = 40;
    auto* decay = app.add_subcommand("decay", "decay rates of the twisted normalized operator");
    add_common(decay, args, false);
    decay->add_option("--b", bs, "b values")->delimiter(',');
    decay->add_option("--k", ks, "k values, paired with --b")->delimiter(',');
    decay->add_option("--xi", xi, "tilt xi of the normalization");
    decay->add_option("--steps", steps, "iterations")->check(CLI::PositiveNumber);

    auto* verify = app.add_subcommand("verify", "run the acceptance suite");
    verify->add_option("--map", args.map, "map standing in for z^2 - 1");
    verify->add_option("--config", args.config, "run configuration whose map is used");

    if (argc > 1 && argv[1][0] != '-' && !app.get_subcommand_no_throw(argv[1])) {
        std::cerr << app.help() << '\n';
        return report_error("UsageError", "config", std::string("unknown subcommand '") + argv[1] + "'", exit_config);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << app.help() << '\n';
        return report_error("UsageError", "config", e.what(), exit_config);
    }

    try {
        if (enumerate->parsed()) return cmd_enumerate(args);
        if (profile->parsed()) return cmd_profile(args, alphas);
        if (pressure->parsed()) return cmd_pressure(args, ts, extrapolate);
        if (dimension->parsed()) return cmd_dimension(args, skip_transfer);
        if (count->parsed()) return cmd_count(args);
        if (weyl->parsed()) return cmd_weyl(args);
        if (owcount->parsed()) return cmd_owcount(args, ow_ts, allow_truncated);
        if (decay->parsed()) return cmd_decay(args, bs, ks, xi, steps);
        if (verify->parsed()) return cmd_verify(args);
    } catch (const Error& e) {
        return report_error(e.kind(), class_name(e.error_class()), e.what(), exit_code(e.error_class()));
    } catch (const std::exception& e) {
        return report_error("InternalError", "internal", e.what(), exit_failed);
    }
    return exit_failed;
}

#include <gtest/gtest.h>

#include <string>

#include "orbitctl/config.hpp"

using namespace orbitctl;

namespace {

std::string config_error(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(Config, MinimalGetsDefaults)
{
    const auto c = parse_config(R"({"map": "m.json", "n_max": 10})");
    EXPECT_EQ(c.map_path, "m.json");
    EXPECT_EQ(c.n_min, 1);
    EXPECT_EQ(c.n_max, 10);
    EXPECT_FALSE(c.alpha.has_value());
    EXPECT_EQ(c.cache_dir, ".orbitctl-cache");
    EXPECT_EQ(c.mesh_depth, 12);
    EXPECT_EQ(c.budget, 131072.0);
    EXPECT_FALSE(c.override_hyperbolicity);
    EXPECT_EQ(c.method, FixedPointMethod::automatic);
}

TEST(Config, FullConfig)
{
    const auto c = parse_config(R"({
        "map": "b.json", "n_min": 8, "n_max": 14, "alpha": 0.7,
        "interval": [-0.5, 0.5], "arc": {"center": 1.0, "width": 0.25},
        "schedule": {"length": {"kind": "power", "scale": 1, "exponent": -0.5}, "arc_width": 0.5,
                     "K": [-1, 1], "range": [8, 14]},
        "mesh_depth": 10, "output_dir": "out", "tolerances": {"pairing": 1e-8},
        "method": "both", "override_hyperbolicity": true, "eta": 0.2, "k_max": 3})");
    EXPECT_EQ(c.n_min, 8);
    ASSERT_TRUE(c.alpha);
    EXPECT_EQ(*c.alpha, 0.7);
    EXPECT_EQ(c.interval_a, -0.5);
    EXPECT_EQ(c.arc_width, 0.25);
    ASSERT_TRUE(c.schedule);
    EXPECT_NEAR(c.schedule->length(16), 0.25, 1e-15);
    EXPECT_EQ(c.schedule->arc_width(9), 0.5);
    EXPECT_EQ(c.schedule->k_lo, -1.0);
    EXPECT_EQ(c.tolerances.pairing, 1e-8);
    EXPECT_EQ(c.method, FixedPointMethod::both);
    EXPECT_TRUE(c.override_hyperbolicity);
    EXPECT_EQ(c.k_max, 3);
}

TEST(Config, MaxentIsDeferred)
{
    EXPECT_FALSE(parse_config(R"({"map": "m", "n_max": 3, "alpha": "maxent"})").alpha.has_value());
}

TEST(Config, ErrorsNameTheKey)
{
    EXPECT_NE(config_error(R"({"map": "m", "n_min": 5, "n_max": 3})").find("n_min"), std::string::npos);
    EXPECT_NE(config_error(R"({"n_max": 3})").find("map"), std::string::npos);
    EXPECT_NE(config_error(R"({"map": "m"})").find("n_max"), std::string::npos);
    EXPECT_NE(config_error(R"({"map": "m", "n_max": 3, "bogus": 1})").find("bogus: unknown key"), std::string::npos);
    EXPECT_NE(config_error(R"({"map": "m", "n_max": 3, "arc": {"centre": 0}})").find("arc.centre"), std::string::npos);
    EXPECT_NE(config_error(R"({"map": "m", "n_max": "ten"})").find("n_max"), std::string::npos);
    EXPECT_NE(config_error(R"({"map": "m", "n_max": 3, "alpha": "mean"})").find("alpha"), std::string::npos);
    EXPECT_NE(config_error(R"({"map": "m", "n_max": 3, "method": "magic"})").find("method"), std::string::npos);
    EXPECT_NE(config_error(R"({"map": "m", "n_max": 3, "schedule": {"length": {"kind": "log"}}})")
                  .find("schedule.length.kind"),
              std::string::npos);
    EXPECT_NE(config_error("{not json").find("not valid JSON"), std::string::npos);
}

TEST(Config, Budget)
{
    auto c = parse_config(R"({"map": "m", "n_max": 17})");
    EXPECT_NO_THROW(check_budget(c, 2));
    c.n_max = 18;
    EXPECT_THROW(check_budget(c, 2), ConfigError);
    c.override_budget = true;
    EXPECT_NO_THROW(check_budget(c, 2));
}

TEST(Config, MapFile)
{
    const auto f = parse_map(R"({"numerator": [-1, 0, 1]})");
    EXPECT_EQ(f.degree(), 2);
    EXPECT_NEAR(std::abs(f(cplx(0.0)) + 1.0), 0.0, 1e-15);
    const auto g = parse_map(R"({"numerator": [[0, 0], [0, 0], [1, 0]], "denominator": [[1, 0], [0, 0], [0, 0], [0.5, 0]]})");
    EXPECT_EQ(g.degree(), 3);
    EXPECT_THROW(parse_map(R"({"numerator": [1, "x"]})"), ConfigError);
    EXPECT_THROW(parse_map(R"({"numerator": [-1, 0, 1], "extra": 0})"), ConfigError);
    EXPECT_THROW(parse_map(R"({"denominator": [1]})"), ConfigError);
    EXPECT_THROW(load_map("/nonexistent/map.json"), IoError);
}

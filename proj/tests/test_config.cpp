#include <cmath>
#include <numbers>
#include <string>

#include <gtest/gtest.h>

#include "atomlaser/config.hpp"

using namespace atomlaser;
using std::numbers::pi;

namespace {

const char* kWeakDoublet = R"(# weak outcoupling, interaction free
[physical]
omega_z_per_s = 200
lambda_ratio = 0.4
eta = 1.7
Lambda_per_s2 = 100
N_total = 100
alpha0_frac = 0.7
beta0_frac = 0.3
phi0_rad = pi/2
tau_s = 10
kappa_override_per_s = 0

[discretization]
M = 1500
omega_up_per_s = 300

[integrator]
rtol = 1e-9
atol = 1e-12
sample_dt_s = 0.001

[output]
directory = runs/weak
)";

std::string error_of(const std::string& text, const std::vector<std::string>& overrides = {})
{
    try {
        parse_config(text, "cfg.ini", overrides);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(Config, ParsesWeakOutcouplingConfiguration)
{
    const RunConfig c = parse_config(kWeakDoublet, "weak.ini");
    EXPECT_EQ(c.run.physical.omega_z, 200.0);
    EXPECT_EQ(c.run.physical.outcoupling, 100.0);
    EXPECT_DOUBLE_EQ(c.run.physical.initial_phase, pi / 2);
    ASSERT_TRUE(c.run.physical.kappa_override);
    EXPECT_EQ(*c.run.physical.kappa_override, 0.0);
    EXPECT_EQ(c.run.discretization.mode_count, 1500u);
    EXPECT_EQ(c.run.integrator.sample_dt, 0.001);
    EXPECT_EQ(c.output.directory, "runs/weak");
    EXPECT_FALSE(c.sweep);
}

TEST(Config, DefaultsWhenEmpty)
{
    const RunConfig c = parse_config("");
    EXPECT_EQ(c.run.physical.separation, 1.7);
    EXPECT_FALSE(c.run.physical.kappa_override);
    EXPECT_EQ(c.run.discretization.omega_up, 300.0);
}

TEST(Config, PiExpressions)
{
    EXPECT_DOUBLE_EQ(*config_detail::number("2*pi"), 2 * pi);
    EXPECT_DOUBLE_EQ(*config_detail::number("pi / 4"), pi / 4);
    EXPECT_DOUBLE_EQ(*config_detail::number("-pi"), -pi);
    EXPECT_DOUBLE_EQ(*config_detail::number("1.5e3"), 1500.0);
    EXPECT_FALSE(config_detail::number("pie"));
    EXPECT_FALSE(config_detail::number("3 apples"));
}

TEST(Config, UnknownKeysAndSectionsCarryLocation)
{
    EXPECT_NE(error_of("[physical]\nomega_z = 200\n").find("cfg.ini:2"), std::string::npos);
    EXPECT_NE(error_of("[physical]\nomega_z = 200\n").find("omega_z"), std::string::npos);
    EXPECT_NE(error_of("\n\n[nonsense]\n").find("cfg.ini:3"), std::string::npos);
    EXPECT_NE(error_of("[physical]\neta = abc\n").find("key 'eta'"), std::string::npos);
    EXPECT_NE(error_of("[physical]\neta = 1\neta = 2\n").find("duplicate"), std::string::npos);
    EXPECT_NE(error_of("eta = 1\n").find("outside any section"), std::string::npos);
    EXPECT_NE(error_of("[physical]\neta 1.5\n").find("cfg.ini:2"), std::string::npos);
    // Keys belong to one section only.
    EXPECT_FALSE(error_of("[integrator]\neta = 1.5\n").empty());
    EXPECT_FALSE(error_of("[discretization]\nM = 10.5\n").empty());
}

TEST(Config, Overrides)
{
    const RunConfig c = parse_config(kWeakDoublet, "weak.ini", {"eta=1.5", "physical.Lambda_per_s2 = 4e3", "M=3000"});
    EXPECT_EQ(c.run.physical.separation, 1.5);
    EXPECT_EQ(c.run.physical.outcoupling, 4000.0);
    EXPECT_EQ(c.run.discretization.mode_count, 3000u);
    EXPECT_NE(error_of(kWeakDoublet, {"bogus=1"}).find("bogus"), std::string::npos);
    EXPECT_NE(error_of(kWeakDoublet, {"eta"}).find("key=value"), std::string::npos);
    EXPECT_EQ(parse_config(kWeakDoublet, "x", {"kappa_override_per_s=none"}).run.physical.kappa_override, std::nullopt);
}

TEST(Config, SweepBlock)
{
    const std::string text = std::string(kWeakDoublet) + R"(
[sweep]
axis.phi0_rad = linspace(0, 2*pi, 16)
axis.N_total = 50, 100
observables = steady_state_NA, peak_ratio
)";
    const RunConfig c = parse_config(text);
    ASSERT_TRUE(c.sweep);
    ASSERT_EQ(c.sweep->axes.size(), 2u);
    EXPECT_EQ(c.sweep->axes[0].key, "phi0_rad");
    EXPECT_EQ(c.sweep->axes[0].values.size(), 16u);
    EXPECT_DOUBLE_EQ(c.sweep->axes[0].values.back(), 2 * pi);
    EXPECT_EQ(c.sweep->axes[1].values, (std::vector<double>{50, 100}));
    EXPECT_EQ(c.sweep->observables, (std::vector<std::string>{"steady_state_NA", "peak_ratio"}));
    EXPECT_EQ(c.sweep_spec().axes.size(), 2u);

    EXPECT_FALSE(error_of("[sweep]\naxis.phi0_rad =\n").empty());
    EXPECT_FALSE(error_of("[sweep]\naxis.bogus = 1, 2\n").empty());
    EXPECT_FALSE(error_of("[sweep]\nobservables = nope\n").empty());
    EXPECT_FALSE(error_of("[sweep]\naxis.eta = linspace(1, 2)\n").empty());
}

TEST(Config, SeparationSchedule)
{
    const RunConfig c = parse_config("[physical]\neta_schedule = 0:2.0, 1.5:1.5\n");
    ASSERT_EQ(c.run.physical.separation_schedule.knots.size(), 2u);
    EXPECT_EQ(c.run.physical.separation_schedule.knots[1], (std::pair<double, double>{1.5, 1.5}));
    EXPECT_FALSE(error_of("[physical]\neta_schedule = 0-2\n").empty());
}

TEST(Config, JsonRoundTrip)
{
    const RunConfig c = parse_config(std::string(kWeakDoublet) + "\n[sweep]\naxis.eta = 1.5, 1.7\naxis.phi0_rad = 0, pi\n"
                                                       "observables = dip_depth\n",
                               "x", {"eta_schedule=0:1.8, 2:1.6", "omega_min_per_s=50"});
    const auto j = to_json(c);
    const RunConfig back = parse_config_json(j);
    EXPECT_EQ(to_json(back).dump(), j.dump());
    EXPECT_EQ(back.run.physical.initial_phase, c.run.physical.initial_phase);
    EXPECT_EQ(back.run.physical.separation_schedule.knots, c.run.physical.separation_schedule.knots);
    EXPECT_EQ(back.sweep->axes[0].key, "eta");
    EXPECT_EQ(back.sweep->axes[1].values, c.sweep->axes[1].values);
    EXPECT_EQ(*back.run.analysis.omega_min, 50.0);

    nlohmann::ordered_json meta;
    meta["resolved_config"] = j;
    meta["version"] = "x";
    EXPECT_EQ(to_json(parse_config_json(meta)).dump(), j.dump());
}

TEST(Config, JsonRejectsUnknownKeys)
{
    nlohmann::ordered_json j;
    j["physical"]["warp_factor"] = 9;
    EXPECT_THROW(parse_config_json(j), ConfigError);
}

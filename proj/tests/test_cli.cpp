#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "atomlaser/cli.hpp"

namespace fs = std::filesystem;
using atomlaser::cli::run;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() /
               ("atomlaser_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& text)
    {
        const fs::path p = dir_ / name;
        std::ofstream(p) << text;
        return p.string();
    }

    int invoke(std::initializer_list<std::string> args)
    {
        std::vector<std::string> storage{"atomlaser"};
        storage.insert(storage.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& s : storage) argv.push_back(s.c_str());
        out_.str("");
        err_.str("");
        return run(static_cast<int>(argv.size()), argv.data(), out_, err_);
    }

    static std::string slurp(const fs::path& p)
    {
        std::ifstream f(p, std::ios::binary);
        std::stringstream s;
        s << f.rdbuf();
        return s.str();
    }

    static std::vector<std::string> lines(const std::string& text)
    {
        std::vector<std::string> out;
        std::stringstream s(text);
        std::string line;
        while (std::getline(s, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            out.push_back(line);
        }
        return out;
    }

    fs::path dir_;
    std::ostringstream out_, err_;
};

const char* kShort = R"([physical]
Lambda_per_s2 = 100
eta = 1.7
kappa_override_per_s = 0
tau_s = 0.5
[discretization]
M = 300
omega_up_per_s = 300
)";

} // namespace

TEST_F(Cli, SimulateWritesPlotReadyFiles)
{
    const auto cfg = write("run.ini", kShort);
    const std::string out = (dir_ / "a").string();
    ASSERT_EQ(invoke({"simulate", "--config", cfg, "--out", out}), 0) << err_.str();

    const auto traj = lines(slurp(dir_ / "a" / "trajectory.csv"));
    ASSERT_EQ(traj.front(), "t_s,N_A,N_B,N_C,frac_A,frac_B,frac_C,phi_rad,p_tilde,H_c");
    EXPECT_EQ(traj.size(), 1u + 501u);
    const std::regex number(R"(-?\d\.\d{15}e[+-]\d{2,3}|nan)");
    std::stringstream row(traj[1]);
    std::string cell;
    int cells = 0;
    while (std::getline(row, cell, ',')) {
        EXPECT_TRUE(std::regex_match(cell, number)) << cell;
        ++cells;
    }
    EXPECT_EQ(cells, 10);

    const auto spec = lines(slurp(dir_ / "a" / "spectrum.csv"));
    ASSERT_EQ(spec.front(), "omega_per_s,density_atoms_s,is_peak,is_dip");
    EXPECT_EQ(spec.size(), 301u);
    for (std::size_t i = 1; i < spec.size(); ++i) {
        const auto flags = spec[i].substr(spec[i].size() - 4);
        EXPECT_TRUE(std::regex_match(flags, std::regex(",[01],[01]"))) << spec[i];
    }

    const auto meta = nlohmann::json::parse(slurp(dir_ / "a" / "meta.json"));
    for (const char* key : {"J_per_s", "kappa_per_s", "S_per_s", "epsilon_per_s", "N_max", "t_collapse_s"})
        EXPECT_TRUE(meta["derived"].contains(key)) << key;
    EXPECT_NEAR(meta["derived"]["J_per_s"].get<double>(), 6.6935353557, 1e-9);
    EXPECT_TRUE(meta["derived"]["t_collapse_s"].is_null());
    EXPECT_TRUE(meta.contains("norm_drift_atoms"));
    EXPECT_TRUE(meta.contains("wall_time_s"));
    EXPECT_EQ(meta["version"], std::string(atomlaser::version));
    EXPECT_EQ(meta["resolved_config"]["physical"]["tau_s"], 0.5);
}

TEST_F(Cli, RepeatedRunsAndMetaRoundTripAreIdentical)
{
    const auto cfg = write("run.ini", kShort);
    ASSERT_EQ(invoke({"simulate", "--config", cfg, "--out", (dir_ / "a").string()}), 0);
    ASSERT_EQ(invoke({"simulate", "--config", cfg, "--out", (dir_ / "b").string()}), 0);
    ASSERT_EQ(invoke({"simulate", "--config", (dir_ / "a" / "meta.json").string(), "--out", (dir_ / "c").string()}),
              0)
        << err_.str();
    for (const char* f : {"trajectory.csv", "spectrum.csv"}) {
        EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
        EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "c" / f)) << f;
    }
    auto strip = [](nlohmann::ordered_json j) {
        j.erase("wall_time_s");
        j["resolved_config"]["output"].erase("directory");
        return j.dump();
    };
    const auto ma = nlohmann::ordered_json::parse(slurp(dir_ / "a" / "meta.json"));
    EXPECT_EQ(strip(ma), strip(nlohmann::ordered_json::parse(slurp(dir_ / "b" / "meta.json"))));
    EXPECT_EQ(strip(ma), strip(nlohmann::ordered_json::parse(slurp(dir_ / "c" / "meta.json"))));
}

TEST_F(Cli, OverridesApplyAfterFile)
{
    const auto cfg = write("run.ini", kShort);
    ASSERT_EQ(invoke({"simulate", "--config", cfg, "--out", (dir_ / "a").string(), "--override", "tau_s=0.01",
                      "--override", "physical.eta=1.5"}),
              0)
        << err_.str();
    const auto meta = nlohmann::json::parse(slurp(dir_ / "a" / "meta.json"));
    EXPECT_EQ(meta["resolved_config"]["physical"]["tau_s"], 0.01);
    EXPECT_EQ(meta["resolved_config"]["physical"]["eta"], 1.5);
    EXPECT_EQ(lines(slurp(dir_ / "a" / "trajectory.csv")).size(), 12u);
}

TEST_F(Cli, ConfigErrorsExitWithTwo)
{
    const auto bad_key = write("bad.ini", "[physical]\nomega_z = 200\n");
    EXPECT_EQ(invoke({"simulate", "--config", bad_key}), 2);
    EXPECT_NE(err_.str().find("bad.ini:2"), std::string::npos) << err_.str();

    const auto negative = write("neg.ini", "[physical]\nomega_z_per_s = -200\n");
    EXPECT_EQ(invoke({"simulate", "--config", negative, "--out", (dir_ / "x").string()}), 2);
    EXPECT_EQ(invoke({"validate", "--config", negative}), 2);
    EXPECT_EQ(invoke({"simulate", "--config", (dir_ / "missing.ini").string()}), 2);
    EXPECT_EQ(invoke({"simulate"}), 2);
    EXPECT_EQ(invoke({}), 2);
    EXPECT_EQ(invoke({"simulate", "--config", write("ok.ini", kShort), "--override", "nonsense=1"}), 2);
}

TEST_F(Cli, NumericalFailureExitsWithThree)
{
    const auto cfg = write("run.ini", std::string(kShort) + "[integrator]\nrtol = 1e-30\natol = 1e-300\n");
    EXPECT_EQ(invoke({"simulate", "--config", cfg, "--out", (dir_ / "a").string()}), 3);
    EXPECT_NE(err_.str().find("t = "), std::string::npos) << err_.str();
}

TEST_F(Cli, ValidateReportsDerivedParameters)
{
    const auto cfg = write("na.ini", "[physical]\nN_total = 100\n");
    ASSERT_EQ(invoke({"validate", "--config", cfg}), 0) << err_.str();
    const std::string text = out_.str();
    EXPECT_NE(text.find("6.69354"), std::string::npos) << text;
    EXPECT_NE(text.find("0.147607"), std::string::npos);
    EXPECT_NE(text.find("2495.83"), std::string::npos);
    EXPECT_NE(text.find("[warning] coherence time"), std::string::npos);
    EXPECT_EQ(text.find("interaction-free"), std::string::npos);

    ASSERT_EQ(invoke({"validate", "--config", cfg, "--override", "kappa_override_per_s=0"}), 0);
    EXPECT_NE(out_.str().find("interaction-free mode"), std::string::npos);

    ASSERT_EQ(invoke({"validate", "--config", cfg, "--override", "N_total=2000"}), 0);
    EXPECT_NE(out_.str().find("[warning] two-mode validity"), std::string::npos);
}

TEST_F(Cli, SweepWritesOneRowPerPointInGridOrder)
{
    const auto cfg = write("sweep.ini", std::string(kShort) + R"([sweep]
axis.N_total = 50, 100
axis.phi0_rad = 0, pi
observables = steady_state_NA, peak_ratio
per_point_output = true
)");
    ASSERT_EQ(invoke({"sweep", "--config", cfg, "--out", (dir_ / "s1").string(), "--workers", "1"}), 0)
        << err_.str();
    ASSERT_EQ(invoke({"sweep", "--config", cfg, "--out", (dir_ / "s2").string(), "--workers", "3"}), 0);
    const auto csv = slurp(dir_ / "s1" / "sweep.csv");
    EXPECT_EQ(csv, slurp(dir_ / "s2" / "sweep.csv"));
    const auto rows = lines(csv);
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[0], "N_total,phi0_rad,steady_state_NA,peak_ratio,status,norm_drift");
    EXPECT_EQ(rows[1].rfind("5.000000000000000e+01,0.000000000000000e+00,", 0), 0u);
    EXPECT_EQ(rows[2].rfind("5.000000000000000e+01,3.141592653589793e+00,", 0), 0u);
    EXPECT_EQ(rows[3].rfind("1.000000000000000e+02,0.000000000000000e+00,", 0), 0u);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_NE(rows[i].find(",ok,"), std::string::npos);
    for (const char* p : {"point_00000", "point_00003"})
        EXPECT_TRUE(fs::exists(dir_ / "s1" / p / "trajectory.csv")) << p;
    EXPECT_TRUE(fs::exists(dir_ / "s1" / "sweep_meta.json"));
}

TEST_F(Cli, SweepFlagsFailedPoints)
{
    const auto cfg = write("sweep.ini", std::string(kShort) + "[sweep]\naxis.N_total = 100, -1\n"
                                                              "observables = steady_state_NA\n");
    ASSERT_EQ(invoke({"sweep", "--config", cfg, "--out", (dir_ / "s").string()}), 0);
    const auto rows = lines(slurp(dir_ / "s" / "sweep.csv"));
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_NE(rows[1].find(",ok,"), std::string::npos);
    EXPECT_NE(rows[2].find(",failed: "), std::string::npos) << rows[2];
}

TEST_F(Cli, SweepWithoutAxesIsConfigError)
{
    const auto cfg = write("sweep.ini", std::string(kShort) + "[sweep]\nobservables = steady_state_NA\n");
    EXPECT_EQ(invoke({"sweep", "--config", cfg, "--out", (dir_ / "s").string()}), 2);
    EXPECT_EQ(invoke({"sweep", "--config", write("none.ini", kShort), "--out", (dir_ / "s").string()}), 2);
}

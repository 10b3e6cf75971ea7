#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "atomlaser/sweep.hpp"

using namespace atomlaser;
using std::numbers::pi;

namespace {

RunSettings quick()
{
    RunSettings r;
    r.physical.duration = 1.2;
    r.discretization.mode_count = 120;
    return r;
}

Trajectory synthetic(const std::vector<double>& n_a, double n = 1.0)
{
    Trajectory t;
    t.atom_number = n;
    t.sample_dt = 0.01;
    for (std::size_t i = 0; i < n_a.size(); ++i) {
        TrajectorySample s;
        s.t = 0.01 * i;
        s.n_a = n_a[i];
        s.n_b = n - n_a[i];
        s.p_tilde = (s.n_a - s.n_b) / n;
        t.samples.push_back(s);
    }
    return t;
}

void expect_same(const SweepResult& a, const SweepResult& b)
{
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].coordinates, b.rows[i].coordinates);
        EXPECT_EQ(a.rows[i].ok, b.rows[i].ok);
        EXPECT_EQ(a.rows[i].norm_drift, b.rows[i].norm_drift);
        for (std::size_t k = 0; k < a.rows[i].summaries.size(); ++k)
            EXPECT_EQ(a.rows[i].summaries[k].value, b.rows[i].summaries[k].value);
    }
}

} // namespace

TEST(Linspace, Inclusive)
{
    const auto v = linspace(0.0, 2 * pi, 16);
    ASSERT_EQ(v.size(), 16u);
    EXPECT_EQ(v.front(), 0.0);
    EXPECT_EQ(v.back(), 2 * pi);
    EXPECT_EQ(linspace(3.0, 4.0, 1), std::vector<double>{3.0});
}

TEST(Summaries, SecondPeakAmplitude)
{
    std::vector<double> x;
    for (int i = 0; i <= 400; ++i) {
        const double t = 0.01 * i;
        x.push_back(0.5 + 0.2 * std::exp(-0.1 * t) * std::cos(2 * pi * t));
    }
    const auto a = oscillation_amplitude_second_peak(synthetic(x));
    ASSERT_TRUE(a.value);
    // Second maximum at t = 2, preceding trough at t = 1.5.
    EXPECT_NEAR(*a.value, 0.5 * (0.2 * std::exp(-0.2) + 0.2 * std::exp(-0.15)), 1e-3);

    EXPECT_EQ(*oscillation_amplitude_second_peak(synthetic(std::vector<double>(50, 0.4))).value, 0.0);
    std::vector<double> ramp;
    for (int i = 0; i < 50; ++i) ramp.push_back(0.01 * i);
    EXPECT_FALSE(oscillation_amplitude_second_peak(synthetic(ramp)).value);
}

TEST(Summaries, ImbalanceCrossings)
{
    std::vector<double> x;
    for (int i = 0; i <= 300; ++i) x.push_back(0.5 + 0.3 * std::cos(2 * pi * 0.01 * i));
    const auto c = imbalance_crossings(synthetic(x));
    ASSERT_EQ(c.size(), 6u);
    EXPECT_NEAR(c[0], 0.25, 1e-3);
    EXPECT_NEAR(c[1], 0.75, 1e-3);
    const auto first = extract_summary(synthetic(x), SpectrumAnalysis{}, "regime_transition_times");
    EXPECT_NEAR(*first.value, 0.25, 1e-3);
    EXPECT_FALSE(extract_summary(synthetic(std::vector<double>(10, 0.9)), SpectrumAnalysis{},
                                 "regime_transition_times")
                     .value);
}

TEST(Summaries, UnknownNameRejected)
{
    EXPECT_THROW(extract_summary(Trajectory{}, SpectrumAnalysis{}, "bogus"), ConfigError);
}

TEST(Sweep, GridOrderTwoByTwo)
{
    SweepSpec spec;
    spec.base = quick();
    spec.axes = {{"N_total", {50, 100}}, {"phi0_rad", {0.0, 1.0}}};
    spec.observables = {"steady_state_NA"};
    const auto r = run_sweep(spec, 2);
    ASSERT_EQ(r.rows.size(), 4u);
    EXPECT_EQ(r.rows[0].coordinates, (std::vector<double>{50, 0.0}));
    EXPECT_EQ(r.rows[1].coordinates, (std::vector<double>{50, 1.0}));
    EXPECT_EQ(r.rows[2].coordinates, (std::vector<double>{100, 0.0}));
    EXPECT_EQ(r.rows[3].coordinates, (std::vector<double>{100, 1.0}));
    for (const auto& row : r.rows) {
        EXPECT_TRUE(row.ok) << row.error;
        EXPECT_TRUE(row.summaries[0].value);
    }
}

TEST(Sweep, IndependentOfWorkerCount)
{
    SweepSpec spec;
    spec.base = quick();
    spec.axes = {{"phi0_rad", linspace(0, pi, 5)}};
    spec.observables = {"steady_state_NA", "peak_ratio", "oscillation_amplitude_second_peak",
                        "oscillation_amplitude_second_peak_rel"};
    expect_same(run_sweep(spec, 1), run_sweep(spec, 3));
    expect_same(run_sweep(spec, 1), run_sweep(spec, 1));
}

TEST(Sweep, SinglePointMatchesDirectRun)
{
    SweepSpec spec;
    spec.base = quick();
    spec.axes = {{"phi0_rad", {0.7}}};
    spec.observables = {"steady_state_NA", "oscillation_amplitude_second_peak"};
    const auto r = run_sweep(spec, 1);
    RunSettings run = spec.base;
    run.physical.initial_phase = 0.7;
    const auto sim = simulate(run);
    EXPECT_EQ(r.rows[0].summaries[0].value, extract_summary(sim.trajectory, sim.spectrum, "steady_state_NA").value);
    EXPECT_EQ(r.rows[0].summaries[1].value,
              extract_summary(sim.trajectory, sim.spectrum, "oscillation_amplitude_second_peak").value);
}

TEST(Sweep, RelativeAmplitudeUsesZeroPhaseReference)
{
    SweepSpec spec;
    spec.base = quick();
    spec.axes = {{"phi0_rad", {0.0, 1.2}}};
    spec.observables = {"oscillation_amplitude_second_peak", "oscillation_amplitude_second_peak_rel"};
    const auto with_ref = run_sweep(spec, 1);
    ASSERT_TRUE(with_ref.rows[0].summaries[1].value);
    EXPECT_EQ(*with_ref.rows[0].summaries[1].value, 1.0);
    const double expected = *with_ref.rows[1].summaries[0].value / *with_ref.rows[0].summaries[0].value;
    EXPECT_DOUBLE_EQ(*with_ref.rows[1].summaries[1].value, expected);

    spec.axes = {{"phi0_rad", {1.2}}};
    const auto without_ref = run_sweep(spec, 1);
    EXPECT_DOUBLE_EQ(*without_ref.rows[0].summaries[1].value, expected);
}

TEST(Sweep, FailuresAreFlaggedPerRow)
{
    SweepSpec spec;
    spec.base = quick();
    spec.axes = {{"N_total", {100, -5}}};
    spec.observables = {"steady_state_NA"};
    const auto r = run_sweep(spec, 2);
    EXPECT_TRUE(r.rows[0].ok);
    EXPECT_FALSE(r.rows[1].ok);
    EXPECT_FALSE(r.rows[1].error.empty());
    EXPECT_FALSE(r.rows[1].summaries[0].value);
}

TEST(Sweep, AlphaAxisKeepsFractionsNormalized)
{
    SweepSpec spec;
    spec.base = quick();
    spec.axes = {{"alpha0_frac", {0.2, 0.9}}};
    spec.observables = {"steady_state_NA"};
    for (const auto& row : run_sweep(spec, 1).rows) EXPECT_TRUE(row.ok) << row.error;
    EXPECT_NEAR(apply_point(spec, {0.9}).physical.initial_fraction_b, 0.1, 1e-15);
}

TEST(Sweep, RejectsBadSpecs)
{
    SweepSpec spec;
    spec.base = quick();
    EXPECT_THROW(run_sweep(spec), ConfigError);
    spec.axes = {{"phi0_rad", {}}};
    EXPECT_THROW(run_sweep(spec), ConfigError);
    spec.axes = {{"no_such_key", {1}}};
    EXPECT_THROW(run_sweep(spec), ConfigError);
    spec.axes = {{"phi0_rad", {1}}};
    spec.observables = {"nope"};
    EXPECT_THROW(run_sweep(spec), ConfigError);
    spec.observables = {};
    spec.axes = {{"phi0_rad", linspace(0, 1, 100)}, {"eta", linspace(1, 2, 100)}};
    spec.max_points = 1000;
    EXPECT_THROW(run_sweep(spec), ConfigError);
}

TEST(Sweep, SecondPeakAmplitudeFollowsSinePhase)
{
    SweepSpec spec;
    spec.base.physical.kappa_override = 0.0;
    spec.base.physical.duration = 2.0;
    std::vector<double> phases;
    for (int k = 0; k < 16; ++k) phases.push_back(2 * pi * k / 16);
    spec.axes = {{"phi0_rad", phases}};
    spec.observables = {"oscillation_amplitude_second_peak"};
    const auto r = run_sweep(spec, 2);
    std::vector<double> a, s;
    for (std::size_t k = 0; k < phases.size(); ++k) {
        ASSERT_TRUE(r.rows[k].summaries[0].value) << r.rows[k].summaries[0].reason;
        a.push_back(*r.rows[k].summaries[0].value);
        s.push_back(std::abs(std::sin(phases[k])));
    }
    const double n = static_cast<double>(a.size());
    double ma = 0, ms = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        ma += a[k] / n;
        ms += s[k] / n;
    }
    double sab = 0, saa = 0, sss = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sab += (a[k] - ma) * (s[k] - ms);
        saa += (a[k] - ma) * (a[k] - ma);
        sss += (s[k] - ms) * (s[k] - ms);
    }
    EXPECT_GT(sab / std::sqrt(saa * sss), 0.9);
}

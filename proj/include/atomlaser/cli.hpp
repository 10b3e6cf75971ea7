#pragma once

// Subcommands behind the atomlaser executable. Exit codes: 0 success,
// 1 I/O or unexpected failure, 2 configuration error, 3 numerical failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "atomlaser/config.hpp"
#include "atomlaser/errors.hpp"
#include "atomlaser/io.hpp"
#include "atomlaser/simulation.hpp"
#include "atomlaser/sweep.hpp"

namespace atomlaser::cli {

enum ExitCode : int { ok = 0, failure = 1, config_error = 2, numerical_error = 3 };

struct Options {
    std::string config;
    std::optional<std::string> out;
    std::size_t workers = 0; // 0: hardware concurrency
    std::vector<std::string> overrides;
};

namespace detail {

inline RunConfig load(const Options& o)
{
    RunConfig cfg = load_config(o.config, o.overrides);
    if (o.out) cfg.output.directory = *o.out;
    return cfg;
}

inline void write_file(const std::filesystem::path& path, const auto& writer)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    writer(f);
    if (!f) throw std::runtime_error("error while writing " + path.string());
}

inline void write_run(const std::filesystem::path& dir, const RunConfig& cfg, const SimulationResult& sim)
{
    std::filesystem::create_directories(dir);
    if (cfg.output.csv) {
        write_file(dir / "trajectory.csv", [&](std::ostream& f) { write_trajectory_csv(f, sim.trajectory); });
        write_file(dir / "spectrum.csv", [&](std::ostream& f) { write_spectrum_csv(f, sim.spectrum); });
    }
    if (cfg.output.json)
        write_file(dir / "meta.json", [&](std::ostream& f) { f << meta_json(cfg, sim).dump(2) << '\n'; });
}

inline void print_warnings(const ValidationReport& r, std::ostream& err)
{
    for (const auto& c : r.checks)
        if (!c.passed) err << "warning: " << c.name << ": " << c.message << '\n';
}

template <class F>
int guarded(std::ostream& err, F&& body)
{
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const ParameterError& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return numerical_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return failure;
    }
}

} // namespace detail

inline int cmd_simulate(const Options& o, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    return detail::guarded(err, [&] {
        const RunConfig cfg = detail::load(o);
        cfg.run.physical.check();
        const SimulationResult sim = simulate(cfg.run);
        detail::print_warnings(sim.validation, err);
        detail::write_run(cfg.output.directory, cfg, sim);
        out << "wrote " << cfg.output.directory << " (" << sim.trajectory.samples.size() << " samples, "
            << sim.spectrum.peaks.size() << " peaks, max norm drift " << sim.trajectory.max_norm_drift
            << " atoms)\n";
        return int(ok);
    });
}

inline int cmd_sweep(const Options& o, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    return detail::guarded(err, [&] {
        const RunConfig cfg = detail::load(o);
        const SweepSpec spec = cfg.sweep_spec();
        check_sweep(spec);
        const std::filesystem::path dir = cfg.output.directory;
        std::filesystem::create_directories(dir);

        PointCallback on_point;
        if (cfg.sweep->per_point_output) {
            on_point = [&](std::size_t i, const RunSettings& run, const SimulationResult& sim) {
                RunConfig point = cfg;
                point.run = run;
                point.sweep.reset();
                char name[32];
                std::snprintf(name, sizeof name, "point_%05zu", i);
                detail::write_run(dir / name, point, sim);
            };
        }
        const std::size_t workers = o.workers ? o.workers : std::max(1u, std::thread::hardware_concurrency());
        const SweepResult result = run_sweep(spec, workers, on_point);

        detail::write_file(dir / "sweep.csv", [&](std::ostream& f) { write_sweep_csv(f, result); });
        nlohmann::ordered_json meta;
        meta["artifact"] = "atomlaser";
        meta["version"] = std::string(version);
        meta["resolved_config"] = to_json(cfg);
        meta["points"] = nlohmann::ordered_json::array();
        std::size_t failed = 0;
        for (const auto& row : result.rows) {
            nlohmann::ordered_json p;
            p["status"] = row.ok ? "ok" : "failed";
            if (!row.ok) p["error"] = row.error;
            p["wall_time_s"] = row.wall_time;
            nlohmann::ordered_json missing = nlohmann::ordered_json::object();
            for (std::size_t k = 0; k < row.summaries.size(); ++k)
                if (!row.summaries[k].value) missing[result.observables[k]] = row.summaries[k].reason;
            if (!missing.empty()) p["missing"] = missing;
            meta["points"].push_back(p);
            failed += !row.ok;
        }
        detail::write_file(dir / "sweep_meta.json", [&](std::ostream& f) { f << meta.dump(2) << '\n'; });
        out << "wrote " << (dir / "sweep.csv").string() << " (" << result.rows.size() << " points, " << failed
            << " failed)\n";
        return int(ok);
    });
}

inline int cmd_validate(const Options& o, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    return detail::guarded(err, [&] {
        const RunConfig cfg = detail::load(o);
        const PhysicalParams& p = cfg.run.physical;
        const DerivedParams d = derive(p);
        const DiscretizedContinuum cont = discretize(p.outcoupling, p.omega_z, cfg.run.discretization.mode_count,
                                                     cfg.run.discretization.omega_up);
        const ValidationReport report = validate(p, d);
        char buf[256];
        auto line = [&](const char* label, double v, const char* unit) {
            std::snprintf(buf, sizeof buf, "  %-22s %.6g %s\n", label, v, unit);
            out << buf;
        };
        out << "derived parameters\n";
        line("l_z", d.oscillator_length, "m");
        line("J", d.josephson, "1/s");
        line("kappa", d.kappa, "1/s");
        line("N_max", d.max_atom_number, "");
        line("t_collapse", d.collapse_time, "s");
        line("S (shift)", cont.shift, "1/s");
        line("epsilon", cont.spacing, "1/s");
        line("Markovian rate", markovian_reference(p, d), "1/s");
        if (d.kappa == 0.0) out << "interaction-free mode (kappa = 0)\n";
        out << "checks\n";
        for (const auto& c : report.checks)
            out << "  [" << (c.passed ? "ok" : "warning") << "] " << c.name << ": " << c.message << '\n';
        return int(ok);
    });
}

/// Parses argv and dispatches. Used by the executable and by tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Double-well atom laser simulator"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "configuration file (key = value sections or JSON)")->required();
        sub->add_option("--out", o.out, "output directory (overrides output.directory)");
        sub->add_option("--override", o.overrides, "key=value applied after the file, repeatable")
            ->allow_extra_args(false)
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    };
    CLI::App* simulate_cmd = app.add_subcommand("simulate", "integrate one configuration");
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a parameter grid");
    CLI::App* validate_cmd = app.add_subcommand("validate", "print derived parameters and validity checks");
    add_common(simulate_cmd);
    add_common(sweep_cmd);
    add_common(validate_cmd);
    sweep_cmd->add_option("--workers", o.workers, "worker threads (default: hardware concurrency)")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    }
    if (*simulate_cmd) return cmd_simulate(o, out, err);
    if (*sweep_cmd) return cmd_sweep(o, out, err);
    return cmd_validate(o, out, err);
}

} // namespace atomlaser::cli

#pragma once

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "savint/harness.hpp"

namespace savint {

namespace detail {

inline std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline double default_long_horizon(const std::string& problem) {
    return problem == "sine-gordon" ? 2000.0 : 10000.0;
}

inline void add_shared_flags(CLI::App* cmd, ExperimentSpec& spec, double& c0,
                             std::string& methods_csv) {
    cmd->add_option("--problem", spec.problem, "problem tag (see `list`)")
        ->required();
    cmd->add_option("--eps", spec.params.eps, "oscillation parameter eps");
    cmd->add_option("--omega", spec.params.omega, "Duffing frequency");
    cmd->add_option("--k", spec.params.k, "Duffing nonlinearity strength");
    cmd->add_option("--N", spec.params.n, "sine-Gordon grid size");
    cmd->add_option("--C0", c0, "override the auxiliary-variable shift");
    cmd->add_option("--predictor", spec.predictor,
                    "midpoint predictor: auto, linear or corrected");
    cmd->add_option("--out", spec.out, "output CSV path");
    cmd->add_option("--svg", spec.svg_path, "also write an SVG chart");
    cmd->add_flag("--fuse", spec.fuse, "fuse Strang halves across steps (S2 only)");
    cmd->add_flag("--long", spec.long_horizon, "use the full long-run horizons");
    cmd->add_option("--seed", spec.seed, "seed for randomized selftest entry points");
    cmd->add_option("--error-mode", spec.error_mode,
                    "global error at final time (final) or max over time (max)")
        ->check(CLI::IsMember({"final", "max"}));
    cmd->add_option("--methods", methods_csv, "comma-separated method tags");
    cmd->add_option("--method", methods_csv, "single method tag");
}

inline void emit_rows(const ExperimentSpec& spec, const std::vector<ResultRow>& rows,
                      bool loglog_error_chart) {
    const std::string text = serialize_rows(rows);
    if (spec.out.empty()) {
        std::cout << text;
    } else {
        write_text_file(spec.out, text);
    }
    if (spec.svg_path.empty()) return;

    SvgChart chart;
    chart.logx = true;
    chart.logy = true;
    if (loglog_error_chart) {
        chart.title = spec.problem + ": global error vs step size";
        chart.xlabel = "h";
        chart.ylabel = "global error";
        for (const std::string& m : spec.methods) {
            SvgSeries s;
            s.label = m;
            for (const ResultRow& r : rows)
                if (r.method == m && std::isfinite(r.global_error))
                    s.points.push_back({r.h, r.global_error});
            std::sort(s.points.begin(), s.points.end());
            chart.series.push_back(std::move(s));
        }
    } else {
        chart.title = spec.problem + ": wall time vs eps";
        chart.xlabel = "eps";
        chart.ylabel = "seconds";
        for (const std::string& m : spec.methods) {
            SvgSeries s;
            s.label = m;
            for (const ResultRow& r : rows)
                if (r.method == m) s.points.push_back({r.param_value, r.cpu_seconds});
            std::sort(s.points.begin(), s.points.end());
            chart.series.push_back(std::move(s));
        }
    }
    write_svg(chart, spec.svg_path);
}

}  // namespace detail

/// Command-line front end.  Exit codes: 0 success, 2 bad arguments, 3
/// numerical failure.
inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"structure-preserving SAV integrators benchmark harness"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print help");  // frees -h/--h for the step size

    ExperimentSpec spec;
    double c0_override = std::numeric_limits<double>::quiet_NaN();
    std::string methods_csv;
    bool t_given = false;
    double t_value = 1.0;

    CLI::App* cmd_run = app.add_subcommand("run", "one method at one step size");
    CLI::App* cmd_conv =
        app.add_subcommand("converge", "global-error study over h = 1/2^k");
    CLI::App* cmd_energy = app.add_subcommand("energy", "energy-drift time series");
    CLI::App* cmd_bench = app.add_subcommand("bench", "wall-clock timing study");
    CLI::App* cmd_list = app.add_subcommand("list", "print problem and method tags");

    for (CLI::App* cmd : {cmd_run, cmd_conv, cmd_energy, cmd_bench, cmd_list})
        cmd->set_help_flag("--help", "print help");
    for (CLI::App* cmd : {cmd_run, cmd_conv, cmd_energy, cmd_bench}) {
        detail::add_shared_flags(cmd, spec, c0_override, methods_csv);
        cmd->add_option_function<double>(
               "--T", [&](double v) { t_value = v; t_given = true; },
               "final time");
    }
    cmd_run->add_option("--h", spec.h, "step size")->required();
    cmd_energy->add_option("--h", spec.h, "step size");
    cmd_bench->add_option("--h", spec.h, "step size");
    cmd_conv->add_option("--kmin", spec.kmin, "smallest k in h = 1/2^k")->required();
    cmd_conv->add_option("--kmax", spec.kmax, "largest k in h = 1/2^k")->required();
    cmd_bench->add_option("--kmin", spec.kmin, "smallest k in eps = 1/2^k");
    cmd_bench->add_option("--kmax", spec.kmax, "largest k in eps = 1/2^k");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (!std::isnan(c0_override)) spec.params.c0_override = c0_override;
    spec.methods = detail::split_csv_list(methods_csv);

    try {
        if (cmd_list->parsed()) {
            std::cout << "problems:";
            for (const std::string& t : problem_tags()) std::cout << " " << t;
            std::cout << "\nmethods:";
            for (const std::string& t : method_tags()) std::cout << " " << t;
            std::cout << "\n";
            return 0;
        }

        if (spec.methods.empty())
            throw DomainError("no method given; pass --method or --methods");
        for (const std::string& m : spec.methods) require_method(m);
        if ((cmd_run->parsed() || cmd_energy->parsed()) && spec.methods.size() > 1)
            throw DomainError("this subcommand takes a single --method");
        make_problem(spec.problem, spec.params);  // validates the tag early

        if (cmd_run->parsed()) {
            spec.mode = Mode::run;
            spec.T = t_given ? t_value : 1.0;
            const ResultRow row = run_single(spec);
            detail::emit_rows(spec, {row}, true);
            return 0;
        }

        if (cmd_conv->parsed()) {
            spec.mode = Mode::converge;
            spec.T = t_given ? t_value : 1.0;
            const ConvergenceResult result = convergence_study(spec);
            detail::emit_rows(spec, result.rows, true);
            for (const auto& [method, fit] : result.slopes) {
                if (fit.valid)
                    std::fprintf(stdout,
                                 "slope %s: %.3f (%d points, %d at floor or "
                                 "failed, %d pre-asymptotic)\n",
                                 method.c_str(), fit.slope, fit.points_used,
                                 fit.floor_excluded, fit.head_excluded);
                else
                    std::fprintf(stdout, "slope %s: saturated, fit skipped\n",
                                 method.c_str());
            }
            return 0;
        }

        if (cmd_energy->parsed()) {
            spec.mode = Mode::energy;
            spec.T = t_given ? t_value
                             : (spec.long_horizon
                                    ? detail::default_long_horizon(spec.problem)
                                    : 1000.0);
            const EnergyErrorSeries series = energy_study(spec);
            std::string text = "t,energy_error\n";
            for (const auto& p : series.points)
                text += format_double(p[0]) + "," + format_double(p[1]) + "\n";
            if (spec.out.empty())
                std::cout << text;
            else
                write_text_file(spec.out, text);
            if (series.absolute)
                std::fprintf(stderr,
                             "note: |H0| < 1e-14; series reports absolute errors\n");
            if (!spec.svg_path.empty()) {
                SvgChart chart;
                chart.title = spec.problem + " " + spec.methods[0] + ": energy error";
                chart.xlabel = "t";
                chart.ylabel = series.absolute ? "|H - H0|" : "e_H";
                chart.logy = true;
                SvgSeries s;
                s.label = spec.methods[0];
                s.points = series.points;
                chart.series.push_back(std::move(s));
                write_svg(chart, spec.svg_path);
            }
            return 0;
        }

        // bench
        spec.mode = Mode::bench;
        spec.T = t_given ? t_value : 10.0;
        const std::vector<ResultRow> rows = bench_study(spec);
        detail::emit_rows(spec, rows, false);
        return 0;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
}

}  // namespace savint

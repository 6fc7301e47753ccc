#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "savint/baselines.hpp"
#include "savint/csv.hpp"
#include "savint/problems.hpp"
#include "savint/reference.hpp"
#include "savint/svg.hpp"

namespace savint {

// ---------------------------------------------------------------------------
// Experiment description
// ---------------------------------------------------------------------------

enum class Mode { run, converge, energy, bench };

struct ExperimentSpec {
    Mode mode = Mode::run;
    std::string problem;
    std::vector<std::string> methods;
    ProblemParams params;
    double h = 0.01;
    int kmin = 0;
    int kmax = -1;  // kmax >= kmin activates the h = 1/2^k sweep
    double T = 1.0;
    std::string out;
    std::string svg_path;
    std::string predictor = "auto";  // auto | linear | corrected
    bool fuse = false;
    bool long_horizon = false;
    std::string error_mode = "final";  // final | max
    unsigned seed = 0;                 // reserved for randomized entry points
};

inline const std::vector<std::string>& method_tags() {
    static const std::vector<std::string> tags{"e2sav", "s1sav", "s2sav", "s4sav",
                                               "s6sav", "avf",   "ito2",  "boris"};
    return tags;
}

inline bool method_applies(const std::string& method, const ProblemInstance& inst) {
    const bool is_cpd = std::holds_alternative<CpdSetup>(inst.setup);
    if (method == "e2sav") return !is_cpd;
    if (method == "s1sav" || method == "s2sav" || method == "s4sav" ||
        method == "s6sav" || method == "boris")
        return is_cpd;
    if (method == "avf" || method == "ito2") return true;
    return false;
}

inline void require_method(const std::string& method) {
    for (const std::string& t : method_tags())
        if (t == method) return;
    std::string valid;
    for (const std::string& t : method_tags()) valid += " " + t;
    throw DomainError("unknown method tag '" + method + "'; valid tags:" + valid);
}

// ---------------------------------------------------------------------------
// Error metrics
// ---------------------------------------------------------------------------

/// Relative two-part global error |xi - xi*|/|xi*| + |eta - eta*|/|eta*|.
inline double global_error(const Vec& xi, const Vec& eta, const Vec& xi_ref,
                           const Vec& eta_ref) {
    const double nx = norm(xi_ref), nv = norm(eta_ref);
    if (nx == 0.0 || nv == 0.0)
        throw DegenerateReferenceError("global_error: reference state has zero norm");
    return norm(xi - xi_ref) / nx + norm(eta - eta_ref) / nv;
}

struct EnergySample {
    double t = 0.0;
    double value = 0.0;  // raw H at time t
};

struct EnergyErrorSeries {
    std::vector<std::array<double, 2>> points;  // (t, e_H)
    bool absolute = false;  // |H0| below 1e-14: absolute errors reported
};

/// Relative energy drift series e_H = |H(t) - H0| / |H0|, falling back to
/// absolute errors (with a flag) for a vanishing initial energy.
inline EnergyErrorSeries energy_error_series(const std::vector<EnergySample>& samples,
                                             double h0) {
    EnergyErrorSeries out;
    const double denom = std::abs(h0);
    out.absolute = denom < 1e-14;
    out.points.reserve(samples.size());
    for (const EnergySample& s : samples) {
        const double err = std::abs(s.value - h0);
        out.points.push_back({s.t, out.absolute ? err : err / denom});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Trajectory driver
// ---------------------------------------------------------------------------

struct RunOptions {
    std::string predictor = "auto";  // auto | linear | corrected
    bool fuse = false;
    bool measure_energy = true;
    /// receives (t, H) once per sampled step
    std::function<void(double, double)> energy_sink;
    /// receives (t, xi, eta) once per sampled step
    std::function<void(double, const Vec&, const Vec&)> state_sink;
};

struct RunResult {
    Vec xi;
    Vec eta;
    double energy0 = 0.0;
    double max_energy_error = 0.0;
    bool energy_error_absolute = false;
    bool converged = true;
};

namespace detail {

inline long sample_stride(long steps) {
    return steps <= 100000 ? 1 : (steps + 99999) / 100000;
}

inline Predictor resolve_predictor(const std::string& name, Predictor fallback) {
    if (name == "linear") return Predictor::linear;
    if (name == "corrected") return Predictor::corrected;
    if (name == "auto") return fallback;
    throw DomainError("unknown predictor '" + name + "' (linear|corrected|auto)");
}

struct EnergyTracker {
    double h0 = 0.0;
    double denom = 1.0;
    bool absolute = false;
    double worst = 0.0;

    explicit EnergyTracker(double initial) : h0(initial) {
        denom = std::abs(initial);
        absolute = denom < 1e-14;
        if (absolute) denom = 1.0;
    }
    void observe(double value) {
        worst = std::max(worst, std::abs(value - h0) / denom);
    }
};

inline std::pair<Vec, Vec> split_xi_eta(const ProblemInstance& inst, const Vec& y) {
    std::size_t d = 0;
    if (const auto* o = std::get_if<OsdeSetup>(&inst.setup))
        d = o->q0.size();
    else if (const auto* g = std::get_if<GeneralSetup>(&inst.setup))
        d = g->u0.size() / 2;
    else
        d = 3;
    Vec xi(d), eta(d);
    for (std::size_t i = 0; i < d; ++i) {
        xi[i] = y[i];
        eta[i] = y[d + i];
    }
    return {std::move(xi), std::move(eta)};
}

}  // namespace detail

/// Integrates `method` on the problem with n = round(T/h) constant steps and
/// reports the final split state plus the worst relative energy drift.  SAV
/// methods are measured against their own modified energy, the baselines
/// against the original energy.
inline RunResult run_trajectory(const ProblemInstance& inst, const std::string& method,
                                double h, double T, const RunOptions& opts = {}) {
    require_method(method);
    if (!method_applies(method, inst))
        throw DomainError("method '" + method + "' does not apply to problem '" +
                          inst.tag + "'");
    const long steps = std::lround(T / h);
    if (steps <= 0) throw DomainError("run_trajectory: T/h must be at least 1");
    const long stride = detail::sample_stride(steps);

    RunResult result;
    auto finish = [&](const Vec& xi, const Vec& eta, const detail::EnergyTracker& et) {
        result.xi = xi;
        result.eta = eta;
        result.energy0 = et.h0;
        result.max_energy_error = et.worst;
        result.energy_error_absolute = et.absolute;
    };
    // energy is evaluated on every sampled step; physical states only when a
    // state sink is attached (for the modal stepper that costs a transform)
    auto sample = [&](long i, double t, auto energy_of, auto state_of,
                      detail::EnergyTracker& et) {
        if (i % stride != 0 && i != steps) return;
        const double energy = energy_of();
        et.observe(energy);
        if (opts.energy_sink) opts.energy_sink(t, energy);
        if (opts.state_sink) {
            const auto [xi, eta] = state_of();
            opts.state_sink(t, xi, eta);
        }
    };

    if (method == "e2sav") {
        if (const auto* o = std::get_if<OsdeSetup>(&inst.setup)) {
            const Predictor mode =
                detail::resolve_predictor(opts.predictor, Predictor::linear);
            const OscillatorKernel kernel = build_kernel(o->problem, h);
            OsdeModalState st =
                to_modal_state(lift_state(o->q0, o->p0, o->problem), kernel);
            detail::EnergyTracker et(opts.measure_energy
                                         ? modified_energy(st, o->problem, kernel)
                                         : 0.0);
            for (long i = 1; i <= steps; ++i) {
                st = e2sav_step_modal(st, o->problem, kernel, mode);
                if (opts.measure_energy)
                    sample(
                        i, st.t,
                        [&] { return modified_energy(st, o->problem, kernel); },
                        [&] {
                            return std::pair<Vec, Vec>{kernel.from_modal(st.qh),
                                                       kernel.from_modal(st.ph)};
                        },
                        et);
            }
            const OsdeState phys = to_physical_state(st, kernel);
            finish(phys.q, phys.p, et);
        } else {
            const auto& g = std::get<GeneralSetup>(inst.setup);
            const Predictor mode =
                detail::resolve_predictor(opts.predictor, Predictor::corrected);
            const GeneralSavKernel kernel = build_general_kernel(g.system, h);
            GeneralSavState st = lift_general(g.u0, g.system);
            detail::EnergyTracker et(
                opts.measure_energy ? modified_energy_general(st, g.system) : 0.0);
            const Mat quad = kernel.quad_form;
            for (long i = 1; i <= steps; ++i) {
                st = e2sav_step_general(st, g.system, kernel, mode);
                if (opts.measure_energy)
                    sample(
                        i, st.t,
                        [&] {
                            return 0.5 * dot(st.u, quad * st.u) + st.s * st.s -
                                   g.system.C0;
                        },
                        [&] { return detail::split_xi_eta(inst, st.u); }, et);
            }
            auto [xi, eta] = detail::split_xi_eta(inst, st.u);
            finish(xi, eta, et);
        }
        return result;
    }

    if (method == "s1sav" || method == "s2sav" || method == "s4sav" ||
        method == "s6sav") {
        const auto& c = std::get<CpdSetup>(inst.setup);
        const int order = method[1] - '0';
        const SplitScheme scheme = make_split_scheme(order);
        CpdState st = lift_cpd(c.x0, c.v0, c.problem);
        detail::EnergyTracker et(
            opts.measure_energy ? modified_energy_cpd(st, c.problem) : 0.0);
        auto observe = [&](long i) {
            if (!opts.measure_energy) return;
            sample(
                i, st.t, [&] { return modified_energy_cpd(st, c.problem); },
                [&] {
                    return std::pair<Vec, Vec>{Vec{st.x[0], st.x[1], st.x[2]},
                                               Vec{st.v[0], st.v[1], st.v[2]}};
                },
                et);
        };
        if (opts.fuse && order == 2) {
            // Strang halves merged across interior step boundaries
            st = phi_L(st, c.problem, 0.5 * h);
            for (long i = 1; i <= steps; ++i) {
                st = phi_NL(st, c.problem, h);
                st = phi_L(st, c.problem, i == steps ? 0.5 * h : h);
                st.t = double(i) * h;
                observe(i);
            }
        } else {
            for (long i = 1; i <= steps; ++i) {
                st = compose_step(st, c.problem, scheme, h);
                observe(i);
            }
        }
        finish(Vec{st.x[0], st.x[1], st.x[2]}, Vec{st.v[0], st.v[1], st.v[2]}, et);
        return result;
    }

    if (method == "boris") {
        const auto& c = std::get<CpdSetup>(inst.setup);
        BorisState st{c.x0, c.v0, 0.0};
        detail::EnergyTracker et(
            opts.measure_energy ? original_energy_cpd(st.x, st.v, c.problem) : 0.0);
        for (long i = 1; i <= steps; ++i) {
            st = boris_step(st, c.problem, h);
            if (opts.measure_energy)
                sample(
                    i, st.t,
                    [&] { return original_energy_cpd(st.x, st.v, c.problem); },
                    [&] {
                        return std::pair<Vec, Vec>{Vec{st.x[0], st.x[1], st.x[2]},
                                                   Vec{st.v[0], st.v[1], st.v[2]}};
                    },
                    et);
        }
        finish(Vec{st.x[0], st.x[1], st.x[2]}, Vec{st.v[0], st.v[1], st.v[2]}, et);
        return result;
    }

    // avf / ito2 run on the flattened first-order form
    const GeneralFirstOrderSystem sys = as_first_order(inst);
    const RhsFn rhs = [&sys](const Vec& y) { return sys.rhs(0.0, y); };
    auto energy_of = [&](const Vec& y) {
        if (const auto* o = std::get_if<OsdeSetup>(&inst.setup)) {
            auto [q, p] = detail::split_xi_eta(inst, y);
            return original_energy(q, p, o->problem);
        }
        if (const auto* g = std::get_if<GeneralSetup>(&inst.setup))
            return original_energy_general(y, g->system);
        const auto& c = std::get<CpdSetup>(inst.setup);
        return original_energy_cpd(Vec3{y[0], y[1], y[2]}, Vec3{y[3], y[4], y[5]},
                                   c.problem);
    };

    const FixedPointConfig cfg;
    const QuadratureRule quad = gauss_legendre(3);
    Vec y = first_order_initial(inst);
    detail::EnergyTracker et(opts.measure_energy ? energy_of(y) : 0.0);
    bool converged = true;
    for (long i = 1; i <= steps; ++i) {
        ImplicitStepResult r = method == "avf" ? avf_step(rhs, y, h, quad, cfg)
                                               : ito2_step(rhs, y, h, cfg);
        converged = converged && r.converged;
        y = std::move(r.y);
        if (opts.measure_energy)
            sample(
                i, double(i) * h, [&] { return energy_of(y); },
                [&] { return detail::split_xi_eta(inst, y); }, et);
    }
    auto [xi, eta] = detail::split_xi_eta(inst, y);
    finish(xi, eta, et);
    result.converged = converged;
    return result;
}

// ---------------------------------------------------------------------------
// Reference finals
// ---------------------------------------------------------------------------

struct ReferenceFinal {
    Vec xi;
    Vec eta;
};

/// Adaptive reference state at the given times.  Tolerances default to 1e-12
/// and tighten to 1e-13 (with a small explicit initial step) for highly
/// oscillatory configurations.
inline std::vector<ReferenceFinal> reference_states(const ProblemInstance& inst,
                                                    const std::vector<double>& times,
                                                    double eps_hint) {
    double tol = 1e-12;
    double h0 = 0.0;
    if (eps_hint <= 0.01 || inst.tag == "duffing") tol = 1e-13;
    if (eps_hint <= 0.01) h0 = 0.01 * eps_hint;
    const GeneralFirstOrderSystem sys = as_first_order(inst);
    const ReferenceTrajectory traj =
        adapt_integrate(sys, first_order_initial(inst), times, tol, tol, h0);
    std::vector<ReferenceFinal> out;
    out.reserve(times.size());
    // the trajectory starts at t = 0 whether or not it was requested
    const std::size_t skip = times.front() == 0.0 ? 0 : 1;
    for (std::size_t i = skip; i < traj.states.size(); ++i) {
        auto [xi, eta] = detail::split_xi_eta(inst, traj.states[i]);
        out.push_back({std::move(xi), std::move(eta)});
    }
    return out;
}

inline ReferenceFinal reference_final(const ProblemInstance& inst, double T,
                                      double eps_hint) {
    return reference_states(inst, {T}, eps_hint)[0];
}

// ---------------------------------------------------------------------------
// Slope fitting
// ---------------------------------------------------------------------------

struct OrderFit {
    double slope = 0.0;
    int points_used = 0;
    int floor_excluded = 0;  // errors below 1e-12
    int head_excluded = 0;   // pre-asymptotic large-h points
    bool valid = false;
};

/// Least-squares slope of log2(error) against log2(h).  Points at the
/// rounding floor (error < 1e-12) or non-finite are excluded; so are leading
/// large-h points whose pairwise slope disagrees with the asymptotic tail by
/// more than 1, which happens when the步 step exceeds the oscillation period.
inline OrderFit fit_order(std::vector<std::array<double, 2>> h_err) {
    std::sort(h_err.begin(), h_err.end(),
              [](const auto& a, const auto& b) { return a[0] > b[0]; });
    OrderFit fit;
    std::vector<std::array<double, 2>> pts;
    for (const auto& p : h_err) {
        if (!std::isfinite(p[1]) || p[1] < 1e-12) {
            ++fit.floor_excluded;
            continue;
        }
        pts.push_back(p);
    }
    if (pts.size() < 2) return fit;

    std::vector<double> pair_slope(pts.size() - 1);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        pair_slope[i] = std::log2(pts[i][1] / pts[i + 1][1]) /
                        std::log2(pts[i][0] / pts[i + 1][0]);
    std::size_t first = pair_slope.size() - 1;
    while (first > 0 && std::abs(pair_slope[first - 1] - pair_slope.back()) <= 1.0)
        --first;
    fit.head_excluded = int(first);
    pts.erase(pts.begin(), pts.begin() + first);

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : pts) {
        const double x = std::log2(p[0]), y = std::log2(p[1]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = double(pts.size());
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.points_used = int(pts.size());
    fit.valid = true;
    return fit;
}

// ---------------------------------------------------------------------------
// Study drivers
// ---------------------------------------------------------------------------

namespace detail {

inline std::string param_name_of(const std::string& tag) {
    if (tag == "duffing") return "omega";
    if (tag == "sine-gordon") return "N";
    return "eps";
}

inline double param_value_of(const std::string& tag, const ProblemParams& p) {
    if (tag == "duffing") return p.omega;
    if (tag == "sine-gordon") return double(p.n);
    return p.eps;
}

inline void sort_rows(std::vector<ResultRow>& rows) {
    std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tie(a.problem, a.method, a.param_name, a.param_value, a.h, a.T) <
               std::tie(b.problem, b.method, b.param_name, b.param_value, b.h, b.T);
    });
}

}  // namespace detail

/// Largest global error over up to 256 evenly spaced sample times.
inline double max_error_over_time(const ProblemInstance& inst,
                                  const std::string& method, double h,
                                  const ExperimentSpec& spec) {
    const long steps = std::lround(spec.T / h);
    const long stride = std::max(1L, steps / 256);
    std::vector<double> times;
    std::vector<std::pair<Vec, Vec>> numeric;

    RunOptions opts;
    opts.predictor = spec.predictor;
    opts.fuse = spec.fuse;
    long count = 0;
    opts.state_sink = [&](double t, const Vec& xi, const Vec& eta) {
        ++count;
        if (count % stride != 0) return;
        times.push_back(t);
        numeric.emplace_back(xi, eta);
    };
    run_trajectory(inst, method, h, spec.T, opts);
    if (times.empty()) throw DomainError("max_error_over_time: no samples");

    const std::vector<ReferenceFinal> refs =
        reference_states(inst, times, spec.params.eps);
    double worst = 0.0;
    for (std::size_t i = 0; i < refs.size(); ++i)
        worst = std::max(worst, global_error(numeric[i].first, numeric[i].second,
                                             refs[i].xi, refs[i].eta));
    return worst;
}

struct ConvergenceResult {
    std::vector<ResultRow> rows;
    std::vector<std::pair<std::string, OrderFit>> slopes;  // per method
};

/// Global-error study over h = 1/2^k for k in [kmin, kmax], one reference
/// solution shared by every method.  A method failure flags the row and is
/// excluded from the fit; the study continues.
inline ConvergenceResult convergence_study(const ExperimentSpec& spec) {
    if (spec.kmax < spec.kmin + 2)
        throw DomainError("convergence_study: need at least 3 step sizes");
    const ProblemInstance inst = make_problem(spec.problem, spec.params);
    const ReferenceFinal ref = reference_final(inst, spec.T, spec.params.eps);

    ConvergenceResult result;
    for (const std::string& method : spec.methods) {
        require_method(method);
        std::vector<std::array<double, 2>> h_err;
        for (int k = spec.kmin; k <= spec.kmax; ++k) {
            const double h = std::ldexp(1.0, -k);
            ResultRow row;
            row.problem = inst.tag;
            row.method = method;
            row.param_name = detail::param_name_of(inst.tag);
            row.param_value = detail::param_value_of(inst.tag, spec.params);
            row.h = h;
            row.T = spec.T;
            try {
                RunOptions opts;
                opts.predictor = spec.predictor;
                opts.fuse = spec.fuse;
                RunResult run = run_trajectory(inst, method, h, spec.T, opts);
                row.global_error = spec.error_mode == "max"
                                       ? max_error_over_time(inst, method, h, spec)
                                       : global_error(run.xi, run.eta, ref.xi, ref.eta);
                row.max_energy_error = run.max_energy_error;
                row.converged = run.converged;
            } catch (const Error&) {
                row.global_error = std::numeric_limits<double>::infinity();
                row.converged = false;
            }
            h_err.push_back({row.h, row.global_error});
            result.rows.push_back(std::move(row));
        }
        result.slopes.emplace_back(method, fit_order(h_err));
    }
    detail::sort_rows(result.rows);
    return result;
}

/// One (problem, method, h, T) cell.
inline ResultRow run_single(const ExperimentSpec& spec) {
    const ProblemInstance inst = make_problem(spec.problem, spec.params);
    const std::string& method = spec.methods.at(0);
    RunOptions opts;
    opts.predictor = spec.predictor;
    opts.fuse = spec.fuse;
    const RunResult run = run_trajectory(inst, method, spec.h, spec.T, opts);
    const ReferenceFinal ref = reference_final(inst, spec.T, spec.params.eps);

    ResultRow row;
    row.problem = inst.tag;
    row.method = method;
    row.param_name = detail::param_name_of(inst.tag);
    row.param_value = detail::param_value_of(inst.tag, spec.params);
    row.h = spec.h;
    row.T = spec.T;
    row.global_error = spec.error_mode == "max"
                           ? max_error_over_time(inst, method, spec.h, spec)
                           : global_error(run.xi, run.eta, ref.xi, ref.eta);
    row.max_energy_error = run.max_energy_error;
    row.converged = run.converged;
    return row;
}

/// Energy-drift series for one method.
inline EnergyErrorSeries energy_study(const ExperimentSpec& spec) {
    const ProblemInstance inst = make_problem(spec.problem, spec.params);
    const std::string& method = spec.methods.at(0);
    std::vector<EnergySample> samples;
    RunOptions opts;
    opts.predictor = spec.predictor;
    opts.fuse = spec.fuse;
    opts.energy_sink = [&samples](double t, double value) {
        samples.push_back({t, value});
    };
    const RunResult run = run_trajectory(inst, method, spec.h, spec.T, opts);
    return energy_error_series(samples, run.energy0);
}

/// Wall-clock timing rows, median of three repeats, strictly serial.  When a
/// k-range is given it sweeps eps = 1/2^k; timing rows carry no error metrics.
inline std::vector<ResultRow> bench_study(const ExperimentSpec& spec) {
    std::vector<double> eps_values;
    if (spec.kmax >= spec.kmin && spec.kmax > 0)
        for (int k = spec.kmin; k <= spec.kmax; ++k)
            eps_values.push_back(std::ldexp(1.0, -k));
    else
        eps_values.push_back(spec.params.eps);

    std::vector<ResultRow> rows;
    for (double eps : eps_values) {
        ProblemParams params = spec.params;
        params.eps = eps;
        const ProblemInstance inst = make_problem(spec.problem, params);
        for (const std::string& method : spec.methods) {
            require_method(method);
            RunOptions opts;
            opts.predictor = spec.predictor;
            opts.fuse = spec.fuse;
            opts.measure_energy = false;
            std::array<double, 3> times{};
            bool converged = true;
            bool failed = false;
            for (int rep = 0; rep < 3 && !failed; ++rep) {
                const auto start = std::chrono::steady_clock::now();
                try {
                    const RunResult run =
                        run_trajectory(inst, method, spec.h, spec.T, opts);
                    converged = converged && run.converged;
                } catch (const Error&) {
                    failed = true;  // cell flagged, sweep continues
                }
                const auto stop = std::chrono::steady_clock::now();
                times[rep] = std::chrono::duration<double>(stop - start).count();
            }
            std::sort(times.begin(), times.end());
            ResultRow row;
            row.problem = inst.tag;
            row.method = method;
            row.param_name = detail::param_name_of(inst.tag);
            row.param_value = detail::param_value_of(inst.tag, params);
            row.h = spec.h;
            row.T = spec.T;
            row.cpu_seconds = failed ? 0.0 : times[1];
            row.converged = converged && !failed;
            rows.push_back(std::move(row));
        }
    }
    detail::sort_rows(rows);
    return rows;
}

}  // namespace savint

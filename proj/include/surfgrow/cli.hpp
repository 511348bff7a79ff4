#pragma once

// Command-line driver: verification runs, method comparison, eigenvalue
// convergence tables and parameter sweeps.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "surfgrow/initial_condition.hpp"
#include "surfgrow/io.hpp"
#include "surfgrow/verifier.hpp"

namespace surfgrow::cli {

enum ExitCode : int { kCertified = 0, kError = 1, kNotCertified = 2 };

struct Options {
    std::string ic;
    std::size_t modes = 128;
    double dt = 1e-6;
    double t_end = 1e-3;
    std::string method = "eig";
    std::size_t eig_n = 64;
    double threshold = 0.5;
    double horizon = 0.0;  // 0 = none
    std::size_t reopt_every = 1000;
    std::string out = "out";
    std::size_t record_every = 1;
    bool seed_check = false;
    std::vector<std::size_t> convergence;
    double convergence_at = 0.0;
    std::string ic_list;
    std::size_t jobs = 0;
    std::size_t eig_refresh = 1;
    double theta = 0.02;
    double refresh_penalty = 0.05;
    std::size_t log_every = 1;
    unsigned residual_samples = 3;
    double residual_safety = 1.0;
    bool export_trajectory = false;
};

inline void add_options(CLI::App& app, Options& o) {
    app.add_option("--ic", o.ic, "initial condition, e.g. \"1.5*sin(x)+sin(2x)\"");
    app.add_option("--modes", o.modes, "solver modes N")->check(CLI::PositiveNumber);
    app.add_option("--dt", o.dt, "time step h")->check(CLI::PositiveNumber);
    app.add_option("--t-end", o.t_end, "final time")->check(CLI::PositiveNumber);
    app.add_option("--method", o.method, "bound method")->check(CLI::IsMember({"worst", "eig", "both"}));
    app.add_option("--eig-n", o.eig_n, "Galerkin size n of the eigenvalue bound")->check(CLI::PositiveNumber);
    app.add_option("--threshold", o.threshold, "smallness threshold")->check(CLI::PositiveNumber);
    app.add_option("--horizon", o.horizon, "time-criterion horizon T*")->check(CLI::PositiveNumber);
    app.add_option("--reopt-every", o.reopt_every, "steps between parameter re-optimisations")
        ->check(CLI::PositiveNumber);
    app.add_option("--out", o.out, "output directory");
    app.add_option("--record-every", o.record_every, "subsampling of stored states and log rows")
        ->check(CLI::PositiveNumber);
    app.add_flag("--seed-check", o.seed_check, "run built-in self checks and exit");
    app.add_option("--convergence", o.convergence, "eigenvalue bound table for these n (comma separated)")
        ->delimiter(',');
    app.add_option("--convergence-at", o.convergence_at, "integrate to this time before the table")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--ic-list", o.ic_list, "file with one initial condition per line (sweep)");
    app.add_option("--jobs", o.jobs, "parallel sweep workers (0 = hardware threads)");
    app.add_option("--eig-refresh", o.eig_refresh, "max steps between eigenvalue solves (1 = every step)")
        ->check(CLI::PositiveNumber);
    app.add_option("--theta", o.theta, "inflation used between eigenvalue solves")->check(CLI::Range(1e-6, 0.5));
    app.add_option("--refresh-penalty", o.refresh_penalty, "drift penalty that forces a new eigenvalue solve")
        ->check(CLI::PositiveNumber);
    app.add_option("--residual-samples", o.residual_samples, "time samples per step for the residual")
        ->check(CLI::Range(2u, 1000u));
    app.add_option("--residual-safety", o.residual_safety, "safety factor on the residual")
        ->check(CLI::PositiveNumber);
    app.add_flag("--export-trajectory", o.export_trajectory, "also write trajectory.csv / trajectory.json");
    app.set_config("--config", "", "key=value configuration file; flags take precedence");
}

inline VerificationConfig make_config(const Options& o) {
    VerificationConfig cfg;
    cfg.method = o.method == "worst" ? Method::WorstCase : Method::Eigenvalue;
    cfg.smallness_threshold = o.threshold;
    if (o.horizon > 0.0) cfg.time_horizon = o.horizon;
    cfg.eig_n = o.eig_n;
    cfg.reoptimize_every = o.reopt_every;
    cfg.solver = {o.modes, o.dt, o.t_end, o.record_every};
    cfg.residual.samples = o.residual_samples;
    cfg.residual.safety = o.residual_safety;
    cfg.eigen.max_interval = o.eig_refresh;
    cfg.eigen.theta = o.theta;
    cfg.eigen.penalty_limit = o.refresh_penalty;
    cfg.log_every = o.record_every;
    return cfg;
}

inline nlohmann::json config_json(const Options& o) {
    return {{"ic", o.ic},
            {"modes", o.modes},
            {"dt", o.dt},
            {"t_end", o.t_end},
            {"method", o.method},
            {"eig_n", o.eig_n},
            {"threshold", o.threshold},
            {"horizon", o.horizon > 0.0 ? nlohmann::json(o.horizon) : nlohmann::json()},
            {"reopt_every", o.reopt_every},
            {"record_every", o.record_every},
            {"eig_refresh", o.eig_refresh},
            {"theta", o.theta},
            {"refresh_penalty", o.refresh_penalty},
            {"residual_samples", o.residual_samples},
            {"residual_safety", o.residual_safety}};
}

inline bool certified(Verdict v) { return v == Verdict::GlobalBySmallness || v == Verdict::VerifiedUntilHorizon; }

inline std::vector<TraceRow> traces_from(const VerificationReport& r) {
    std::vector<TraceRow> rows;
    for (std::size_t i = 1; i < r.steps.size(); ++i) {
        const StepRecord& s = r.steps[i];
        rows.push_back({s.t, s.worst_case, s.lambda_n, s.lambda_tilde, s.modes_needed, s.feasible});
    }
    return rows;
}

/// One verification run into `dir`; returns the exit code.
inline int verify_into(const Options& o, const std::filesystem::path& dir, std::ostream& log) {
    const InitialConditionExpr expr = parse_ic(o.ic);
    const FourierField u0 = to_field(expr);
    const VerificationConfig cfg = make_config(o);
    cfg.validate();
    std::filesystem::create_directories(dir);

    std::vector<VerificationReport> reports;
    std::vector<TraceRow> traces;
    if (o.method == "both") {
        MethodComparison cmp = compare_methods(u0, cfg);
        reports.push_back(std::move(cmp.worst_case));
        reports.push_back(std::move(cmp.eigenvalue));
        traces = std::move(cmp.traces);
    } else {
        reports.push_back(run(u0, cfg));
        traces = traces_from(reports.front());
    }

    std::vector<const VerificationReport*> ptrs;
    for (const auto& r : reports) ptrs.push_back(&r);
    io::write_steps_csv(dir / "steps.csv", ptrs);
    io::write_smallness_csv(dir / "smallness.csv", ptrs);
    io::write_comparison_csv(dir / "comparison.csv", traces);

    nlohmann::json j{{"config", config_json(o)}, {"initial_condition", render(expr)}, {"methods", nlohmann::json::array()}};
    bool ok = false;
    for (const auto& r : reports) {
        j["methods"].push_back(io::to_json(r));
        ok = ok || certified(r.verdict);
        log << to_string(r.method) << ": " << to_string(r.verdict) << " at t = " << io::fmt(r.t_final)
            << " (steps " << r.steps_taken << ", peak sqrt(y) " << io::fmt(r.peak_bound) << ")\n";
    }
    j["certified"] = ok;
    io::write_json(dir / "report.json", j);

    if (o.export_trajectory) {
        SolverConfig sc = cfg.solver;
        io::write_trajectory(integrate(u0, sc), dir / "trajectory");
    }
    return ok ? kCertified : kNotCertified;
}

inline int convergence_into(const Options& o, const std::filesystem::path& dir, std::ostream& log) {
    const FourierField u0 = to_field(parse_ic(o.ic));
    FourierField phi = u0;
    if (o.convergence_at > 0.0) {
        SolverConfig sc{std::max(o.modes, u0.n_modes()), o.dt, o.convergence_at, 1000000000};
        phi = integrate(u0, sc).states.back();
    }
    std::vector<std::size_t> ns = o.convergence;
    const auto rows = convergence_table(phi, ns);
    std::filesystem::create_directories(dir);
    io::write_convergence_csv(dir / "convergence.csv", rows);
    for (const auto& r : rows) {
        log << "n = " << r.n << ": lambda_n = " << io::fmt(r.lambda_n) << ", lambda_tilde = " << io::fmt(r.formal_bound())
            << (r.feasible ? "" : " (infeasible)") << '\n';
    }
    return kCertified;
}

/// Built-in checks against closed-form values.
inline int seed_check(std::ostream& log) {
    int failures = 0;
    const auto check = [&](const char* name, double got, double want, double tol) {
        const bool pass = std::abs(got - want) <= tol;
        failures += pass ? 0 : 1;
        log << (pass ? "PASS " : "FAIL ") << name << ": " << io::fmt(got) << " (expected " << io::fmt(want) << ")\n";
    };
    const FourierField zero(4);
    const FourierField s1 = to_field(parse_ic("sin(x)"));
    const FourierField s2 = to_field(parse_ic("sin(2x)"));
    check("lambda_8(0)", lambda_n(assemble(zero, 8)), -1.0, 1e-10);
    check("lambda_tilde_8(0)", rigorous_bound(zero, 8).formal_bound(), -1.0, 1e-10);
    check("worst_case(0)", worst_case_bound(zero), -0.5, 1e-14);
    check("worst_case(sin x)", worst_case_bound(s1), 4.0, 1e-12);
    check("worst_case(sin 2x)", worst_case_bound(s2), 71.5, 1e-12);
    check("C_phi(sin x)", c_phi(s1), 12.0, 1e-12);
    check("C_phi(sin 2x)", c_phi(s2), 48.0, 1e-12);
    check("sup bound(sin x)", sup_norm_bound(s1), 1.0, 1e-14);
    check("||sin x||_L2^2", std::pow(l2_norm(s1), 2), std::numbers::pi, 1e-13);
    check("product cos^2 mode 2", product(derivative(s1, 1), derivative(s1, 1), 2).cos_coeff(2), 0.5, 1e-14);
    check("method1 alpha(1)", method1_coefficients(1.0, 0.0).alpha, 17.5, 0.0);
    return failures == 0 ? kCertified : kError;
}

inline std::vector<std::string> read_ic_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open ic list " + path);
    std::vector<std::string> ics;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto last = line.find_last_not_of(" \t\r");
        ics.push_back(line.substr(first, last - first + 1));
    }
    if (ics.empty()) throw Error("ic list " + path + " is empty");
    return ics;
}

/// Runs each initial condition in its own directory out/run-XXX, in parallel.
inline int sweep(const Options& base, std::ostream& log) {
    const std::vector<std::string> ics = read_ic_list(base.ic_list);
    std::vector<int> codes(ics.size(), kError);
    std::vector<std::string> logs(ics.size());
    std::atomic<std::size_t> next{0};
    const std::size_t workers =
        std::max<std::size_t>(1, std::min(ics.size(), base.jobs != 0 ? base.jobs : std::thread::hardware_concurrency()));
    const auto worker = [&]() {
        for (std::size_t i = next++; i < ics.size(); i = next++) {
            Options o = base;
            o.ic = ics[i];
            char name[32];
            std::snprintf(name, sizeof name, "run-%03zu", i);
            std::ostringstream s;
            try {
                codes[i] = verify_into(o, std::filesystem::path(base.out) / name, s);
            } catch (const std::exception& e) {
                s << "error: " << e.what() << '\n';
                codes[i] = kError;
            }
            logs[i] = s.str();
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::filesystem::create_directories(base.out);
    std::ofstream summary(std::filesystem::path(base.out) / "sweep.csv");
    summary << "run,ic,exit_code\n";
    int worst = kCertified;
    for (std::size_t i = 0; i < ics.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "run-%03zu", i);
        summary << name << ",\"" << ics[i] << "\"," << codes[i] << '\n';
        log << "[" << name << "] " << ics[i] << '\n' << logs[i];
        if (codes[i] == kError) {
            worst = kError;
        } else if (codes[i] == kNotCertified && worst == kCertified) {
            worst = kNotCertified;
        }
    }
    return worst;
}

inline int main(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"A-posteriori verification of the surface growth equation"};
    Options o;
    add_options(app, o);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kCertified;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kError;
    }
    try {
        if (o.seed_check) return seed_check(out);
        if (!o.ic_list.empty()) return sweep(o, out);
        if (o.ic.empty()) {
            err << "usage error: --ic is required\n";
            return kError;
        }
        if (!o.convergence.empty()) return convergence_into(o, o.out, out);
        return verify_into(o, o.out, out);
    } catch (const ParseError& e) {
        err << "parse error in --ic: " << e.what() << '\n';
        return kError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kError;
    }
}

}  // namespace surfgrow::cli

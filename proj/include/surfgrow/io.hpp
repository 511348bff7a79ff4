#pragma once

// CSV / JSON artifacts. Every real is written with 17 significant digits so
// values round-trip exactly.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "surfgrow/eigen_bound.hpp"
#include "surfgrow/errors.hpp"
#include "surfgrow/solver.hpp"
#include "surfgrow/verifier.hpp"

namespace surfgrow::io {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw InvalidArgumentError("io: malformed number '" + s + "'");
    return v;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("io: cannot open " + path.string() + " for writing");
    return out;
}

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Trajectory: <base>.csv with rows t, Re a_1, Im a_1, ..., and <base>.json with n_modes and dt.

inline void write_trajectory(const Trajectory& traj, const std::filesystem::path& base) {
    if (traj.states.empty()) throw InvalidArgumentError("write_trajectory: empty trajectory");
    const std::size_t n = traj.n_modes();
    {
        auto out = detail::open_out(std::filesystem::path(base).replace_extension(".csv"));
        out << "t";
        for (std::size_t k = 1; k <= n; ++k) out << ",re_" << k << ",im_" << k;
        out << '\n';
        for (std::size_t i = 0; i < traj.size(); ++i) {
            out << fmt(traj.times[i]);
            for (const Complex& a : traj.states[i].positive()) out << ',' << fmt(a.real()) << ',' << fmt(a.imag());
            out << '\n';
        }
    }
    auto header = detail::open_out(std::filesystem::path(base).replace_extension(".json"));
    const nlohmann::json j = {{"n_modes", n}, {"dt", traj.dt}, {"record_every", traj.record_every},
                              {"states", traj.size()}};
    header << j.dump(2) << '\n';
}

inline Trajectory read_trajectory(const std::filesystem::path& base) {
    std::ifstream header(std::filesystem::path(base).replace_extension(".json"));
    std::ifstream csv(std::filesystem::path(base).replace_extension(".csv"));
    if (!header || !csv) throw Error("read_trajectory: missing files for " + base.string());
    const nlohmann::json j = nlohmann::json::parse(header);
    Trajectory traj;
    const auto n = j.at("n_modes").get<std::size_t>();
    traj.dt = j.at("dt").get<double>();
    traj.record_every = j.value("record_every", std::size_t{1});
    std::string line;
    std::getline(csv, line);
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        const auto cells = detail::split(line);
        if (cells.size() != 1 + 2 * n) throw Error("read_trajectory: row has wrong width");
        traj.times.push_back(parse_double(cells[0]));
        std::vector<Complex> a(n);
        for (std::size_t k = 0; k < n; ++k) a[k] = {parse_double(cells[1 + 2 * k]), parse_double(cells[2 + 2 * k])};
        traj.states.emplace_back(std::move(a));
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Verification logs

inline const char* kStepsHeader =
    "t,y,sqrt_y,alpha,beta,gamma,res,lambda_n,lambda_tilde,worst_case,delta,eps_b,eps_c,eps_d,feasible,phi_h1,method";

inline void write_step_rows(std::ostream& out, const VerificationReport& r) {
    const std::string method(to_string(r.method));
    for (const StepRecord& s : r.steps) {
        out << fmt(s.t) << ',' << fmt(s.y) << ',' << fmt(s.dx_bound) << ',' << fmt(s.alpha) << ',' << fmt(s.beta)
            << ',' << fmt(s.gamma) << ',' << fmt(s.res) << ',' << fmt(s.lambda_n) << ',' << fmt(s.lambda_tilde) << ','
            << fmt(s.worst_case) << ',' << fmt(s.delta) << ',' << fmt(s.eps_b) << ',' << fmt(s.eps_c) << ','
            << fmt(s.eps_d) << ',' << (s.feasible ? 1 : 0) << ',' << fmt(s.phi_h1) << ',' << method << '\n';
    }
}

inline void write_steps_csv(const std::filesystem::path& path, const std::vector<const VerificationReport*>& reports) {
    auto out = detail::open_out(path);
    out << kStepsHeader << '\n';
    for (const auto* r : reports) write_step_rows(out, *r);
}

inline void write_smallness_csv(const std::filesystem::path& path,
                                const std::vector<const VerificationReport*>& reports) {
    auto out = detail::open_out(path);
    out << "t,phi_h1,lower,upper,threshold,method\n";
    for (const auto* r : reports) {
        const std::string method(to_string(r->method));
        for (const StepRecord& s : r->steps) {
            out << fmt(s.t) << ',' << fmt(s.phi_h1) << ',' << fmt(s.lower()) << ',' << fmt(s.upper()) << ','
                << fmt(r->threshold) << ',' << method << '\n';
        }
    }
}

inline void write_comparison_csv(const std::filesystem::path& path, const std::vector<TraceRow>& rows) {
    auto out = detail::open_out(path);
    out << "t,worst_case,lambda_n,lambda_tilde,modes_needed,feasible\n";
    for (const TraceRow& r : rows) {
        out << fmt(r.t) << ',' << fmt(r.worst_case) << ',' << fmt(r.lambda_n) << ',' << fmt(r.lambda_tilde) << ','
            << fmt(r.modes_needed) << ',' << (r.feasible ? 1 : 0) << '\n';
    }
}

inline void write_convergence_csv(const std::filesystem::path& path, const std::vector<EigenBoundReport>& rows) {
    auto out = detail::open_out(path);
    out << "n,lambda_n,lambda_tilde,gap,feasible,c_phi,n_min\n";
    for (const EigenBoundReport& r : rows) {
        const double tilde = r.formal_bound();
        out << r.n << ',' << fmt(r.lambda_n) << ',' << fmt(tilde) << ',' << fmt(tilde - r.lambda_n) << ','
            << (r.feasible ? 1 : 0) << ',' << fmt(r.c_phi) << ',' << fmt(r.n_min) << '\n';
    }
}

inline nlohmann::json to_json(const StepRecord& s) {
    const auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(fmt(v)); };
    return {{"t", num(s.t)},           {"y", num(s.y)},
            {"sqrt_y", num(s.dx_bound)}, {"phi_h1", num(s.phi_h1)},
            {"upper", num(s.upper())}, {"lambda_tilde", num(s.lambda_tilde)},
            {"worst_case", num(s.worst_case)}, {"feasible", s.feasible}};
}

inline nlohmann::json to_json(const VerificationReport& r) {
    return {{"method", to_string(r.method)},
            {"verdict", to_string(r.verdict)},
            {"t_final", r.t_final},
            {"peak_bound", r.peak_bound},
            {"feasibility_violations", r.feasibility_violations},
            {"steps_taken", r.steps_taken},
            {"eigen_solves", r.eigen_solves},
            {"threshold", r.threshold},
            {"logged_steps", r.steps.size()},
            {"decisive", to_json(r.decisive)}};
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    auto out = detail::open_out(path);
    out << j.dump(2) << '\n';
}

}  // namespace surfgrow::io

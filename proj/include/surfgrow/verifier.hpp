#pragma once

// A-posteriori verification pipeline: integrates phi, bounds ||d_x||^2 step
// by step, and checks the smallness and horizon criteria.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "surfgrow/eigen_bound.hpp"
#include "surfgrow/error_ode.hpp"
#include "surfgrow/errors.hpp"
#include "surfgrow/solver.hpp"
#include "surfgrow/spectral.hpp"

namespace surfgrow {

enum class Method { WorstCase, Eigenvalue };
enum class Verdict { GlobalBySmallness, VerifiedUntilHorizon, BoundBlowup, Inconclusive };

inline std::string_view to_string(Method m) { return m == Method::WorstCase ? "worst_case" : "eigenvalue"; }

inline std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::GlobalBySmallness: return "GlobalBySmallness";
        case Verdict::VerifiedUntilHorizon: return "VerifiedUntilHorizon";
        case Verdict::BoundBlowup: return "BoundBlowup";
        default: return "Inconclusive";
    }
}

/// When the Galerkin eigenproblem is re-solved.
///
/// With max_interval == 1 the rigorous bound is evaluated at both ends of
/// every step; lambda is convex in phi, so the larger endpoint value bounds
/// the whole linearly interpolated step. With max_interval > 1 the bound is
/// computed at an anchor phi_a inflated to phi_a / (1 - theta) and carried to
/// phi = phi_a + psi through
///
///     lambda(phi) <= (1 - theta) lambda(phi_a / (1 - theta)) - theta / 2
///                    + 9/2 ||psi_xx||^2 / theta,
///
/// which follows from A_phi being affine in phi and the worst-case estimate
/// applied to psi / theta. The anchor moves when the last term exceeds
/// `penalty_limit` or after `max_interval` steps.
struct EigenSchedule {
    std::size_t max_interval = 1;
    double theta = 0.02;
    double penalty_limit = 0.05;

    void validate() const {
        if (max_interval < 1) throw InvalidArgumentError("EigenSchedule: max_interval must be >= 1");
        if (max_interval > 1 && !(theta > 0.0 && theta < 1.0)) {
            throw InvalidArgumentError("EigenSchedule: theta must lie in (0,1)");
        }
        if (!(penalty_limit > 0.0)) throw InvalidArgumentError("EigenSchedule: penalty_limit must be > 0");
    }
};

struct VerificationConfig {
    Method method = Method::Eigenvalue;
    double smallness_threshold = 0.5;
    std::optional<double> time_horizon;
    std::size_t eig_n = 64;
    std::size_t reoptimize_every = 1000;
    SolverConfig solver;
    ResidualOptions residual;
    EigenSchedule eigen;
    std::size_t log_every = 1;
    double cap_atol = 1e-30;

    void validate() const {
        solver.validate();
        eigen.validate();
        if (!(smallness_threshold > 0.0)) throw InvalidArgumentError("VerificationConfig: threshold must be > 0");
        if (time_horizon && !(*time_horizon > 0.0)) throw InvalidArgumentError("VerificationConfig: horizon must be > 0");
        if (eig_n < 1 || eig_n > solver.n_modes) {
            throw InvalidArgumentError("VerificationConfig: eig_n must lie in [1, n_modes]");
        }
        if (reoptimize_every < 1) throw InvalidArgumentError("VerificationConfig: reoptimize_every must be >= 1");
        if (log_every < 1) throw InvalidArgumentError("VerificationConfig: log_every must be >= 1");
    }
};

/// One line of the step log.
struct StepRecord {
    double t = 0.0;
    double y = 0.0;
    double dx_bound = 0.0;  ///< sqrt(y)
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double res = 0.0;
    double lambda_n = std::numeric_limits<double>::quiet_NaN();
    double lambda_tilde = std::numeric_limits<double>::quiet_NaN();
    double worst_case = 0.0;
    double delta = std::numeric_limits<double>::quiet_NaN();
    double eps_b = std::numeric_limits<double>::quiet_NaN();
    double eps_c = std::numeric_limits<double>::quiet_NaN();
    double eps_d = std::numeric_limits<double>::quiet_NaN();
    bool feasible = false;
    double phi_h1 = 0.0;  ///< ||phi_x(t)||
    double modes_needed = std::numeric_limits<double>::quiet_NaN();

    [[nodiscard]] double upper() const { return phi_h1 + dx_bound; }
    [[nodiscard]] double lower() const { return std::max(0.0, phi_h1 - dx_bound); }
};

struct VerificationReport {
    Method method = Method::Eigenvalue;
    Verdict verdict = Verdict::Inconclusive;
    double t_final = 0.0;
    std::vector<StepRecord> steps;
    double peak_bound = 0.0;  ///< max sqrt(y) while finite
    std::size_t feasibility_violations = 0;
    std::size_t steps_taken = 0;
    std::size_t eigen_solves = 0;
    double threshold = 0.5;
    /// Record of the step that settled the verdict (or the last step).
    StepRecord decisive;
};

/// Per-step eigenvalue information shared by the pipelines.
struct StepEigen {
    double lambda_bound = 0.0;  ///< valid bound on lambda over the whole step
    double lambda_n = 0.0;      ///< Galerkin eigenvalue of the latest solve
    double lambda_tilde = 0.0;  ///< rigorous bound of the latest solve (formal if infeasible)
    double modes_needed = 0.0;
    bool feasible = false;      ///< lambda_bound comes from the eigenvalue estimate
};

class EigenBoundTracker {
public:
    EigenBoundTracker(std::size_t n, EigenSchedule schedule) : n_(n), schedule_(schedule) { schedule_.validate(); }

    /// Bound over the step from a0 to a1; `worst_case` is the worst-case value over the step.
    StepEigen bound_step(const FourierField& a0, const FourierField& a1, double worst_case) {
        return schedule_.max_interval == 1 ? endpoint_step(a0, a1, worst_case) : anchored_step(a0, a1, worst_case);
    }

    [[nodiscard]] std::size_t solves() const noexcept { return solves_; }

private:
    EigenBoundReport solve(const FourierField& phi) {
        ++solves_;
        return rigorous_bound(phi, n_, &warm_);
    }

    StepEigen endpoint_step(const FourierField& a0, const FourierField& a1, double worst_case) {
        if (!previous_) previous_ = solve(a0);
        const EigenBoundReport next = solve(a1);
        StepEigen out;
        out.lambda_n = next.lambda_n;
        out.lambda_tilde = next.formal_bound();
        out.modes_needed = next.modes_needed;
        out.feasible = previous_->feasible && next.feasible;
        out.lambda_bound = out.feasible ? std::max(*previous_->lambda_rigorous, *next.lambda_rigorous) : worst_case;
        out.lambda_bound = std::min(out.lambda_bound, worst_case);
        previous_ = next;
        return out;
    }

    void reanchor(const FourierField& a) {
        anchor_ = a;
        anchored_ = solve((1.0 / (1.0 - schedule_.theta)) * a);
        since_anchor_ = 0;
    }

    [[nodiscard]] double drift_penalty(const FourierField& a0, const FourierField& a1) const {
        const double r = std::max(sup_norm_bound(derivative(a0 - *anchor_, 2)), sup_norm_bound(derivative(a1 - *anchor_, 2)));
        return 4.5 * r * r / schedule_.theta;
    }

    StepEigen anchored_step(const FourierField& a0, const FourierField& a1, double worst_case) {
        if (!anchor_ || since_anchor_ >= schedule_.max_interval) reanchor(a0);
        double penalty = drift_penalty(a0, a1);
        if (penalty > schedule_.penalty_limit && since_anchor_ > 0) {
            reanchor(a0);
            penalty = drift_penalty(a0, a1);
        }
        ++since_anchor_;
        const double theta = schedule_.theta;
        StepEigen out;
        out.lambda_n = anchored_->lambda_n;
        out.modes_needed = anchored_->modes_needed;
        out.feasible = anchored_->feasible;
        const double carried = (1.0 - theta) * anchored_->formal_bound() - 0.5 * theta + penalty;
        out.lambda_tilde = carried;
        out.lambda_bound = std::min(out.feasible ? carried : worst_case, worst_case);
        return out;
    }

    std::size_t n_;
    EigenSchedule schedule_;
    EigenWarmStart warm_;
    std::size_t solves_ = 0;
    std::optional<EigenBoundReport> previous_;
    std::optional<FourierField> anchor_;
    std::optional<EigenBoundReport> anchored_;
    std::size_t since_anchor_ = 0;
};

/// Everything about one solver step that does not depend on the method.
struct StepData {
    std::size_t index = 0;  ///< step j covers [t_j, t_{j+1}], index = j + 1
    double t1 = 0.0;
    double h = 0.0;
    double res = 0.0;
    double dxx_sup = 0.0;   ///< max of the endpoint bounds on ||phi_xx||_inf
    double worst_case = 0.0;
    double phi_h1 = 0.0;    ///< ||phi_x(t_{j+1})||
    std::optional<StepEigen> eigen;
};

namespace detail {

class BoundPipeline {
public:
    BoundPipeline(Method method, const VerificationConfig& cfg) : cfg_(cfg) {
        report_.method = method;
        report_.threshold = cfg.smallness_threshold;
        last_opt_y_ = -1.0;
    }

    [[nodiscard]] bool active() const noexcept { return active_; }
    [[nodiscard]] const VerificationReport& report() const noexcept { return report_; }
    VerificationReport take() { return std::move(report_); }

    void start(double phi_h1) {
        StepRecord r;
        r.phi_h1 = phi_h1;
        r.worst_case = std::numeric_limits<double>::quiet_NaN();
        if (report_.method == Method::Eigenvalue) set_params(r, state_.params);
        report_.steps.push_back(r);
        report_.decisive = r;
        check_criteria(r);
    }

    void consume(const StepData& d) {
        if (!active_) return;
        StepRecord r;
        r.t = d.t1;
        r.res = d.res;
        r.worst_case = d.worst_case;
        r.phi_h1 = d.phi_h1;
        if (d.eigen) {
            r.lambda_n = d.eigen->lambda_n;
            r.lambda_tilde = d.eigen->lambda_tilde;
            r.modes_needed = d.eigen->modes_needed;
            r.feasible = d.eigen->feasible;
        }
        StepCoefficients c;
        if (report_.method == Method::WorstCase) {
            c = method1_coefficients(d.dxx_sup, d.res);
        } else {
            const double lambda = d.eigen ? d.eigen->lambda_bound : d.worst_case;
            if (!d.eigen || !d.eigen->feasible) ++report_.feasibility_violations;
            maybe_reoptimize(lambda, d);
            c = method2_coefficients(lambda, d.dxx_sup, d.res, state_.params);
            set_params(r, state_.params);
        }
        r.alpha = c.alpha;
        r.beta = c.beta;
        r.gamma = c.gamma;

        state_ = advance_bound(state_, c, d.h, cfg_.cap_atol);
        ++report_.steps_taken;
        ++since_opt_;
        report_.t_final = d.t1;
        if (state_.blown_up) {
            r.y = std::numeric_limits<double>::infinity();
            r.dx_bound = std::numeric_limits<double>::infinity();
            finish(Verdict::BoundBlowup, r);
            return;
        }
        r.y = state_.y;
        r.dx_bound = std::sqrt(state_.y);
        report_.peak_bound = std::max(report_.peak_bound, r.dx_bound);
        if (check_criteria(r)) return;
        if (d.index % cfg_.log_every == 0) report_.steps.push_back(r);
        report_.decisive = r;
    }

    void finish_inconclusive() {
        if (!active_) return;
        active_ = false;
        report_.verdict = Verdict::Inconclusive;
        if (report_.steps.empty() || report_.steps.back().t != report_.decisive.t) {
            report_.steps.push_back(report_.decisive);
        }
    }

private:
    static void set_params(StepRecord& r, const BoundParams& p) {
        r.delta = p.delta;
        r.eps_b = p.eps_b;
        r.eps_c = p.eps_c;
        r.eps_d = p.eps_d;
    }

    void maybe_reoptimize(double lambda, const StepData& d) {
        const double y = state_.y;
        const bool due = last_opt_y_ < 0.0 || since_opt_ >= cfg_.reoptimize_every ||
                         (y > 2.0 * last_opt_y_) || (last_opt_y_ > 0.0 && y < 0.5 * last_opt_y_);
        if (!due) return;
        // Forcing accumulated over one re-optimisation window puts a floor
        // under the y the parameters are tuned for.
        const double window = d.h * static_cast<double>(cfg_.reoptimize_every);
        const double gamma_fb = method2_coefficients(lambda, d.dxx_sup, d.res, BoundParams::fallback()).gamma;
        const double y_eff = std::max(y, gamma_fb * window);
        state_.params = optimize_params(lambda, d.dxx_sup, d.res, y_eff);
        last_opt_y_ = y;
        since_opt_ = 0;
    }

    bool check_criteria(const StepRecord& r) {
        if (r.phi_h1 + r.dx_bound < cfg_.smallness_threshold) {
            finish(Verdict::GlobalBySmallness, r);
            return true;
        }
        if (cfg_.time_horizon && r.t >= *cfg_.time_horizon) {
            finish(Verdict::VerifiedUntilHorizon, r);
            return true;
        }
        return false;
    }

    void finish(Verdict v, const StepRecord& r) {
        active_ = false;
        report_.verdict = v;
        report_.t_final = r.t;
        report_.decisive = r;
        if (report_.steps.empty() || report_.steps.back().t != r.t) report_.steps.push_back(r);
    }

    const VerificationConfig& cfg_;
    VerificationReport report_;
    ErrorBoundState state_;
    bool active_ = true;
    std::size_t since_opt_ = 0;
    double last_opt_y_;
};

}  // namespace detail

/// Bound traces along a run (Figure-1 style data).
struct TraceRow {
    double t = 0.0;
    double worst_case = 0.0;
    double lambda_n = 0.0;
    double lambda_tilde = 0.0;
    double modes_needed = 0.0;
    bool feasible = false;
};

struct MethodComparison {
    VerificationReport worst_case;
    VerificationReport eigenvalue;
    std::vector<TraceRow> traces;
};

namespace detail {

struct RunOutput {
    std::vector<VerificationReport> reports;
    std::vector<TraceRow> traces;
};

inline RunOutput run_pipelines(const FourierField& u0, const VerificationConfig& cfg, std::vector<Method> methods,
                               bool want_traces) {
    cfg.validate();
    if (u0.n_modes() > cfg.solver.n_modes) (void)u0.padded(cfg.solver.n_modes);
    std::vector<BoundPipeline> pipes;
    pipes.reserve(methods.size());
    bool need_eigen = want_traces;
    for (const Method m : methods) {
        pipes.emplace_back(m, cfg);
        need_eigen = need_eigen || m == Method::Eigenvalue;
    }

    Stepper stepper(u0, cfg.solver.n_modes, cfg.solver.dt);
    std::optional<EigenBoundTracker> tracker;
    if (need_eigen) tracker.emplace(cfg.eig_n, cfg.eigen);

    const double h = cfg.solver.dt;
    double s_prev = sup_norm_bound(derivative(stepper.state(), 2));
    for (auto& p : pipes) p.start(sobolev_norm(stepper.state(), 1));

    RunOutput out;
    const std::size_t total = cfg.solver.step_count();
    const unsigned samples = std::max(2u, cfg.residual.samples);
    for (std::size_t j = 1; j <= total; ++j) {
        if (std::none_of(pipes.begin(), pipes.end(), [](const BoundPipeline& p) { return p.active(); })) break;
        const FourierField a0 = stepper.state();
        const FourierField sq0 = stepper.slope_squared();
        stepper.advance();
        const FourierField& a1 = stepper.state();

        double res = 0.0;
        for (unsigned i = 0; i < samples; ++i) {
            const double s = static_cast<double>(i) / static_cast<double>(samples - 1);
            double value = 0.0;
            if (cfg.residual.nonlinearity == Nonlinearity::Disabled) {
                value = residual_norm_at(a0, a1, h, s, nullptr, Nonlinearity::Disabled);
            } else if (i == 0) {
                value = residual_norm_at(a0, a1, h, s, &sq0);
            } else if (i + 1 == samples) {
                value = residual_norm_at(a0, a1, h, s, &stepper.slope_squared());
            } else {
                const FourierField sq = stepper.slope_square(FourierField::combine(1.0 - s, a0, s, a1));
                value = residual_norm_at(a0, a1, h, s, &sq);
            }
            res = std::max(res, value);
        }

        StepData d;
        d.index = j;
        d.t1 = stepper.time();
        d.h = h;
        d.res = cfg.residual.safety * res;
        const double s1 = sup_norm_bound(derivative(a1, 2));
        d.dxx_sup = std::max(s_prev, s1);
        s_prev = s1;
        d.worst_case = worst_case_bound(d.dxx_sup);
        d.phi_h1 = sobolev_norm(a1, 1);
        if (tracker) d.eigen = tracker->bound_step(a0, a1, d.worst_case);

        for (auto& p : pipes) p.consume(d);
        if (want_traces && d.eigen && (j % cfg.log_every == 0 || j == total)) {
            out.traces.push_back({d.t1, d.worst_case, d.eigen->lambda_n, d.eigen->lambda_tilde, d.eigen->modes_needed,
                                  d.eigen->feasible});
        }
    }
    for (auto& p : pipes) p.finish_inconclusive();
    for (auto& p : pipes) {
        VerificationReport r = p.take();
        r.eigen_solves = tracker ? tracker->solves() : 0;
        out.reports.push_back(std::move(r));
    }
    return out;
}

}  // namespace detail

/// Runs the selected method until a criterion holds, the bound blows up, or t_end.
inline VerificationReport run(const FourierField& u0, const VerificationConfig& cfg) {
    return std::move(detail::run_pipelines(u0, cfg, {cfg.method}, false).reports.front());
}

/// Both methods on one shared trajectory, with aligned bound traces.
inline MethodComparison compare_methods(const FourierField& u0, const VerificationConfig& cfg) {
    auto out = detail::run_pipelines(u0, cfg, {Method::WorstCase, Method::Eigenvalue}, true);
    return {std::move(out.reports[0]), std::move(out.reports[1]), std::move(out.traces)};
}

/// Rigorous bound at each state of a trajectory (no error ODE).
inline std::vector<TraceRow> bound_traces(const Trajectory& traj, std::size_t n) {
    std::vector<TraceRow> rows;
    rows.reserve(traj.size());
    EigenWarmStart warm;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const EigenBoundReport r = rigorous_bound(traj.states[i], n, &warm);
        rows.push_back({traj.times[i], r.worst_case, r.lambda_n, r.formal_bound(), r.modes_needed, r.feasible});
    }
    return rows;
}

/// Galerkin eigenvalue and rigorous bound of one field for a sequence of n.
inline std::vector<EigenBoundReport> convergence_table(const FourierField& phi, const std::vector<std::size_t>& ns) {
    std::vector<EigenBoundReport> rows;
    EigenWarmStart warm;
    for (const std::size_t n : ns) rows.push_back(rigorous_bound(phi, n, &warm));
    return rows;
}

}  // namespace surfgrow

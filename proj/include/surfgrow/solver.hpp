#pragma once

// Spectral Galerkin discretisation of u_t = -u_xxxx - ((u_x)^2)_xx with the
// semi-implicit Euler step: implicit in the bi-Laplacian, explicit in the
// nonlinearity.

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "surfgrow/errors.hpp"
#include "surfgrow/spectral.hpp"

namespace surfgrow {

struct SolverConfig {
    std::size_t n_modes = 128;
    double dt = 1e-6;
    double t_end = 1e-3;
    std::size_t record_every = 1;

    void validate() const {
        if (n_modes < 1) throw InvalidArgumentError("SolverConfig: n_modes must be >= 1");
        if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgumentError("SolverConfig: dt must be > 0");
        if (!(t_end >= dt) || !std::isfinite(t_end)) throw InvalidArgumentError("SolverConfig: t_end must be >= dt");
        if (record_every < 1) throw InvalidArgumentError("SolverConfig: record_every must be >= 1");
    }

    /// ceil(t_end / dt), ignoring representation noise in the quotient.
    [[nodiscard]] std::size_t step_count() const {
        return static_cast<std::size_t>(std::ceil(t_end / dt * (1.0 - 1e-12)));
    }
};

/// Stored solver states. Between stored nodes the approximation is linear in
/// time, coefficient by coefficient.
struct Trajectory {
    std::vector<double> times;
    std::vector<FourierField> states;
    double dt = 0.0;
    std::size_t record_every = 1;

    [[nodiscard]] std::size_t size() const noexcept { return states.size(); }
    [[nodiscard]] std::size_t n_modes() const { return states.front().n_modes(); }

    /// Piecewise-linear interpolation; t is clamped to the stored range.
    [[nodiscard]] FourierField at(double t) const {
        if (states.empty()) throw InvalidArgumentError("Trajectory::at: empty trajectory");
        if (t <= times.front()) return states.front();
        if (t >= times.back()) return states.back();
        std::size_t lo = 0;
        std::size_t hi = times.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (times[mid] <= t ? lo : hi) = mid;
        }
        const double s = (t - times[lo]) / (times[hi] - times[lo]);
        return FourierField::combine(1.0 - s, states[lo], s, states[hi]);
    }
};

enum class Nonlinearity { Enabled, Disabled };

/// b_k = sum_{s+l=k} (is) a_s (il) a_l, the coefficients of (a_x)^2 on the
/// solver bandwidth.
inline FourierField nonlinearity(const FourierField& a) {
    const FourierField ax = derivative(a, 1);
    return product(ax, ax, a.n_modes());
}

namespace detail {

inline FourierField semi_implicit_update(const FourierField& a, const FourierField* b, double h) {
    std::vector<Complex> next(a.n_modes());
    for (std::size_t i = 0; i < next.size(); ++i) {
        const double k2 = static_cast<double>((i + 1) * (i + 1));
        const Complex forcing = b != nullptr ? h * k2 * b->positive()[i] : Complex{};
        next[i] = (a.positive()[i] + forcing) / (1.0 + h * k2 * k2);
    }
    return FourierField(std::move(next));
}

}  // namespace detail

/// a+_k = (a_k + h k^2 b_k(a)) / (1 + h k^4).
inline FourierField step(const FourierField& a, double h, Nonlinearity mode = Nonlinearity::Enabled) {
    if (!(h > 0.0)) throw InvalidArgumentError("step: h must be > 0");
    if (mode == Nonlinearity::Disabled) return detail::semi_implicit_update(a, nullptr, h);
    const FourierField b = nonlinearity(a);
    return detail::semi_implicit_update(a, &b, h);
}

/// Streaming integrator on a fixed grid t_j = j * dt.
///
/// Uses the grid-transform product, and keeps (phi_x)^2 on 2N modes at the
/// current state so the residual of the step can reuse it.
class Stepper {
public:
    Stepper(const FourierField& u0, std::size_t n_modes, double dt)
        : dt_(dt),
          n_(n_modes),
          transform_(std::make_unique<GridTransform>(GridTransform::size_for_bandwidth(4 * n_modes))),
          state_(u0.padded(n_modes)),
          square_(n_modes) {
        if (!(dt > 0.0)) throw InvalidArgumentError("Stepper: dt must be > 0");
        square_ = slope_square(state_);
    }

    [[nodiscard]] const FourierField& state() const noexcept { return state_; }
    /// Coefficients of (phi_x)^2 at the current state, modes 1..2N.
    [[nodiscard]] const FourierField& slope_squared() const noexcept { return square_; }
    [[nodiscard]] std::size_t index() const noexcept { return index_; }
    [[nodiscard]] double time() const noexcept { return static_cast<double>(index_) * dt_; }
    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] std::size_t n_modes() const noexcept { return n_; }
    [[nodiscard]] GridTransform& transform() noexcept { return *transform_; }

    void advance() {
        const FourierField b = square_.truncated(n_);
        try {
            state_ = detail::semi_implicit_update(state_, &b, dt_);
        } catch (const NonFiniteError&) {
            throw NonFiniteError("integrate: approximation left the finite range at step " +
                                 std::to_string(index_ + 1));
        }
        ++index_;
        square_ = slope_square(state_);
    }

    /// (f_x)^2 on modes 1..2N, alias-free.
    FourierField slope_square(const FourierField& f) {
        return transform_->square(derivative(f, 1), 2 * n_);
    }

private:
    double dt_;
    std::size_t n_;
    std::unique_ptr<GridTransform> transform_;
    FourierField state_;
    FourierField square_;
    std::size_t index_ = 0;
};

/// Applies `step` ceil(t_end / dt) times from u0 (zero-padded to the solver
/// bandwidth) and stores every record_every-th state and the final one.
inline Trajectory integrate(const FourierField& u0, const SolverConfig& cfg) {
    cfg.validate();
    if (u0.n_modes() > cfg.n_modes) {
        // padded() would refuse anyway if the extra modes are nonzero
        (void)u0.padded(cfg.n_modes);
    }
    Stepper stepper(u0, cfg.n_modes, cfg.dt);
    Trajectory traj;
    traj.dt = cfg.dt;
    traj.record_every = cfg.record_every;
    const std::size_t steps = cfg.step_count();
    traj.times.reserve(steps / cfg.record_every + 2);
    traj.states.reserve(steps / cfg.record_every + 2);
    traj.times.push_back(0.0);
    traj.states.push_back(stepper.state());
    for (std::size_t j = 1; j <= steps; ++j) {
        stepper.advance();
        if (j % cfg.record_every == 0 || j == steps) {
            traj.times.push_back(stepper.time());
            traj.states.push_back(stepper.state());
        }
    }
    return traj;
}

}  // namespace surfgrow

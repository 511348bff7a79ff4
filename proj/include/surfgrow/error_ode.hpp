#pragma once

// Scalar bounding ODE for y(t) >= ||d_x||^2, d = u - phi:
//
//     y' <= alpha y + beta y^5 + gamma,
//
// with coefficients frozen per time step, and the residual of the
// piecewise-linear-in-time approximation that feeds gamma.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "surfgrow/errors.hpp"
#include "surfgrow/solver.hpp"
#include "surfgrow/spectral.hpp"

namespace surfgrow {

/// Young-inequality splitting: delta in (0,1), eps_b + eps_c + eps_d = 1.
struct BoundParams {
    double delta = 0.5;
    double eps_b = 1.0 / 3.0;
    double eps_c = 1.0 / 3.0;
    double eps_d = 1.0 / 3.0;

    static constexpr BoundParams fallback() noexcept { return {}; }

    [[nodiscard]] bool valid() const noexcept {
        return delta > 0.0 && delta < 1.0 && eps_b > 0.0 && eps_c > 0.0 && eps_d > 0.0 &&
               std::abs(eps_b + eps_c + eps_d - 1.0) <= 1e-12;
    }

    void validate() const {
        if (!valid()) throw InvalidParamsError("BoundParams: need delta in (0,1), eps > 0, sum eps = 1");
    }

    friend bool operator==(const BoundParams&, const BoundParams&) = default;
};

struct StepCoefficients {
    double alpha = 0.0;  ///< linear rate
    double beta = 0.0;   ///< coefficient of y^5
    double gamma = 0.0;  ///< forcing from the residual
};

struct ErrorBoundState {
    double t = 0.0;
    double y = 0.0;
    BoundParams params;
    bool blown_up = false;
};

inline constexpr double kSeven7 = 823543.0;  // 7^7
inline constexpr double kFour8 = 65536.0;    // 4^8

// ---------------------------------------------------------------------------
// Residual Res = phi_t + phi_xxxx + (phi_x^2)_xx in H^-1

struct ResidualOptions {
    unsigned samples = 3;  ///< equispaced times in [t_j, t_{j+1}], endpoints included
    double safety = 1.0;
    Nonlinearity nonlinearity = Nonlinearity::Enabled;
};

/// ||Res(t_j + s h)||_{-1} for phi linear in time between a0 and a1.
///
/// `slope_sq` holds (phi_x(s))^2 on at least 2N modes (ignored for the
/// linear residual); pass an empty optional to compute it exactly.
inline double residual_norm_at(const FourierField& a0, const FourierField& a1, double h, double s,
                               const FourierField* slope_sq, Nonlinearity mode = Nonlinearity::Enabled) {
    const std::size_t n = std::max(a0.n_modes(), a1.n_modes());
    const FourierField phi = FourierField::combine(1.0 - s, a0, s, a1);
    FourierField exact_sq(1);
    if (mode == Nonlinearity::Enabled && slope_sq == nullptr) {
        const FourierField px = derivative(phi, 1);
        exact_sq = product(px, px, 2 * n);
        slope_sq = &exact_sq;
    }
    double sum = 0.0;
    for (std::size_t k = 1; k <= 2 * n; ++k) {
        const auto kk = static_cast<long>(k);
        const double k2 = static_cast<double>(k * k);
        Complex res = (a1.coeff(kk) - a0.coeff(kk)) / h + k2 * k2 * phi.coeff(kk);
        if (mode == Nonlinearity::Enabled) res -= k2 * slope_sq->coeff(kk);
        sum += std::norm(res) / k2;
    }
    return std::sqrt(2.0 * sum);
}

/// max over `samples` equispaced times of ||Res||_{-1} on [t_j, t_{j+1}], times the safety factor.
inline double residual_h_minus1(const FourierField& a0, const FourierField& a1, double h,
                                const ResidualOptions& opt = {}) {
    if (!(h > 0.0)) throw InvalidArgumentError("residual_h_minus1: h must be > 0");
    const unsigned m = std::max(2u, opt.samples);
    double best = 0.0;
    for (unsigned i = 0; i < m; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(m - 1);
        best = std::max(best, residual_norm_at(a0, a1, h, s, nullptr, opt.nonlinearity));
    }
    return opt.safety * best;
}

/// Residual on step [t_j, t_{j+1}] of a trajectory recorded at every step.
inline double residual_h_minus1(const Trajectory& traj, std::size_t j, const ResidualOptions& opt = {}) {
    if (traj.record_every != 1) throw InvalidArgumentError("residual_h_minus1: trajectory must record every step");
    if (j + 1 >= traj.size()) throw InvalidArgumentError("residual_h_minus1: step index out of range");
    const double h = traj.times[j + 1] - traj.times[j];
    return residual_h_minus1(traj.states[j], traj.states[j + 1], h, opt);
}

// ---------------------------------------------------------------------------
// Coefficients

/// Worst-case ODE: y' <= 7^7/2 y^5 + (18 s^2 - 1/2) y + 2 res^2, s = ||phi_xx||_inf.
inline StepCoefficients method1_coefficients(double dxx_sup, double res) {
    return {18.0 * dxx_sup * dxx_sup - 0.5, kSeven7 / 2.0, 2.0 * res * res};
}

/// Eigenvalue ODE, twice the half-derivative inequality:
/// alpha = 2(1-delta) lambda + 9 delta s^2 / (2 eps_b),
/// beta = 2 7^7 / (4^8 (delta eps_c)^7), gamma = res^2 / (2 delta eps_d).
inline StepCoefficients method2_coefficients(double lambda_bound, double dxx_sup, double res, const BoundParams& p) {
    p.validate();
    const double dc = p.delta * p.eps_c;
    const double dc7 = dc * dc * dc * dc * dc * dc * dc;
    return {2.0 * (1.0 - p.delta) * lambda_bound + 9.0 * p.delta * dxx_sup * dxx_sup / (2.0 * p.eps_b),
            2.0 * kSeven7 / (kFour8 * dc7), res * res / (2.0 * p.delta * p.eps_d)};
}

// ---------------------------------------------------------------------------
// One restarted step of the bounding ODE

namespace detail {

/// Solution at time h of z' = a z + g, z(0) = y.
inline double linear_flow(double y, double a, double g, double h) {
    const double x = a * h;
    const double growth = std::exp(x);
    const double phi1 = x == 0.0 ? h : std::expm1(x) / a;  // (e^{ah} - 1) / a
    return y * growth + g * phi1;
}

}  // namespace detail

/// Advances the certified bound over one step of length h.
///
/// On [0, h] with 0 <= y <= Y the quintic term obeys beta y^5 <= beta Y^4 y, so
/// the linear ODE with frozen rate A = alpha + beta Y^4 majorises the true one
/// while the cap holds. Its solution is monotone in time, so checking the end
/// value against Y validates the cap a posteriori. The cap starts at
/// 2 (y + gamma h) + atol and doubles until consistent; then it is lowered to
/// the end value repeatedly, which keeps the bound valid and makes the result
/// insensitive to the initial cap.
inline ErrorBoundState advance_bound(const ErrorBoundState& state, const StepCoefficients& c, double h,
                                     double atol = 1e-30) {
    if (state.blown_up) throw InvalidArgumentError("advance_bound: state already blown up");
    if (!(h > 0.0)) throw InvalidArgumentError("advance_bound: h must be > 0");
    if (!(c.beta >= 0.0) || !(c.gamma >= 0.0) || !std::isfinite(c.alpha) || !std::isfinite(c.beta) ||
        !std::isfinite(c.gamma)) {
        throw InvalidArgumentError("advance_bound: need finite coefficients with beta, gamma >= 0");
    }
    ErrorBoundState next = state;
    next.t = state.t + h;
    const double y = std::max(0.0, state.y);

    const auto end_value = [&](double cap) {
        const double cap2 = cap * cap;
        return detail::linear_flow(y, c.alpha + c.beta * cap2 * cap2, c.gamma, h);
    };

    double cap = 2.0 * (y + c.gamma * h) + atol;
    double value = end_value(cap);
    int tries = 0;
    while (!(value <= cap)) {
        if (++tries > 40 || !std::isfinite(cap)) {
            next.blown_up = true;
            return next;
        }
        cap *= 2.0;
        value = end_value(cap);
    }
    constexpr double kSlack = 1.0 + 8.0 * std::numeric_limits<double>::epsilon();
    for (int it = 0; it < 60; ++it) {
        const double lowered = std::max(y, value) * kSlack;
        if (!(lowered < cap)) break;
        const double v = end_value(lowered);
        if (!(v <= lowered)) break;
        const bool settled = lowered > cap * (1.0 - 1e-14);
        cap = lowered;
        value = v;
        if (settled) break;
    }
    next.y = value;
    return next;
}

// ---------------------------------------------------------------------------
// Splitting parameters

/// alpha y + beta y^5 + gamma for Method-2 coefficients at `p`.
inline double method2_rhs(double lambda_bound, double dxx_sup, double res, double y, const BoundParams& p) {
    const StepCoefficients c = method2_coefficients(lambda_bound, dxx_sup, res, p);
    const double y2 = y * y;
    return c.alpha * y + c.beta * y2 * y2 * y + c.gamma;
}

/// Approximate minimiser of the instantaneous Method-2 right side over the
/// constraint set: grid search (delta on a log grid, eps on a 1/20 simplex
/// grid) followed by a shrinking coordinate search in unconstrained
/// coordinates. Never worse than the fallback parameters.
inline BoundParams optimize_params(double lambda_bound, double dxx_sup, double res, double y) {
    const BoundParams fb = BoundParams::fallback();
    const auto objective = [&](const BoundParams& p) { return method2_rhs(lambda_bound, dxx_sup, res, y, p); };
    const double fb_value = objective(fb);
    if (y == 0.0 && res == 0.0) return fb;

    static constexpr std::array<double, 18> kDeltas = {1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 0.1, 0.2, 0.3,
                                                       0.4,  0.5,  0.6,  0.7,  0.8,  0.9,  0.95, 0.98, 0.995};
    BoundParams best = fb;
    double best_value = fb_value;
    for (const double d : kDeltas) {
        for (int i = 1; i <= 18; ++i) {
            for (int j = 1; i + j <= 19; ++j) {
                const BoundParams p{d, i / 20.0, j / 20.0, (20 - i - j) / 20.0};
                const double v = objective(p);
                if (v < best_value) {
                    best_value = v;
                    best = p;
                }
            }
        }
    }

    // u0 = logit(delta), (u1, u2) = log(eps_b / eps_d), log(eps_c / eps_d)
    const auto decode = [](const std::array<double, 3>& u) {
        const double delta = 1.0 / (1.0 + std::exp(-u[0]));
        const double wb = std::exp(u[1]);
        const double wc = std::exp(u[2]);
        const double total = wb + wc + 1.0;
        BoundParams p{delta, wb / total, wc / total, 0.0};
        p.eps_d = 1.0 - p.eps_b - p.eps_c;
        return p;
    };
    std::array<double, 3> u = {std::log(best.delta / (1.0 - best.delta)), std::log(best.eps_b / best.eps_d),
                               std::log(best.eps_c / best.eps_d)};
    double step = 0.5;
    double current = best_value;
    while (step > 1e-4) {
        bool improved = false;
        for (std::size_t axis = 0; axis < 3; ++axis) {
            for (const double dir : {1.0, -1.0}) {
                std::array<double, 3> trial = u;
                trial[axis] += dir * step;
                const BoundParams p = decode(trial);
                if (!p.valid()) continue;
                const double v = objective(p);
                if (v < current) {
                    current = v;
                    u = trial;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    const BoundParams refined = decode(u);
    if (refined.valid() && current < best_value) {
        best = refined;
        best_value = current;
    }
    return best_value <= fb_value ? best : fb;
}

}  // namespace surfgrow

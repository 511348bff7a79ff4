#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "surfgrow/error_ode.hpp"
#include "surfgrow/solver.hpp"

using namespace surfgrow;

namespace {

FourierField trig(std::vector<double> c, std::vector<double> s) { return FourierField::from_real(c, s); }

/// ||Res(t)||_{-1} for the linear PDE on a single mode k, evaluated from the
/// real expansion: Res = phi_t + phi_xxxx with phi linear in time.
double linear_mode_residual(double b0, double b1, double h, double s, double k) {
    const double phi = (1 - s) * b0 + s * b1;
    const double amp = (b1 - b0) / h + std::pow(k, 4) * phi;  // coefficient of sin(kx)
    return std::abs(amp) * std::sqrt(std::numbers::pi) / k;
}

}  // namespace

TEST(Residual, ZeroTrajectory) {
    const Trajectory traj = integrate(FourierField(4), SolverConfig{4, 1e-3, 5e-3, 1});
    for (std::size_t j = 0; j + 1 < traj.size(); ++j) EXPECT_EQ(residual_h_minus1(traj, j), 0.0);
}

TEST(Residual, LinearDecayMatchesDenseSampling) {
    // exact samples of the decaying mode exp(-k^4 t) sin(kx) with k = 2
    const double k = 2.0, h = 1e-2;
    std::vector<FourierField> states;
    Trajectory traj;
    traj.dt = h;
    for (int j = 0; j < 4; ++j) {
        traj.times.push_back(j * h);
        traj.states.push_back(trig({0, 0}, {0, std::exp(-std::pow(k, 4) * j * h)}));
    }
    ResidualOptions opt;
    opt.nonlinearity = Nonlinearity::Disabled;
    for (std::size_t j = 0; j + 1 < traj.size(); ++j) {
        const double b0 = traj.states[j].sin_coeff(2), b1 = traj.states[j + 1].sin_coeff(2);
        double dense = 0.0;
        for (int i = 0; i <= 64; ++i) dense = std::max(dense, linear_mode_residual(b0, b1, h, i / 64.0, k));
        const double got = residual_h_minus1(traj, j, opt);
        EXPECT_GT(dense, 0.0);
        EXPECT_NEAR(got, dense, 0.05 * dense);
    }
}

TEST(Residual, NonlinearSamplingCloseToDense) {
    const FourierField a0 = trig({0.3, 0.1}, {1.0, 0.0}).padded(16);
    const FourierField a1 = step(a0, 1e-3);
    double dense = 0.0;
    for (int i = 0; i <= 64; ++i) dense = std::max(dense, residual_norm_at(a0, a1, 1e-3, i / 64.0, nullptr));
    const double three = residual_h_minus1(a0, a1, 1e-3);
    EXPECT_LE(three, dense * (1 + 1e-12));
    EXPECT_NEAR(three, dense, 0.05 * dense);
    ResidualOptions opt;
    opt.safety = 2.0;
    EXPECT_NEAR(residual_h_minus1(a0, a1, 1e-3, opt), 2.0 * three, 1e-15);
}

TEST(Residual, SmallForReferenceScheme) {
    const Trajectory traj = integrate(trig({0}, {1}), SolverConfig{128, 1e-6, 2e-5, 1});
    for (std::size_t j = 0; j + 1 < traj.size(); ++j) {
        const double res = residual_h_minus1(traj, j);
        const StepCoefficients c = method1_coefficients(sup_norm_bound(derivative(traj.states[j], 2)), res);
        EXPECT_GT(res, 0.0);
        // gamma is negligible against alpha y for any y above 1e-8
        EXPECT_LT(c.gamma, 1e-8 * std::abs(c.alpha));
    }
}

TEST(Residual, ScalesWithStepSize) {
    const FourierField u0 = trig({0}, {1}).padded(32);
    const double r1 = residual_h_minus1(u0, step(u0, 1e-4), 1e-4);
    const double r2 = residual_h_minus1(u0, step(u0, 5e-5), 5e-5);
    EXPECT_NEAR(r1 / r2, 2.0, 0.1);
}

TEST(Residual, RequiresEveryStep) {
    const Trajectory traj = integrate(trig({0}, {1}), SolverConfig{8, 1e-3, 1e-2, 2});
    EXPECT_THROW((void)residual_h_minus1(traj, 0), InvalidArgumentError);
    const Trajectory full = integrate(trig({0}, {1}), SolverConfig{8, 1e-3, 1e-2, 1});
    EXPECT_THROW((void)residual_h_minus1(full, full.size() - 1), InvalidArgumentError);
}

TEST(Coefficients, MethodOne) {
    const StepCoefficients a = method1_coefficients(0.0, 0.0);
    EXPECT_DOUBLE_EQ(a.alpha, -0.5);
    EXPECT_DOUBLE_EQ(a.beta, 823543.0 / 2.0);
    EXPECT_DOUBLE_EQ(a.gamma, 0.0);
    EXPECT_DOUBLE_EQ(method1_coefficients(1.0, 0.0).alpha, 17.5);
    EXPECT_NEAR(method1_coefficients(0.0, 1e-6).gamma, 2e-12, 1e-27);
}

TEST(Coefficients, MethodTwo) {
    const BoundParams half{0.5, 1.0 / 3, 1.0 / 3, 1.0 / 3};
    EXPECT_DOUBLE_EQ(method2_coefficients(3.7, 0.0, 0.0, half).alpha, 3.7);
    EXPECT_DOUBLE_EQ(method2_coefficients(3.7, 0.0, 0.0, half).gamma, 0.0);
    const double beta = 2.0 * 823543.0 * std::pow(6.0, 7) / 65536.0;
    EXPECT_NEAR(method2_coefficients(0.0, 0.0, 0.0, half).beta, beta, 1e-9 * beta);
    const BoundParams near_one{1.0 - 1e-12, 1.0 / 3, 1.0 / 3, 1.0 / 3};
    EXPECT_NEAR(method2_coefficients(5.0, 0.0, 0.0, near_one).alpha, 0.0, 1e-10);
    // general term-by-term check
    const BoundParams p{0.2, 0.5, 0.3, 0.2};
    const StepCoefficients c = method2_coefficients(-2.0, 1.5, 1e-3, p);
    EXPECT_NEAR(c.alpha, 2 * 0.8 * -2.0 + 9 * 0.2 * 2.25 / (2 * 0.5), 1e-13);
    EXPECT_NEAR(c.gamma, 1e-6 / (2 * 0.2 * 0.2), 1e-18);
    EXPECT_NEAR(c.beta, 2 * 823543.0 / (65536.0 * std::pow(0.06, 7)), 1e-6 * c.beta);
}

TEST(Coefficients, MethodTwoRejectsInvalidParams) {
    EXPECT_THROW((void)method2_coefficients(0, 0, 0, {0.0, 1.0 / 3, 1.0 / 3, 1.0 / 3}), InvalidParamsError);
    EXPECT_THROW((void)method2_coefficients(0, 0, 0, {1.0, 1.0 / 3, 1.0 / 3, 1.0 / 3}), InvalidParamsError);
    EXPECT_THROW((void)method2_coefficients(0, 0, 0, {0.5, 0.5, 0.5, 0.5}), InvalidParamsError);
    EXPECT_THROW((void)method2_coefficients(0, 0, 0, {0.5, 0.0, 0.5, 0.5}), InvalidParamsError);
    EXPECT_NO_THROW((void)method2_coefficients(0, 0, 0, {0.5, 0.2, 0.3, 0.5 + 1e-13}));
}

TEST(AdvanceBound, ZeroIsInvariant) {
    for (const double alpha : {-10.0, 0.0, 50.0}) {
        const ErrorBoundState s = advance_bound({}, {alpha, 1e6, 0.0}, 1e-3);
        EXPECT_FALSE(s.blown_up);
        EXPECT_LE(s.y, 1e-29);
        EXPECT_NEAR(s.t, 1e-3, 0.0);
    }
}

TEST(AdvanceBound, LinearCaseIsClosedForm) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-20.0, 20.0), pos(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = u(rng), g = pos(rng), y = pos(rng), h = 1e-3 * pos(rng) + 1e-6;
        const ErrorBoundState s = advance_bound({0.0, y, {}, false}, {a, 0.0, g}, h, 0.0);
        const double exact = y * std::exp(a * h) + g * (std::exp(a * h) - 1.0) / a;
        EXPECT_NEAR(s.y, exact, 1e-12 * exact);
    }
    EXPECT_NEAR(advance_bound({0.0, 1.0, {}, false}, {0.0, 0.0, 2.0}, 0.5, 0.0).y, 2.0, 1e-15);
}

TEST(AdvanceBound, QuinticBlowupNotLaterThanTruth) {
    const double beta = 823543.0 / 2.0, y0 = 0.01;
    const double t_blow = 1.0 / (4.0 * beta * std::pow(y0, 4));
    ErrorBoundState s{0.0, y0, {}, false};
    const double h = t_blow / 2000.0;
    while (!s.blown_up && s.t < 2.0 * t_blow) {
        const double exact = oracle::quintic_exact(y0, beta, s.t);
        if (std::isfinite(exact)) { EXPECT_GE(s.y, exact * (1 - 1e-12)) << "t = " << s.t; }
        s = advance_bound(s, {0.0, beta, 0.0}, h);
    }
    EXPECT_TRUE(s.blown_up);
    EXPECT_LE(s.t, t_blow + h);
    EXPECT_GT(s.t, 0.5 * t_blow);
}

TEST(AdvanceBound, MonotoneInAllInputs) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double y = 1e-3 * u(rng), a = 40.0 * (u(rng) - 0.5), b = 1e5 * u(rng), g = 1e-3 * u(rng);
        const double h = 1e-3;
        const ErrorBoundState base{0.0, y, {}, false};
        const ErrorBoundState r = advance_bound(base, {a, b, g}, h);
        if (r.blown_up) continue;
        const double f = 1.0 + 0.5 * u(rng);
        const auto at_least = [&](const ErrorBoundState& s) { EXPECT_TRUE(s.blown_up || s.y >= r.y * (1 - 1e-14)); };
        at_least(advance_bound({0.0, y * f + 1e-9, {}, false}, {a, b, g}, h));
        at_least(advance_bound(base, {a + std::abs(a) * (f - 1) + 0.1, b, g}, h));
        at_least(advance_bound(base, {a, b * f, g}, h));
        at_least(advance_bound(base, {a, b, g * f}, h));
    }
}

TEST(AdvanceBound, DominatesFineEuler) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int stream = 0; stream < 200; ++stream) {
        ErrorBoundState s{0.0, 1e-4 * u(rng), {}, false};
        double ref = s.y;
        const double h = 1e-3;
        for (int i = 0; i < 50 && !s.blown_up; ++i) {
            const StepCoefficients c{30.0 * (u(rng) - 0.5), 1e4 * u(rng), 1e-4 * u(rng)};
            s = advance_bound(s, c, h);
            // one restarted step of the oracle from the certified value, and a running oracle path
            ref = oracle::fine_euler(ref, c.alpha, c.beta, c.gamma, h, 100);
            if (s.blown_up) break;
            const double slack = 1.0 + 10.0 * std::abs(c.alpha) * h / 100.0 + 1e-12;
            EXPECT_GE(s.y * slack, ref);
        }
    }
}

TEST(AdvanceBound, RejectsInvalidInput) {
    EXPECT_THROW((void)advance_bound({0, 0, {}, true}, {0, 0, 0}, 1e-3), InvalidArgumentError);
    EXPECT_THROW((void)advance_bound({}, {0, 0, 0}, 0.0), InvalidArgumentError);
    EXPECT_THROW((void)advance_bound({}, {0, -1, 0}, 1e-3), InvalidArgumentError);
    EXPECT_THROW((void)advance_bound({}, {0, 0, -1}, 1e-3), InvalidArgumentError);
    EXPECT_THROW((void)advance_bound({}, {NAN, 0, 0}, 1e-3), InvalidArgumentError);
}

TEST(AdvanceBound, SignBehaviourOnSyntheticStreams) {
    ErrorBoundState decay{0.0, 1e-3, {}, false}, grow{0.0, 1e-3, {}, false};
    for (int i = 0; i < 100; ++i) {
        const double prev_d = decay.y, prev_g = grow.y;
        decay = advance_bound(decay, {-5.0, 10.0, 0.0}, 1e-3);
        grow = advance_bound(grow, {5.0, 10.0, 0.0}, 1e-3);
        EXPECT_LT(decay.y, prev_d);
        EXPECT_GT(grow.y, prev_g);
    }
}

TEST(AdvanceBound, RestartConsistency) {
    // one step of length h and two of length h/2 both dominate the oracle
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const StepCoefficients c{20.0 * (u(rng) - 0.5), 1e5 * u(rng), 1e-3 * u(rng)};
        const double y = 1e-3 * u(rng), h = 1e-3;
        const ErrorBoundState one = advance_bound({0, y, {}, false}, c, h);
        const ErrorBoundState half = advance_bound(advance_bound({0, y, {}, false}, c, h / 2), c, h / 2);
        const double ref = oracle::fine_euler(y, c.alpha, c.beta, c.gamma, h, 1000);
        const double slack = 1.0 + 10.0 * std::abs(c.alpha) * h / 1000.0 + 1e-12;
        if (!one.blown_up) { EXPECT_GE(one.y * slack, ref); }
        if (!half.blown_up) { EXPECT_GE(half.y * slack, ref); }
        EXPECT_NEAR(half.t, one.t, 1e-18);
    }
}

TEST(OptimizeParams, DegenerateObjectiveReturnsFallback) {
    EXPECT_EQ(optimize_params(3.0, 1.0, 0.0, 0.0), BoundParams::fallback());
}

TEST(OptimizeParams, NegativeLambdaPushesDeltaSmall) {
    const double lambda = -2.0, s = 0.1, y = 1e-3;
    const BoundParams p = optimize_params(lambda, s, 0.0, y);
    EXPECT_TRUE(p.valid());
    EXPECT_LT(p.delta, 0.5);
    EXPECT_LE(method2_rhs(lambda, s, 0.0, y, p), method2_rhs(lambda, s, 0.0, y, BoundParams::fallback()));
}

TEST(OptimizeParams, NeverWorseThanFallbackAndAlwaysValid) {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double lambda = 40.0 * (u(rng) - 0.5), s = 3.0 * u(rng), res = std::pow(10.0, -6 * u(rng) - 1);
        const double y = std::pow(10.0, -10 * u(rng));
        const BoundParams p = optimize_params(lambda, s, res, y);
        EXPECT_TRUE(p.valid());
        EXPECT_NEAR(p.eps_b + p.eps_c + p.eps_d, 1.0, 1e-12);
        EXPECT_GT(p.delta, 0.0);
        EXPECT_LT(p.delta, 1.0);
        EXPECT_LE(method2_rhs(lambda, s, res, y, p), method2_rhs(lambda, s, res, y, BoundParams::fallback()));
    }
}

TEST(BoundParams, Validation) {
    EXPECT_TRUE(BoundParams::fallback().valid());
    EXPECT_FALSE((BoundParams{0.5, 0.4, 0.4, 0.4}).valid());
    EXPECT_THROW((BoundParams{-0.1, 0.2, 0.3, 0.5}).validate(), InvalidParamsError);
}

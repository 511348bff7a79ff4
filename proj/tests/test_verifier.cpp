#include <gtest/gtest.h>

#include <cmath>

#include "surfgrow/verifier.hpp"

using namespace surfgrow;

namespace {

FourierField trig(std::vector<double> c, std::vector<double> s) { return FourierField::from_real(c, s); }

VerificationConfig small_config(Method m, std::size_t modes, double dt, double t_end, std::size_t eig_n) {
    VerificationConfig cfg;
    cfg.method = m;
    cfg.solver.n_modes = modes;
    cfg.solver.dt = dt;
    cfg.solver.t_end = t_end;
    cfg.eig_n = eig_n;
    return cfg;
}

}  // namespace

TEST(Verifier, ZeroDatumIsImmediatelySmall) {
    for (const Method m : {Method::WorstCase, Method::Eigenvalue}) {
        const VerificationReport r = run(FourierField(4), small_config(m, 8, 1e-3, 1e-2, 4));
        EXPECT_EQ(r.verdict, Verdict::GlobalBySmallness);
        EXPECT_EQ(r.steps_taken, 0u);
        EXPECT_EQ(r.t_final, 0.0);
        EXPECT_EQ(r.decisive.y, 0.0);
    }
}

TEST(Verifier, SmallnessVerdictIsRecomputableFromLog) {
    VerificationConfig cfg = small_config(Method::Eigenvalue, 16, 1e-4, 1.0, 16);
    const VerificationReport r = run(trig({0}, {0.4}), cfg);
    ASSERT_EQ(r.verdict, Verdict::GlobalBySmallness);
    EXPECT_LT(r.decisive.phi_h1 + std::sqrt(r.decisive.y), cfg.smallness_threshold);
    EXPECT_EQ(r.steps.back().t, r.decisive.t);
    EXPECT_LT(r.steps.back().upper(), cfg.smallness_threshold);
    // every earlier logged record did not yet satisfy the criterion
    for (std::size_t i = 0; i + 1 < r.steps.size(); ++i) EXPECT_GE(r.steps[i].upper(), cfg.smallness_threshold);
}

TEST(Verifier, HorizonVerdict) {
    VerificationConfig cfg = small_config(Method::Eigenvalue, 32, 1e-5, 1e-2, 32);
    cfg.time_horizon = 1e-3;
    const VerificationReport r = run(trig({0}, {1.0}), cfg);
    EXPECT_EQ(r.verdict, Verdict::VerifiedUntilHorizon);
    EXPECT_GE(r.t_final, 1e-3 - 1e-15);
    EXPECT_LT(r.t_final, 1e-3 + 1.5e-5);
}

TEST(Verifier, InconclusiveAtEndOfRun) {
    const VerificationReport r = run(trig({0}, {1.0}), small_config(Method::WorstCase, 16, 1e-5, 1e-3, 16));
    EXPECT_EQ(r.verdict, Verdict::Inconclusive);
    EXPECT_EQ(r.steps_taken, 100u);
    EXPECT_NEAR(r.t_final, 1e-3, 1e-15);
}

TEST(Verifier, MethodOneBlowsUpForLargeData) {
    const VerificationReport r = run(trig({0}, {2.0}), small_config(Method::WorstCase, 64, 1e-5, 0.3, 64));
    EXPECT_EQ(r.verdict, Verdict::BoundBlowup);
    EXPECT_LT(r.t_final, 0.3);
    EXPECT_TRUE(std::isinf(r.decisive.y));
}

TEST(Verifier, CompareMethodsSharesOneTrajectory) {
    VerificationConfig cfg = small_config(Method::Eigenvalue, 128, 1e-5, 2e-3, 32);
    cfg.log_every = 1;
    const FourierField u0 = trig({0}, {1.0});
    const MethodComparison cmp = compare_methods(u0, cfg);
    EXPECT_EQ(cmp.worst_case.verdict, Verdict::Inconclusive);
    EXPECT_EQ(cmp.eigenvalue.verdict, Verdict::Inconclusive);
    ASSERT_EQ(cmp.worst_case.steps.size(), cmp.eigenvalue.steps.size());
    ASSERT_EQ(cmp.traces.size(), 200u);
    for (std::size_t i = 0; i < cmp.worst_case.steps.size(); ++i) {
        EXPECT_EQ(cmp.worst_case.steps[i].t, cmp.eigenvalue.steps[i].t);
        EXPECT_EQ(cmp.worst_case.steps[i].phi_h1, cmp.eigenvalue.steps[i].phi_h1);
        EXPECT_EQ(cmp.worst_case.steps[i].res, cmp.eigenvalue.steps[i].res);
    }
    for (std::size_t i = 0; i < cmp.traces.size(); ++i) {
        EXPECT_EQ(cmp.traces[i].t, cmp.eigenvalue.steps[i + 1].t);
        if (cmp.traces[i].feasible) { EXPECT_LE(cmp.traces[i].lambda_n, cmp.traces[i].lambda_tilde); }
        EXPECT_LT(cmp.traces[i].lambda_tilde, cmp.traces[i].worst_case);
    }
    // identical to a single-method run on the same config
    cfg.method = Method::Eigenvalue;
    const VerificationReport solo = run(u0, cfg);
    ASSERT_EQ(solo.steps.size(), cmp.eigenvalue.steps.size());
    for (std::size_t i = 0; i < solo.steps.size(); ++i) {
        EXPECT_EQ(solo.steps[i].phi_h1, cmp.eigenvalue.steps[i].phi_h1);
        EXPECT_EQ(solo.steps[i].y, cmp.eigenvalue.steps[i].y);
    }
    // eigenvalue estimate gives the tighter bound
    EXPECT_LT(cmp.eigenvalue.decisive.y, cmp.worst_case.decisive.y);
}

TEST(Verifier, InfeasibleStepsFallBackToWorstCase) {
    // sin x needs n >= 17; n = 4 is infeasible at every step
    VerificationConfig cfg = small_config(Method::Eigenvalue, 16, 1e-5, 5e-4, 4);
    const VerificationReport r = run(trig({0}, {1.0}), cfg);
    EXPECT_EQ(r.feasibility_violations, r.steps_taken);
    for (std::size_t i = 1; i < r.steps.size(); ++i) {
        const StepRecord& s = r.steps[i];
        EXPECT_FALSE(s.feasible);
        const double lambda = s.worst_case;
        const BoundParams p{s.delta, s.eps_b, s.eps_c, s.eps_d};
        const double s_xx = std::sqrt((lambda + 0.5) / 4.5);
        EXPECT_NEAR(s.alpha, method2_coefficients(lambda, s_xx, s.res, p).alpha, 1e-9 * std::abs(s.alpha));
    }
}

TEST(Verifier, FeasibleStepsNeverUseInfeasibleBound) {
    VerificationConfig cfg = small_config(Method::Eigenvalue, 64, 1e-5, 1e-3, 20);
    const VerificationReport r = run(trig({0.2}, {1.0}), cfg);
    for (std::size_t i = 1; i < r.steps.size(); ++i) {
        const StepRecord& s = r.steps[i];
        if (!s.feasible) continue;
        EXPECT_LE(s.lambda_n, s.lambda_tilde);
        EXPECT_GE(20.0, (s.modes_needed - 1.0) / 2.0);
    }
}

TEST(EigenBoundTracker, EndpointScheduleTakesLargerEndpoint) {
    const FourierField a0 = trig({0}, {1.0}).padded(32);
    const FourierField a1 = step(a0, 1e-3);
    EigenBoundTracker tracker(32, {});
    const double wc = std::max(worst_case_bound(a0), worst_case_bound(a1));
    const StepEigen e = tracker.bound_step(a0, a1, wc);
    const EigenBoundReport r0 = rigorous_bound(a0, 32), r1 = rigorous_bound(a1, 32);
    ASSERT_TRUE(e.feasible);
    EXPECT_NEAR(e.lambda_bound, std::max(*r0.lambda_rigorous, *r1.lambda_rigorous), 1e-9);
    EXPECT_EQ(tracker.solves(), 2u);
    // the next step reuses the end solve
    (void)tracker.bound_step(a1, step(a1, 1e-3), wc);
    EXPECT_EQ(tracker.solves(), 3u);
}

TEST(EigenBoundTracker, AnchoredBoundDominatesEigenvaluesAlongSteps) {
    EigenSchedule sched;
    sched.max_interval = 25;
    sched.theta = 0.05;
    sched.penalty_limit = 0.5;
    const std::size_t n = 48;
    EigenBoundTracker tracker(n, sched);
    FourierField a = trig({0}, {1.5}).padded(64);
    for (int j = 0; j < 60; ++j) {
        const FourierField next = step(a, 1e-4);
        const double wc = std::max(worst_case_bound(a), worst_case_bound(next));
        const StepEigen e = tracker.bound_step(a, next, wc);
        EXPECT_LE(e.lambda_bound, wc);
        if (e.feasible) {
            const FourierField mid = FourierField::combine(0.5, a, 0.5, next);
            for (const FourierField* f : std::initializer_list<const FourierField*>{&a, &mid, &next}) {
                EXPECT_LE(rigorous_bound(*f, 96).lambda_n, e.lambda_bound + 1e-9);
            }
        }
        a = next;
    }
    EXPECT_LT(tracker.solves(), 10u);
}

TEST(VerificationConfig, Validation) {
    VerificationConfig cfg = small_config(Method::Eigenvalue, 16, 1e-3, 1e-2, 32);
    EXPECT_THROW(cfg.validate(), InvalidArgumentError);
    cfg.eig_n = 8;
    EXPECT_NO_THROW(cfg.validate());
    cfg.smallness_threshold = 0.0;
    EXPECT_THROW(cfg.validate(), InvalidArgumentError);
    cfg.smallness_threshold = 0.5;
    cfg.time_horizon = -1.0;
    EXPECT_THROW(cfg.validate(), InvalidArgumentError);
    cfg.time_horizon.reset();
    cfg.eigen.max_interval = 5;
    cfg.eigen.theta = 1.0;
    EXPECT_THROW(cfg.validate(), InvalidArgumentError);
    cfg.eigen.theta = 0.1;
    std::vector<double> high(20, 0.0);
    high.back() = 0.1;
    EXPECT_THROW(run(trig(std::vector<double>(20, 0.0), high), cfg), InvalidArgumentError);
    // zero padding beyond the solver modes is accepted
    EXPECT_NO_THROW(run(trig({0}, {0.1}).padded(40), cfg));
}

TEST(Verifier, NamesAreStable) {
    EXPECT_EQ(to_string(Verdict::GlobalBySmallness), "GlobalBySmallness");
    EXPECT_EQ(to_string(Verdict::VerifiedUntilHorizon), "VerifiedUntilHorizon");
    EXPECT_EQ(to_string(Verdict::BoundBlowup), "BoundBlowup");
    EXPECT_EQ(to_string(Verdict::Inconclusive), "Inconclusive");
    EXPECT_EQ(to_string(Method::WorstCase), "worst_case");
    EXPECT_EQ(to_string(Method::Eigenvalue), "eigenvalue");
}

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "panoc/panoc.hpp"

using namespace panoc;

namespace {

TEST(ProxZero, Identity) {
    const Vector p{1.0, -2.5, 0.0};
    EXPECT_EQ(prox_zero(p), p);
}

TEST(ProxBox, Clamps) {
    const Vector p{-3.0, 0.2, 5.0};
    const Vector z = prox_box(p, {-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0});
    EXPECT_EQ(z, (Vector{-1.0, 0.2, 1.0}));
}

TEST(ProxL1, KnownValues) {
    EXPECT_DOUBLE_EQ(prox_l1({3.0}, 1.0, 0.5)[0], 2.5);
    EXPECT_DOUBLE_EQ(prox_l1({-3.0}, 1.0, 0.5)[0], -2.5);
    EXPECT_DOUBLE_EQ(prox_l1({0.3}, 1.0, 0.5)[0], 0.0);
    EXPECT_DOUBLE_EQ(prox_l1({-0.3}, 1.0, 0.5)[0], 0.0);
    // at |p| == gamma w the shrunk magnitude is exactly zero
    EXPECT_DOUBLE_EQ(prox_l1({0.5}, 1.0, 0.5)[0], 0.0);
}

TEST(ProxL0, ThresholdAndTie) {
    const double gamma = 0.5;
    const double w = 1.0;
    const double thr = std::sqrt(2.0 * gamma * w); // = 1
    EXPECT_DOUBLE_EQ(prox_l0({2.0}, gamma, w)[0], 2.0);
    EXPECT_DOUBLE_EQ(prox_l0({0.5}, gamma, w)[0], 0.0);
    // exact tie goes to zero, deterministically, for both signs
    EXPECT_DOUBLE_EQ(prox_l0({thr}, gamma, w)[0], 0.0);
    EXPECT_DOUBLE_EQ(prox_l0({-thr}, gamma, w)[0], 0.0);
}

TEST(ProxL1, MatchesGridBruteForce) {
    const double w = 0.7;
    for (double gamma : {0.5, 1.0, 2.0}) {
        for (double p : {-2.0, -0.4, 0.0, 0.7, 3.0}) {
            const auto grid = oracles::grid_prox(
                [w](double z) { return w * std::abs(z); }, p, gamma, -5.0, 5.0);
            const double z = prox_l1({p}, gamma, w)[0];
            const double v = w * std::abs(z) + (z - p) * (z - p) / (2.0 * gamma);
            EXPECT_LE(v, grid.value + 1e-12) << "p=" << p << " gamma=" << gamma;
            EXPECT_NEAR(z, grid.point, 2e-4) << "p=" << p << " gamma=" << gamma;
        }
    }
}

TEST(ProxL0, MatchesGridBruteForce) {
    const double w = 1.0;
    for (double gamma : {0.25, 0.5}) {
        for (double p : {-2.0, -0.6, 0.3, 1.7}) { // away from the tie point
            const auto grid = oracles::grid_prox(
                [w](double z) { return z != 0.0 ? w : 0.0; }, p, gamma, -5.0, 5.0);
            const double z = prox_l0({p}, gamma, w)[0];
            const double v = (z != 0.0 ? w : 0.0) + (z - p) * (z - p) / (2.0 * gamma);
            EXPECT_LE(v, grid.value + 1e-12) << "p=" << p << " gamma=" << gamma;
        }
    }
}

TEST(ProxBox, MatchesGridBruteForce) {
    const BoxIndicator box(Vector{-1.0}, Vector{2.0});
    for (double gamma : {0.5, 1.0}) {
        for (double p : {-3.0, 0.4, 2.6}) {
            const auto grid = oracles::grid_prox(
                [](double z) {
                    return (z < -1.0 || z > 2.0) ? std::numeric_limits<double>::infinity() : 0.0;
                },
                p, gamma, -1.0, 2.0);
            EXPECT_NEAR(box.prox({p}, gamma).point[0], grid.point, 2e-4);
        }
    }
}

TEST(GEval, Values) {
    const L1Norm l1(0.5);
    EXPECT_DOUBLE_EQ(l1.g_eval({3.0, -4.0}), 3.5);
    const ZeroNorm l0(1.5);
    EXPECT_DOUBLE_EQ(l0.g_eval({3.0, 0.0, -0.1}), 3.0);
    const BoxIndicator box(2, 1.0);
    EXPECT_DOUBLE_EQ(box.g_eval({0.5, -1.0}), 0.0);
    EXPECT_TRUE(std::isinf(box.g_eval({0.5, -1.0001})));
}

TEST(MoreauEnvelopes, ClosedFormsMatchBruteForce) {
    // box: squared distance over two gammas
    const BoxIndicator box(1, 1.0);
    EXPECT_DOUBLE_EQ(*box.moreau_envelope({3.0}, 0.5), 4.0);
    EXPECT_DOUBLE_EQ(*box.moreau_envelope({0.3}, 0.5), 0.0);
    // l1: Huber, both branches
    const L1Norm l1(0.5);
    EXPECT_DOUBLE_EQ(*l1.moreau_envelope({3.0}, 1.0), 1.375);
    EXPECT_DOUBLE_EQ(*l1.moreau_envelope({0.3}, 1.0), 0.045);
    // l0: min of spike cost and keep cost, coordinatewise
    const ZeroNorm l0(1.0);
    EXPECT_DOUBLE_EQ(*l0.moreau_envelope({3.0, 0.5}, 1.0), 1.125);
    // cross-check l1 against the grid minimum
    const auto grid = oracles::grid_prox([](double z) { return 0.5 * std::abs(z); }, 1.7, 0.8,
                                         -5.0, 5.0);
    EXPECT_NEAR(*l1.moreau_envelope({1.7}, 0.8), grid.value, 1e-7);
}

TEST(Witness, ExactProxesCertifyStationarity) {
    // l1 at p=3: point 2.5, witness 0.5 = w sign(point), a true subgradient
    const L1Norm l1(0.5);
    const ProxResult r = l1.prox({3.0}, 1.0);
    ASSERT_TRUE(r.witness.has_value());
    EXPECT_DOUBLE_EQ((*r.witness)[0], 0.5);
    EXPECT_EQ(r.exactness.kind, Exactness::Exact);
    // box at an exterior point: witness is the normal-cone direction
    const BoxIndicator box(1, 1.0);
    const ProxResult rb = box.prox({3.0}, 0.5);
    EXPECT_DOUBLE_EQ(rb.point[0], 1.0);
    EXPECT_DOUBLE_EQ((*rb.witness)[0], 4.0);
}

TEST(InexactProx, ReachesToleranceAndCertifies) {
    InexactProxWrapper w;
    w.exact = std::make_shared<L1Norm>(0.5);
    const double delta = 1e-6;
    const ProxResult r = inexact_prox(w, {3.0}, 1.0, {0.0}, delta);
    EXPECT_EQ(r.exactness.kind, Exactness::DeltaStationary);
    EXPECT_DOUBLE_EQ(r.exactness.delta, delta);
    EXPECT_NEAR(r.point[0], 2.5, 1e-5);
    ASSERT_TRUE(r.witness.has_value());
    // the witness is (up to delta) a subgradient of 0.5 |.| at the point
    EXPECT_LE(std::abs((*r.witness)[0]), 0.5 + 1e-9);
    // certificate: || witness + (point - p)/gamma || <= delta by construction
    EXPECT_LE(std::abs((*r.witness)[0] + (r.point[0] - 3.0) / 1.0), delta);
}

TEST(InexactProx, InfeasibleWarmStartIsFine) {
    InexactProxWrapper w;
    w.exact = std::make_shared<BoxIndicator>(1, 1.0);
    // warm start outside the box has infinite inner objective; any feasible
    // result beats it
    const ProxResult r = inexact_prox(w, {3.0}, 0.5, {2.0}, 1e-8);
    EXPECT_NEAR(r.point[0], 1.0, 1e-7);
}

// An oracle that claims to be a prox but just returns its input. The inner
// loop then converges to the unconstrained minimizer of the quadratic, whose
// inner objective is worse than the warm start's; the wrapper must notice.
struct IdentityProx final : ProxOracle {
    double g_eval(const Vector& x) const override { return 0.5 * std::abs(x[0]); }
    ProxResult prox(const Vector& p, double) const override {
        ProxResult r;
        r.point = p;
        r.g_value = g_eval(p);
        return r;
    }
};

TEST(InexactProx, DetectsWarmStartRegression) {
    InexactProxWrapper w;
    w.exact = std::make_shared<IdentityProx>();
    EXPECT_THROW(inexact_prox(w, {3.0}, 1.0, {2.5}, 1e-6), InvariantViolation);
}

TEST(InexactProx, InnerBudget) {
    InexactProxWrapper w;
    w.exact = std::make_shared<L1Norm>(0.5);
    w.max_inner_iters = 2;
    EXPECT_THROW(inexact_prox(w, {3.0}, 1.0, {0.0}, 1e-12), InnerBudgetExhausted);
}

TEST(InexactProxWrapper, ToleranceSchedule) {
    InexactProxWrapper w;
    w.delta = 1e-3;
    EXPECT_DOUBLE_EQ(w.delta_for(7), 1e-3);
    w.delta_schedule = [](std::size_t k) { return 1.0 / double(k + 1); };
    EXPECT_DOUBLE_EQ(w.delta_for(3), 0.25);
}

} // namespace

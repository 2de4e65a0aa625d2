#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "atflow/flow.hpp"
#include "atflow/galerkin.hpp"
#include "support.hpp"

using namespace atflow;
using atflow::testing::kPi;
using atflow::testing::max_abs;
using atflow::testing::random_smooth;

namespace {

ScalarField2D two_region(const Grid& g) {
    return ScalarField2D::sample(g, [](double x, double) { return x < 0.5 ? 0.0 : 1.0; });
}

} // namespace

TEST(StepSemiImplicit, StationaryDataIsFixedPoint) {
    const Grid g(24, 24);
    const ScalarField2D c(g, 0.45);
    const FlowState s{0.0, c, ScalarField2D(g, 1.0), 0};
    const FlowState next = step_semi_implicit(s, c, ATParams{0.05, 1e-4}, 1e-3);
    EXPECT_LT(max_abs(next.u - c), 1e-12);
    EXPECT_LT(max_abs(next.z - ScalarField2D(g, 1.0)), 1e-12);
    EXPECT_EQ(next.step_count, 1u);
}

TEST(StepSemiImplicit, HeatFlowContracts) {
    const Grid g(32, 32);
    ScalarField2D u = ScalarField2D::sample(g, [](double x, double y) { return std::cos(kPi * x) + 0.5 * std::cos(2 * kPi * y); });
    const ScalarField2D z(g, 1.0);
    const ScalarField2D zero(g, 0.0);
    double prev = l2_norm(u);
    for (int n = 0; n < 20; ++n) {
        u = solve_u_step(u, z, zero, ATParams{}, 1e-3);
        const double now = l2_norm(u);
        EXPECT_LT(now, prev);
        prev = now;
    }
}

TEST(StepSemiImplicit, RejectsNonPositiveStep) {
    const Grid g(8, 8);
    const FlowState s{0.0, ScalarField2D(g), ScalarField2D(g, 1.0), 0};
    EXPECT_THROW(step_semi_implicit(s, ScalarField2D(g), ATParams{}, 0.0), UsageError);
}

TEST(StepSemiImplicit, AgreesWithGalerkinBackend) {
    std::mt19937_64 rng(51);
    const Grid g(32, 32);
    const SpectralBasis b(g, 64);
    const ATParams p{0.1, 1e-3};
    const auto band = [&](double amp, double offset) {
        return reconstruct(project(random_smooth(g, rng, 3, amp, offset), b), b);
    };
    const ScalarField2D gd = band(0.5, 0.5);
    const ScalarField2D u0 = band(0.5, 0.5);
    const ScalarField2D z0 = band(0.05, 0.9);
    const CoeffVector c0{project(u0, b), project(z0, b)};
    const std::vector<double> gc = project(gd, b);
    const GalerkinResult gal =
        integrate_galerkin(c0, b, gc, p, 0.5 * galerkin_default_dt(b, p), 0.1, GalerkinOptions{0, false});
    const FlowResult fd = run_flow(u0, z0, gd, p, 1.25e-4, 0.1, FlowOptions{0, false});
    const double err = std::hypot(l2_norm(fd.final_state.u - reconstruct(gal.final_coeffs.a, b)),
                                  l2_norm(fd.final_state.z - reconstruct(gal.final_coeffs.b, b)));
    EXPECT_LT(err, 1e-3);
}

TEST(RunFlow, ConstantDataIsFlat) {
    const Grid g(20, 20);
    const ScalarField2D c(g, 0.8);
    const FlowResult res = run_flow(c, ScalarField2D(g, 1.0), c, ATParams{0.05, 1e-4}, 1e-3, 0.01);
    for (const DiagnosticsRow& r : res.trajectory.diagnostics) {
        EXPECT_EQ(r.energy, 0.0);
        EXPECT_EQ(r.f0_norm, 0.0);
        EXPECT_EQ(r.f1_norm, 0.0);
        EXPECT_NEAR(r.dt_u_l2, 0.0, 1e-12);
        EXPECT_NEAR(r.dt_z_l2, 0.0, 1e-12);
    }
    EXPECT_TRUE(res.warnings.empty());
}

TEST(RunFlow, TimesStrictlyIncreasingAndEndAtFinalTime) {
    const Grid g(16, 16);
    std::mt19937_64 rng(52);
    const ScalarField2D gd = random_smooth(g, rng);
    const FlowResult res = run_flow(gd, ScalarField2D(g, 1.0), gd, ATParams{}, 0.003, 0.01, FlowOptions{2, true});
    const auto& t = res.trajectory.times;
    for (std::size_t n = 1; n < t.size(); ++n) EXPECT_GT(t[n], t[n - 1]);
    EXPECT_EQ(t.back(), 0.01);
    EXPECT_EQ(res.trajectory.diagnostics.size(), t.size());
    EXPECT_EQ(res.trajectory.snapshots.front().t, 0.0);
    EXPECT_EQ(res.trajectory.snapshots.back().t, 0.01);
}

TEST(RunFlow, FirstOrderInTime) {
    std::mt19937_64 rng(53);
    const Grid g(32, 32);
    const ATParams p{0.1, 1e-3};
    const ScalarField2D gd = random_smooth(g, rng, 4, 0.5, 0.5);
    const ScalarField2D z0 = random_smooth(g, rng, 3, 0.05, 0.9);
    std::vector<ScalarField2D> u;
    for (double dt : {4e-3, 2e-3, 1e-3}) u.push_back(run_flow(gd, z0, gd, p, dt, 0.1, FlowOptions{0, false}).final_state.u);
    const double e1 = l2_norm(u[0] - u[1]);
    const double e2 = l2_norm(u[1] - u[2]);
    EXPECT_GE(std::log2(e1 / e2), 0.8);
}

TEST(RunFlow, MaximumPrincipleAndEnergyDecayOnDiscontinuousData) {
    const Grid g(48, 48);
    const ATParams p{0.05, 1e-4};
    const ScalarField2D gd = two_region(g);
    const FlowResult res = run_flow(gd, ScalarField2D(g, 1.0), gd, p, 1e-4, 0.02);
    const auto& rows = res.trajectory.diagnostics;
    const double tol = 1e-8 * (1.0 + rows.front().energy);
    for (std::size_t n = 0; n < rows.size(); ++n) {
        EXPECT_LT(rows[n].f0_norm, 1e-8);
        EXPECT_LT(rows[n].f1_norm, 1e-8);
        if (n > 0) {
            EXPECT_LE(rows[n].energy, rows[n - 1].energy + tol);
        }
    }
}

TEST(RunFlow, TruncatedAndClassicalAgreeBitwiseInsideBand) {
    std::mt19937_64 rng(54);
    const Grid g(24, 24);
    const ScalarField2D gd = random_smooth(g, rng, 4, 1.0, 0.5);
    const ScalarField2D z0 = random_smooth(g, rng, 3, 0.1, 0.8);
    const FlowResult a = run_flow(gd, z0, gd, ATParams{0.05, 1e-3, Model::truncated}, 1e-3, 0.02, FlowOptions{0, false});
    const FlowResult b = run_flow(gd, z0, gd, ATParams{0.05, 1e-3, Model::classical}, 1e-3, 0.02, FlowOptions{0, false});
    ASSERT_GE(a.final_state.z.min(), 0.0);
    const auto same = [](const ScalarField2D& x, const ScalarField2D& y) {
        return std::equal(x.values().begin(), x.values().end(), y.values().begin());
    };
    EXPECT_TRUE(same(a.final_state.u, b.final_state.u));
    EXPECT_TRUE(same(a.final_state.z, b.final_state.z));
}

TEST(RunFlow, MirrorEquivariance) {
    std::mt19937_64 rng(55);
    const Grid g(20, 16);
    const ScalarField2D gd = random_smooth(g, rng, 4, 1.0, 0.5);
    const ATParams p{0.05, 1e-3};
    const FlowResult a = run_flow(gd, ScalarField2D(g, 1.0), gd, p, 1e-3, 0.02, FlowOptions{0, false});
    const FlowResult b = run_flow(gd.mirrored_x(), ScalarField2D(g, 1.0), gd.mirrored_x(), p, 1e-3, 0.02, FlowOptions{0, false});
    EXPECT_LT(max_abs(a.final_state.u.mirrored_x() - b.final_state.u), 1e-9);
    EXPECT_LT(max_abs(a.final_state.z.mirrored_x() - b.final_state.z), 1e-9);
}

TEST(RunFlow, TwoRegionMinimumSitsAtDiscontinuity) {
    const Grid g(64, 64);
    const FlowResult res = run_flow(two_region(g), ScalarField2D(g, 1.0), two_region(g), ATParams{0.05, 1e-4}, 1e-4, 0.05,
                                    FlowOptions{0, false});
    const ScalarField2D& z = res.final_state.z;
    const auto it = std::min_element(z.values().begin(), z.values().end());
    const std::size_t i = static_cast<std::size_t>(it - z.values().begin()) % g.nx();
    // The jump lies between columns 31 (x < 0.5) and 32.
    EXPECT_LE(std::min(i > 31 ? i - 31 : 31 - i, i > 32 ? i - 32 : 32 - i), 2u);
}

TEST(RunFlow, WarnsWhenInitialPhaseFieldLeavesBand) {
    const Grid g(10, 10);
    const ScalarField2D c(g, 0.5);
    const FlowResult res = run_flow(c, ScalarField2D(g, 1.2), c, ATParams{}, 1e-3, 2e-3);
    EXPECT_EQ(res.warnings.size(), 1u);
}

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <tuple>

#include "atflow/galerkin.hpp"
#include "support.hpp"

using namespace atflow;
using atflow::testing::kPi;
using atflow::testing::max_abs;
using atflow::testing::random_smooth;

namespace {

double coeff_distance(const CoeffVector& x, const CoeffVector& y) {
    double s = 0.0;
    for (std::size_t n = 0; n < x.a.size(); ++n) {
        s += (x.a[n] - y.a[n]) * (x.a[n] - y.a[n]) + (x.b[n] - y.b[n]) * (x.b[n] - y.b[n]);
    }
    return std::sqrt(s);
}

struct SmoothCase {
    Grid grid{32, 32};
    SpectralBasis basis{grid, 16};
    std::vector<double> g;
    CoeffVector c0;

    explicit SmoothCase(std::uint64_t seed, std::size_t n = 32, std::size_t modes = 16)
        : grid(n, n), basis(grid, modes) {
        std::mt19937_64 rng(seed);
        g = project(random_smooth(grid, rng, 3, 0.5, 0.5), basis);
        c0 = {project(random_smooth(grid, rng, 3, 0.5, 0.5), basis),
              project(random_smooth(grid, rng, 3, 0.1, 0.85), basis)};
    }
};

} // namespace

TEST(SpectralBasis, LowestModes) {
    const SpectralBasis b(Grid(33, 33), 3);
    EXPECT_EQ(b.modes()[0], (Mode{0, 0}));
    EXPECT_EQ(b.lambdas()[0], 0.0);
    EXPECT_EQ(b.modes()[1], (Mode{0, 1}));
    EXPECT_EQ(b.modes()[2], (Mode{1, 0}));
    EXPECT_NEAR(b.lambdas()[2], kPi * kPi, 1e-12);
    const ScalarField2D e0 = b.eigenfunction_field(0);
    EXPECT_NEAR(e0.min(), 1.0, 1e-15);
    EXPECT_NEAR(e0.max(), 1.0, 1e-15);
}

TEST(SpectralBasis, SortedByEigenvalueThenIndex) {
    const SpectralBasis b(Grid(40, 24, 1.0, 0.6), 100);
    for (std::size_t n = 1; n < b.size(); ++n) {
        const auto prev = std::make_tuple(b.lambdas()[n - 1], b.modes()[n - 1].k, b.modes()[n - 1].l);
        const auto cur = std::make_tuple(b.lambdas()[n], b.modes()[n].k, b.modes()[n].l);
        EXPECT_LT(prev, cur);
    }
}

TEST(SpectralBasis, GramMatrixIsIdentity) {
    const SpectralBasis b(Grid(128, 128), 16);
    double off = 0.0, diag = 0.0;
    for (std::size_t m = 0; m < b.size(); ++m) {
        for (std::size_t n = 0; n < b.size(); ++n) {
            const double v = inner(b.eigenfunction_field(m), b.eigenfunction_field(n));
            if (m == n) diag = std::max(diag, std::abs(v - 1.0));
            else off = std::max(off, std::abs(v));
        }
    }
    EXPECT_LT(off, 1e-6);
    EXPECT_LT(diag, 1e-6);
}

TEST(SpectralBasis, GridEigenvaluesAreExactForGridLaplacian) {
    const SpectralBasis b(Grid(30, 22, 1.0, 0.7), 40);
    for (std::size_t n = 0; n < b.size(); ++n) {
        const ScalarField2D e = b.eigenfunction_field(n);
        const ScalarField2D r = laplacian_neumann(e) + b.grid_lambdas()[n] * e;
        EXPECT_LT(max_abs(r), 1e-9 * (1.0 + b.grid_lambdas()[n])) << "mode " << n;
        EXPECT_NEAR(b.grid_lambdas()[n], b.lambdas()[n], 0.05 * b.lambdas()[n] + 1e-12);
    }
}

TEST(SpectralBasis, RejectsUnresolvableCount) {
    EXPECT_THROW(SpectralBasis(Grid(8, 8), 0), UsageError);
    EXPECT_THROW(SpectralBasis(Grid(8, 8), 17), UsageError);
    EXPECT_NO_THROW(SpectralBasis(Grid(8, 8), 16));
}

TEST(Project, EigenfunctionGivesUnitVector) {
    const SpectralBasis b(Grid(32, 32), 10);
    const std::vector<double> c = project(b.eigenfunction_field(3), b);
    for (std::size_t n = 0; n < c.size(); ++n) EXPECT_NEAR(c[n], n == 3 ? 1.0 : 0.0, 1e-12);
}

TEST(Project, ConstantOnlyHitsMeanMode) {
    const Grid g(25, 17, 2.0, 0.5);
    const SpectralBasis b(g, 20);
    const std::vector<double> c = project(ScalarField2D(g, 0.7), b);
    EXPECT_NEAR(c[0], 0.7 * std::sqrt(g.area()), 1e-12);
    for (std::size_t n = 1; n < c.size(); ++n) EXPECT_NEAR(c[n], 0.0, 1e-12);
}

TEST(Project, BesselInequality) {
    std::mt19937_64 rng(31);
    const Grid g(48, 48);
    const ScalarField2D f = random_smooth(g, rng, 8);
    const std::vector<double> c = project(f, SpectralBasis(g, 64));
    double s = 0.0;
    for (double v : c) s += v * v;
    EXPECT_LE(s, inner(f, f) * (1.0 + 1e-12));
}

TEST(Project, ReconstructionErrorDecreasesWithModes) {
    const Grid g(64, 64);
    const ScalarField2D f = ScalarField2D::sample(g, [](double x, double y) { return std::exp(x) * (1.0 + y * y); });
    double prev = INFINITY;
    for (std::size_t n : {4u, 16u, 64u}) {
        const SpectralBasis b(g, n);
        const double err = l2_norm(reconstruct(project(f, b), b) - f);
        EXPECT_LE(err, prev + 1e-8);
        prev = err;
    }
}

TEST(Project, ProjectionIsIdempotent) {
    std::mt19937_64 rng(32);
    const Grid g(32, 32);
    const SpectralBasis b(g, 16);
    const std::vector<double> c = project(random_smooth(g, rng, 6), b);
    const std::vector<double> c2 = project(reconstruct(c, b), b);
    for (std::size_t n = 0; n < c.size(); ++n) EXPECT_NEAR(c[n], c2[n], 1e-12);
}

TEST(GalerkinRhs, StationaryData) {
    const Grid g(32, 32);
    const SpectralBasis b(g, 16);
    const std::vector<double> gc = project(ScalarField2D(g, 0.3), b);
    const CoeffVector c{gc, project(ScalarField2D(g, 1.0), b)};
    const CoeffVector r = galerkin_rhs(c, b, gc, ATParams{});
    for (std::size_t n = 0; n < b.size(); ++n) {
        EXPECT_NEAR(r.a[n], 0.0, 1e-12);
        EXPECT_NEAR(r.b[n], 0.0, 1e-12);
    }
}

TEST(GalerkinRhs, EqualsProjectedVariationalGradient) {
    const SmoothCase sc(33, 64, 16);
    const ATParams p{0.1, 1e-3};
    const CoeffVector r = galerkin_rhs(sc.c0, sc.basis, sc.g, p);
    const auto [gu, gz] = variational_gradient(reconstruct(sc.c0.a, sc.basis), reconstruct(sc.c0.b, sc.basis),
                                               reconstruct(sc.g, sc.basis), p);
    const std::vector<double> pa = project(gu, sc.basis);
    const std::vector<double> pb = project(gz, sc.basis);
    double scale_a = 0.0, scale_b = 0.0;
    for (std::size_t n = 0; n < pa.size(); ++n) {
        scale_a = std::max(scale_a, std::abs(pa[n]));
        scale_b = std::max(scale_b, std::abs(pb[n]));
    }
    for (std::size_t n = 0; n < pa.size(); ++n) {
        EXPECT_LE(std::abs(r.a[n] - pa[n]), 1e-6 * scale_a) << "mode " << n;
        EXPECT_LE(std::abs(r.b[n] - pb[n]), 1e-6 * scale_b) << "mode " << n;
    }
}

TEST(GalerkinRhs, DiagonalLinearFormulaWithUnitPhaseField) {
    const SmoothCase sc(34, 48, 24);
    const ATParams p{0.1, 1e-3};
    const CoeffVector c{sc.c0.a, project(ScalarField2D(sc.grid, 1.0), sc.basis)};
    const CoeffVector r = galerkin_rhs(c, sc.basis, sc.g, p);
    for (std::size_t n = 0; n < sc.basis.size(); ++n) {
        const double grid_formula = -((p.eta + 1.0) * sc.basis.grid_lambdas()[n] + 1.0) * c.a[n] + sc.g[n];
        const double continuum = -((p.eta + 1.0) * sc.basis.lambdas()[n] + 1.0) * c.a[n] + sc.g[n];
        EXPECT_NEAR(r.a[n], grid_formula, 1e-10 * (1.0 + std::abs(grid_formula)));
        EXPECT_NEAR(r.a[n], continuum, 0.02 * (1.0 + std::abs(continuum)));
    }
}

TEST(IntegrateGalerkin, StationaryDataStaysFixed) {
    const Grid g(32, 32);
    const SpectralBasis b(g, 16);
    const std::vector<double> gc = project(ScalarField2D(g, 0.6), b);
    const CoeffVector c0{gc, project(ScalarField2D(g, 1.0), b)};
    const ATParams p{0.1, 1e-3};
    const double dt = galerkin_default_dt(b, p);
    const GalerkinResult res = integrate_galerkin(c0, b, gc, p, dt, 1000 * dt, GalerkinOptions{0, false});
    EXPECT_EQ(res.trajectory.times.size(), 1001u);
    EXPECT_LT(coeff_distance(res.final_coeffs, c0), 1e-12);
}

TEST(IntegrateGalerkin, EnergyNonIncreasing) {
    for (std::uint64_t seed : {35u, 36u, 37u}) {
        const SmoothCase sc(seed);
        const ATParams p{0.1, 1e-3};
        const GalerkinResult res = integrate_galerkin(sc.c0, sc.basis, sc.g, p, galerkin_default_dt(sc.basis, p), 0.1);
        const auto& rows = res.trajectory.diagnostics;
        for (std::size_t n = 1; n < rows.size(); ++n) {
            EXPECT_LE(rows[n].energy, rows[n - 1].energy + 1e-9 * rows[0].energy) << "step " << n;
        }
    }
}

TEST(IntegrateGalerkin, FourthOrderInTime) {
    const SmoothCase sc(38);
    const ATParams p{0.1, 1e-3};
    const double t_end = 0.08;
    std::vector<CoeffVector> finals;
    for (double dt : {0.004, 0.002, 0.001}) {
        finals.push_back(integrate_galerkin(sc.c0, sc.basis, sc.g, p, dt, t_end, GalerkinOptions{0, false}).final_coeffs);
    }
    const double e1 = coeff_distance(finals[0], finals[1]);
    const double e2 = coeff_distance(finals[1], finals[2]);
    EXPECT_GE(std::log2(e1 / e2), 3.5);
}

TEST(IntegrateGalerkin, EndsExactlyAtFinalTime) {
    const SmoothCase sc(39);
    const GalerkinResult res = integrate_galerkin(sc.c0, sc.basis, sc.g, ATParams{}, 0.003, 0.01);
    EXPECT_EQ(res.final_time, 0.01);
    for (std::size_t n = 1; n < res.trajectory.times.size(); ++n) {
        EXPECT_GT(res.trajectory.times[n], res.trajectory.times[n - 1]);
    }
}

TEST(IntegrateGalerkin, HugeStepDiverges) {
    const SmoothCase sc(40);
    EXPECT_THROW(integrate_galerkin(sc.c0, sc.basis, sc.g, ATParams{0.05, 1e-4}, 10.0, 100.0), DivergedError);
}

TEST(IntegrateGalerkin, RejectsBadArguments) {
    const SmoothCase sc(41);
    EXPECT_THROW(integrate_galerkin(sc.c0, sc.basis, sc.g, ATParams{}, -1.0, 1.0), UsageError);
    EXPECT_THROW(integrate_galerkin(sc.c0, sc.basis, sc.g, ATParams{}, 0.1, 0.0), UsageError);
    CoeffVector bad = sc.c0;
    bad.a.pop_back();
    EXPECT_THROW(integrate_galerkin(bad, sc.basis, sc.g, ATParams{}, 0.1, 1.0), UsageError);
}

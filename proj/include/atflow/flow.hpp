#pragma once

// Finite-difference backend: linearly implicit splitting of the flow on the
// grid. Each step solves two SPD systems by matrix-free CG:
//   ((1 + dt) I - dt div(a(z^n) grad)) u^{n+1} = u^n + dt g
//   ((1 + dt/(2 eps)) I - 2 eps dt lap) z^{n+1}
//       = z^n - dt phi'(z^n) phi(z^n) |grad u^{n+1}|^2 + dt/(2 eps)

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "atflow/diagnostics.hpp"
#include "atflow/energy.hpp"
#include "atflow/errors.hpp"
#include "atflow/fields.hpp"
#include "atflow/linear_solve.hpp"
#include "atflow/trajectory.hpp"

namespace atflow {

inline constexpr double kCgTolerance = 1e-10;

namespace detail {

inline std::size_t cg_iteration_cap(const Grid& g) {
    return static_cast<std::size_t>(std::ceil(10.0 * std::sqrt(static_cast<double>(g.size()))));
}

inline std::vector<double> quadrature_weights(const Grid& g) {
    std::vector<double> w(g.size());
    for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) w[g.index(i, j)] = g.weight(i, j);
    }
    return w;
}

/// Solves (shift I - scale div(a grad)) x = rhs with x0 as initial guess. The
/// system is symmetrised by the quadrature weights before CG.
inline ScalarField2D solve_diffusion(const ScalarField2D& a, double shift, double scale, const ScalarField2D& rhs,
                                     const ScalarField2D& x0) {
    const Grid& g = rhs.grid();
    const std::size_t nx = g.nx();
    const std::size_t ny = g.ny();
    const std::vector<double> w = quadrature_weights(g);
    const double ihx2 = 1.0 / (g.hx() * g.hx());
    const double ihy2 = 1.0 / (g.hy() * g.hy());

    std::vector<double> diag(g.size());
    std::vector<double> b(g.size());
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t k = g.index(i, j);
            const double ae = 0.5 * (a(i, j) + a(upper(i, nx), j));
            const double aw = 0.5 * (a(i, j) + a(lower(i), j));
            const double an = 0.5 * (a(i, j) + a(i, upper(j, ny)));
            const double as = 0.5 * (a(i, j) + a(i, lower(j)));
            diag[k] = w[k] * (shift + scale * ((ae + aw) * ihx2 + (an + as) * ihy2));
            b[k] = w[k] * rhs[k];
        }
    }

    ScalarField2D work(g);
    const auto apply = [&](std::span<const double> x, std::span<double> out) {
        std::copy(x.begin(), x.end(), work.values().begin());
        const ScalarField2D div = flux_divergence(a, work);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = w[k] * (shift * x[k] - scale * div[k]);
    };

    std::vector<double> x(x0.values().begin(), x0.values().end());
    conjugate_gradient(apply, b, diag, w, x, kCgTolerance, cg_iteration_cap(g));
    return ScalarField2D(g, std::move(x));
}

} // namespace detail

/// Implicit u-update with the coefficient eta + phi(z)^2 frozen at z.
inline ScalarField2D solve_u_step(const ScalarField2D& u, const ScalarField2D& z, const ScalarField2D& g,
                                  const ATParams& p, double dt) {
    ScalarField2D rhs = u;
    for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] += dt * g[k];
    return detail::solve_diffusion(diffusion_coefficient(z, p), 1.0 + dt, dt, rhs, u);
}

/// z-update: diffusion and the (1 - z)/(2 eps) reaction implicit, the cutoff
/// sink explicit with the supplied (already updated) u.
inline ScalarField2D solve_z_step(const ScalarField2D& z, const ScalarField2D& u_new, const ATParams& p, double dt) {
    const ScalarField2D grad_sq = face_gradient_sq(u_new);
    const double inv2e = 1.0 / (2.0 * p.epsilon);
    ScalarField2D rhs = z;
    for (std::size_t k = 0; k < rhs.size(); ++k) {
        rhs[k] += dt * inv2e - dt * detail::cutoff_sink(z[k], p.model) * grad_sq[k];
    }
    const ScalarField2D ones(z.grid(), 1.0);
    return detail::solve_diffusion(ones, 1.0 + dt * inv2e, 2.0 * p.epsilon * dt, rhs, z);
}

/// One Gauss-Seidel ordered step: u first with lagged coefficient, then z with
/// the fresh u.
inline FlowState step_semi_implicit(const FlowState& s, const ScalarField2D& g, const ATParams& p, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw UsageError("step_semi_implicit: dt must be positive");
    ScalarField2D::require_same_grid(s.u, s.z, "step_semi_implicit");
    ScalarField2D::require_same_grid(s.u, g, "step_semi_implicit");
    FlowState next{s.t + dt, solve_u_step(s.u, s.z, g, p, dt), ScalarField2D(s.z.grid()), s.step_count + 1};
    next.z = solve_z_step(s.z, next.u, p, dt);
    if (!next.u.all_finite() || !next.z.all_finite()) {
        throw DivergedError(next.step_count, "non-finite state in semi-implicit step");
    }
    return next;
}

struct FlowOptions {
    std::size_t snapshot_stride = 0; // 0: only first and last
    bool record_diagnostics = true;
};

struct FlowResult {
    TrajectoryRecord trajectory;
    FlowState final_state;
    std::vector<std::string> warnings;
};

namespace detail {

inline DiagnosticsRow flow_row(const FlowState& s, const ScalarField2D& g, const ATParams& p, double residual) {
    const auto [gu, gz] = variational_gradient(s.u, s.z, g, p);
    return diagnose(s.t, s.u, s.z, g, p, l2_norm(gu), l2_norm(gz), residual);
}

} // namespace detail

/// Runs the semi-implicit scheme on [0, t_end]; the last step may be shorter
/// so the run ends exactly at t_end. z is never clamped.
inline FlowResult run_flow(const ScalarField2D& u0, const ScalarField2D& z0, const ScalarField2D& g,
                           const ATParams& p, double dt, double t_end, const FlowOptions& opts = {}) {
    p.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw UsageError("run_flow: dt must be positive");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw UsageError("run_flow: t_end must be positive");
    ScalarField2D::require_same_grid(u0, z0, "run_flow");
    ScalarField2D::require_same_grid(u0, g, "run_flow");

    std::vector<std::string> warnings;
    if (z0.min() < 0.0 || z0.max() > 1.0) {
        warnings.emplace_back("initial phase field leaves [0, 1]; the maximum principle is not expected to hold");
    }

    TrajectoryRecord traj;
    FlowState s{0.0, u0, z0, 0};
    traj.times.push_back(0.0);
    if (opts.record_diagnostics) traj.diagnostics.push_back(detail::flow_row(s, g, p, 0.0));
    traj.snapshots.push_back({0.0, s.u, s.z});

    const std::size_t n_steps = detail::step_count(dt, t_end);
    double energy = opts.record_diagnostics ? traj.diagnostics.back().energy : 0.0;
    for (std::size_t n = 1; n <= n_steps; ++n) {
        const double t = detail::step_time(n, n_steps, dt, t_end);
        const double h = t - s.t;
        FlowState next = step_semi_implicit(s, g, p, h);
        next.t = t;
        traj.times.push_back(t);
        if (opts.record_diagnostics) {
            const ScalarField2D du = next.u - s.u;
            const ScalarField2D dz = next.z - s.z;
            DiagnosticsRow row = detail::flow_row(next, g, p, 0.0);
            row.energy_identity_residual = (row.energy - energy) / h + (inner(du, du) + inner(dz, dz)) / (h * h);
            energy = row.energy;
            traj.diagnostics.push_back(row);
        }
        s = std::move(next);
        if (n == n_steps || (opts.snapshot_stride > 0 && n % opts.snapshot_stride == 0)) {
            traj.snapshots.push_back({s.t, s.u, s.z});
        }
    }
    return FlowResult{std::move(traj), std::move(s), std::move(warnings)};
}

} // namespace atflow

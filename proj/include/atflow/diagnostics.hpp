#pragma once

// Runtime checks for the qualitative properties of the flow: maximum
// principle, energy identity, a-priori bound ledgers and interpolation-type
// ratio checks.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <utility>

#include "atflow/energy.hpp"
#include "atflow/errors.hpp"
#include "atflow/fields.hpp"
#include "atflow/trajectory.hpp"

namespace atflow {

/// (||max(-z, 0)||_{L2}, ||max(z - 1, 0)||_{L2}).
inline std::pair<double, double> max_principle_norms(const ScalarField2D& z) {
    const double f0 = detail::quadrature(z.grid(), [&](std::size_t i, std::size_t j) {
        const double v = std::max(-z(i, j), 0.0);
        return v * v;
    });
    const double f1 = detail::quadrature(z.grid(), [&](std::size_t i, std::size_t j) {
        const double v = std::max(z(i, j) - 1.0, 0.0);
        return v * v;
    });
    return {std::sqrt(f0), std::sqrt(f1)};
}

/// Discrete form of dAT/dt + ||u_t||^2 + ||z_t||^2 = 0 between two states.
inline double energy_identity_residual(const FlowState& prev, const FlowState& next, const ScalarField2D& g,
                                       const ATParams& p, double dt) {
    if (!(dt > 0.0)) throw UsageError("energy_identity_residual: dt must be positive");
    const double de = at_energy(next.u, next.z, g, p) - at_energy(prev.u, prev.z, g, p);
    const ScalarField2D du = next.u - prev.u;
    const ScalarField2D dz = next.z - prev.z;
    return de / dt + (inner(du, du) + inner(dz, dz)) / (dt * dt);
}

/// Row for one sample; the caller supplies the velocity norms and, when the
/// sample follows a step, the residual.
inline DiagnosticsRow diagnose(double t, const ScalarField2D& u, const ScalarField2D& z, const ScalarField2D& g,
                               const ATParams& p, double dt_u_l2, double dt_z_l2, double residual = 0.0) {
    DiagnosticsRow row;
    row.t = t;
    row.energy = at_energy(u, z, g, p);
    row.energy_identity_residual = residual;
    std::tie(row.f0_norm, row.f1_norm) = max_principle_norms(z);
    row.u_ladder = norm_ladder(u);
    row.z_ladder = norm_ladder(z);
    row.dt_u_l2 = dt_u_l2;
    row.dt_z_l2 = dt_z_l2;
    return row;
}

struct BoundLedger {
    double sup_u_l2 = 0.0;
    double sup_energy = 0.0;
    double int_grad_u_sq = 0.0;   // int ||grad u||^2 dt
    double int_dt_sq = 0.0;       // int ||u_t||^2 + ||z_t||^2 dt
    double int_h2_ladder = 0.0;   // int ||u||_{H2}^2 + ||z||_{H2}^2 + ||grad u||_4^4 + ||grad z||_4^4 dt
    // max_n of AT(t_n) plus the dissipation accumulated from difference
    // quotients up to t_n; equals AT(0) for an exact gradient flow.
    double energy_balance_max = 0.0;
};

namespace detail {

template <class F>
double trapezoid_in_time(std::span<const DiagnosticsRow> rows, F&& f) {
    double acc = 0.0;
    for (std::size_t n = 1; n < rows.size(); ++n) {
        acc += 0.5 * (rows[n].t - rows[n - 1].t) * (f(rows[n - 1]) + f(rows[n]));
    }
    return acc;
}

} // namespace detail

inline BoundLedger bound_ledger(std::span<const DiagnosticsRow> rows) {
    if (rows.empty()) throw UsageError("bound_ledger: empty trajectory");
    BoundLedger out;
    for (const DiagnosticsRow& r : rows) {
        out.sup_u_l2 = std::max(out.sup_u_l2, r.u_ladder.l2);
        out.sup_energy = std::max(out.sup_energy, r.energy);
    }
    out.int_grad_u_sq = detail::trapezoid_in_time(rows, [](const DiagnosticsRow& r) {
        return r.u_ladder.h1_semi * r.u_ladder.h1_semi;
    });
    out.int_dt_sq = detail::trapezoid_in_time(
        rows, [](const DiagnosticsRow& r) { return r.dt_u_l2 * r.dt_u_l2 + r.dt_z_l2 * r.dt_z_l2; });
    out.int_h2_ladder = detail::trapezoid_in_time(rows, [](const DiagnosticsRow& r) {
        return r.u_ladder.h2_sq() + r.z_ladder.h2_sq() + r.u_ladder.l4_grad4 + r.z_ladder.l4_grad4;
    });

    // AT(t_n) + sum_k ||x_k - x_{k-1}||^2 / dt_k telescopes to
    // AT(0) + sum_k dt_k * residual_k.
    double balance = rows.front().energy;
    out.energy_balance_max = balance;
    for (std::size_t n = 1; n < rows.size(); ++n) {
        balance += (rows[n].t - rows[n - 1].t) * rows[n].energy_identity_residual;
        out.energy_balance_max = std::max(out.energy_balance_max, balance);
    }
    return out;
}

inline BoundLedger bound_ledger(const TrajectoryRecord& traj) { return bound_ledger(traj.diagnostics); }

/// Exponents of an interpolation inequality
///   ||D^j f||_p <= C ||D^m f||_r^theta ||f||_q^(1-theta) + C ||f||_s
/// in two space dimensions. Infinite exponents are allowed for q and r.
struct GNParams {
    int j = 0;
    int m = 1;
    double p = 4.0;
    double r = 2.0;
    double q = 2.0;
    double s = 2.0;
    double theta = 0.5;

    /// j = 0, m = 1, p = 4, r = q = s = 2, theta = 1/2.
    static GNParams l4_half() { return {0, 1, 4.0, 2.0, 2.0, 2.0, 0.5}; }
    /// j = 0, m = 1, p = 4, r = 2, q = 3, s = 2, theta = 1/4.
    static GNParams l4_quarter() { return {0, 1, 4.0, 2.0, 3.0, 2.0, 0.25}; }

    void validate() const {
        constexpr double n = 2.0;
        if (j < 0 || j > 2 || m < 1 || m > 2 || j > m) throw UsageError("GNParams: need 0 <= j <= m <= 2, m >= 1");
        if (!(p >= 1.0) || !(q >= 1.0) || !(r >= 1.0) || !(s > 0.0)) {
            throw UsageError("GNParams: exponents out of range");
        }
        if (!(theta <= 1.0) || !(theta >= static_cast<double>(j) / m)) {
            throw UsageError("GNParams: theta must lie in [j/m, 1]");
        }
        const auto reciprocal = [](double e) { return std::isinf(e) ? 0.0 : 1.0 / e; };
        const double rhs = j / n + theta * (reciprocal(r) - m / n) + (1.0 - theta) * reciprocal(q);
        const double lhs = reciprocal(p);
        if (std::abs(lhs - rhs) > 1e-12) throw UsageError("GNParams: exponent balance violated");
    }
};

namespace detail {

// Pointwise magnitude of D^k f: |f|, |grad f| or the Frobenius norm of the Hessian.
inline ScalarField2D derivative_magnitude(const ScalarField2D& f, int order) {
    if (order == 0) {
        ScalarField2D out(f.grid());
        for (std::size_t k = 0; k < f.size(); ++k) out[k] = std::abs(f[k]);
        return out;
    }
    const auto [fx, fy] = gradient(f);
    ScalarField2D out(f.grid());
    if (order == 1) {
        for (std::size_t k = 0; k < f.size(); ++k) out[k] = std::hypot(fx[k], fy[k]);
        return out;
    }
    const ScalarField2D fxx = second_difference_x(f);
    const ScalarField2D fyy = second_difference_y(f);
    const ScalarField2D fxy = gradient(fy).first;
    for (std::size_t k = 0; k < f.size(); ++k) {
        out[k] = std::sqrt(fxx[k] * fxx[k] + 2.0 * fxy[k] * fxy[k] + fyy[k] * fyy[k]);
    }
    return out;
}

inline double lp_norm(const ScalarField2D& magnitude, double p) {
    if (std::isinf(p)) return magnitude.max();
    const double integral = quadrature(magnitude.grid(), [&](std::size_t i, std::size_t j) {
        return std::pow(magnitude(i, j), p);
    });
    return std::pow(integral, 1.0 / p);
}

} // namespace detail

/// ||D^j f||_p / (||D^m f||_r^theta ||f||_q^(1-theta) + ||f||_s).
inline double gn_ratio(const ScalarField2D& f, const GNParams& params) {
    params.validate();
    const ScalarField2D abs_f = detail::derivative_magnitude(f, 0);
    const double numerator = detail::lp_norm(detail::derivative_magnitude(f, params.j), params.p);
    const double top = detail::lp_norm(detail::derivative_magnitude(f, params.m), params.r);
    const double denominator = std::pow(top, params.theta) *
                                   std::pow(detail::lp_norm(abs_f, params.q), 1.0 - params.theta) +
                               detail::lp_norm(abs_f, params.s);
    if (!(denominator > 0.0)) throw UsageError("gn_ratio: zero field");
    return numerator / denominator;
}

} // namespace atflow

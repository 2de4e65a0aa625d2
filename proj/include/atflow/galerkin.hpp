#pragma once

// Spectral Galerkin backend: Neumann cosine eigenbasis of -Laplacian on the
// rectangle, projection onto its span, and the 2N-dimensional ODE system for
// the coefficients, integrated with classical RK4.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "atflow/diagnostics.hpp"
#include "atflow/energy.hpp"
#include "atflow/errors.hpp"
#include "atflow/fields.hpp"
#include "atflow/trajectory.hpp"

namespace atflow {

struct Mode {
    int k = 0;
    int l = 0;
    friend bool operator==(const Mode&, const Mode&) = default;
};

/// First N eigenpairs e_{k,l} = c cos(k pi x / lx) cos(l pi y / ly) of the
/// Neumann Laplacian, sorted by eigenvalue then (k, l). Sampled eigenfunctions
/// are orthonormal under the trapezoid rule for every resolvable mode.
class SpectralBasis {
public:
    SpectralBasis(Grid grid, std::size_t n_modes) : grid_(grid) {
        const std::size_t kmax = grid.nx() / 2;
        const std::size_t lmax = grid.ny() / 2;
        if (n_modes == 0 || n_modes > kmax * lmax) {
            throw UsageError("build_basis: " + std::to_string(n_modes) + " modes not resolvable on a " +
                             std::to_string(grid.nx()) + "x" + std::to_string(grid.ny()) + " grid (max " +
                             std::to_string(kmax * lmax) + ")");
        }
        std::vector<std::tuple<double, int, int>> candidates;
        candidates.reserve(kmax * lmax);
        for (std::size_t k = 0; k < kmax; ++k) {
            for (std::size_t l = 0; l < lmax; ++l) {
                candidates.emplace_back(eigenvalue(static_cast<int>(k), static_cast<int>(l)), static_cast<int>(k),
                                        static_cast<int>(l));
            }
        }
        std::sort(candidates.begin(), candidates.end());
        candidates.resize(n_modes);

        const std::size_t nx = grid.nx();
        const std::size_t ny = grid.ny();
        const double hx = grid.hx();
        const double hy = grid.hy();
        cache_.resize(n_modes * grid.size());
        weighted_cache_.resize(n_modes * grid.size());
        std::vector<double> cx(nx);
        std::vector<double> cy(ny);
        for (std::size_t n = 0; n < n_modes; ++n) {
            const auto [lambda, k, l] = candidates[n];
            modes_.push_back({k, l});
            lambdas_.push_back(lambda);
            const double sx = std::sin(k * std::numbers::pi / (2.0 * static_cast<double>(nx - 1)));
            const double sy = std::sin(l * std::numbers::pi / (2.0 * static_cast<double>(ny - 1)));
            grid_lambdas_.push_back(4.0 * sx * sx / (hx * hx) + 4.0 * sy * sy / (hy * hy));

            const double norm = std::sqrt((k == 0 ? 1.0 : 2.0) * (l == 0 ? 1.0 : 2.0) / grid.area());
            for (std::size_t i = 0; i < nx; ++i) {
                cx[i] = std::cos(k * std::numbers::pi * static_cast<double>(i) / static_cast<double>(nx - 1));
            }
            for (std::size_t j = 0; j < ny; ++j) {
                cy[j] = std::cos(l * std::numbers::pi * static_cast<double>(j) / static_cast<double>(ny - 1));
            }
            double* e = cache_.data() + n * grid.size();
            double* we = weighted_cache_.data() + n * grid.size();
            for (std::size_t j = 0; j < ny; ++j) {
                for (std::size_t i = 0; i < nx; ++i) {
                    const std::size_t idx = grid.index(i, j);
                    e[idx] = norm * cx[i] * cy[j];
                    we[idx] = grid.weight(i, j) * e[idx];
                }
            }
        }
    }

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return modes_.size(); }
    std::span<const Mode> modes() const noexcept { return modes_; }

    /// Continuum eigenvalues (k pi / lx)^2 + (l pi / ly)^2.
    std::span<const double> lambdas() const noexcept { return lambdas_; }

    /// Eigenvalues of the grid operator -laplacian_neumann on the sampled
    /// eigenfunctions; they agree with lambdas() to O(h^2).
    std::span<const double> grid_lambdas() const noexcept { return grid_lambdas_; }

    double lambda_max() const noexcept { return lambdas_.back(); }

    /// Sampled eigenfunction n (row-major, x fastest).
    std::span<const double> eigenfunction(std::size_t n) const noexcept {
        return {cache_.data() + n * grid_.size(), grid_.size()};
    }

    ScalarField2D eigenfunction_field(std::size_t n) const {
        auto e = eigenfunction(n);
        return ScalarField2D(grid_, std::vector<double>(e.begin(), e.end()));
    }

    // Trapezoid weight times eigenfunction n.
    std::span<const double> weighted_eigenfunction(std::size_t n) const noexcept {
        return {weighted_cache_.data() + n * grid_.size(), grid_.size()};
    }

private:
    double eigenvalue(int k, int l) const noexcept {
        const double a = k * std::numbers::pi / grid_.lx();
        const double b = l * std::numbers::pi / grid_.ly();
        return a * a + b * b;
    }

    Grid grid_;
    std::vector<Mode> modes_;
    std::vector<double> lambdas_;
    std::vector<double> grid_lambdas_;
    std::vector<double> cache_;
    std::vector<double> weighted_cache_;
};

inline SpectralBasis build_basis(const Grid& grid, std::size_t n_modes) { return SpectralBasis(grid, n_modes); }

/// Galerkin coefficients of (u_N, z_N).
struct CoeffVector {
    std::vector<double> a;
    std::vector<double> b;
};

namespace detail {

inline double sum_sq(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

} // namespace detail

/// L2 inner products <f, e_i>, i.e. the coefficients of pi_N f.
inline std::vector<double> project(const ScalarField2D& f, const SpectralBasis& basis) {
    if (!(f.grid() == basis.grid())) throw UsageError("project: field and basis live on different grids");
    std::vector<double> out(basis.size());
    for (std::size_t n = 0; n < basis.size(); ++n) {
        out[n] = detail::pairwise_dot(basis.weighted_eigenfunction(n), f.values());
    }
    return out;
}

inline ScalarField2D reconstruct(std::span<const double> coeffs, const SpectralBasis& basis) {
    if (coeffs.size() != basis.size()) throw UsageError("reconstruct: coefficient count does not match basis");
    ScalarField2D out(basis.grid());
    auto v = out.values();
    for (std::size_t n = 0; n < basis.size(); ++n) {
        const double c = coeffs[n];
        if (c == 0.0) continue;
        auto e = basis.eigenfunction(n);
        for (std::size_t k = 0; k < v.size(); ++k) v[k] += c * e[k];
    }
    return out;
}

/// (da/dt, db/dt) of the Galerkin system. Nonlinear terms are evaluated on the
/// grid and tested against each e_i; the linear z-diffusion acts diagonally
/// through the grid eigenvalues.
inline CoeffVector galerkin_rhs(const CoeffVector& c, const SpectralBasis& basis, std::span<const double> g_coeffs,
                                const ATParams& p) {
    if (c.a.size() != basis.size() || c.b.size() != basis.size() || g_coeffs.size() != basis.size()) {
        throw UsageError("galerkin_rhs: coefficient vectors do not match basis size");
    }
    const ScalarField2D u = reconstruct(c.a, basis);
    const ScalarField2D z = reconstruct(c.b, basis);
    const ScalarField2D g = reconstruct(g_coeffs, basis);

    ScalarField2D fu = flux_divergence(diffusion_coefficient(z, p), u);
    for (std::size_t k = 0; k < fu.size(); ++k) fu[k] -= u[k] - g[k];

    const ScalarField2D grad_sq = face_gradient_sq(u);
    ScalarField2D fz(z.grid());
    const double inv2e = 1.0 / (2.0 * p.epsilon);
    for (std::size_t k = 0; k < fz.size(); ++k) {
        fz[k] = -detail::cutoff_sink(z[k], p.model) * grad_sq[k] + (1.0 - z[k]) * inv2e;
    }

    CoeffVector out{project(fu, basis), project(fz, basis)};
    const auto lam = basis.grid_lambdas();
    for (std::size_t n = 0; n < basis.size(); ++n) out.b[n] -= 2.0 * p.epsilon * lam[n] * c.b[n];
    return out;
}

/// Stability-guided explicit step for the Galerkin system.
inline double galerkin_default_dt(const SpectralBasis& basis, const ATParams& p) {
    const double diffusivity = std::max(p.eta + 4.0, 2.0 * p.epsilon);
    return 0.4 / (diffusivity * basis.lambda_max() + 1.0 / (2.0 * p.epsilon));
}

struct GalerkinOptions {
    std::size_t snapshot_stride = 0; // 0: only first and last
    bool record_diagnostics = true;
};

struct GalerkinResult {
    TrajectoryRecord trajectory;
    CoeffVector final_coeffs;
    double final_time = 0.0;
};

namespace detail {

inline void axpy_into(CoeffVector& out, const CoeffVector& x, double s, const CoeffVector& y) {
    for (std::size_t n = 0; n < x.a.size(); ++n) {
        out.a[n] = x.a[n] + s * y.a[n];
        out.b[n] = x.b[n] + s * y.b[n];
    }
}

inline bool finite(const CoeffVector& c) {
    return std::all_of(c.a.begin(), c.a.end(), [](double v) { return std::isfinite(v); }) &&
           std::all_of(c.b.begin(), c.b.end(), [](double v) { return std::isfinite(v); });
}

} // namespace detail

/// Classical RK4 on [0, t_end]. Throws DivergedError on non-finite
/// coefficients or when the energy exceeds 2 (1 + AT(0)), which a stable
/// discretisation of a gradient flow never does.
inline GalerkinResult integrate_galerkin(const CoeffVector& c0, const SpectralBasis& basis,
                                         std::span<const double> g_coeffs, const ATParams& p, double dt,
                                         double t_end, const GalerkinOptions& opts = {}) {
    p.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw UsageError("integrate_galerkin: dt must be positive");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw UsageError("integrate_galerkin: t_end must be positive");
    if (c0.a.size() != basis.size() || c0.b.size() != basis.size()) {
        throw UsageError("integrate_galerkin: initial coefficients do not match basis size");
    }
    const ScalarField2D g = reconstruct(g_coeffs, basis);
    const std::size_t n_steps = detail::step_count(dt, t_end);

    GalerkinResult res;
    TrajectoryRecord& traj = res.trajectory;
    CoeffVector c = c0;
    CoeffVector k1 = galerkin_rhs(c, basis, g_coeffs, p);
    CoeffVector k2, k3, k4, tmp = c;

    ScalarField2D u = reconstruct(c.a, basis);
    ScalarField2D z = reconstruct(c.b, basis);
    double energy = at_energy(u, z, g, p);
    const double e0 = energy;

    traj.times.push_back(0.0);
    if (opts.record_diagnostics) {
        traj.diagnostics.push_back(
            diagnose(0.0, u, z, g, p, std::sqrt(detail::sum_sq(k1.a)), std::sqrt(detail::sum_sq(k1.b))));
    }
    traj.snapshots.push_back({0.0, u, z});

    for (std::size_t n = 1; n <= n_steps; ++n) {
        const double t_prev = traj.times.back();
        const double t = detail::step_time(n, n_steps, dt, t_end);
        const double h = t - t_prev;

        detail::axpy_into(tmp, c, 0.5 * h, k1);
        k2 = galerkin_rhs(tmp, basis, g_coeffs, p);
        detail::axpy_into(tmp, c, 0.5 * h, k2);
        k3 = galerkin_rhs(tmp, basis, g_coeffs, p);
        detail::axpy_into(tmp, c, h, k3);
        k4 = galerkin_rhs(tmp, basis, g_coeffs, p);

        double da_sq = 0.0;
        double db_sq = 0.0;
        for (std::size_t m = 0; m < basis.size(); ++m) {
            const double da = h / 6.0 * (k1.a[m] + 2.0 * k2.a[m] + 2.0 * k3.a[m] + k4.a[m]);
            const double db = h / 6.0 * (k1.b[m] + 2.0 * k2.b[m] + 2.0 * k3.b[m] + k4.b[m]);
            c.a[m] += da;
            c.b[m] += db;
            da_sq += da * da;
            db_sq += db * db;
        }
        if (!detail::finite(c)) throw DivergedError(n, "non-finite Galerkin coefficients (dt too large?)");

        u = reconstruct(c.a, basis);
        z = reconstruct(c.b, basis);
        const double e_prev = energy;
        energy = at_energy(u, z, g, p);
        if (!std::isfinite(energy) || energy > 2.0 * (1.0 + e0)) {
            throw DivergedError(n, "energy blow-up in Galerkin integration (dt too large?)");
        }
        k1 = galerkin_rhs(c, basis, g_coeffs, p);
        if (!detail::finite(k1)) throw DivergedError(n, "non-finite Galerkin right-hand side");

        traj.times.push_back(t);
        if (opts.record_diagnostics) {
            // Coefficient increments equal grid L2 increments by orthonormality.
            const double residual = (energy - e_prev) / h + (da_sq + db_sq) / (h * h);
            traj.diagnostics.push_back(diagnose(t, u, z, g, p, std::sqrt(detail::sum_sq(k1.a)),
                                                std::sqrt(detail::sum_sq(k1.b)), residual));
        }
        if (n == n_steps || (opts.snapshot_stride > 0 && n % opts.snapshot_stride == 0)) {
            traj.snapshots.push_back({t, u, z});
        }
    }
    res.final_coeffs = std::move(c);
    res.final_time = traj.times.back();
    return res;
}

} // namespace atflow

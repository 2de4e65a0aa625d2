#pragma once

// Ambrosio-Tortorelli energy with the phase-field cutoff, and the L2 gradient
// flow right-hand side it generates on the grid.

#include <cmath>
#include <utility>

#include "atflow/errors.hpp"
#include "atflow/fields.hpp"

namespace atflow {

/// Which flow is being discretised. `truncated` composes the phase field with
/// the cutoff phi; `classical` uses z directly (phi = identity).
enum class Model { truncated, classical };

struct ATParams {
    double epsilon = 0.1;
    double eta = 1e-3;
    Model model = Model::truncated;

    void validate() const {
        if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw UsageError("ATParams: epsilon must be > 0");
        if (!(eta > 0.0) || !std::isfinite(eta)) throw UsageError("ATParams: eta must be > 0");
    }
};

/// Nondecreasing C^1 cutoff: -1 below -1, identity on [0, 1], 2 above 2, cubic
/// Hermite blends on (-1, 0) and (1, 2).
inline double phi(double s) noexcept {
    if (s <= -1.0) return -1.0;
    if (s < 0.0) {
        const double t = s + 1.0;
        return (2.0 - t) * t * t - 1.0;
    }
    if (s <= 1.0) return s;
    if (s < 2.0) {
        const double t = s - 1.0;
        return ((1.0 - t) * t + 1.0) * t + 1.0;
    }
    return 2.0;
}

inline double phi_prime(double s) noexcept {
    if (s <= -1.0) return 0.0;
    if (s < 0.0) {
        const double t = s + 1.0;
        return t * (4.0 - 3.0 * t);
    }
    if (s <= 1.0) return 1.0;
    if (s < 2.0) {
        const double t = s - 1.0;
        return (1.0 - t) * (3.0 * t + 1.0);
    }
    return 0.0;
}

namespace detail {

inline double cutoff(double s, Model m) noexcept { return m == Model::truncated ? phi(s) : s; }

// phi'(s) * phi(s), the derivative of phi^2 / 2.
inline double cutoff_sink(double s, Model m) noexcept {
    return m == Model::truncated ? phi_prime(s) * phi(s) : s;
}

inline void require_compatible(const ScalarField2D& u, const ScalarField2D& z, const ScalarField2D& g,
                               const char* where) {
    ScalarField2D::require_same_grid(u, z, where);
    ScalarField2D::require_same_grid(u, g, where);
}

} // namespace detail

/// Diffusion coefficient eta + phi(z)^2 at the nodes.
inline ScalarField2D diffusion_coefficient(const ScalarField2D& z, const ATParams& p) {
    ScalarField2D a(z.grid());
    for (std::size_t k = 0; k < z.size(); ++k) {
        const double c = detail::cutoff(z[k], p.model);
        a[k] = p.eta + c * c;
    }
    return a;
}

/// AT_eps(u, z) = 1/2 int (eta + phi(z)^2)|grad u|^2 + (u - g)^2
///              + int (1 - z)^2 / (4 eps) + eps |grad z|^2.
/// Gradient terms use face_gradient_sq so that variational_gradient is the
/// exact negative L2 gradient of this discrete functional.
inline double at_energy(const ScalarField2D& u, const ScalarField2D& z, const ScalarField2D& g, const ATParams& p) {
    detail::require_compatible(u, z, g, "at_energy");
    const ScalarField2D gu = face_gradient_sq(u);
    const ScalarField2D gz = face_gradient_sq(z);
    const double inv4e = 1.0 / (4.0 * p.epsilon);
    return detail::quadrature(u.grid(), [&](std::size_t i, std::size_t j) {
        const double c = detail::cutoff(z(i, j), p.model);
        const double r = u(i, j) - g(i, j);
        const double w = 1.0 - z(i, j);
        return 0.5 * ((p.eta + c * c) * gu(i, j) + r * r) + w * w * inv4e + p.epsilon * gz(i, j);
    });
}

/// Flow right-hand side (G_u, G_z), i.e. minus the L2 gradient of at_energy:
///   G_u = div((eta + phi(z)^2) grad u) - (u - g)
///   G_z = 2 eps lap z - phi'(z) phi(z) |grad u|^2 + (1 - z) / (2 eps)
inline std::pair<ScalarField2D, ScalarField2D> variational_gradient(const ScalarField2D& u, const ScalarField2D& z,
                                                                    const ScalarField2D& g, const ATParams& p) {
    detail::require_compatible(u, z, g, "variational_gradient");
    ScalarField2D gu = flux_divergence(diffusion_coefficient(z, p), u);
    for (std::size_t k = 0; k < u.size(); ++k) gu[k] -= u[k] - g[k];

    ScalarField2D gz = laplacian_neumann(z);
    const ScalarField2D grad_sq = face_gradient_sq(u);
    const double inv2e = 1.0 / (2.0 * p.epsilon);
    for (std::size_t k = 0; k < z.size(); ++k) {
        gz[k] = 2.0 * p.epsilon * gz[k] - detail::cutoff_sink(z[k], p.model) * grad_sq[k] + (1.0 - z[k]) * inv2e;
    }
    return {std::move(gu), std::move(gz)};
}

} // namespace atflow

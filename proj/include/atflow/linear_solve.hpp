#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "atflow/errors.hpp"
#include "atflow/fields.hpp"

namespace atflow {

struct CgReport {
    std::size_t iterations = 0;
    double residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for a symmetric positive definite
/// operator A given matrix-free. Convergence is measured as
/// sqrt(sum_k r_k^2 / scale_k), which with scale = quadrature weights is the
/// discrete L2 norm of the unweighted residual. `x` holds the initial guess.
template <class Apply>
CgReport conjugate_gradient(Apply&& apply, std::span<const double> b, std::span<const double> diag,
                            std::span<const double> scale, std::vector<double>& x, double tol,
                            std::size_t max_iter) {
    const std::size_t n = b.size();
    std::vector<double> r(n), zv(n), p(n), ap(n);
    apply(std::span<const double>(x), std::span<double>(ap));
    for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - ap[k];

    std::vector<double> terms(n);
    const auto residual_norm = [&] {
        for (std::size_t k = 0; k < n; ++k) terms[k] = r[k] * r[k] / scale[k];
        return std::sqrt(detail::pairwise_sum(terms));
    };

    CgReport rep;
    rep.residual = residual_norm();
    if (rep.residual <= tol) return rep;

    for (std::size_t k = 0; k < n; ++k) zv[k] = r[k] / diag[k];
    p = zv;
    double rz = detail::pairwise_dot(r, zv);
    for (std::size_t it = 1; it <= max_iter; ++it) {
        apply(std::span<const double>(p), std::span<double>(ap));
        const double pap = detail::pairwise_dot(p, ap);
        if (!(pap > 0.0)) throw SolverError("conjugate_gradient: operator is not positive definite");
        const double alpha = rz / pap;
        for (std::size_t k = 0; k < n; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        rep.iterations = it;
        rep.residual = residual_norm();
        if (!std::isfinite(rep.residual)) throw SolverError("conjugate_gradient: non-finite residual");
        if (rep.residual <= tol) return rep;
        for (std::size_t k = 0; k < n; ++k) zv[k] = r[k] / diag[k];
        const double rz_next = detail::pairwise_dot(r, zv);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t k = 0; k < n; ++k) p[k] = zv[k] + beta * p[k];
    }
    throw SolverError("conjugate_gradient: no convergence in " + std::to_string(max_iter) +
                      " iterations (residual " + std::to_string(rep.residual) + ")");
}

} // namespace atflow

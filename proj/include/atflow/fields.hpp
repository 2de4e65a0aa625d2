#pragma once

// Node-centred scalar fields on an axis-aligned rectangle, Neumann stencils
// (ghost-node reflection) and trapezoidal quadrature.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "atflow/errors.hpp"

namespace atflow {

/// Uniform node-centred grid on [0, lx] x [0, ly]; nx, ny count nodes.
class Grid {
public:
    Grid(std::size_t nx, std::size_t ny, double lx = 1.0, double ly = 1.0) : nx_(nx), ny_(ny), lx_(lx), ly_(ly) {
        if (nx < 3 || ny < 3) {
            throw UsageError("Grid: need at least 3 nodes per direction, got " + std::to_string(nx) + "x" +
                             std::to_string(ny));
        }
        if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
            throw UsageError("Grid: side lengths must be positive and finite");
        }
    }

    std::size_t nx() const noexcept { return nx_; }
    std::size_t ny() const noexcept { return ny_; }
    std::size_t size() const noexcept { return nx_ * ny_; }
    double lx() const noexcept { return lx_; }
    double ly() const noexcept { return ly_; }
    double hx() const noexcept { return lx_ / static_cast<double>(nx_ - 1); }
    double hy() const noexcept { return ly_ / static_cast<double>(ny_ - 1); }
    double area() const noexcept { return lx_ * ly_; }

    double x(std::size_t i) const noexcept { return static_cast<double>(i) * hx(); }
    double y(std::size_t j) const noexcept { return static_cast<double>(j) * hy(); }

    // 1-D trapezoid weights; the 2-D weight is their product.
    double wx(std::size_t i) const noexcept { return (i == 0 || i + 1 == nx_) ? 0.5 * hx() : hx(); }
    double wy(std::size_t j) const noexcept { return (j == 0 || j + 1 == ny_) ? 0.5 * hy() : hy(); }
    double weight(std::size_t i, std::size_t j) const noexcept { return wx(i) * wy(j); }

    std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * nx_ + i; }

    friend bool operator==(const Grid& a, const Grid& b) noexcept {
        return a.nx_ == b.nx_ && a.ny_ == b.ny_ && a.lx_ == b.lx_ && a.ly_ == b.ly_;
    }

private:
    std::size_t nx_;
    std::size_t ny_;
    double lx_;
    double ly_;
};

/// Scalar function sampled at the grid nodes. Storage is row-major with x
/// fastest, so (i, j) is column i of row j.
class ScalarField2D {
public:
    explicit ScalarField2D(Grid grid, double value = 0.0) : grid_(grid), values_(grid.size(), value) {}

    ScalarField2D(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size()) {
            throw UsageError("ScalarField2D: value count does not match grid");
        }
        if (!all_finite()) {
            throw UsageError("ScalarField2D: non-finite sample");
        }
    }

    template <class F>
    static ScalarField2D sample(const Grid& grid, F&& f) {
        ScalarField2D out(grid);
        for (std::size_t j = 0; j < grid.ny(); ++j) {
            for (std::size_t i = 0; i < grid.nx(); ++i) {
                out(i, j) = f(grid.x(i), grid.y(j));
            }
        }
        return out;
    }

    const Grid& grid() const noexcept { return grid_; }
    std::size_t nx() const noexcept { return grid_.nx(); }
    std::size_t ny() const noexcept { return grid_.ny(); }
    std::size_t size() const noexcept { return values_.size(); }

    double& operator()(std::size_t i, std::size_t j) noexcept { return values_[grid_.index(i, j)]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return values_[grid_.index(i, j)]; }
    double& operator[](std::size_t k) noexcept { return values_[k]; }
    double operator[](std::size_t k) const noexcept { return values_[k]; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    bool all_finite() const noexcept {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
    }

    double min() const { return *std::min_element(values_.begin(), values_.end()); }
    double max() const { return *std::max_element(values_.begin(), values_.end()); }

    ScalarField2D& operator+=(const ScalarField2D& o) {
        require_same_grid(*this, o, "operator+=");
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
        return *this;
    }
    ScalarField2D& operator-=(const ScalarField2D& o) {
        require_same_grid(*this, o, "operator-=");
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
        return *this;
    }
    ScalarField2D& operator*=(double s) noexcept {
        for (double& v : values_) v *= s;
        return *this;
    }

    friend ScalarField2D operator+(ScalarField2D a, const ScalarField2D& b) { return a += b; }
    friend ScalarField2D operator-(ScalarField2D a, const ScalarField2D& b) { return a -= b; }
    friend ScalarField2D operator*(double s, ScalarField2D a) { return a *= s; }

    /// Mirror across the vertical mid-line (i -> nx-1-i).
    ScalarField2D mirrored_x() const {
        ScalarField2D out(grid_);
        for (std::size_t j = 0; j < ny(); ++j) {
            for (std::size_t i = 0; i < nx(); ++i) out(i, j) = (*this)(nx() - 1 - i, j);
        }
        return out;
    }

    static void require_same_grid(const ScalarField2D& a, const ScalarField2D& b, const char* where) {
        if (!(a.grid_ == b.grid_)) {
            throw UsageError(std::string(where) + ": fields live on different grids");
        }
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

/// Seminorms and norms of one field; see norm_ladder().
struct NormLadder {
    double l2 = 0.0;       // ||f||_{L2}
    double h1_semi = 0.0;  // ||grad f||_{L2}
    double h2_semi = 0.0;  // ||D^2 f||_{L2}, Frobenius over (fxx, fxy, fyx, fyy)
    double l4_grad4 = 0.0; // ||grad f||_{L4}^4
    double linf = 0.0;

    double h1_sq() const noexcept { return l2 * l2 + h1_semi * h1_semi; }
    double h2_sq() const noexcept { return h1_sq() + h2_semi * h2_semi; }
};

namespace detail {

inline double pairwise_sum(std::span<const double> v) {
    constexpr std::size_t block = 16;
    if (v.size() <= block) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double pairwise_dot(std::span<const double> x, std::span<const double> y) {
    constexpr std::size_t block = 16;
    if (x.size() <= block) {
        double s = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
        return s;
    }
    const std::size_t half = x.size() / 2;
    return pairwise_dot(x.first(half), y.first(half)) + pairwise_dot(x.subspan(half), y.subspan(half));
}

/// Quadrature of the node function k -> f(i, j) with fixed pairwise order.
template <class F>
double quadrature(const Grid& grid, F&& f) {
    std::vector<double> terms(grid.size());
    for (std::size_t j = 0; j < grid.ny(); ++j) {
        const double wy = grid.wy(j);
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            terms[grid.index(i, j)] = grid.wx(i) * wy * f(i, j);
        }
    }
    return pairwise_sum(terms);
}

// Reflected neighbour indices: index -1 maps to 1, index n maps to n-2.
inline std::size_t lower(std::size_t i) noexcept { return i == 0 ? 1 : i - 1; }
inline std::size_t upper(std::size_t i, std::size_t n) noexcept { return i + 1 == n ? n - 2 : i + 1; }

} // namespace detail

inline double integrate(const ScalarField2D& f) {
    return detail::quadrature(f.grid(), [&](std::size_t i, std::size_t j) { return f(i, j); });
}

/// L2 inner product under the trapezoid rule.
inline double inner(const ScalarField2D& a, const ScalarField2D& b) {
    ScalarField2D::require_same_grid(a, b, "inner");
    return detail::quadrature(a.grid(), [&](std::size_t i, std::size_t j) { return a(i, j) * b(i, j); });
}

inline double l2_norm(const ScalarField2D& f) { return std::sqrt(inner(f, f)); }

/// Central differences; ghost reflection makes the normal component vanish
/// on the boundary.
inline std::pair<ScalarField2D, ScalarField2D> gradient(const ScalarField2D& f) {
    const Grid& g = f.grid();
    const std::size_t nx = g.nx();
    const std::size_t ny = g.ny();
    const double ihx = 0.5 / g.hx();
    const double ihy = 0.5 / g.hy();
    ScalarField2D fx(g);
    ScalarField2D fy(g);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            fx(i, j) = (f(detail::upper(i, nx), j) - f(detail::lower(i), j)) * ihx;
            fy(i, j) = (f(i, detail::upper(j, ny)) - f(i, detail::lower(j))) * ihy;
        }
    }
    return {std::move(fx), std::move(fy)};
}

/// Second difference along x with ghost reflection.
inline ScalarField2D second_difference_x(const ScalarField2D& f) {
    const Grid& g = f.grid();
    const double ih2 = 1.0 / (g.hx() * g.hx());
    ScalarField2D out(g);
    for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
            out(i, j) = (f(detail::upper(i, g.nx()), j) + f(detail::lower(i), j) - 2.0 * f(i, j)) * ih2;
        }
    }
    return out;
}

inline ScalarField2D second_difference_y(const ScalarField2D& f) {
    const Grid& g = f.grid();
    const double ih2 = 1.0 / (g.hy() * g.hy());
    ScalarField2D out(g);
    for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
            out(i, j) = (f(i, detail::upper(j, g.ny())) + f(i, detail::lower(j)) - 2.0 * f(i, j)) * ih2;
        }
    }
    return out;
}

/// Five-point Laplacian with homogeneous Neumann data imposed by reflecting
/// the ghost node. The trapezoid-weighted operator is symmetric and its
/// weighted column sums vanish.
inline ScalarField2D laplacian_neumann(const ScalarField2D& f) {
    return second_difference_x(f) + second_difference_y(f);
}

/// div(a grad u) in flux form with arithmetic face averages of a. With the
/// trapezoid weights W, -W * flux_divergence(a, .) is the Hessian of
/// 1/2 * integrate(a * face_gradient_sq(u)), so it is symmetric.
inline ScalarField2D flux_divergence(const ScalarField2D& a, const ScalarField2D& u) {
    ScalarField2D::require_same_grid(a, u, "flux_divergence");
    const Grid& g = u.grid();
    const std::size_t nx = g.nx();
    const std::size_t ny = g.ny();
    const double ihx2 = 1.0 / (g.hx() * g.hx());
    const double ihy2 = 1.0 / (g.hy() * g.hy());
    ScalarField2D out(g);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t ip = detail::upper(i, nx);
            const std::size_t im = detail::lower(i);
            const std::size_t jp = detail::upper(j, ny);
            const std::size_t jm = detail::lower(j);
            const double east = 0.5 * (a(i, j) + a(ip, j)) * (u(ip, j) - u(i, j));
            const double west = 0.5 * (a(i, j) + a(im, j)) * (u(i, j) - u(im, j));
            const double north = 0.5 * (a(i, j) + a(i, jp)) * (u(i, jp) - u(i, j));
            const double south = 0.5 * (a(i, j) + a(i, jm)) * (u(i, j) - u(i, jm));
            out(i, j) = (east - west) * ihx2 + (north - south) * ihy2;
        }
    }
    return out;
}

/// Node density of |grad u|^2 built from the one-sided differences on the
/// faces touching each node, weighted so that integrate(a * result) equals
/// the face-sum of the averaged coefficient times the squared face slope.
/// This is the density whose variation produces flux_divergence and
/// laplacian_neumann exactly.
inline ScalarField2D face_gradient_sq(const ScalarField2D& u) {
    const Grid& g = u.grid();
    const std::size_t nx = g.nx();
    const std::size_t ny = g.ny();
    const double ihx = 1.0 / g.hx();
    const double ihy = 1.0 / g.hy();
    ScalarField2D out(g);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const double de = (u(detail::upper(i, nx), j) - u(i, j)) * ihx;
            const double dw = (u(i, j) - u(detail::lower(i), j)) * ihx;
            const double dn = (u(i, detail::upper(j, ny)) - u(i, j)) * ihy;
            const double ds = (u(i, j) - u(i, detail::lower(j))) * ihy;
            out(i, j) = 0.5 * (de * de + dw * dw) + 0.5 * (dn * dn + ds * ds);
        }
    }
    return out;
}

inline NormLadder norm_ladder(const ScalarField2D& f) {
    const Grid& g = f.grid();
    const auto [fx, fy] = gradient(f);
    const ScalarField2D fxx = second_difference_x(f);
    const ScalarField2D fyy = second_difference_y(f);
    // Mixed derivative as the x-difference of fy; zero on every wall.
    const ScalarField2D fxy = gradient(fy).first;

    NormLadder out;
    out.l2 = std::sqrt(detail::quadrature(g, [&](std::size_t i, std::size_t j) { return f(i, j) * f(i, j); }));
    out.h1_semi = std::sqrt(detail::quadrature(
        g, [&](std::size_t i, std::size_t j) { return fx(i, j) * fx(i, j) + fy(i, j) * fy(i, j); }));
    out.h2_semi = std::sqrt(detail::quadrature(g, [&](std::size_t i, std::size_t j) {
        return fxx(i, j) * fxx(i, j) + 2.0 * fxy(i, j) * fxy(i, j) + fyy(i, j) * fyy(i, j);
    }));
    out.l4_grad4 = detail::quadrature(g, [&](std::size_t i, std::size_t j) {
        const double s = fx(i, j) * fx(i, j) + fy(i, j) * fy(i, j);
        return s * s;
    });
    for (double v : f.values()) out.linf = std::max(out.linf, std::abs(v));
    return out;
}

} // namespace atflow

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "atflow/fields.hpp"

namespace atflow::testing {

inline const double kPi = std::acos(-1.0);

/// Uniform on [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// offset + sum_{k,l < modes} a_kl cos(k pi x / lx) cos(l pi y / ly) with
/// a_kl uniform in [-amp, amp] / (1 + k + l)^2. Every term satisfies the
/// Neumann condition.
inline ScalarField2D random_smooth(const Grid& grid, std::mt19937_64& rng, int modes = 4, double amp = 1.0,
                                   double offset = 0.0) {
    std::vector<double> a(static_cast<std::size_t>(modes * modes));
    for (int l = 0; l < modes; ++l) {
        for (int k = 0; k < modes; ++k) {
            a[l * modes + k] = uniform(rng, -amp, amp) / ((1.0 + k + l) * (1.0 + k + l));
        }
    }
    return ScalarField2D::sample(grid, [&](double x, double y) {
        double v = offset;
        for (int l = 0; l < modes; ++l) {
            for (int k = 0; k < modes; ++k) {
                v += a[l * modes + k] * std::cos(k * kPi * x / grid.lx()) * std::cos(l * kPi * y / grid.ly());
            }
        }
        return v;
    });
}

inline double max_abs(const ScalarField2D& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

inline double max_abs_interior(const ScalarField2D& f) {
    double m = 0.0;
    for (std::size_t j = 1; j + 1 < f.ny(); ++j) {
        for (std::size_t i = 1; i + 1 < f.nx(); ++i) m = std::max(m, std::abs(f(i, j)));
    }
    return m;
}

} // namespace atflow::testing

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "atflow/fields.hpp"

namespace atflow {

struct FlowState {
    double t = 0.0;
    ScalarField2D u;
    ScalarField2D z;
    std::size_t step_count = 0;
};

/// One time sample of the monitored quantities.
struct DiagnosticsRow {
    double t = 0.0;
    double energy = 0.0;
    // (AT(t_n) - AT(t_{n-1})) / dt + ||du/dt||^2 + ||dz/dt||^2 with difference
    // quotients; zero on the first row.
    double energy_identity_residual = 0.0;
    double f0_norm = 0.0;
    double f1_norm = 0.0;
    NormLadder u_ladder;
    NormLadder z_ladder;
    // L2 norms of the flow velocity evaluated at this sample.
    double dt_u_l2 = 0.0;
    double dt_z_l2 = 0.0;
};

struct Snapshot {
    double t = 0.0;
    ScalarField2D u;
    ScalarField2D z;
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<Snapshot> snapshots;
    std::vector<DiagnosticsRow> diagnostics;
};

namespace detail {

/// Number of steps of size dt covering [0, t_end]; the last one may be shorter.
inline std::size_t step_count(double dt, double t_end) {
    return static_cast<std::size_t>(std::max(std::ceil(t_end / dt - 1e-9), 1.0));
}

inline double step_time(std::size_t n, std::size_t n_steps, double dt, double t_end) {
    return n == n_steps ? t_end : static_cast<double>(n) * dt;
}

} // namespace detail

} // namespace atflow

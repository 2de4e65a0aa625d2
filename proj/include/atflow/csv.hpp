#pragma once

// Diagnostics table as RFC-4180 CSV (CRLF records, mandatory header, fixed
// column order, %.17g floats).

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "atflow/errors.hpp"
#include "atflow/trajectory.hpp"

namespace atflow {

inline constexpr std::array<std::string_view, 15> kDiagnosticsColumns = {
    "t",     "energy", "energy_identity_residual", "f0_norm", "f1_norm", "u_l2",       "u_h1",    "u_h2",
    "u_gradl4_4", "z_l2", "z_h1", "z_h2", "z_gradl4_4", "dt_u_l2", "dt_z_l2"};

inline std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_diagnostics_csv(std::ostream& out, std::span<const DiagnosticsRow> rows) {
    for (std::size_t c = 0; c < kDiagnosticsColumns.size(); ++c) {
        out << (c ? "," : "") << kDiagnosticsColumns[c];
    }
    out << "\r\n";
    for (const DiagnosticsRow& r : rows) {
        const std::array<double, 15> cells = {r.t,
                                              r.energy,
                                              r.energy_identity_residual,
                                              r.f0_norm,
                                              r.f1_norm,
                                              r.u_ladder.l2,
                                              r.u_ladder.h1_semi,
                                              r.u_ladder.h2_semi,
                                              r.u_ladder.l4_grad4,
                                              r.z_ladder.l2,
                                              r.z_ladder.h1_semi,
                                              r.z_ladder.h2_semi,
                                              r.z_ladder.l4_grad4,
                                              r.dt_u_l2,
                                              r.dt_z_l2};
        for (std::size_t c = 0; c < cells.size(); ++c) out << (c ? "," : "") << format_real(cells[c]);
        out << "\r\n";
    }
}

inline void write_diagnostics_csv(const std::filesystem::path& path, std::span<const DiagnosticsRow> rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    write_diagnostics_csv(out, rows);
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

} // namespace atflow

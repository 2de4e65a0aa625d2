// atflow: Ambrosio-Tortorelli gradient flow on a grey-scale image.
//
//   atflow --input img.pgm [--output-dir DIR] [--epsilon R] [--eta R] [--dt R]
//          [--t-end R] [--backend galerkin|fd] [--modes N]
//          [--snapshot-stride N] [--z0 ones|PATH]
//   atflow synth --output PATH [--kind two-region|noisy-two-region|random]
//          [--width N] [--height N] [--noise R] [--seed N]
//
// Exit codes: 0 success, 2 configuration or parse error, 3 divergence or
// solver failure, 4 I/O error.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "atflow/atflow.hpp"

namespace fs = std::filesystem;
using namespace atflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitIo = 4;

struct RunConfig {
    std::string input_path;
    std::string output_dir = ".";
    double epsilon = 0.05;
    double eta = 1e-4;
    std::optional<double> dt;
    double t_end = 0.1;
    std::string backend = "fd";
    std::size_t n_modes = 64;
    std::size_t snapshot_stride = 0;
    std::string z0 = "ones";
};

struct SynthConfig {
    std::string output;
    std::string kind = "two-region";
    std::size_t width = 64;
    std::size_t height = 64;
    double noise = 0.1;
    std::uint64_t seed = 1;
};

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void validate(const RunConfig& c) {
    if (c.input_path.empty()) throw UsageError("--input is required");
    if (!(c.epsilon > 0.0) || !std::isfinite(c.epsilon)) throw UsageError("--epsilon must be positive");
    if (!(c.eta > 0.0) || !std::isfinite(c.eta)) throw UsageError("--eta must be positive");
    if (c.dt && (!(*c.dt > 0.0) || !std::isfinite(*c.dt))) throw UsageError("--dt must be positive");
    if (!(c.t_end > 0.0) || !std::isfinite(c.t_end)) throw UsageError("--t-end must be positive");
    if (c.backend == "galerkin" && c.n_modes < 1) throw UsageError("--modes must be at least 1");
}

void write_snapshots(const TrajectoryRecord& traj, const fs::path& dir) {
    if (traj.snapshots.size() <= 2) return;
    fs::create_directories(dir);
    for (std::size_t n = 0; n < traj.snapshots.size(); ++n) {
        char name[32];
        std::snprintf(name, sizeof name, "%06zu", n);
        save_pgm(traj.snapshots[n].u, dir / (std::string("u_") + name + ".pgm"));
        save_pgm(traj.snapshots[n].z, dir / (std::string("z_") + name + ".pgm"));
    }
}

int run(const RunConfig& c) {
    validate(c);
    const ScalarField2D g = load_pgm(c.input_path);
    ScalarField2D z0(g.grid(), 1.0);
    if (c.z0 != "ones") {
        const ScalarField2D loaded = load_pgm(c.z0);
        if (!(loaded.grid() == g.grid())) throw UsageError("--z0 image size does not match --input");
        z0 = loaded;
    }
    const ATParams p{c.epsilon, c.eta, Model::truncated};
    p.validate();

    const fs::path out = c.output_dir;
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create output directory '" + out.string() + "': " + ec.message());

    TrajectoryRecord traj;
    ScalarField2D u_final(g.grid());
    ScalarField2D z_final(g.grid());
    std::size_t steps = 0;
    if (c.backend == "fd") {
        const double dt = c.dt.value_or(1e-4);
        FlowResult res = run_flow(g, z0, g, p, dt, c.t_end, FlowOptions{c.snapshot_stride, true});
        for (const std::string& w : res.warnings) std::cerr << "warning: " << w << "\n";
        traj = std::move(res.trajectory);
        u_final = res.final_state.u;
        z_final = res.final_state.z;
        steps = res.final_state.step_count;
    } else if (c.backend == "galerkin") {
        if (z0.min() < 0.0 || z0.max() > 1.0) {
            std::cerr << "warning: initial phase field leaves [0, 1]; the maximum principle is not expected to hold\n";
        }
        const SpectralBasis basis(g.grid(), c.n_modes);
        const std::vector<double> gc = project(g, basis);
        const CoeffVector c0{gc, project(z0, basis)};
        const double dt = c.dt.value_or(galerkin_default_dt(basis, p));
        GalerkinResult res = integrate_galerkin(c0, basis, gc, p, dt, c.t_end, GalerkinOptions{c.snapshot_stride, true});
        traj = std::move(res.trajectory);
        u_final = reconstruct(res.final_coeffs.a, basis);
        z_final = reconstruct(res.final_coeffs.b, basis);
        steps = traj.times.size() - 1;
    } else {
        throw UsageError("--backend must be 'galerkin' or 'fd'");
    }

    save_pgm(u_final, out / "u.pgm");
    save_pgm(z_final, out / "z.pgm");
    write_diagnostics_csv(out / "diagnostics.csv", traj.diagnostics);
    if (c.snapshot_stride > 0) write_snapshots(traj, out / "snapshots");

    const DiagnosticsRow& last = traj.diagnostics.back();
    std::printf("backend=%s steps=%zu t=%.6g energy=%.10g min_z=%.6g\n", c.backend.c_str(), steps, last.t,
                last.energy, z_final.min());
    return kExitOk;
}

int synth(const SynthConfig& c) {
    if (c.output.empty()) throw UsageError("--output is required");
    if (c.width < 3 || c.height < 3) throw UsageError("--width and --height must be at least 3");
    if (!(c.noise >= 0.0)) throw UsageError("--noise must be nonnegative");

    const Grid grid(c.width, c.height, 1.0, static_cast<double>(c.height) / static_cast<double>(c.width));
    std::mt19937_64 rng(c.seed);
    ScalarField2D f(grid);
    if (c.kind == "two-region" || c.kind == "noisy-two-region") {
        const double amp = c.kind == "two-region" ? 0.0 : c.noise;
        for (std::size_t j = 0; j < grid.ny(); ++j) {
            for (std::size_t i = 0; i < grid.nx(); ++i) {
                const double base = 2 * i < grid.nx() ? 0.0 : 1.0;
                f(i, j) = base + amp * (2.0 * unit_uniform(rng) - 1.0);
            }
        }
    } else if (c.kind == "random") {
        // Sum of low cosine modes with uniform random amplitudes, mapped to [0, 1].
        constexpr int kMaxMode = 4;
        std::vector<double> amp(kMaxMode * kMaxMode);
        for (double& a : amp) a = 2.0 * unit_uniform(rng) - 1.0;
        const double pi = std::acos(-1.0);
        f = ScalarField2D::sample(grid, [&](double x, double y) {
            double v = 0.0;
            for (int l = 0; l < kMaxMode; ++l) {
                for (int k = 0; k < kMaxMode; ++k) {
                    v += amp[l * kMaxMode + k] * std::cos(k * pi * x / grid.lx()) * std::cos(l * pi * y / grid.ly());
                }
            }
            return v;
        });
        const double lo = f.min();
        const double hi = f.max();
        for (std::size_t k = 0; k < f.size(); ++k) f[k] = hi > lo ? (f[k] - lo) / (hi - lo) : 0.5;
    } else {
        throw UsageError("--kind must be 'two-region', 'noisy-two-region' or 'random'");
    }
    save_pgm(f, c.output);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ambrosio-Tortorelli gradient flow for image segmentation"};
    app.set_version_flag("--version", "atflow 0.1.0");

    RunConfig rc;
    app.add_option("--input", rc.input_path, "Input grey map (PGM P2/P5)");
    app.add_option("--output-dir", rc.output_dir, "Directory for u.pgm, z.pgm and diagnostics.csv");
    app.add_option("--epsilon", rc.epsilon, "Phase-field length scale");
    app.add_option("--eta", rc.eta, "Residual diffusivity on the edge set");
    app.add_option("--dt", rc.dt, "Time step (default: 1e-4 for fd, stability estimate for galerkin)");
    app.add_option("--t-end", rc.t_end, "Final time");
    app.add_option("--backend", rc.backend, "Time integrator")->check(CLI::IsMember({"galerkin", "fd"}));
    app.add_option("--modes", rc.n_modes, "Number of cosine modes (galerkin)");
    app.add_option("--snapshot-stride", rc.snapshot_stride, "Write snapshots every N steps (0: none)");
    app.add_option("--z0", rc.z0, "Initial phase field: 'ones' or a PGM path");

    SynthConfig sc;
    CLI::App* sub = app.add_subcommand("synth", "Write a synthetic test image");
    sub->add_option("--output", sc.output, "Output PGM path");
    sub->add_option("--kind", sc.kind, "two-region, noisy-two-region or random")
        ->check(CLI::IsMember({"two-region", "noisy-two-region", "random"}));
    sub->add_option("--width", sc.width, "Image width");
    sub->add_option("--height", sc.height, "Image height");
    sub->add_option("--noise", sc.noise, "Uniform noise amplitude (noisy-two-region)");
    sub->add_option("--seed", sc.seed, "Random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        return sub->parsed() ? synth(sc) : run(rc);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DivergedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const SolverError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
}

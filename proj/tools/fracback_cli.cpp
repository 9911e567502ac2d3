#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "fracback/backward.hpp"
#include "fracback/bench.hpp"
#include "fracback/error.hpp"
#include "fracback/io.hpp"
#include "fracback/mlf.hpp"

using namespace fracback;
namespace fs = std::filesystem;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_numerical = 2;
constexpr int exit_diverged = 3;

// Every experiment JSON field, as an optional command-line override.
struct Overrides {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha, delta, gamma, T, scale, fp_tol, cg_tol;
    std::optional<std::string> preset, mode, placement, nonlinearity, initial_data;
    std::optional<int> mesh_n, steps, n_ref, N_ref, dim, fp_max, cg_max, repetitions;
    std::optional<std::uint64_t> random_init;
    std::vector<double> alphas, deltas;
    std::optional<bool> spectral, record_history;
    bool paper_scale = false;
};

void add_experiment_flags(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config, "experiment JSON file")->required()->check(CLI::ExistingFile);
    app->add_option("--out", o.out, "output directory");
    app->add_option("--seed", o.seed, "master noise seed");
    app->add_option("--alpha", o.alpha, "fractional order in (0,1)");
    app->add_option("--alphas", o.alphas, "fractional orders for a table sweep");
    app->add_option("--delta", o.delta, "noise level");
    app->add_option("--deltas", o.deltas, "noise levels for a table sweep");
    app->add_option("--gamma", o.gamma, "regularization parameter (overrides the preset)");
    app->add_option("--preset", o.preset, "parameter preset: paper-ex1 | paper-ex2");
    app->add_option("--mesh-n", o.mesh_n, "coarse mesh subdivisions per axis");
    app->add_option("--steps", o.steps, "coarse time steps");
    app->add_option("--n-ref", o.n_ref, "reference mesh subdivisions");
    app->add_option("--N-ref", o.N_ref, "reference time steps");
    app->add_option("--dim", o.dim, "space dimension, 1 or 2");
    app->add_option("--T", o.T, "final time");
    app->add_option("--nonlinearity", o.nonlinearity, "source term name");
    app->add_option("--nonlinearity-scale", o.scale, "factor L for L_sqrt1pu2");
    app->add_option("--initial-data", o.initial_data, "smooth_sine | checkerboard | eigenmode:k[,l]");
    app->add_option("--mode", o.mode, "noise mode: paper_pointwise | exact_l2 | scalar");
    app->add_option("--placement", o.placement, "noise placement: coarse (default) | reference");
    app->add_option("--fp-tol", o.fp_tol, "outer iteration tolerance");
    app->add_option("--fp-max", o.fp_max, "outer iteration limit");
    app->add_option("--cg-tol", o.cg_tol, "CG relative residual");
    app->add_option("--cg-max", o.cg_max, "CG iteration limit");
    app->add_option("--spectral-fast-path", o.spectral, "dense eigen-solve of the regularized operator (true/false)");
    app->add_option("--random-init", o.random_init, "seed for a random initial iterate");
    app->add_option("--repetitions", o.repetitions, "noise seeds per table cell");
    app->add_option("--record-history", o.record_history, "write per-row history and field files (true/false)");
    app->add_flag("--paper-scale", o.paper_scale, "2D reference grid h = 1/256, tau = T/1000 (slow)");
}

ExperimentSpec load_spec(const Overrides& o) {
    ExperimentSpec s = spec_from_json(read_text(o.config));
    if (o.dim && *o.dim != s.dim) {
        const ExperimentSpec d = default_spec(*o.dim);
        s.dim = d.dim;
        s.n_ref = d.n_ref;
        s.N_ref = d.N_ref;
    }
    if (o.out) s.output_dir = *o.out;
    if (o.seed) s.noise.seed = *o.seed;
    if (o.alpha) s.alpha = *o.alpha;
    if (!o.alphas.empty()) s.alphas = o.alphas;
    if (o.delta) s.noise.delta = *o.delta;
    if (!o.deltas.empty()) s.deltas = o.deltas;
    if (o.gamma) s.gamma = *o.gamma;
    if (o.preset) s.preset = *o.preset;
    if (o.mesh_n) s.mesh_n = *o.mesh_n;
    if (o.steps) s.steps = *o.steps;
    if (o.n_ref) s.n_ref = *o.n_ref;
    if (o.N_ref) s.N_ref = *o.N_ref;
    if (o.T) s.T = *o.T;
    if (o.nonlinearity) s.nonlinearity = *o.nonlinearity;
    if (o.scale) s.nonlinearity_scale = *o.scale;
    if (o.initial_data) s.initial_data = *o.initial_data;
    if (o.mode) s.noise.mode = parse_noise_mode(*o.mode);
    if (o.placement) s.noise.placement = parse_noise_placement(*o.placement);
    if (o.fp_tol) s.backward.fp_tol = *o.fp_tol;
    if (o.fp_max) s.backward.fp_max = *o.fp_max;
    if (o.cg_tol) s.backward.cg_tol = *o.cg_tol;
    if (o.cg_max) s.backward.cg_max = *o.cg_max;
    if (o.spectral) s.backward.spectral_fast_path = *o.spectral;
    if (o.random_init) s.backward.random_init_seed = *o.random_init;
    if (o.repetitions) s.repetitions = *o.repetitions;
    if (o.record_history) s.record_history = *o.record_history;
    if (o.paper_scale) s.paper_scale = true;
    if (s.paper_scale && s.dim == 2) {
        s.n_ref = 256;
        s.N_ref = 1000;
        std::cerr << "warning: paper-scale reference grid (h = 1/256, 1000 steps) takes a long time\n";
    }
    validate(s);
    return s;
}

int run_forward(const Overrides& o, bool quiet) {
    const ExperimentSpec s = load_spec(o);
    const int n = s.mesh_n.value_or(s.n_ref);
    const int N = s.steps.value_or(s.N_ref);
    const FemSystem sys = assemble(build_mesh(s.dim, n));
    const auto data = make_initial_data(s.initial_data, s.dim);
    const auto grid = make_time_grid(s.T, N, s.alpha);
    const ForwardSolver solver(sys, grid);
    const GridFunction uT = solver.terminal(l2_project(sys, data.u0, data.rule),
                                            make_nonlinearity(s.nonlinearity, s.nonlinearity_scale));
    const fs::path dir = s.output_dir;
    write_text(dir / "field_uT.csv", field_csv(sys, uT));
    const std::string manifest = "{\"alpha\":" + format_double(s.alpha) + ",\"T\":" + format_double(s.T) +
                                 ",\"N\":" + std::to_string(N) + ",\"tau\":" + format_double(grid.tau()) +
                                 ",\"mesh\":" + mesh_metadata_json(sys.mesh) + "}\n";
    write_text(dir / "forward_manifest.json", manifest);
    if (!quiet)
        std::cout << "forward: alpha=" << s.alpha << " n=" << n << " N=" << N << " ||u(T)||=" << l2_norm(sys, uT)
                  << "\n  " << (dir / "field_uT.csv").string() << "\n  " << (dir / "forward_manifest.json").string()
                  << "\n";
    return exit_ok;
}

int run_backward(const Overrides& o, bool quiet, bool history_only) {
    ExperimentSpec s = load_spec(o);
    s.record_history = true;
    const RunRow row = history_only ? run_iteration_history(s) : run_reconstruction(s);
    const fs::path dir = s.output_dir;
    const fs::path history = dir / (history_only ? "history.csv" : "history_0.csv");
    write_text(history, history_csv(row.result));
    std::vector<fs::path> written{history};
    if (!history_only) {
        write_text(dir / "field_u0hat_0.csv", row.field_csv);
        written.push_back(dir / "field_u0hat_0.csv");
    }
    if (!quiet) {
        std::cout << (history_only ? "history" : "backward") << ": alpha=" << s.alpha << " delta=" << s.noise.delta
                  << " gamma=" << row.params.gamma << " n=" << row.params.n << " N=" << row.params.N
                  << " e_u=" << row.e_u << " iters=" << row.result.outer_iters
                  << (row.result.converged ? " converged" : row.result.diverged ? " diverged" : " not-converged")
                  << "\n";
        for (const auto& p : written) std::cout << "  " << p.string() << "\n";
    }
    return row.result.diverged ? exit_diverged : exit_ok;
}

int run_table_cmd(const Overrides& o, bool quiet) {
    const ExperimentSpec s = load_spec(o);
    const TableResult table = run_table(s);
    const auto written = write_table_outputs(s, table, s.output_dir);
    bool diverged = false;
    for (const auto& r : table.rows) diverged = diverged || r.result.diverged;
    if (!quiet) {
        std::cout << "table: " << table.rows.size() << " runs in " << table.wall_time_s << " s"
                  << (diverged ? " (some runs diverged)" : "") << "\n";
        for (const auto& p : written)
            if (p.filename() == "table.csv" || p.filename() == "rows.csv" || p.filename() == "manifest.json")
                std::cout << "  " << p.string() << "\n";
    }
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Backward problem for semilinear subdiffusion: forward solves, reconstructions, sweeps"};
    app.require_subcommand(1, 1);
    bool quiet = false;
    app.add_flag("--quiet", quiet, "suppress the summary line");

    Overrides fwd, bwd, tab, his;
    auto* forward = app.add_subcommand("forward", "solve the forward problem and dump u(T)");
    add_experiment_flags(forward, fwd);
    auto* backward = app.add_subcommand("backward", "one reconstruction by the fixed-point iteration");
    add_experiment_flags(backward, bwd);
    auto* table = app.add_subcommand("table", "sweep alphas x deltas x seeds and write table.csv");
    add_experiment_flags(table, tab);
    auto* history = app.add_subcommand("history", "convergence history of one reconstruction");
    add_experiment_flags(history, his);

    double ml_alpha = 1.0, ml_beta = 1.0, ml_x = 0.0;
    auto* mlf = app.add_subcommand("mlf", "evaluate the Mittag-Leffler function E_{alpha,beta}(x), x <= 0");
    mlf->add_option("--alpha", ml_alpha, "alpha in (0,2]")->required();
    mlf->add_option("--beta", ml_beta, "beta > 0")->default_val(1.0);
    mlf->add_option("--x", ml_x, "argument x <= 0")->required();

    std::string p_preset;
    double p_delta = 0.0, p_q = 2.0, p_mu = 1.0, p_T = 1.0;
    auto* params = app.add_subcommand("params", "a-priori choice of gamma, tau, h for a noise level");
    params->add_option("--delta", p_delta, "noise level in (0,1)")->required();
    params->add_option("--preset", p_preset, "paper-ex1 | paper-ex2 (default: the general rule)");
    params->add_option("--q", p_q, "smoothness index of u0 in (0,2]")->default_val(2.0);
    params->add_option("--mu", p_mu, "error norm index in (0,1]")->default_val(1.0);
    params->add_option("--T", p_T, "final time, for the step count")->default_val(1.0);

    for (auto* sub : app.get_subcommands({})) sub->add_flag("--quiet", quiet, "suppress the summary line");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return e.get_exit_code() == 0 ? code : exit_usage;
    }

    try {
        if (*mlf) {
            std::printf("%.15g\n", mittag_leffler(ml_alpha, ml_beta, ml_x));
            return exit_ok;
        }
        if (*params) {
            const auto c = select_parameters(p_delta, p_q, p_mu, p_preset);
            const auto [n, N] = discretize(c, p_T);
            std::printf("gamma=%.8g tau=%.8g h=%.8g n=%d N=%d\n", c.gamma, c.tau, c.h, n, N);
            return exit_ok;
        }
        if (*forward) return run_forward(fwd, quiet);
        if (*backward) return run_backward(bwd, quiet, false);
        if (*history) return run_backward(his, quiet, true);
        if (*table) return run_table_cmd(tab, quiet);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::InvalidArgument:
            case ErrorKind::ParameterOutOfRange:
            case ErrorKind::UnsupportedDomain:
                return exit_usage;
            default:
                return exit_numerical;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical;
    }
    return exit_usage;
}

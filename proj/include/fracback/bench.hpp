#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fracback/backward.hpp"
#include "fracback/fem.hpp"
#include "fracback/forward.hpp"

namespace fracback {

inline constexpr const char* toolkit_version = "0.1.0";

struct InitialData {
    std::string name;
    SpatialFunction u0;
    QuadratureRule rule = QuadratureRule::Smooth;
};

/// smooth_sine, checkerboard, eigenmode:k (1D sin(k pi x); 2D sin(k pi x) sin(k pi y)),
/// eigenmode:k,l (2D).
InitialData make_initial_data(const std::string& name, int dim);

enum class NoiseMode {
    PaperPointwise,  // g + eps_i delta sup g, eps_i iid standard normal per node
    ExactL2,         // same field rescaled so ||g_delta - g||_L2 = delta
    Scalar           // one standard normal eps shared by all nodes
};

enum class NoisePlacement {
    Reference,  // perturb the reference-grid nodes, then L2-project onto the coarse mesh
    Coarse      // sample the reference solution at coarse nodes, perturb those
};

NoiseMode parse_noise_mode(const std::string& s);
std::string to_string(NoiseMode m);
NoisePlacement parse_noise_placement(const std::string& s);
std::string to_string(NoisePlacement p);

struct NoiseSpec {
    double delta = 0.0;
    NoiseMode mode = NoiseMode::PaperPointwise;
    NoisePlacement placement = NoisePlacement::Coarse;
    std::uint64_t seed = 42;
};

/// One experiment; `alphas`/`deltas` (if non-empty) turn it into a table sweep.
struct ExperimentSpec {
    double alpha = 0.5;
    std::vector<double> alphas;
    double T = 1.0;
    std::string nonlinearity = "sqrt1pu2";
    double nonlinearity_scale = 1.0;
    std::string initial_data = "smooth_sine";
    int dim = 2;
    std::optional<int> mesh_n;  // coarse subdivisions; preset-derived when absent
    std::optional<int> steps;   // coarse time steps; preset-derived when absent
    int n_ref = 128;
    int N_ref = 500;
    NoiseSpec noise;
    std::vector<double> deltas;
    std::string preset;           // "", "paper-ex1", "paper-ex2"
    std::optional<double> gamma;  // overrides the preset
    BackwardConfig backward;      // gamma field unused; see resolve()
    int repetitions = 1;
    bool record_history = false;  // write history_/field_ files per row
    std::string output_dir = "out";
    bool paper_scale = false;     // 2D: n_ref = 256, N_ref = 1000
};

/// Defaults for the given dimension (1D: n_ref 512, N_ref 1000; 2D: 128, 500).
ExperimentSpec default_spec(int dim);

/// Strict JSON reader: unknown keys and wrong types are rejected.
ExperimentSpec spec_from_json(const std::string& text);
std::string spec_to_json(const ExperimentSpec& spec);
void validate(const ExperimentSpec& spec);

/// Discretization actually used for one noise level.
struct ResolvedRun {
    double delta = 0.0;
    double gamma = 0.0;
    double h = 0.0;
    double tau = 0.0;
    int n = 0;
    int N = 0;
};

ResolvedRun resolve(const ExperimentSpec& spec, double delta);

/// Fine-grid terminal state u(T) of the forward problem.
struct Reference {
    FemSystem sys;
    GridFunction terminal;
    std::vector<double> node_values;
};

/// Thread-safe memo of reference solutions and coarse systems, keyed by their inputs.
class ExperimentCache {
public:
    ExperimentCache();
    ~ExperimentCache();
    std::shared_ptr<const Reference> reference(const ExperimentSpec& spec);
    std::shared_ptr<const FemSystem> system(int dim, int n);
    std::shared_ptr<const SpectralBasis> basis(int dim, int n);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct Observation {
    GridFunction g_clean;
    GridFunction g_noisy;
    double achieved_noise_l2 = 0.0;
    double sup_g = 0.0;
};

Observation make_observation(const ExperimentSpec& spec, const FemSystem& coarse, ExperimentCache& cache);
Observation make_observation(const ExperimentSpec& spec);

struct RunRow {
    std::size_t index = 0;
    double alpha = 0.0;
    int repetition = 0;
    std::uint64_t seed = 0;
    ResolvedRun params;
    double e_u = 0.0;
    double achieved_noise_l2 = 0.0;
    ReconstructionResult result;
    std::string field_csv;
    double runtime_s = 0.0;
};

/// Observation, fixed-point reconstruction and the relative L2 error against P_h u0 on the coarse mesh.
/// Uses spec.alpha and spec.noise (delta and seed as given).
RunRow run_reconstruction(const ExperimentSpec& spec, ExperimentCache& cache);
RunRow run_reconstruction(const ExperimentSpec& spec);

/// Per-row seed from (master seed, row index); independent of scheduling.
std::uint64_t row_seed(std::uint64_t master, std::size_t row);

struct TableResult {
    std::vector<double> alphas;
    std::vector<double> deltas;
    std::vector<RunRow> rows;                  // alpha-major, then delta, then repetition
    std::vector<std::vector<double>> mean_error;  // [alpha][delta]
    std::vector<std::vector<double>> orders;      // [alpha][pair]
    double wall_time_s = 0.0;
};

TableResult run_table(const ExperimentSpec& spec);
TableResult run_table(const ExperimentSpec& spec, ExperimentCache& cache);

std::string table_csv(const TableResult& table);
std::string rows_csv(const TableResult& table);
std::string history_csv(const ReconstructionResult& result);
std::string manifest_json(const ExperimentSpec& spec, const TableResult& table);

/// Writes table.csv, rows.csv, manifest.json and (with record_history) history_<row>.csv
/// and field_u0hat_<row>.csv. Returns the written paths.
std::vector<std::filesystem::path> write_table_outputs(const ExperimentSpec& spec, const TableResult& table,
                                                       const std::filesystem::path& dir);

/// Single reconstruction with the truth supplied, for convergence-history plots.
RunRow run_iteration_history(const ExperimentSpec& spec);
RunRow run_iteration_history(const ExperimentSpec& spec, ExperimentCache& cache);

/// Worker count: FRACBACK_THREADS if set, else hardware concurrency.
unsigned worker_threads();

}  // namespace fracback

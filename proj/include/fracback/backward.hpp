#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fracback/fem.hpp"
#include "fracback/forward.hpp"

namespace fracback {

struct BackwardConfig {
    double gamma = 1e-3;
    double fp_tol = 1e-10;  // outer stop on ||U_{j+1} - U_j||_M
    int fp_max = 100;
    double cg_tol = 1e-10;  // relative residual of the regularized solve
    int cg_max = 300;
    bool record_history = true;
    /// Invert gamma I + F^N with a dense eigendecomposition when dofs <= spectral_max_dofs.
    bool spectral_fast_path = false;
    std::size_t spectral_max_dofs = SpectralBasis::default_max_dofs;
    /// Start from a seeded standard-normal iterate instead of zero.
    std::optional<std::uint64_t> random_init_seed;
};

void validate(const BackwardConfig& cfg);

struct HistoryEntry {
    int iter = 0;
    double update_norm = 0.0;
    std::optional<double> error_vs_truth;
    int cg_iters = 0;
    long forward_solves = 0;  // cumulative
};

struct ReconstructionResult {
    GridFunction u0_hat;
    int outer_iters = 0;
    std::vector<HistoryEntry> history;
    std::vector<int> cg_iter_counts;
    bool converged = false;
    bool diverged = false;
    long forward_solves = 0;
    std::string stop_reason;
};

struct LinearSolveStats {
    int iterations = 0;
    double residual = 0.0;  // final ||r||_M
    double rhs_norm = 0.0;
    int applies = 0;  // F^N applications, including the warm-start residual
};

/// Regularized backward operator gamma I + F^N on one (mesh, time grid).
/// Reuses the forward factorization and, if enabled, the dense spectral basis.
class BackwardSolver {
public:
    BackwardSolver(const FemSystem& sys, const TimeGrid& grid, const BackwardConfig& cfg);
    ~BackwardSolver();

    /// Shares an existing eigendecomposition of sys (fast path only).
    BackwardSolver(const FemSystem& sys, const TimeGrid& grid, const BackwardConfig& cfg,
                   std::shared_ptr<const SpectralBasis> basis);

    /// (gamma I + F^N) v
    GridFunction apply(const GridFunction& v) const;
    GridFunction apply_F(const GridFunction& v) const;

    /// Solves (gamma I + F^N) x = rhs. CG in the M inner product, optionally warm started;
    /// the fast path inverts exactly and reports 0 iterations.
    GridFunction solve_linear(const GridFunction& rhs, const GridFunction* warm = nullptr,
                              LinearSolveStats* stats = nullptr) const;

    /// Fixed-point iteration U_{j+1} = (gamma I + F^N)^{-1} [g - (S^N U_j - F^N U_j)].
    ReconstructionResult reconstruct(const GridFunction& g_obs, const Nonlinearity& f,
                                     const GridFunction* truth = nullptr) const;

    const ForwardSolver& forward() const { return forward_; }
    const BackwardConfig& config() const { return cfg_; }
    bool uses_fast_path() const { return basis_ != nullptr; }

private:
    GridFunction cg_solve(const GridFunction& rhs, const GridFunction* warm, LinearSolveStats& stats) const;

    const FemSystem& sys_;
    BackwardConfig cfg_;
    ForwardSolver forward_;
    std::shared_ptr<const SpectralBasis> basis_;
    Vector symbol_;  // r_N(lambda_k), fast path only
};

GridFunction solve_linear_regularized(const FemSystem& sys, const TimeGrid& grid, const GridFunction& rhs,
                                      const BackwardConfig& cfg, LinearSolveStats* stats = nullptr);

ReconstructionResult fixed_point_reconstruct(const FemSystem& sys, const TimeGrid& grid, const GridFunction& g_obs,
                                             const Nonlinearity& f, const BackwardConfig& cfg,
                                             const GridFunction* truth = nullptr);

struct ParameterChoice {
    double gamma = 0.0;
    double h = 0.0;
    double tau = 0.0;
};

struct ParameterConstants {
    double c_gamma = 1.0;
    double c_h = 1.0;
    double c_tau = 1.0;
};

/// A-priori choice gamma = C delta^{2/(q+2)}, h^2|log h| = C delta,
/// tau |log tau|^2 h^{min(q-mu,0)} = C delta^{q/(q+2)}; presets "paper-ex1" and "paper-ex2"
/// override the rule with fixed formulas.
ParameterChoice select_parameters(double delta, double q, double mu, const std::string& preset = "",
                                  const ParameterConstants& constants = {});

/// Mesh subdivisions and step count realizing a parameter choice: n = max(2, round(1/h)),
/// N = max(1, round(T/tau)).
std::pair<int, int> discretize(const ParameterChoice& choice, double T);

/// Observed orders log(e_i/e_{i+1}) / log(delta_i/delta_{i+1}) for (delta, error) pairs.
std::vector<double> convergence_order(const std::vector<std::pair<double, double>>& errors);

}  // namespace fracback

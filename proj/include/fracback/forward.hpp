#pragma once

#include <memory>

#include "fracback/cq.hpp"
#include "fracback/fem.hpp"
#include "fracback/nonlinearity.hpp"

namespace fracback {

struct TimeGrid {
    double T = 1.0;
    int N = 1;
    double alpha = 0.5;

    double tau() const { return T / N; }
};

/// Checks T > 0, N >= 1, alpha in (0,1).
TimeGrid make_time_grid(double T, int N, double alpha);

struct Trajectory {
    TimeGrid grid;
    /// Column n holds U^n. Terminal-only runs keep a single column U^N.
    Eigen::MatrixXd states;

    bool full() const { return states.cols() == grid.N + 1; }
    GridFunction terminal() const { return states.col(states.cols() - 1); }
    GridFunction state(int n) const;
};

enum class StepSolver {
    Direct,  // sparse LDL^T of the step matrix, factored once
    Cg       // Jacobi-preconditioned CG, relative residual 1e-12
};

/// Time stepper for the linearized fully discrete scheme
///   (tau^-a M + K) U^n = M f(U^{n-1}) - tau^-a M [sum_{j=1}^n w_j U^{n-j} - s_n U^0].
/// Holds the step matrix factorization; reusable for many initial data.
class ForwardSolver {
public:
    ForwardSolver(const FemSystem& sys, const TimeGrid& grid, StepSolver kind = StepSolver::Direct);
    ~ForwardSolver();
    ForwardSolver(const ForwardSolver&) = delete;
    ForwardSolver& operator=(const ForwardSolver&) = delete;

    Trajectory solve(const GridFunction& u0, const Nonlinearity& f, bool keep_all = true) const;
    GridFunction terminal(const GridFunction& u0, const Nonlinearity& f) const;

    /// F^N v: terminal state of the homogeneous linear problem.
    GridFunction apply_F(const GridFunction& v) const;
    /// S^N v: terminal state with the nonlinearity.
    GridFunction apply_S(const GridFunction& v, const Nonlinearity& f) const;

    const FemSystem& system() const { return sys_; }
    const TimeGrid& grid() const { return grid_; }
    const CqWeights& weights() const { return weights_; }

private:
    Eigen::MatrixXd run(const GridFunction& u0, const Nonlinearity& f) const;
    GridFunction step_solve(const Vector& rhs, int step) const;

    struct Factor;
    const FemSystem& sys_;
    TimeGrid grid_;
    CqWeights weights_;
    StepSolver kind_;
    SparseMatrix step_matrix_;
    std::unique_ptr<Factor> factor_;
};

Trajectory solve_forward(const FemSystem& sys, const TimeGrid& grid, const GridFunction& u0,
                         const Nonlinearity& f);
GridFunction apply_F(const FemSystem& sys, const TimeGrid& grid, const GridFunction& v);
GridFunction apply_S(const FemSystem& sys, const TimeGrid& grid, const GridFunction& v, const Nonlinearity& f);

/// Scalar symbol r_N(lambda): the same scheme run on the 1x1 problem
/// u' + lambda u = 0, u(0) = 1. F^N = sum_k r_N(lambda_k) (., phi_k)_M phi_k.
Vector cq_symbol(const TimeGrid& grid, const Vector& lambdas);
double cq_symbol(const TimeGrid& grid, double lambda);

}  // namespace fracback

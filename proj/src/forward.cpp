#include "fracback/forward.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <string>

#include "fracback/error.hpp"

namespace fracback {

TimeGrid make_time_grid(double T, int N, double alpha) {
    require(T > 0.0 && std::isfinite(T), ErrorKind::InvalidArgument, "T must be positive");
    require(N >= 1, ErrorKind::InvalidArgument, "N must be at least 1");
    require(alpha > 0.0 && alpha < 1.0, ErrorKind::InvalidArgument, "alpha must lie in (0,1)");
    return {T, N, alpha};
}

GridFunction Trajectory::state(int n) const {
    if (full()) {
        require(n >= 0 && n <= grid.N, ErrorKind::InvalidArgument, "time index out of range");
        return states.col(n);
    }
    require(n == grid.N, ErrorKind::InvalidArgument, "terminal-only trajectory keeps U^N only");
    return states.col(0);
}

struct ForwardSolver::Factor {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
};

ForwardSolver::ForwardSolver(const FemSystem& sys, const TimeGrid& grid, StepSolver kind)
    : sys_(sys), grid_(make_time_grid(grid.T, grid.N, grid.alpha)),
      weights_(cq_weights(grid.alpha, grid.N)), kind_(kind), factor_(std::make_unique<Factor>()) {
    require(sys.dofs() > 0, ErrorKind::InvalidArgument, "system without interior dofs");
    const double scale = std::pow(grid_.tau(), -grid_.alpha);
    step_matrix_ = scale * sys.mass + sys.stiffness;
    step_matrix_.makeCompressed();
    if (kind_ == StepSolver::Direct) {
        factor_->ldlt.compute(Eigen::SparseMatrix<double>(step_matrix_));
        require(factor_->ldlt.info() == Eigen::Success, ErrorKind::NumericalFailure,
                "step matrix factorization failed");
    } else {
        factor_->cg.setTolerance(1e-12);
        factor_->cg.setMaxIterations(10 * static_cast<Eigen::Index>(sys.dofs()) + 100);
        factor_->cg.compute(step_matrix_);
    }
}

ForwardSolver::~ForwardSolver() = default;

GridFunction ForwardSolver::step_solve(const Vector& rhs, int step) const {
    if (kind_ == StepSolver::Direct) return factor_->ldlt.solve(rhs);
    if (rhs.squaredNorm() == 0.0) return Vector::Zero(rhs.size());
    GridFunction x = factor_->cg.solve(rhs);
    require(factor_->cg.info() == Eigen::Success, ErrorKind::NumericalFailure,
            "step CG did not converge at step " + std::to_string(step));
    return x;
}

Eigen::MatrixXd ForwardSolver::run(const GridFunction& u0, const Nonlinearity& f) const {
    require(static_cast<std::size_t>(u0.size()) == sys_.dofs(), ErrorKind::InvalidArgument,
            "initial data size does not match system");
    const int N = grid_.N;
    const double scale = std::pow(grid_.tau(), -grid_.alpha);
    const auto& w = weights_.w;

    Eigen::MatrixXd states(u0.size(), N + 1);
    states.col(0) = u0;
    Vector reversed(N);
    for (int n = 1; n <= N; ++n) {
        // c[m] = w[n-m], m = 0..n-1, so that history = sum_{j=1}^n w_j U^{n-j}
        for (int m = 0; m < n; ++m) reversed[m] = w[n - m];
        Vector history = states.leftCols(n) * reversed.head(n);
        history -= weights_.partial_sums[n] * u0;
        Vector rhs = -scale * (sys_.mass * history);
        if (!f.is_zero()) rhs += load_nonlinear(sys_, states.col(n - 1), f);
        states.col(n) = step_solve(rhs, n);
        require(states.col(n).allFinite(), ErrorKind::NumericalFailure,
                "non-finite state at step " + std::to_string(n));
    }
    return states;
}

Trajectory ForwardSolver::solve(const GridFunction& u0, const Nonlinearity& f, bool keep_all) const {
    Trajectory out{grid_, run(u0, f)};
    if (!keep_all) {
        Eigen::MatrixXd last = out.states.rightCols(1);
        out.states = std::move(last);
    }
    return out;
}

GridFunction ForwardSolver::terminal(const GridFunction& u0, const Nonlinearity& f) const {
    return run(u0, f).col(grid_.N);
}

GridFunction ForwardSolver::apply_F(const GridFunction& v) const {
    static const Nonlinearity zero = make_nonlinearity("zero");
    return terminal(v, zero);
}

GridFunction ForwardSolver::apply_S(const GridFunction& v, const Nonlinearity& f) const { return terminal(v, f); }

Trajectory solve_forward(const FemSystem& sys, const TimeGrid& grid, const GridFunction& u0,
                         const Nonlinearity& f) {
    return ForwardSolver(sys, grid).solve(u0, f);
}

GridFunction apply_F(const FemSystem& sys, const TimeGrid& grid, const GridFunction& v) {
    return ForwardSolver(sys, grid).apply_F(v);
}

GridFunction apply_S(const FemSystem& sys, const TimeGrid& grid, const GridFunction& v, const Nonlinearity& f) {
    return ForwardSolver(sys, grid).apply_S(v, f);
}

Vector cq_symbol(const TimeGrid& grid_in, const Vector& lambdas) {
    const TimeGrid grid = make_time_grid(grid_in.T, grid_in.N, grid_in.alpha);
    const CqWeights weights = cq_weights(grid.alpha, grid.N);
    const double scale = std::pow(grid.tau(), -grid.alpha);
    const int N = grid.N;
    const auto count = lambdas.size();

    // rows: time levels, so the history sum is a GEMV per step
    Eigen::MatrixXd u(N + 1, count);
    u.row(0).setOnes();
    const Eigen::ArrayXd denom = scale + lambdas.array();
    Vector reversed(N);
    for (int n = 1; n <= N; ++n) {
        for (int m = 0; m < n; ++m) reversed[m] = weights.w[n - m];
        Eigen::RowVectorXd history = reversed.head(n).transpose() * u.topRows(n);
        history.array() -= weights.partial_sums[n];
        u.row(n) = (-scale * history.array() / denom.transpose()).matrix();
    }
    return u.row(N).transpose();
}

double cq_symbol(const TimeGrid& grid, double lambda) {
    Vector l(1);
    l[0] = lambda;
    return cq_symbol(grid, l)[0];
}

}  // namespace fracback

#include "fracback/backward.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "fracback/error.hpp"

namespace fracback {

void validate(const BackwardConfig& cfg) {
    require(cfg.gamma > 0.0 && std::isfinite(cfg.gamma), ErrorKind::InvalidArgument, "gamma must be positive");
    require(cfg.fp_tol > 0.0 && cfg.cg_tol > 0.0, ErrorKind::InvalidArgument, "tolerances must be positive");
    require(cfg.fp_max >= 1 && cfg.cg_max >= 1, ErrorKind::InvalidArgument, "iteration limits must be positive");
}

BackwardSolver::BackwardSolver(const FemSystem& sys, const TimeGrid& grid, const BackwardConfig& cfg)
    : BackwardSolver(sys, grid, cfg, nullptr) {}

BackwardSolver::BackwardSolver(const FemSystem& sys, const TimeGrid& grid, const BackwardConfig& cfg,
                               std::shared_ptr<const SpectralBasis> basis)
    : sys_(sys), cfg_(cfg), forward_(sys, grid) {
    validate(cfg_);
    if (!cfg_.spectral_fast_path) return;
    if (basis) {
        require(static_cast<std::size_t>(basis->eigenvalues().size()) == sys.dofs(), ErrorKind::InvalidArgument,
                "spectral basis belongs to another system");
        basis_ = std::move(basis);
    } else {
        if (sys.dofs() > cfg_.spectral_max_dofs) return;  // fall back to matrix-free CG
        basis_ = std::make_shared<SpectralBasis>(sys, cfg_.spectral_max_dofs);
    }
    symbol_ = cq_symbol(forward_.grid(), basis_->eigenvalues());
}

BackwardSolver::~BackwardSolver() = default;

GridFunction BackwardSolver::apply_F(const GridFunction& v) const {
    if (basis_) return basis_->apply_symbol(symbol_, v);
    return forward_.apply_F(v);
}

GridFunction BackwardSolver::apply(const GridFunction& v) const { return cfg_.gamma * v + apply_F(v); }

GridFunction BackwardSolver::cg_solve(const GridFunction& rhs, const GridFunction* warm,
                                      LinearSolveStats& stats) const {
    const auto& M = sys_.mass;
    auto m_norm = [&M](const Vector& v) { return std::sqrt(std::max(0.0, v.dot(M * v))); };

    stats = {};
    stats.rhs_norm = m_norm(rhs);
    if (warm && warm->isZero(0.0)) warm = nullptr;
    GridFunction x = warm ? *warm : GridFunction(Vector::Zero(rhs.size()));
    if (stats.rhs_norm == 0.0 && !warm) return x;

    Vector r = rhs;
    if (warm) {
        r -= apply(x);
        stats.applies = 1;
    }
    Vector Mr = M * r;
    double rr = r.dot(Mr);
    const double r0 = std::sqrt(std::max(0.0, rr));
    // relative to the starting residual so warm starts keep tightening; floored near roundoff
    const double target = std::max(cfg_.cg_tol * std::min(r0, stats.rhs_norm), 1e-14 * stats.rhs_norm);
    const double required = cfg_.cg_tol * stats.rhs_norm;
    stats.residual = r0;
    if (r0 <= target || r0 == 0.0) return x;

    Vector p = r;
    for (int it = 1; it <= cfg_.cg_max; ++it) {
        const Vector Ap = apply(p);
        ++stats.applies;
        const double pAp = p.dot(M * Ap);
        require(pAp > 0.0 && std::isfinite(pAp), ErrorKind::NumericalFailure,
                "regularized operator lost positivity in CG");
        const double step = rr / pAp;
        x += step * p;
        r -= step * Ap;
        Mr = M * r;
        const double rr_new = r.dot(Mr);
        stats.iterations = it;
        stats.residual = std::sqrt(std::max(0.0, rr_new));
        if (stats.residual <= target) return x;
        p = r + (rr_new / rr) * p;
        rr = rr_new;
    }
    // the warm-start target can sit below what roundoff in F allows; accept the nominal bound
    if (stats.residual <= required) return x;
    throw Error(ErrorKind::CgNoConvergence, "CG stopped after " + std::to_string(cfg_.cg_max) +
                                                " iterations with relative residual " +
                                                std::to_string(stats.residual / stats.rhs_norm));
}

GridFunction BackwardSolver::solve_linear(const GridFunction& rhs, const GridFunction* warm,
                                          LinearSolveStats* stats) const {
    require(static_cast<std::size_t>(rhs.size()) == sys_.dofs(), ErrorKind::InvalidArgument,
            "right-hand side size does not match system");
    LinearSolveStats local;
    LinearSolveStats& s = stats ? *stats : local;
    if (basis_) {
        s = {};
        s.rhs_norm = std::sqrt(std::max(0.0, rhs.dot(sys_.mass * rhs)));
        const Vector inverse = (cfg_.gamma + symbol_.array()).inverse().matrix();
        return basis_->apply_symbol(inverse, rhs);
    }
    return cg_solve(rhs, warm, s);
}

ReconstructionResult BackwardSolver::reconstruct(const GridFunction& g_obs, const Nonlinearity& f,
                                                 const GridFunction* truth) const {
    require(static_cast<std::size_t>(g_obs.size()) == sys_.dofs(), ErrorKind::InvalidArgument,
            "observation size does not match system");
    if (truth)
        require(static_cast<std::size_t>(truth->size()) == sys_.dofs(), ErrorKind::InvalidArgument,
                "truth size does not match system");

    ReconstructionResult out;
    GridFunction u = Vector::Zero(g_obs.size());
    if (cfg_.random_init_seed) {
        std::mt19937_64 rng(*cfg_.random_init_seed);
        std::normal_distribution<double> normal;
        for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = normal(rng);
    }

    double first = 0.0;
    double previous = std::numeric_limits<double>::infinity();
    int increases = 0;
    for (int j = 0; j < cfg_.fp_max; ++j) {
        GridFunction next;
        LinearSolveStats stats;
        try {
            Vector rhs = g_obs;
            if (!f.is_zero()) {
                rhs -= forward_.apply_S(u, f) - forward_.apply_F(u);
                out.forward_solves += 2;
            }
            next = solve_linear(rhs, &u, &stats);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NumericalFailure) throw;
            out.diverged = true;
            out.stop_reason = std::string("numerical failure: ") + e.what();
            break;
        }
        out.forward_solves += stats.applies;
        out.cg_iter_counts.push_back(stats.iterations);

        const double e = l2_norm(sys_, next - u);
        u = std::move(next);
        out.outer_iters = j + 1;
        if (cfg_.record_history) {
            HistoryEntry entry;
            entry.iter = j + 1;
            entry.update_norm = e;
            if (truth) entry.error_vs_truth = l2_error(sys_, u, *truth);
            entry.cg_iters = stats.iterations;
            entry.forward_solves = out.forward_solves;
            out.history.push_back(entry);
        }

        if (!std::isfinite(e) || !u.allFinite()) {
            out.diverged = true;
            out.stop_reason = "non-finite iterate";
            break;
        }
        if (e < cfg_.fp_tol) {
            out.converged = true;
            out.stop_reason = "update below tolerance";
            break;
        }
        if (j == 0) first = e;
        increases = e > previous ? increases + 1 : 0;
        previous = e;
        if (increases >= 3) {
            out.diverged = true;
            out.stop_reason = "update norm increased three times in a row";
            break;
        }
        if (j > 0 && e > 1e6 * first) {
            out.diverged = true;
            out.stop_reason = "update norm grew by more than 1e6";
            break;
        }
    }
    if (!out.converged && !out.diverged) {
        // out of iterations without ever settling below the first update: oscillating blow-up
        if (out.outer_iters > 1 && previous >= first) {
            out.diverged = true;
            out.stop_reason = "iteration limit reached without decrease";
        } else {
            out.stop_reason = "iteration limit reached";
        }
    }
    out.u0_hat = std::move(u);
    return out;
}

GridFunction solve_linear_regularized(const FemSystem& sys, const TimeGrid& grid, const GridFunction& rhs,
                                      const BackwardConfig& cfg, LinearSolveStats* stats) {
    return BackwardSolver(sys, grid, cfg).solve_linear(rhs, nullptr, stats);
}

ReconstructionResult fixed_point_reconstruct(const FemSystem& sys, const TimeGrid& grid, const GridFunction& g_obs,
                                             const Nonlinearity& f, const BackwardConfig& cfg,
                                             const GridFunction* truth) {
    return BackwardSolver(sys, grid, cfg).reconstruct(g_obs, f, truth);
}

namespace {

// root of an increasing function on [lo, hi]
double bisect(const std::function<double(double)>& fn, double target, double lo, double hi, const char* what) {
    const double flo = fn(lo) - target;
    const double fhi = fn(hi) - target;
    require(flo <= 0.0 && fhi >= 0.0, ErrorKind::ParameterOutOfRange,
            std::string("no ") + what + " in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                "] matches the target " + std::to_string(target));
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (fn(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

ParameterChoice select_parameters(double delta, double q, double mu, const std::string& preset,
                                  const ParameterConstants& c) {
    require(delta > 0.0 && delta < 1.0, ErrorKind::InvalidArgument, "delta must lie in (0,1)");
    if (preset == "paper-ex1") {
        const double s = std::sqrt(delta);
        return {s / 75.0, 5.0 * s / 8.0, s / 5.0};
    }
    if (preset == "paper-ex2") {
        return {std::pow(delta, 0.8) / 10.0, 5.0 * std::sqrt(delta) / 6.0, std::pow(delta, 0.2) / 10.0};
    }
    require(preset.empty(), ErrorKind::InvalidArgument, "unknown preset '" + preset + "'");
    require(q > 0.0 && q <= 2.0, ErrorKind::InvalidArgument, "q must lie in (0,2]");
    require(mu > 0.0 && mu <= 1.0, ErrorKind::InvalidArgument, "mu must lie in (0,1]");

    ParameterChoice out;
    out.gamma = c.c_gamma * std::pow(delta, 2.0 / (q + 2.0));
    out.h = bisect([](double h) { return h * h * std::abs(std::log(h)); }, c.c_h * delta, 1e-8, 0.5, "h");
    const double h_factor = std::pow(out.h, std::min(q - mu, 0.0));
    // tau |log tau|^2 only increases up to e^-2
    out.tau = bisect(
        [h_factor](double t) {
            const double l = std::log(t);
            return t * l * l * h_factor;
        },
        c.c_tau * std::pow(delta, q / (q + 2.0)), 1e-8, std::exp(-2.0), "tau");
    return out;
}

std::pair<int, int> discretize(const ParameterChoice& choice, double T) {
    require(choice.h > 0.0 && choice.tau > 0.0 && T > 0.0, ErrorKind::InvalidArgument,
            "mesh size, step and horizon must be positive");
    const int n = std::max(2, static_cast<int>(std::lround(1.0 / choice.h)));
    const int N = std::max(1, static_cast<int>(std::lround(T / choice.tau)));
    return {n, N};
}

std::vector<double> convergence_order(const std::vector<std::pair<double, double>>& errors) {
    require(errors.size() >= 2, ErrorKind::InvalidArgument, "need at least two (delta, error) pairs");
    std::vector<double> orders;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        const auto [d0, e0] = errors[i];
        const auto [d1, e1] = errors[i + 1];
        require(d0 > 0.0 && d1 > 0.0 && e0 > 0.0 && e1 > 0.0, ErrorKind::InvalidArgument,
                "deltas and errors must be positive");
        require(d1 < d0, ErrorKind::InvalidArgument, "deltas must be strictly decreasing");
        orders.push_back(std::log(e0 / e1) / std::log(d0 / d1));
    }
    return orders;
}

}  // namespace fracback

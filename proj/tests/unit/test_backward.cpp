#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fracback/backward.hpp"
#include "fracback/error.hpp"

using namespace fracback;

namespace {

GridFunction random_vector(std::size_t n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> normal;
    GridFunction v(n);
    for (auto& x : v) x = normal(rng);
    return v;
}

bool has_kind(const Error& e, ErrorKind k) { return e.kind() == k; }

}  // namespace

TEST_CASE("config validation") {
    BackwardConfig cfg;
    CHECK_NOTHROW(validate(cfg));
    cfg.gamma = 0.0;
    CHECK_THROWS_AS(validate(cfg), Error);
    cfg = {};
    cfg.fp_tol = -1;
    CHECK_THROWS_AS(validate(cfg), Error);
    cfg = {};
    cfg.cg_max = 0;
    CHECK_THROWS_AS(validate(cfg), Error);
}

TEST_CASE("regularized linear solve") {
    const FemSystem sys = assemble(build_interval_mesh(16));
    const TimeGrid grid = make_time_grid(1.0, 50, 0.5);
    BackwardConfig cfg;
    cfg.gamma = 1e-3;
    const BackwardSolver solver(sys, grid, cfg);

    SECTION("zero right-hand side") {
        LinearSolveStats st;
        const GridFunction x = solver.solve_linear(GridFunction::Zero(sys.dofs()), nullptr, &st);
        CHECK(x.isZero(0.0));
        CHECK(st.iterations == 0);
    }
    SECTION("dense spectral oracle") {
        const SpectralBasis basis(sys);
        const Vector r = cq_symbol(grid, basis.eigenvalues());
        const Vector inv = (cfg.gamma + r.array()).inverse().matrix();
        for (unsigned s = 0; s < 3; ++s) {
            const GridFunction rhs = random_vector(sys.dofs(), s);
            LinearSolveStats st;
            const GridFunction x = solver.solve_linear(rhs, nullptr, &st);
            const GridFunction oracle = basis.apply_symbol(inv, rhs);
            CHECK((x - oracle).cwiseAbs().maxCoeff() < 1e-8 * oracle.cwiseAbs().maxCoeff());
            CHECK(st.residual <= cfg.cg_tol * st.rhs_norm);
            CHECK(st.iterations > 0);
            CHECK(l2_norm(sys, solver.apply(x) - rhs) <= 1e-9 * l2_norm(sys, rhs));
        }
    }
    SECTION("warm start at the solution") {
        const GridFunction rhs = random_vector(sys.dofs(), 7);
        const GridFunction x = solver.solve_linear(rhs);
        LinearSolveStats st;
        const GridFunction y = solver.solve_linear(rhs, &x, &st);
        LinearSolveStats cold;
        solver.solve_linear(rhs, nullptr, &cold);
        CHECK(st.iterations < cold.iterations);
        CHECK(l2_norm(sys, y - x) <= 1e-8 * l2_norm(sys, x));
    }
    SECTION("large gamma") {
        BackwardConfig big = cfg;
        big.gamma = 1e8;
        const GridFunction rhs = random_vector(sys.dofs(), 8);
        const GridFunction x = solve_linear_regularized(sys, grid, rhs, big);
        CHECK(l2_norm(sys, x - rhs / 1e8) <= 1e-6 * l2_norm(sys, rhs / 1e8));
    }
    SECTION("M-symmetry of the operator") {
        for (unsigned s = 0; s < 5; ++s) {
            const GridFunction u = random_vector(sys.dofs(), 20 + s), v = random_vector(sys.dofs(), 40 + s);
            const double a = m_inner(sys, solver.apply(u), v), b = m_inner(sys, u, solver.apply(v));
            CHECK(std::abs(a - b) <= 1e-10 * std::abs(a));
        }
    }
    SECTION("iteration cap") {
        BackwardConfig tight = cfg;
        tight.cg_max = 1;
        tight.gamma = 1e-8;
        try {
            solve_linear_regularized(sys, grid, random_vector(sys.dofs(), 9), tight);
            FAIL("expected cg-no-convergence");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::CgNoConvergence);
        }
    }
}

TEST_CASE("fast path agrees with CG") {
    const FemSystem sys = assemble(build_square_mesh(8));
    const TimeGrid grid = make_time_grid(1.0, 30, 0.3);
    BackwardConfig cfg;
    const BackwardSolver cg(sys, grid, cfg);
    cfg.spectral_fast_path = true;
    const BackwardSolver fast(sys, grid, cfg);
    CHECK(!cg.uses_fast_path());
    CHECK(fast.uses_fast_path());
    const GridFunction rhs = random_vector(sys.dofs(), 3);
    LinearSolveStats st;
    const GridFunction a = cg.solve_linear(rhs), b = fast.solve_linear(rhs, nullptr, &st);
    CHECK(st.iterations == 0);
    CHECK(l2_norm(sys, a - b) <= 1e-8 * l2_norm(sys, b));

    const auto f = make_nonlinearity("sqrt1pu2");
    const GridFunction g = cg.forward().apply_S(random_vector(sys.dofs(), 4) * 0.1, f);
    const auto r1 = cg.reconstruct(g, f), r2 = fast.reconstruct(g, f);
    CHECK(r1.converged);
    CHECK(r2.converged);
    CHECK(l2_norm(sys, r1.u0_hat - r2.u0_hat) <= 1e-7 * l2_norm(sys, r2.u0_hat));

    cfg.spectral_max_dofs = 10;
    CHECK(!BackwardSolver(sys, grid, cfg).uses_fast_path());
}

TEST_CASE("fixed-point reconstruction") {
    const FemSystem sys = assemble(build_interval_mesh(32));
    const TimeGrid grid = make_time_grid(1.0, 60, 0.5);
    const GridFunction u0 = interpolate(sys, [](const Point& p) { return std::sin(3.14159265358979 * p[0]); });

    SECTION("linear problem needs one solve") {
        const GridFunction g = apply_F(sys, grid, u0);
        BackwardConfig cfg;
        const auto res = fixed_point_reconstruct(sys, grid, g, make_nonlinearity("zero"), cfg, &u0);
        CHECK(res.converged);
        CHECK(!res.diverged);
        CHECK(res.outer_iters <= 2);
        REQUIRE(res.history.size() == static_cast<std::size_t>(res.outer_iters));
        CHECK(res.history.back().update_norm < cfg.fp_tol);
        CHECK(res.history.front().error_vs_truth.has_value());
        CHECK(res.cg_iter_counts.size() == res.history.size());
    }
    SECTION("geometric contraction for a mild nonlinearity") {
        const auto f = make_nonlinearity("L_sqrt1pu2", 0.5);
        const GridFunction g = apply_S(sys, grid, u0, f);
        BackwardConfig cfg;
        cfg.fp_tol = 1e-12;
        const auto res = fixed_point_reconstruct(sys, grid, g, f, cfg);
        REQUIRE(res.converged);
        REQUIRE(res.history.size() >= 4);
        std::vector<double> ratios;
        for (std::size_t j = 1; j < res.history.size(); ++j) {
            CHECK(res.history[j].update_norm < res.history[j - 1].update_norm);
            ratios.push_back(res.history[j].update_norm / res.history[j - 1].update_norm);
        }
        CHECK(ratios[1] < 1.0);
        CHECK(ratios[2] == Catch::Approx(ratios[1]).epsilon(0.5));
        CHECK(res.forward_solves == res.history.back().forward_solves);
    }
    SECTION("divergence is flagged") {
        // the map contracts roughly like L / lambda_1, so a strong source past pi^2 is needed
        const FemSystem small = assemble(build_interval_mesh(16));
        const TimeGrid long_grid = make_time_grid(10.0, 100, 0.5);
        const auto f = make_nonlinearity("L_sqrt1pu2", 12.0);
        const GridFunction v = interpolate(small, [](const Point& p) { return std::sin(3.14159265358979 * p[0]); });
        const GridFunction g = apply_S(small, long_grid, v, f);
        BackwardConfig cfg;
        cfg.gamma = 1e-3;
        const auto res = fixed_point_reconstruct(small, long_grid, g, f, cfg);
        CHECK(res.diverged);
        CHECK(!res.converged);
        CHECK(!res.stop_reason.empty());
    }
    SECTION("seeded random start reaches the same fixed point") {
        const auto f = make_nonlinearity("L_sqrt1pu2", 0.5);
        const GridFunction g = apply_S(sys, grid, u0, f);
        BackwardConfig cfg;
        const auto a = fixed_point_reconstruct(sys, grid, g, f, cfg);
        cfg.random_init_seed = 11;
        const auto b = fixed_point_reconstruct(sys, grid, g, f, cfg);
        CHECK(l2_norm(sys, a.u0_hat - b.u0_hat) < 1e-8 * l2_norm(sys, a.u0_hat));
        const auto c = fixed_point_reconstruct(sys, grid, g, f, cfg);
        CHECK(b.u0_hat == c.u0_hat);
    }
}

TEST_CASE("regularization error rate in gamma") {
    // eigenmode data: the error is exactly gamma / (gamma + r_N(lambda)) times the mode
    const FemSystem sys = assemble(build_interval_mesh(32));
    const TimeGrid grid = make_time_grid(1.0, 80, 0.5);
    const SpectralBasis basis(sys);
    const GridFunction u0 = basis.eigenvectors().col(0);
    const double r = cq_symbol(grid, basis.eigenvalues()[0]);
    const GridFunction g = apply_F(sys, grid, u0);
    std::vector<std::pair<double, double>> errs;
    for (double gamma : {1e-2, 1e-3, 1e-4}) {
        BackwardConfig cfg;
        cfg.gamma = gamma;
        const auto res = fixed_point_reconstruct(sys, grid, g, make_nonlinearity("zero"), cfg);
        const double e = l2_norm(sys, res.u0_hat - u0);
        CHECK(e == Catch::Approx(gamma / (gamma + r)).epsilon(1e-6));
        errs.emplace_back(gamma, e);
    }
    for (double order : convergence_order(errs)) CHECK(order == Catch::Approx(1.0).margin(0.1));
}

TEST_CASE("a-priori parameter choice") {
    SECTION("presets") {
        const auto p1 = select_parameters(1.0 / 80, 2, 0, "paper-ex1");
        CHECK(p1.gamma == Catch::Approx(0.0014907).epsilon(1e-4));
        CHECK(p1.tau == Catch::Approx(0.022361).epsilon(1e-4));
        CHECK(p1.h == Catch::Approx(0.069877).epsilon(1e-4));
        const auto p2 = select_parameters(1.0 / 400, 2, 0, "paper-ex2");
        CHECK(p2.gamma == Catch::Approx(std::pow(1.0 / 400, 0.8) / 10).epsilon(1e-12));
        CHECK(p2.gamma == Catch::Approx(8.2861e-4).epsilon(1e-4));
        CHECK(p2.tau == Catch::Approx(std::pow(1.0 / 400, 0.2) / 10).epsilon(1e-12));
        CHECK(p2.h == Catch::Approx(5 * std::sqrt(1.0 / 400) / 6).epsilon(1e-12));
        CHECK_THROWS_AS(select_parameters(0.01, 2, 0, "paper-ex3"), Error);
    }
    SECTION("rule") {
        const auto a = select_parameters(0.02, 2, 0.5), b = select_parameters(0.01, 2, 0.5);
        CHECK(b.gamma / a.gamma == Catch::Approx(std::pow(2.0, -0.5)).epsilon(1e-12));
        CHECK(b.h * b.h * std::abs(std::log(b.h)) == Catch::Approx(0.01).epsilon(1e-9));
        const double lt = std::log(b.tau);
        CHECK(b.tau * lt * lt == Catch::Approx(std::pow(0.01, 0.5)).epsilon(1e-9));
        CHECK(b.h < a.h);
        CHECK(b.tau < a.tau);
        // rough data: the h^(q - mu) factor enters
        const auto c = select_parameters(0.01, 0.5, 1.0);
        const double lc = std::log(c.tau);
        CHECK(c.tau * lc * lc * std::pow(c.h, -0.5) == Catch::Approx(std::pow(0.01, 0.2)).epsilon(1e-9));
    }
    SECTION("no root in the bracket") {
        try {
            select_parameters(0.5, 2, 0.5);
            FAIL("expected parameter-out-of-range");
        } catch (const Error& e) {
            CHECK(has_kind(e, ErrorKind::ParameterOutOfRange));
        }
        CHECK_THROWS_AS(select_parameters(-1.0, 2, 0.5), Error);
        CHECK_THROWS_AS(select_parameters(0.01, 2, 0.0), Error);
        CHECK_THROWS_AS(select_parameters(0.01, 3, 0.5), Error);
    }
    SECTION("discretization") {
        const auto [n, N] = discretize(select_parameters(0.0125, 2, 0, "paper-ex1"), 1.0);
        CHECK(n == 14);
        CHECK(N == 45);
        const auto [n2, N2] = discretize(ParameterChoice{0.1, 0.9, 5.0}, 1.0);
        CHECK(n2 == 2);
        CHECK(N2 == 1);
    }
}

TEST_CASE("observed convergence order") {
    const auto o = convergence_order({{1e-2, 1e-1}, {0.25e-2, 0.5e-1}});
    REQUIRE(o.size() == 1);
    CHECK(o[0] == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(convergence_order({{1e-2, 0.3}, {1e-3, 0.3}})[0] == 0.0);
    CHECK(convergence_order({{1.0 / 80, 3.551e-1}, {1.0 / 160, 2.532e-1}})[0] == Catch::Approx(0.4879).margin(5e-5));
    CHECK_THROWS_AS(convergence_order({{1e-3, 0.1}, {1e-2, 0.2}}), Error);
    CHECK_THROWS_AS(convergence_order({{1e-3, 0.1}, {1e-3, 0.2}}), Error);
    CHECK_THROWS_AS(convergence_order({{1e-3, 0.1}}), Error);
}

#include <catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

#include "fracback/error.hpp"
#include "fracback/fem.hpp"

using namespace fracback;
using std::numbers::pi;

namespace {

double smallest_eigenvalue(const FemSystem& sys) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(sys.stiffness),
                                                                 Eigen::MatrixXd(sys.mass), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double checkerboard(const Point& p) {
    return ((p[0] <= 0.5 && p[1] <= 0.5) || (p[0] >= 0.5 && p[1] >= 0.5)) ? 1.0 : 0.0;
}

}  // namespace

TEST_CASE("1D stencils for n = 4") {
    const FemSystem sys = assemble(build_interval_mesh(4));
    const Eigen::MatrixXd M(sys.mass), K(sys.stiffness);
    REQUIRE(M.rows() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(M(i, i) == Catch::Approx(4.0 / 24.0));
        CHECK(K(i, i) == Catch::Approx(8.0));
        if (i + 1 < 3) {
            CHECK(M(i, i + 1) == Catch::Approx(1.0 / 24.0));
            CHECK(K(i, i + 1) == Catch::Approx(-4.0));
        }
    }
    CHECK(M(0, 2) == 0.0);
    CHECK(K(0, 2) == 0.0);
}

TEST_CASE("stiffness annihilates linear functions in the interior rows") {
    for (int dim : {1, 2}) {
        const Mesh mesh = build_mesh(dim, 6);
        const auto full = assemble_full(mesh);
        Vector x(mesh.num_nodes());
        for (std::size_t i = 0; i < mesh.num_nodes(); ++i) x[i] = mesh.nodes[i][0] + 0.5 * mesh.nodes[i][1];
        const Vector kx = full.stiffness * x;
        for (int node : mesh.interior_nodes) CHECK(std::abs(kx[node]) < 1e-12);
    }
}

TEST_CASE("smallest eigenvalue approaches pi^2 dim") {
    CHECK(smallest_eigenvalue(assemble(build_interval_mesh(64))) == Catch::Approx(9.8696).margin(0.01));
    CHECK(smallest_eigenvalue(assemble(build_square_mesh(24))) == Catch::Approx(2 * pi * pi).margin(0.1));
}

TEST_CASE("mass and stiffness are exactly symmetric and positive definite") {
    for (int dim : {1, 2}) {
        const FemSystem sys = assemble(build_mesh(dim, 9));
        const Eigen::MatrixXd M(sys.mass), K(sys.stiffness);
        CHECK((M - M.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == 0.0);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M, Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().size() == static_cast<Eigen::Index>(sys.dofs()));
        CHECK(es.eigenvalues().minCoeff() > 0.0);
        CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M).eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("CSR column indices increase within each row") {
    const FemSystem sys = assemble(build_square_mesh(5));
    for (const auto* A : {&sys.mass, &sys.stiffness}) {
        REQUIRE(A->isCompressed());
        for (Eigen::Index r = 0; r < A->outerSize(); ++r) {
            Eigen::Index last = -1;
            for (SparseMatrix::InnerIterator it(*A, r); it; ++it) {
                CHECK(it.col() > last);
                last = it.col();
            }
        }
    }
}

TEST_CASE("L2 projection") {
    SECTION("zero data") {
        const FemSystem sys = assemble(build_square_mesh(6));
        CHECK(l2_project(sys, [](const Point&) { return 0.0; }).isZero(0.0));
    }
    SECTION("sin(pi x) on n = 128 matches nodal values") {
        const FemSystem sys = assemble(build_interval_mesh(128));
        const GridFunction g = l2_project(sys, [](const Point& p) { return std::sin(pi * p[0]); });
        const GridFunction exact = interpolate(sys, [](const Point& p) { return std::sin(pi * p[0]); });
        CHECK((g - exact).cwiseAbs().maxCoeff() < 1e-4);
    }
    SECTION("checkerboard satisfies the Galerkin identity") {
        // no mass conservation with zero boundary values; test (Pg, w)_M = (g, w) for w = 1 at interior nodes
        const FemSystem sys = assemble(build_square_mesh(32));
        const GridFunction g = l2_project(sys, checkerboard, QuadratureRule::Discontinuous);
        const GridFunction w = GridFunction::Ones(static_cast<Eigen::Index>(sys.dofs()));
        const double lhs = w.dot(sys.mass * g);
        // jumps sit on mesh lines, so g is constant per triangle and g*w integrates exactly
        double rhs = 0.0;
        for (std::size_t e = 0; e < sys.mesh.num_elements(); ++e) {
            const auto& tri = sys.mesh.elements[e];
            Point c{0.0, 0.0};
            double wsum = 0.0;
            for (int v : tri) {
                c[0] += sys.mesh.nodes[v][0] / 3;
                c[1] += sys.mesh.nodes[v][1] / 3;
                wsum += sys.mesh.boundary_mask[v] ? 0.0 : 1.0;
            }
            rhs += checkerboard(c) * std::abs(sys.mesh.element_measure(e)) * wsum / 3;
        }
        CHECK(lhs == Catch::Approx(rhs).epsilon(1e-12));
        CHECK(rhs < 0.5);
    }
    SECTION("projecting a P1 function reproduces it") {
        for (int dim : {1, 2}) {
            const FemSystem sys = assemble(build_mesh(dim, 10));
            GridFunction v(sys.dofs());
            for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::cos(1.7 * i) + 0.3;
            const auto nodes = node_values(sys, v);
            const GridFunction back = l2_project(sys, [&](const Point& p) { return evaluate_p1(sys.mesh, nodes, p); });
            CHECK((back - v).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
}

TEST_CASE("smooth quadrature is exact for quadratics") {
    // hats sum to one, so the loads sum to the integral of q
    const Mesh mesh = build_square_mesh(3);
    auto q = [](const Point& p) { return 1.0 + p[0] * p[1] - 2.0 * p[1] * p[1]; };
    const Vector a = load_vector_full(mesh, q, QuadratureRule::Smooth);
    CHECK(a.sum() == Catch::Approx(1.0 + 0.25 - 2.0 / 3.0).epsilon(1e-14));
    const Vector b = load_vector_full(build_interval_mesh(5), [](const Point& p) { return p[0] * p[0]; },
                                      QuadratureRule::Smooth);
    CHECK(b.sum() == Catch::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("nonlinear load") {
    const FemSystem sys = assemble(build_square_mesh(8));
    GridFunction u = GridFunction::Zero(sys.dofs());
    CHECK(load_nonlinear(sys, u, make_nonlinearity("zero")).isZero(0.0));
    const Vector ones = load_nonlinear(sys, u, make_nonlinearity("one_minus_u3"));
    CHECK((ones - sys.mass * Vector::Ones(sys.dofs())).cwiseAbs().maxCoeff() < 1e-15);
    // sum of M over interior rows and columns: integral of the discrete interior-support function
    CHECK(ones.sum() == Catch::Approx(Eigen::MatrixXd(sys.mass).sum()));
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = std::sin(0.37 * i);
    const Vector lin = load_nonlinear(sys, u, make_nonlinearity("identity"));
    CHECK((lin - sys.mass * u).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("norms and relative errors") {
    const FemSystem sys = assemble(build_interval_mesh(256));
    CHECK(l2_norm(sys, GridFunction::Zero(sys.dofs())) == 0.0);
    const GridFunction s = interpolate(sys, [](const Point& p) { return std::sin(pi * p[0]); });
    CHECK(l2_norm(sys, s) == Catch::Approx(0.7071).margin(1e-3));
    CHECK(l2_error(sys, s, s) == 0.0);
    CHECK_THROWS_AS(l2_error(sys, s, GridFunction::Zero(sys.dofs())), Error);
    CHECK(m_inner(sys, s, s) > 0.0);
}

TEST_CASE("negative norms") {
    const FemSystem sys = assemble(build_interval_mesh(32));
    CHECK(neg_norm(sys, GridFunction::Zero(sys.dofs()), 0.5) == 0.0);
    GridFunction v(sys.dofs());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::cos(0.9 * i) * (i % 3 + 1);
    CHECK(neg_norm(sys, v, 0.0) == Catch::Approx(l2_norm(sys, v)).epsilon(1e-10));
    const SpectralBasis basis(sys);
    const GridFunction phi1 = basis.eigenvectors().col(0);
    const double lambda = basis.eigenvalues()[0];
    CHECK(neg_norm(sys, phi1, 0.6) == Catch::Approx(l2_norm(sys, phi1) * std::pow(lambda, -0.3)).epsilon(1e-10));
    CHECK_THROWS_AS(neg_norm(sys, v, 1.5), Error);
    try {
        neg_norm(sys, v, 0.5, 10);
        FAIL("expected unsupported-size");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnsupportedSize);
    }
}

TEST_CASE("spectral basis is M-orthonormal") {
    const FemSystem sys = assemble(build_square_mesh(6));
    const SpectralBasis basis(sys);
    const Eigen::MatrixXd& phi = basis.eigenvectors();
    const Eigen::MatrixXd gram = phi.transpose() * (sys.mass * phi);
    CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXd kphi = sys.stiffness * phi;
    const Eigen::MatrixXd mphil = (sys.mass * phi) * basis.eigenvalues().asDiagonal();
    CHECK((kphi - mphil).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("exact L2 transfer between meshes") {
    SECTION("nested meshes reproduce a coarse P1 function") {
        for (int dim : {1, 2}) {
            const FemSystem coarse = assemble(build_mesh(dim, 6));
            const Mesh fine = build_mesh(dim, 18);
            GridFunction v(coarse.dofs());
            for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::sin(1.3 * i + 0.2);
            const auto cn = node_values(coarse, v);
            std::vector<double> fn;
            for (const auto& p : fine.nodes) fn.push_back(evaluate_p1(coarse.mesh, cn, p));
            CHECK((transfer_l2(fine, fn, coarse) - v).cwiseAbs().maxCoeff() < 1e-10);
            CHECK((transfer_nodal(fine, fn, coarse) - v).cwiseAbs().maxCoeff() < 1e-14);
        }
    }
    SECTION("non-nested meshes agree with the projection of an affine function") {
        // an affine function is P1 on both meshes, so the exact projection is known independently
        for (int dim : {1, 2}) {
            auto affine = [](const Point& p) { return 1.0 + 2.0 * p[0] - 3.0 * p[1]; };
            const Mesh fine = build_mesh(dim, 29);
            std::vector<double> fn;
            for (const auto& p : fine.nodes) fn.push_back(affine(p));
            for (int n : {7, 11, 13}) {
                const FemSystem coarse = assemble(build_mesh(dim, n));
                const GridFunction expected = l2_project(coarse, affine, QuadratureRule::Smooth);
                CHECK((transfer_l2(fine, fn, coarse) - expected).cwiseAbs().maxCoeff() < 1e-10);
            }
        }
    }
    SECTION("transfer preserves the integral against coarse hats") {
        const Mesh fine = build_square_mesh(40);
        std::vector<double> fn;
        for (const auto& p : fine.nodes) fn.push_back(checkerboard(p) * p[0] * (1 - p[0]) * p[1] * (1 - p[1]));
        const FemSystem coarse = assemble(build_square_mesh(17));
        const FemSystem fine_sys = assemble(Mesh(fine));
        const GridFunction g = transfer_l2(fine, fn, coarse);
        // (Pg, 1_h) where 1_h is the interior-supported coarse interpolant of 1 equals (g, 1_h)
        const auto ones_coarse = node_values(coarse, GridFunction::Ones(coarse.dofs()));
        double direct = 0.0;
        for (std::size_t e = 0; e < fine.num_elements(); ++e) {
            // the product is piecewise quadratic on fine/coarse intersections; use a fine midpoint sum as a check
            const auto& el = fine.elements[e];
            const double area = fine.element_measure(e);
            for (int s = 0; s < 3; ++s) {
                const Point a = fine.nodes[el[s]], b = fine.nodes[el[(s + 1) % 3]];
                const Point m{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
                direct += area / 3.0 * evaluate_p1(fine, fn, m) * evaluate_p1(coarse.mesh, ones_coarse, m);
            }
        }
        CHECK(m_inner(coarse, g, GridFunction::Ones(coarse.dofs())) == Catch::Approx(direct).epsilon(2e-3));
    }
}

TEST_CASE("node values put zeros on the boundary") {
    const FemSystem sys = assemble(build_square_mesh(4));
    const auto v = node_values(sys, GridFunction::Ones(sys.dofs()));
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == (sys.mesh.boundary_mask[i] ? 0.0 : 1.0));
}

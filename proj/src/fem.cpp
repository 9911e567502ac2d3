#include "fracback/fem.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>

#include <array>
#include <cmath>

#include "fracback/error.hpp"

namespace fracback {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Gradients of the three barycentric coordinates of a triangle.
std::array<std::array<double, 2>, 3> barycentric_gradients(const Point& a, const Point& b, const Point& c,
                                                           double twice_area) {
    return {{{(b[1] - c[1]) / twice_area, (c[0] - b[0]) / twice_area},
             {(c[1] - a[1]) / twice_area, (a[0] - c[0]) / twice_area},
             {(a[1] - b[1]) / twice_area, (b[0] - a[0]) / twice_area}}};
}

SparseMatrix restrict_to_interior(const Mesh& mesh, const SparseMatrix& full) {
    const auto dofs = static_cast<Eigen::Index>(mesh.num_interior());
    Triplets entries;
    entries.reserve(full.nonZeros());
    for (Eigen::Index row = 0; row < full.outerSize(); ++row) {
        const int r = mesh.interior_index[row];
        if (r < 0) continue;
        for (SparseMatrix::InnerIterator it(full, row); it; ++it) {
            const int c = mesh.interior_index[it.col()];
            if (c >= 0) entries.emplace_back(r, c, it.value());
        }
    }
    SparseMatrix out(dofs, dofs);
    out.setFromTriplets(entries.begin(), entries.end());
    return out;
}

// Symmetrize exactly: (A + A^T) / 2 computed entrywise so a_ij == a_ji bit for bit.
SparseMatrix exact_symmetric(const SparseMatrix& a) {
    SparseMatrix t = a.transpose();
    SparseMatrix s = (a + t) * 0.5;
    s.makeCompressed();
    return s;
}

Vector restrict_vector(const Mesh& mesh, const Vector& full) {
    Vector out(mesh.num_interior());
    for (std::size_t k = 0; k < mesh.num_interior(); ++k) out[k] = full[mesh.interior_nodes[k]];
    return out;
}

void add_1d_load(const Mesh& mesh, const SpatialFunction& f, QuadratureRule rule, Vector& load) {
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& el = mesh.elements[e];
        const double x0 = mesh.nodes[el[0]][0];
        const double len = mesh.element_measure(e);
        if (rule == QuadratureRule::Smooth) {
            // Simpson on [x0, x0 + len]; hat values (1,0), (1/2,1/2), (0,1)
            const double fa = f({x0, 0.0});
            const double fm = f({x0 + 0.5 * len, 0.0});
            const double fb = f({x0 + len, 0.0});
            load[el[0]] += len / 6.0 * (fa + 2.0 * fm);
            load[el[1]] += len / 6.0 * (2.0 * fm + fb);
        } else {
            constexpr int pieces = 4;
            for (int p = 0; p < pieces; ++p) {
                const double s = (p + 0.5) / pieces;
                const double value = f({x0 + s * len, 0.0}) * len / pieces;
                load[el[0]] += value * (1.0 - s);
                load[el[1]] += value * s;
            }
        }
    }
}

void add_2d_load(const Mesh& mesh, const SpatialFunction& f, QuadratureRule rule, Vector& load) {
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& el = mesh.elements[e];
        const Point& a = mesh.nodes[el[0]];
        const Point& b = mesh.nodes[el[1]];
        const Point& c = mesh.nodes[el[2]];
        const double area = mesh.element_measure(e);
        auto at = [&](double l1, double l2) {
            const double l0 = 1.0 - l1 - l2;
            return Point{l0 * a[0] + l1 * b[0] + l2 * c[0], l0 * a[1] + l1 * b[1] + l2 * c[1]};
        };
        if (rule == QuadratureRule::Smooth) {
            // edge midpoints: barycentric (1/2,1/2,0), (0,1/2,1/2), (1/2,0,1/2)
            const double fab = f(at(0.5, 0.0));
            const double fbc = f(at(0.5, 0.5));
            const double fca = f(at(0.0, 0.5));
            const double w = area / 3.0;
            load[el[0]] += w * 0.5 * (fab + fca);
            load[el[1]] += w * 0.5 * (fab + fbc);
            load[el[2]] += w * 0.5 * (fbc + fca);
        } else {
            // 4 subdivisions per edge -> 16 congruent sub-triangles, centroid rule on each
            constexpr int m = 4;
            const double w = area / (m * m);
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < m - i; ++j) {
                    const double l1 = (i + 1.0 / 3.0) / m;
                    const double l2 = (j + 1.0 / 3.0) / m;
                    const double v = f(at(l1, l2)) * w;
                    load[el[0]] += v * (1.0 - l1 - l2);
                    load[el[1]] += v * l1;
                    load[el[2]] += v * l2;
                    if (i + j < m - 1) {
                        const double u1 = (i + 2.0 / 3.0) / m;
                        const double u2 = (j + 2.0 / 3.0) / m;
                        const double u = f(at(u1, u2)) * w;
                        load[el[0]] += u * (1.0 - u1 - u2);
                        load[el[1]] += u * u1;
                        load[el[2]] += u * u2;
                    }
                }
            }
        }
    }
}

GridFunction solve_mass(const FemSystem& sys, const Vector& rhs) {
    if (rhs.squaredNorm() == 0.0) return Vector::Zero(sys.dofs());
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    cg.setTolerance(1e-12);
    cg.setMaxIterations(10 * static_cast<Eigen::Index>(sys.dofs()) + 100);
    cg.compute(sys.mass);
    Vector g = cg.solve(rhs);
    require(cg.info() == Eigen::Success, ErrorKind::NumericalFailure,
            "L2 projection CG did not converge (residual " + std::to_string(cg.error()) + ")");
    return g;
}

// Linear function on a triangle in barycentric form: lambda_i(p) = a_i + b_i x + c_i y.
struct Barycentric {
    std::array<double, 3> a, b, c;

    explicit Barycentric(const std::array<Point, 3>& v) {
        const double det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
        for (int i = 0; i < 3; ++i) {
            const Point& p = v[(i + 1) % 3];
            const Point& q = v[(i + 2) % 3];
            a[i] = (p[0] * q[1] - q[0] * p[1]) / det;
            b[i] = (p[1] - q[1]) / det;
            c[i] = (q[0] - p[0]) / det;
        }
    }
    double operator()(int i, const Point& p) const { return a[i] + b[i] * p[0] + c[i] * p[1]; }
};

using Polygon = std::vector<Point>;

double cross(const Point& o, const Point& a, const Point& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Sutherland-Hodgman against a counter-clockwise triangle
Polygon clip(Polygon poly, const std::array<Point, 3>& tri) {
    for (int e = 0; e < 3 && !poly.empty(); ++e) {
        const Point& a = tri[e];
        const Point& b = tri[(e + 1) % 3];
        Polygon out;
        for (std::size_t k = 0; k < poly.size(); ++k) {
            const Point& p = poly[k];
            const Point& q = poly[(k + 1) % poly.size()];
            const double dp = cross(a, b, p);
            const double dq = cross(a, b, q);
            if (dp >= 0.0) out.push_back(p);
            if ((dp >= 0.0) != (dq >= 0.0)) {
                const double t = dp / (dp - dq);
                out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
            }
        }
        poly = std::move(out);
    }
    return poly;
}

std::array<Point, 3> triangle(const Mesh& mesh, std::size_t e) {
    const auto& el = mesh.elements[e];
    return {mesh.nodes[el[0]], mesh.nodes[el[1]], mesh.nodes[el[2]]};
}

Vector transfer_load_2d(const Mesh& source, const std::vector<double>& values, const Mesh& target) {
    Vector load = Vector::Zero(target.num_nodes());
    const int nt = target.n;
    for (std::size_t e = 0; e < source.num_elements(); ++e) {
        const auto& el = source.elements[e];
        const double v0 = values[el[0]], v1 = values[el[1]], v2 = values[el[2]];
        if (v0 == 0.0 && v1 == 0.0 && v2 == 0.0) continue;
        const auto tri = triangle(source, e);
        const Barycentric sb(tri);
        auto g = [&](const Point& p) { return v0 * sb(0, p) + v1 * sb(1, p) + v2 * sb(2, p); };

        double xmin = 1.0, xmax = 0.0, ymin = 1.0, ymax = 0.0;
        for (const auto& p : tri) {
            xmin = std::min(xmin, p[0]);
            xmax = std::max(xmax, p[0]);
            ymin = std::min(ymin, p[1]);
            ymax = std::max(ymax, p[1]);
        }
        const int i0 = std::max(0, static_cast<int>(std::floor(xmin * nt)) - 1);
        const int i1 = std::min(nt - 1, static_cast<int>(std::floor(xmax * nt)));
        const int j0 = std::max(0, static_cast<int>(std::floor(ymin * nt)) - 1);
        const int j1 = std::min(nt - 1, static_cast<int>(std::floor(ymax * nt)));
        for (int j = j0; j <= j1; ++j) {
            for (int i = i0; i <= i1; ++i) {
                for (int half = 0; half < 2; ++half) {
                    const std::size_t te = 2 * (static_cast<std::size_t>(j) * nt + i) + half;
                    const auto ttri = triangle(target, te);
                    const Polygon piece = clip(Polygon(tri.begin(), tri.end()), ttri);
                    if (piece.size() < 3) continue;
                    const Barycentric tb(ttri);
                    const auto& tel = target.elements[te];
                    for (std::size_t k = 1; k + 1 < piece.size(); ++k) {
                        const Point& p = piece[0];
                        const Point& q = piece[k];
                        const Point& r = piece[k + 1];
                        const double area = 0.5 * std::abs(cross(p, q, r));
                        if (area == 0.0) continue;
                        const std::array<Point, 3> mids = {Point{0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])},
                                                           Point{0.5 * (q[0] + r[0]), 0.5 * (q[1] + r[1])},
                                                           Point{0.5 * (r[0] + p[0]), 0.5 * (r[1] + p[1])}};
                        for (const auto& m : mids) {
                            const double w = area / 3.0 * g(m);
                            for (int a = 0; a < 3; ++a) load[tel[a]] += w * tb(a, m);
                        }
                    }
                }
            }
        }
    }
    return load;
}

Vector transfer_load_1d(const Mesh& source, const std::vector<double>& values, const Mesh& target) {
    Vector load = Vector::Zero(target.num_nodes());
    const int nt = target.n;
    for (std::size_t e = 0; e < source.num_elements(); ++e) {
        const auto& el = source.elements[e];
        const double xa = source.nodes[el[0]][0], xb = source.nodes[el[1]][0];
        const double va = values[el[0]], vb = values[el[1]];
        if (va == 0.0 && vb == 0.0) continue;
        auto g = [&](double x) { return va + (vb - va) * (x - xa) / (xb - xa); };
        const int i0 = std::max(0, static_cast<int>(std::floor(xa * nt)) - 1);
        const int i1 = std::min(nt - 1, static_cast<int>(std::floor(xb * nt)));
        for (int i = i0; i <= i1; ++i) {
            const auto& tel = target.elements[i];
            const double ta = target.nodes[tel[0]][0], tb = target.nodes[tel[1]][0];
            const double l = std::max(xa, ta), r = std::min(xb, tb);
            if (r <= l) continue;
            // Simpson: exact for the quadratic integrand
            const double xs[3] = {l, 0.5 * (l + r), r};
            const double ws[3] = {(r - l) / 6.0, 4.0 * (r - l) / 6.0, (r - l) / 6.0};
            for (int k = 0; k < 3; ++k) {
                const double s = (xs[k] - ta) / (tb - ta);
                load[tel[0]] += ws[k] * g(xs[k]) * (1.0 - s);
                load[tel[1]] += ws[k] * g(xs[k]) * s;
            }
        }
    }
    return load;
}

}  // namespace

FullMatrices assemble_full(const Mesh& mesh) {
    const auto count = static_cast<Eigen::Index>(mesh.num_nodes());
    Triplets mass;
    Triplets stiff;
    const std::size_t per = static_cast<std::size_t>(mesh.nodes_per_element()) * mesh.nodes_per_element();
    mass.reserve(mesh.num_elements() * per);
    stiff.reserve(mesh.num_elements() * per);

    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& el = mesh.elements[e];
        const double measure = mesh.element_measure(e);
        require(measure > 0.0, ErrorKind::InvalidArgument, "element with non-positive measure");
        if (mesh.dim == 1) {
            for (int i = 0; i < 2; ++i) {
                for (int j = 0; j < 2; ++j) {
                    mass.emplace_back(el[i], el[j], measure * (i == j ? 2.0 : 1.0) / 6.0);
                    stiff.emplace_back(el[i], el[j], (i == j ? 1.0 : -1.0) / measure);
                }
            }
        } else {
            const auto grads = barycentric_gradients(mesh.nodes[el[0]], mesh.nodes[el[1]], mesh.nodes[el[2]],
                                                     2.0 * measure);
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) {
                    mass.emplace_back(el[i], el[j], measure * (i == j ? 2.0 : 1.0) / 12.0);
                    const double dot = grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1];
                    stiff.emplace_back(el[i], el[j], measure * dot);
                }
            }
        }
    }

    FullMatrices out{SparseMatrix(count, count), SparseMatrix(count, count)};
    out.mass.setFromTriplets(mass.begin(), mass.end());
    out.stiffness.setFromTriplets(stiff.begin(), stiff.end());
    out.mass = exact_symmetric(out.mass);
    out.stiffness = exact_symmetric(out.stiffness);
    return out;
}

FemSystem assemble(Mesh mesh) {
    const auto full = assemble_full(mesh);
    FemSystem sys;
    sys.mass = restrict_to_interior(mesh, full.mass);
    sys.stiffness = restrict_to_interior(mesh, full.stiffness);
    sys.mesh = std::move(mesh);
    return sys;
}

Vector load_vector_full(const Mesh& mesh, const SpatialFunction& f, QuadratureRule rule) {
    Vector load = Vector::Zero(mesh.num_nodes());
    if (mesh.dim == 1)
        add_1d_load(mesh, f, rule, load);
    else
        add_2d_load(mesh, f, rule, load);
    return load;
}

GridFunction l2_project(const FemSystem& sys, const SpatialFunction& f, QuadratureRule rule) {
    return solve_mass(sys, restrict_vector(sys.mesh, load_vector_full(sys.mesh, f, rule)));
}

GridFunction transfer_l2(const Mesh& source, const std::vector<double>& source_values, const FemSystem& target) {
    require(source.dim == target.mesh.dim, ErrorKind::InvalidArgument, "meshes differ in dimension");
    require(source_values.size() == source.num_nodes(), ErrorKind::InvalidArgument, "node value count mismatch");
    const Vector load = source.dim == 1 ? transfer_load_1d(source, source_values, target.mesh)
                                        : transfer_load_2d(source, source_values, target.mesh);
    return solve_mass(target, restrict_vector(target.mesh, load));
}

GridFunction transfer_nodal(const Mesh& source, const std::vector<double>& source_values, const FemSystem& target) {
    require(source.dim == target.mesh.dim, ErrorKind::InvalidArgument, "meshes differ in dimension");
    return interpolate(target, [&](const Point& p) { return evaluate_p1(source, source_values, p); });
}

GridFunction interpolate(const FemSystem& sys, const SpatialFunction& f) {
    Vector out(sys.dofs());
    for (std::size_t k = 0; k < sys.dofs(); ++k) out[k] = f(sys.mesh.nodes[sys.mesh.interior_nodes[k]]);
    return out;
}

Vector load_nonlinear(const FemSystem& sys, const GridFunction& u, const Nonlinearity& f) {
    require(static_cast<std::size_t>(u.size()) == sys.dofs(), ErrorKind::InvalidArgument,
            "grid function size does not match system");
    if (f.is_zero()) return Vector::Zero(u.size());
    const Vector fu = u.unaryExpr([&f](double v) { return f(v); });
    return sys.mass * fu;
}

double m_inner(const FemSystem& sys, const GridFunction& a, const GridFunction& b) {
    require(a.size() == b.size() && static_cast<std::size_t>(a.size()) == sys.dofs(),
            ErrorKind::InvalidArgument, "grid function size does not match system");
    return a.dot(sys.mass * b);
}

double l2_norm(const FemSystem& sys, const GridFunction& u) {
    return std::sqrt(std::max(0.0, m_inner(sys, u, u)));
}

double l2_error(const FemSystem& sys, const GridFunction& u, const GridFunction& reference) {
    const double ref = l2_norm(sys, reference);
    require(ref > 0.0, ErrorKind::InvalidArgument, "relative error against a zero reference");
    return l2_norm(sys, u - reference) / ref;
}

std::vector<double> node_values(const FemSystem& sys, const GridFunction& u) {
    require(static_cast<std::size_t>(u.size()) == sys.dofs(), ErrorKind::InvalidArgument,
            "grid function size does not match system");
    std::vector<double> out(sys.mesh.num_nodes(), 0.0);
    for (std::size_t k = 0; k < sys.dofs(); ++k) out[sys.mesh.interior_nodes[k]] = u[k];
    return out;
}

SpectralBasis::SpectralBasis(const FemSystem& sys, std::size_t max_dofs) : mass_(sys.mass) {
    require(sys.dofs() <= max_dofs, ErrorKind::UnsupportedSize,
            "dense eigendecomposition limited to " + std::to_string(max_dofs) + " dofs, system has " +
                std::to_string(sys.dofs()));
    const Eigen::MatrixXd k = Eigen::MatrixXd(sys.stiffness);
    const Eigen::MatrixXd m = Eigen::MatrixXd(sys.mass);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(k, m, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    require(solver.info() == Eigen::Success, ErrorKind::NumericalFailure, "generalized eigensolve failed");
    eigenvalues_ = solver.eigenvalues();
    eigenvectors_ = solver.eigenvectors();
}

Vector SpectralBasis::coefficients(const GridFunction& v) const {
    return eigenvectors_.transpose() * (mass_ * v);
}

GridFunction SpectralBasis::apply_symbol(const Vector& symbol, const GridFunction& v) const {
    return eigenvectors_ * symbol.cwiseProduct(coefficients(v));
}

double neg_norm(const FemSystem& sys, const GridFunction& u, double mu, std::size_t max_dofs) {
    require(mu >= 0.0 && mu <= 1.0, ErrorKind::InvalidArgument, "mu must lie in [0, 1]");
    const SpectralBasis basis(sys, max_dofs);
    const Vector c = basis.coefficients(u);
    double sum = 0.0;
    for (Eigen::Index k = 0; k < c.size(); ++k) sum += std::pow(basis.eigenvalues()[k], -mu) * c[k] * c[k];
    return std::sqrt(sum);
}

}  // namespace fracback

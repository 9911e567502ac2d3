#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <functional>
#include <vector>

#include "fracback/grid.hpp"
#include "fracback/nonlinearity.hpp"

namespace fracback {

using Vector = Eigen::VectorXd;
/// CSR storage: outer index = row offsets, inner index = column indices.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
/// Coefficients of a P1 function over the interior dofs; boundary values are 0.
using GridFunction = Vector;

/// P1 mass and stiffness matrices restricted to interior dofs.
/// The pencil (stiffness, mass) represents the discrete Laplacian A_h.
struct FemSystem {
    Mesh mesh;
    SparseMatrix mass;
    SparseMatrix stiffness;

    std::size_t dofs() const { return mesh.num_interior(); }
};

struct FullMatrices {
    SparseMatrix mass;
    SparseMatrix stiffness;
};

/// Element-exact P1 matrices over all nodes (no boundary elimination).
FullMatrices assemble_full(const Mesh& mesh);

FemSystem assemble(Mesh mesh);

using SpatialFunction = std::function<double(const Point&)>;

enum class QuadratureRule {
    Smooth,        // Simpson (1D) / edge-midpoint rule (2D), exact for quadratics
    Discontinuous  // 4 subdivisions per element edge, midpoint/centroid rule on each piece
};

/// Full-node load vector (f, phi_i).
Vector load_vector_full(const Mesh& mesh, const SpatialFunction& f, QuadratureRule rule);

/// L2 projection P_h f: solves M g = (f, phi) by CG to relative residual 1e-12.
GridFunction l2_project(const FemSystem& sys, const SpatialFunction& f,
                        QuadratureRule rule = QuadratureRule::Smooth);

/// L2 projection onto `target` of the P1 function given by per-node values on `source`.
/// Exact up to roundoff for any pair of uniform meshes (nested or not): the load
/// vector is integrated over the pairwise element intersections.
GridFunction transfer_l2(const Mesh& source, const std::vector<double>& source_values, const FemSystem& target);

/// Nodal interpolation onto target interior nodes of a P1 function on `source`.
GridFunction transfer_nodal(const Mesh& source, const std::vector<double>& source_values, const FemSystem& target);

/// Interior nodal values of f.
GridFunction interpolate(const FemSystem& sys, const SpatialFunction& f);

/// M * f(u) with f applied to the nodal values (product approximation of P_h f(u)).
Vector load_nonlinear(const FemSystem& sys, const GridFunction& u, const Nonlinearity& f);

double m_inner(const FemSystem& sys, const GridFunction& a, const GridFunction& b);
double l2_norm(const FemSystem& sys, const GridFunction& u);
/// ||u - reference|| / ||reference||.
double l2_error(const FemSystem& sys, const GridFunction& u, const GridFunction& reference);

/// Values at all mesh nodes, zero on the boundary.
std::vector<double> node_values(const FemSystem& sys, const GridFunction& u);

/// Dense generalized eigendecomposition K phi = lambda M phi with M-orthonormal
/// eigenvectors (columns), eigenvalues ascending.
class SpectralBasis {
public:
    static constexpr std::size_t default_max_dofs = 4096;

    explicit SpectralBasis(const FemSystem& sys, std::size_t max_dofs = default_max_dofs);

    const Vector& eigenvalues() const { return eigenvalues_; }
    const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }

    /// (v, phi_k)_M for every k.
    Vector coefficients(const GridFunction& v) const;
    /// sum_k symbol_k * (v, phi_k)_M * phi_k
    GridFunction apply_symbol(const Vector& symbol, const GridFunction& v) const;

private:
    SparseMatrix mass_;
    Vector eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
};

/// ||A_h^{-mu/2} u||_{L2} for mu in [0, 1], via dense eigendecomposition.
double neg_norm(const FemSystem& sys, const GridFunction& u, double mu,
                std::size_t max_dofs = SpectralBasis::default_max_dofs);

}  // namespace fracback

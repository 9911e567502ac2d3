#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace fracback {

using Point = std::array<double, 2>;

/// Uniform P1 mesh of (0,1) or (0,1)^2.
///
/// Nodes are numbered lexicographically by (y, x). In 2D each lattice cell
/// [i/n,(i+1)/n] x [j/n,(j+1)/n] is split along the diagonal from its lower-left
/// to its upper-right corner, giving two counter-clockwise right triangles.
/// 1D meshes store the unused y coordinate as 0.
struct Mesh {
    int dim = 1;
    int n = 0;
    std::vector<Point> nodes;
    std::vector<std::array<int, 3>> elements;  // 1D elements use the first two slots
    std::vector<bool> boundary_mask;
    std::vector<int> interior_index;  // node id -> interior dof id, -1 on the boundary
    std::vector<int> interior_nodes;  // interior dof id -> node id

    double h() const { return 1.0 / n; }
    std::size_t num_nodes() const { return nodes.size(); }
    std::size_t num_elements() const { return elements.size(); }
    std::size_t num_interior() const { return interior_nodes.size(); }
    int nodes_per_element() const { return dim + 1; }

    /// Signed measure (length or area) of element e.
    double element_measure(std::size_t e) const;

    /// Node id of lattice point (i, j); j is ignored in 1D.
    int node_id(int i, int j = 0) const { return dim == 1 ? i : j * (n + 1) + i; }
};

Mesh build_interval_mesh(int n);
Mesh build_square_mesh(int n);
Mesh build_mesh(int dim, int n);

/// {dim, n, h, num_nodes, num_elements} as a JSON object string.
std::string mesh_metadata_json(const Mesh& mesh);

/// Value at p of the P1 function with the given per-node values.
double evaluate_p1(const Mesh& mesh, const std::vector<double>& node_values, const Point& p);

}  // namespace fracback

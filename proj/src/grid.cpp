#include "fracback/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fracback/error.hpp"

namespace fracback {

namespace {

void classify_boundary(Mesh& mesh) {
    const auto count = mesh.nodes.size();
    mesh.boundary_mask.assign(count, false);
    mesh.interior_index.assign(count, -1);
    mesh.interior_nodes.clear();
    for (std::size_t id = 0; id < count; ++id) {
        const auto& p = mesh.nodes[id];
        bool on_boundary = p[0] == 0.0 || p[0] == 1.0;
        if (mesh.dim == 2) on_boundary = on_boundary || p[1] == 0.0 || p[1] == 1.0;
        mesh.boundary_mask[id] = on_boundary;
        if (!on_boundary) {
            mesh.interior_index[id] = static_cast<int>(mesh.interior_nodes.size());
            mesh.interior_nodes.push_back(static_cast<int>(id));
        }
    }
}

// i/n with exact endpoints, so boundary tests can compare against 0 and 1.
double lattice(int i, int n) { return i == n ? 1.0 : static_cast<double>(i) / n; }

}  // namespace

double Mesh::element_measure(std::size_t e) const {
    const auto& el = elements[e];
    const auto& a = nodes[el[0]];
    const auto& b = nodes[el[1]];
    if (dim == 1) return b[0] - a[0];
    const auto& c = nodes[el[2]];
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

Mesh build_interval_mesh(int n) {
    require(n >= 2, ErrorKind::InvalidArgument, "interval mesh needs n >= 2, got " + std::to_string(n));
    Mesh mesh;
    mesh.dim = 1;
    mesh.n = n;
    mesh.nodes.reserve(n + 1);
    for (int i = 0; i <= n; ++i) mesh.nodes.push_back({lattice(i, n), 0.0});
    mesh.elements.reserve(n);
    for (int i = 0; i < n; ++i) mesh.elements.push_back({i, i + 1, -1});
    classify_boundary(mesh);
    return mesh;
}

Mesh build_square_mesh(int n) {
    require(n >= 2, ErrorKind::InvalidArgument, "square mesh needs n >= 2, got " + std::to_string(n));
    Mesh mesh;
    mesh.dim = 2;
    mesh.n = n;
    mesh.nodes.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) mesh.nodes.push_back({lattice(i, n), lattice(j, n)});
    mesh.elements.reserve(2 * static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int sw = mesh.node_id(i, j);
            const int se = mesh.node_id(i + 1, j);
            const int nw = mesh.node_id(i, j + 1);
            const int ne = mesh.node_id(i + 1, j + 1);
            mesh.elements.push_back({sw, se, ne});
            mesh.elements.push_back({sw, ne, nw});
        }
    }
    classify_boundary(mesh);
    return mesh;
}

Mesh build_mesh(int dim, int n) {
    if (dim == 1) return build_interval_mesh(n);
    if (dim == 2) return build_square_mesh(n);
    throw Error(ErrorKind::InvalidArgument, "mesh dimension must be 1 or 2, got " + std::to_string(dim));
}

std::string mesh_metadata_json(const Mesh& mesh) {
    std::ostringstream os;
    os.precision(17);
    os << "{\"dim\":" << mesh.dim << ",\"n\":" << mesh.n << ",\"h\":" << mesh.h()
       << ",\"num_nodes\":" << mesh.num_nodes() << ",\"num_elements\":" << mesh.num_elements() << "}";
    return os.str();
}

double evaluate_p1(const Mesh& mesh, const std::vector<double>& node_values, const Point& p) {
    require(node_values.size() == mesh.num_nodes(), ErrorKind::InvalidArgument,
            "node value count does not match mesh");
    const int n = mesh.n;
    auto locate = [n](double x, int& cell, double& frac) {
        const double s = std::clamp(x, 0.0, 1.0) * n;
        cell = std::min(static_cast<int>(std::floor(s)), n - 1);
        frac = s - cell;
    };
    int i = 0;
    double fx = 0.0;
    locate(p[0], i, fx);
    if (mesh.dim == 1) {
        return (1.0 - fx) * node_values[mesh.node_id(i)] + fx * node_values[mesh.node_id(i + 1)];
    }
    int j = 0;
    double fy = 0.0;
    locate(p[1], j, fy);
    const double sw = node_values[mesh.node_id(i, j)];
    const double se = node_values[mesh.node_id(i + 1, j)];
    const double nw = node_values[mesh.node_id(i, j + 1)];
    const double ne = node_values[mesh.node_id(i + 1, j + 1)];
    // lower triangle (sw, se, ne) when fy <= fx, upper (sw, ne, nw) otherwise
    if (fy <= fx) return sw + fx * (se - sw) + fy * (ne - se);
    return sw + fy * (nw - sw) + fx * (ne - nw);
}

}  // namespace fracback

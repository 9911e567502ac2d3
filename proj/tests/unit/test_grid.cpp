#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "fracback/error.hpp"
#include "fracback/grid.hpp"

using namespace fracback;

TEST_CASE("interval mesh with two cells") {
    const Mesh m = build_interval_mesh(2);
    REQUIRE(m.num_nodes() == 3);
    REQUIRE(m.num_elements() == 2);
    CHECK(m.nodes[1][0] == 0.5);
    REQUIRE(m.num_interior() == 1);
    CHECK(m.interior_nodes[0] == 1);
}

TEST_CASE("interval mesh counts") {
    const Mesh m = build_interval_mesh(4);
    CHECK(m.num_nodes() == 5);
    CHECK(m.num_elements() == 4);
    CHECK(m.num_interior() == 3);
}

TEST_CASE("meshes reject n below two") {
    CHECK_THROWS_AS(build_interval_mesh(1), Error);
    CHECK_THROWS_AS(build_square_mesh(1), Error);
    try {
        build_interval_mesh(1);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidArgument);
    }
    CHECK_THROWS_AS(build_mesh(3, 4), Error);
}

TEST_CASE("square mesh counts") {
    const Mesh m2 = build_square_mesh(2);
    CHECK(m2.num_nodes() == 9);
    CHECK(m2.num_elements() == 8);
    CHECK(m2.num_interior() == 1);
    const Mesh m3 = build_square_mesh(3);
    CHECK(m3.num_nodes() == 16);
    CHECK(m3.num_elements() == 18);
    CHECK(m3.num_interior() == 4);
}

TEST_CASE("element measures are positive and sum to one") {
    for (int dim : {1, 2}) {
        for (int n : {2, 3, 7, 16, 31}) {
            const Mesh m = build_mesh(dim, n);
            double total = 0.0;
            for (std::size_t e = 0; e < m.num_elements(); ++e) {
                const double a = m.element_measure(e);
                CHECK(a > 0.0);
                total += a;
            }
            CHECK(std::abs(total - 1.0) < 1e-13);
        }
    }
    double area = 0.0;
    const Mesh m = build_square_mesh(7);
    for (std::size_t e = 0; e < m.num_elements(); ++e) area += m.element_measure(e);
    CHECK(std::abs(area - 1.0) < 1e-14);
}

TEST_CASE("boundary mask marks exactly the nodes on the boundary") {
    const Mesh m = build_square_mesh(5);
    std::size_t boundary = 0;
    for (std::size_t i = 0; i < m.num_nodes(); ++i) {
        const auto& p = m.nodes[i];
        const bool expected = p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0;
        CHECK(m.boundary_mask[i] == expected);
        CHECK((m.interior_index[i] < 0) == expected);
        boundary += expected;
    }
    CHECK(boundary == 4 * 5);
    CHECK(m.num_interior() == 16);
}

TEST_CASE("nodes are ordered lexicographically by y then x") {
    const Mesh m = build_square_mesh(4);
    for (int j = 0; j <= 4; ++j)
        for (int i = 0; i <= 4; ++i) {
            const auto& p = m.nodes[m.node_id(i, j)];
            CHECK(p[0] == Catch::Approx(i / 4.0));
            CHECK(p[1] == Catch::Approx(j / 4.0));
            CHECK(m.node_id(i, j) == j * 5 + i);
        }
}

TEST_CASE("refinement nests the node sets") {
    for (int dim : {1, 2}) {
        for (int n : {2, 3, 8, 13}) {
            const Mesh coarse = build_mesh(dim, n);
            const Mesh fine = build_mesh(dim, 2 * n);
            std::set<std::pair<double, double>> fine_points;
            for (const auto& p : fine.nodes) fine_points.insert({p[0], p[1]});
            for (const auto& p : coarse.nodes) CHECK(fine_points.count({p[0], p[1]}) == 1);
        }
    }
}

TEST_CASE("every triangle shares the lower-left to upper-right diagonal") {
    const Mesh m = build_square_mesh(3);
    for (std::size_t e = 0; e < m.num_elements(); e += 2) {
        const auto& lower = m.elements[e];
        const auto& upper = m.elements[e + 1];
        CHECK(lower[0] == upper[0]);
        CHECK(lower[2] == upper[1]);
        const auto& sw = m.nodes[lower[0]];
        const auto& ne = m.nodes[lower[2]];
        CHECK(ne[0] > sw[0]);
        CHECK(ne[1] > sw[1]);
    }
}

TEST_CASE("metadata json") {
    const Mesh m = build_square_mesh(4);
    CHECK(mesh_metadata_json(m) == R"({"dim":2,"n":4,"h":0.25,"num_nodes":25,"num_elements":32})");
}

TEST_CASE("P1 evaluation reproduces affine functions") {
    for (int dim : {1, 2}) {
        const Mesh m = build_mesh(dim, 5);
        auto affine = [dim](const Point& p) { return 1.0 + 2.0 * p[0] + (dim == 2 ? -3.0 * p[1] : 0.0); };
        std::vector<double> values;
        for (const auto& p : m.nodes) values.push_back(affine(p));
        for (double x : {0.0, 0.13, 0.5, 0.77, 1.0})
            for (double y : {0.0, 0.31, 0.62, 1.0}) {
                const Point p{x, dim == 2 ? y : 0.0};
                CHECK(evaluate_p1(m, values, p) == Catch::Approx(affine(p)).margin(1e-14));
            }
    }
}

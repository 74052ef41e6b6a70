#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "ssm/errors.hpp"
#include "ssm/mesh.hpp"

using namespace ssm;
using namespace ssm::testing;

TEST_CASE("validate_mesh rejects bad indices and repeated vertices") {
    TriangleMesh m = make_single_triangle();
    CHECK_NOTHROW(validate_mesh(m));
    m.faces.push_back({0, 1, 7});
    CHECK_THROWS_AS(validate_mesh(m), TopologyError);
    m.faces.back() = {0, 1, 1};
    CHECK_THROWS_AS(validate_mesh(m), TopologyError);
}

TEST_CASE("surface area and centroid of canonical meshes") {
    CHECK(surface_area(make_cube()) == doctest::Approx(6.0));
    CHECK(surface_area(make_square()) == doctest::Approx(1.0));
    Vec3 c = vertex_centroid(make_cube());
    CHECK(distance(c, {0.5, 0.5, 0.5}) < 1e-12);
}

TEST_CASE("boundary loop of a single triangle visits its 3 vertices") {
    Contour c = boundary_loop(make_single_triangle());
    CHECK(c.point_count() == 3);
    CHECK(c.closed);
    CHECK(c.length() == doctest::Approx(2.0 + std::sqrt(2.0)));
}

TEST_CASE("boundary loop of a split square has perimeter 4") {
    Contour c = boundary_loop(make_square());
    CHECK(c.point_count() == 4);
    CHECK(c.length() == doctest::Approx(4.0));
}

TEST_CASE("closed cube has no boundary loop") {
    CHECK(is_closed(make_cube()));
    CHECK_THROWS_AS(boundary_loop(make_cube()), NoBoundaryError);
    CHECK(boundary_loop_count(make_cube()) == 0);
}

TEST_CASE("two separate squares: two loops is an error with the count") {
    TriangleMesh m = make_square();
    TriangleMesh other = make_square();
    int base = m.vertex_count();
    for (const Vec3& v : other.vertices) m.vertices.push_back(v + Vec3{3, 0, 0});
    for (auto f : other.faces) m.faces.push_back({f[0] + base, f[1] + base, f[2] + base});
    CHECK(boundary_loop_count(m) == 2);
    try {
        boundary_loop(m);
        FAIL("expected MultipleLoopsError");
    } catch (const MultipleLoopsError& e) {
        CHECK(e.loop_count == 2);
    }
}

// Property: the boundary walk uses every boundary edge exactly once.
TEST_CASE("boundary loop is an Eulerian cycle over boundary edges") {
    TriangleMesh grid = make_grid(4, 3, 0.5);
    auto loop = boundary_loop_vertices(grid);
    std::set<std::pair<int, int>> walked;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        int a = loop[i], b = loop[(i + 1) % loop.size()];
        walked.insert({std::min(a, b), std::max(a, b)});
    }
    std::set<std::pair<int, int>> boundary;
    for (const auto& e : collect_edges(grid))
        if (e.face_count == 1) boundary.insert({e.a, e.b});
    CHECK(walked == boundary);
    CHECK(loop.size() == boundary.size());
}

TEST_CASE("face components") {
    TriangleMesh m = make_cube();
    int count = 0;
    auto comp = face_components(m, &count);
    CHECK(count == 1);
    // Append a floating triangle far away.
    int base = m.vertex_count();
    m.vertices.push_back({10, 0, 0});
    m.vertices.push_back({11, 0, 0});
    m.vertices.push_back({10, 1, 0});
    m.faces.push_back({base, base + 1, base + 2});
    comp = face_components(m, &count);
    CHECK(count == 2);
    CHECK(comp.back() != comp.front());
}

TEST_CASE("rigid transforms: isometry, composition, inverse") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> angle(-179.0, 179.0);
    RigidTransform xf = rotation_about_axis(random_unit(rng), angle(rng));
    xf.translation = {0.3, -2.0, 5.0};

    SUBCASE("identity leaves the mesh unchanged") {
        TriangleMesh m = make_cube();
        TriangleMesh out = apply_transform(m, RigidTransform::identity());
        for (int v = 0; v < m.vertex_count(); ++v)
            CHECK(distance(out.vertices[v], m.vertices[v]) == 0.0);
    }
    SUBCASE("translation shifts the centroid exactly") {
        TriangleMesh m = make_cube();
        RigidTransform t = RigidTransform::translate({1, 2, 3});
        TriangleMesh out = apply_transform(m, t);
        CHECK(distance(vertex_centroid(out), vertex_centroid(m) + Vec3{1, 2, 3}) < 1e-12);
    }
    SUBCASE("edge lengths preserved within 1e-9") {
        TriangleMesh m = make_icosphere(1);
        TriangleMesh out = apply_transform(m, xf);
        for (const auto& e : collect_edges(m)) {
            double before = distance(m.vertices[e.a], m.vertices[e.b]);
            double after = distance(out.vertices[e.a], out.vertices[e.b]);
            CHECK(std::abs(before - after) < 1e-9);
        }
    }
    SUBCASE("inverse composes to identity within 1e-9") {
        RigidTransform id = xf.compose(xf.inverse());
        Vec3 p{0.2, -1.0, 3.0};
        CHECK(distance(id.apply(p), p) < 1e-9);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(std::abs(id.rotation[i][j] - (i == j ? 1.0 : 0.0)) < 1e-9);
    }
    SUBCASE("rotation stays orthonormal within 1e-9") {
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                double dot_ij = 0.0;
                for (int k = 0; k < 3; ++k) dot_ij += xf.rotation[k][i] * xf.rotation[k][j];
                CHECK(std::abs(dot_ij - (i == j ? 1.0 : 0.0)) < 1e-9);
            }
        }
    }
}

TEST_CASE("edge length stats of the unit cube") {
    auto stats = edge_length_stats(make_cube());
    CHECK(stats.count == 18);  // 12 axis edges + 6 face diagonals
    CHECK(stats.min == doctest::Approx(1.0));
    CHECK(stats.max == doctest::Approx(std::sqrt(2.0)));
    CHECK(stats.cv > 0.0);
}

#include <doctest.h>

#include <numeric>
#include <random>
#include <set>

#include "helpers.hpp"
#include "ssm/closest_point.hpp"
#include "ssm/errors.hpp"
#include "ssm/remesh.hpp"
#include "ssm/shared_boundary.hpp"

using namespace ssm;
using namespace ssm::testing;

namespace {

// Per-vertex distance check, independent of the tree-based implementation.
bool all_vertices_close(const TriangleMesh& mesh, const std::array<int, 3>& face,
                        const TriangleMesh& target, double threshold) {
    for (int c = 0; c < 3; ++c) {
        double best = std::numeric_limits<double>::infinity();
        for (int f = 0; f < target.face_count(); ++f) {
            const auto& tf = target.faces[f];
            Vec3 p = closest_point_on_triangle(target.vertices[tf[0]], target.vertices[tf[1]],
                                               target.vertices[tf[2]], mesh.vertices[face[c]]);
            best = std::min(best, distance(p, mesh.vertices[face[c]]));
        }
        if (!(best < threshold)) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("find_close_triangles on touching cubes selects the contact face") {
    TriangleMesh a = make_cube();                                // [0,1]^3
    TriangleMesh b = make_cube({1, 0, 0}, {2, 1, 1});            // shares the x=1 wall
    auto selected = find_close_triangles(a, b, 1e-3);
    // Brute-force oracle over every face.
    std::vector<int> expected;
    for (int f = 0; f < a.face_count(); ++f)
        if (all_vertices_close(a, a.faces[f], b, 1e-3)) expected.push_back(f);
    CHECK(selected == expected);
    REQUIRE(selected.size() == 2);  // the x=1 wall is two triangles
    for (int f : selected)
        for (int c = 0; c < 3; ++c) CHECK(a.vertices[a.faces[f][c]].x == doctest::Approx(1.0));
}

TEST_CASE("find_close_triangles: separated meshes and huge thresholds") {
    TriangleMesh a = make_cube();
    TriangleMesh far_b = make_cube({11, 0, 0}, {12, 1, 1});
    CHECK(find_close_triangles(a, far_b, 1e-3).empty());
    auto all = find_close_triangles(a, far_b, 1e9);
    CHECK(static_cast<int>(all.size()) == a.face_count());
}

TEST_CASE("threshold monotonicity: smaller threshold selects a subset") {
    TriangleMesh a = isotropic_remesh(make_cube(), 0.25, 6);
    TriangleMesh b = make_cube({1, 0, 0}, {2, 1, 1});
    std::vector<double> thresholds = {1e-4, 1e-2, 0.1, 0.5, 2.0};
    std::vector<int> previous;
    for (double t : thresholds) {
        auto selected = find_close_triangles(a, b, t);
        CHECK(std::includes(selected.begin(), selected.end(), previous.begin(), previous.end()));
        previous = std::move(selected);
    }
}

TEST_CASE("split_mesh partitions faces and conserves area exactly") {
    TriangleMesh cube = make_cube();
    SUBCASE("all faces selected") {
        std::vector<int> all(cube.face_count());
        std::iota(all.begin(), all.end(), 0);
        auto [sel, rem] = split_mesh(cube, all);
        CHECK(sel.face_count() == 12);
        CHECK(rem.face_count() == 0);
        CHECK(rem.vertex_count() == 0);
    }
    SUBCASE("nothing selected") {
        auto [sel, rem] = split_mesh(cube, {});
        CHECK(sel.face_count() == 0);
        CHECK(rem.face_count() == 12);
    }
    SUBCASE("one wall selected leaves 10 faces") {
        auto wall = find_close_triangles(cube, make_cube({1, 0, 0}, {2, 1, 1}), 1e-3);
        auto [sel, rem] = split_mesh(cube, wall);
        CHECK(sel.face_count() == 2);
        CHECK(rem.face_count() == 10);
        CHECK(surface_area(sel) + surface_area(rem) == doctest::Approx(surface_area(cube)));
    }
    SUBCASE("area conservation on a remeshed cube split") {
        TriangleMesh fine = isotropic_remesh(cube, 0.2, 6);
        auto wall = find_close_triangles(fine, make_cube({1, 0, 0}, {2, 1, 1}), 1e-3);
        auto [sel, rem] = split_mesh(fine, wall);
        double relative = std::abs(surface_area(sel) + surface_area(rem) - surface_area(fine)) /
                          surface_area(fine);
        CHECK(relative < 1e-6);
        CHECK(sel.face_count() + rem.face_count() == fine.face_count());
    }
}

TEST_CASE("snap_boundary projects boundary vertices onto the target loop") {
    SUBCASE("boundary already on the loop is a fixed point") {
        TriangleMesh grid = make_grid(3, 3, 1.0 / 3.0);  // unit square
        Contour loop;
        loop.points = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
        TriangleMesh out = snap_boundary(grid, loop);
        for (int v = 0; v < grid.vertex_count(); ++v)
            CHECK(distance(out.vertices[v], grid.vertices[v]) < 1e-9);
    }
    SUBCASE("offset boundary lands on a straight segment") {
        TriangleMesh strip = make_grid(4, 1, 0.25);  // 1 x 0.25 strip
        // Shift the whole strip off the target line by 0.01 in z.
        for (Vec3& v : strip.vertices) v.z = 0.01;
        Contour line;
        line.closed = true;
        line.points = {{-1, -1, 0}, {2, -1, 0}, {2, 2, 0}, {-1, 2, 0}};
        TriangleMesh out = snap_boundary(strip, line);
        auto loop = boundary_loop_vertices(strip);
        for (int v : loop) CHECK(std::abs(out.vertices[v].z) < 1e-9);
        // Interior vertices (none in this strip mesh: all vertices are on the
        // boundary) — use a bigger grid for the interior check below.
    }
    SUBCASE("interior vertices do not move") {
        TriangleMesh grid = make_grid(4, 4, 0.25);
        Contour loop;
        loop.points = {{0, 0, 0.05}, {1, 0, 0.05}, {1, 1, 0.05}, {0, 1, 0.05}};
        TriangleMesh out = snap_boundary(grid, loop);
        auto boundary = boundary_loop_vertices(grid);
        std::set<int> on_boundary(boundary.begin(), boundary.end());
        for (int v = 0; v < grid.vertex_count(); ++v) {
            if (!on_boundary.count(v))
                CHECK(distance(out.vertices[v], grid.vertices[v]) == 0.0);
        }
    }
    SUBCASE("closed mesh is rejected") {
        Contour loop;
        loop.points = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
        CHECK_THROWS_AS(snap_boundary(make_cube(), loop), NoBoundaryError);
    }
}

TEST_CASE("extract_shared_boundary on touching unit cubes") {
    TriangleMesh a = make_cube();
    TriangleMesh b = make_cube({1, 0, 0}, {2, 1, 1});
    SharedBoundaryOptions options;
    options.threshold = 1e-3;
    options.remesh_edge_length = 0.1;
    SharedBoundaryDiagnostics diagnostics;
    SharedBoundaryDecomposition parts = extract_shared_boundary(a, b, options, &diagnostics);

    CHECK(parts.threshold_used == 1e-3);
    CHECK(surface_area(parts.shared) == doctest::Approx(1.0).epsilon(0.02));
    CHECK(parts.contour.length() == doctest::Approx(4.0).epsilon(0.02));
    CHECK(boundary_loop_count(parts.shared) == 1);

    // The contour IS the boundary loop of the shared surface.
    Contour loop = boundary_loop(parts.shared);
    REQUIRE(loop.point_count() == parts.contour.point_count());
    for (int i = 0; i < loop.point_count(); ++i)
        CHECK(distance(loop.points[i], parts.contour.points[i]) == 0.0);

    // Remainders are open with a single loop each; A_r's loop sits on the
    // contour polyline (it was snapped there).
    CHECK(boundary_loop_count(parts.remainder_a) == 1);
    CHECK(boundary_loop_count(parts.remainder_b) == 1);
    for (int v : boundary_loop_vertices(parts.remainder_a)) {
        auto hit = closest_point_on_contour(parts.contour, parts.remainder_a.vertices[v]);
        CHECK(hit.distance < 1e-9);
    }

    // Contact symmetry on mirror-symmetric inputs.
    CHECK(std::abs(diagnostics.area_a_selected - diagnostics.area_b_selected) /
              diagnostics.area_b_selected <
          0.05);

    // Every shared-surface vertex is within the threshold's reach of the
    // remeshed B (it came from B's contact patch; smoothing with the
    // boundary pinned keeps the flat wall flat).
    for (const Vec3& v : parts.shared.vertices) CHECK(std::abs(v.x - 1.0) < 1e-6);
}

TEST_CASE("two tangent spheres produce a small disk-like shared patch") {
    TriangleMesh a = make_icosphere(2);
    TriangleMesh b = make_icosphere(2);
    for (Vec3& v : b.vertices) v.x += 2.0;  // tangent at (1,0,0)
    SharedBoundaryOptions options;
    options.threshold = 0.06;
    options.remesh_edge_length = 0.12;
    options.smooth_iterations = 2;
    SharedBoundaryDecomposition parts = extract_shared_boundary(a, b, options);
    CHECK(parts.shared.face_count() > 0);
    CHECK(surface_area(parts.shared) > 0.0);
    CHECK(boundary_loop_count(parts.shared) == 1);
    // The patch hugs the tangency point.
    for (const Vec3& v : parts.shared.vertices) CHECK(distance(v, {1, 0, 0}) < 0.5);
}

TEST_CASE("separated cubes raise NoSharedBoundaryError with the gap distance") {
    TriangleMesh a = make_cube();
    TriangleMesh b = make_cube({2, 0, 0}, {3, 1, 1});
    SharedBoundaryOptions options;
    options.threshold = 1e-3;
    options.remesh_edge_length = 0.2;
    try {
        extract_shared_boundary(a, b, options);
        FAIL("expected NoSharedBoundaryError");
    } catch (const NoSharedBoundaryError& e) {
        CHECK(e.min_distance == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("vertex distance histogram covers the gap") {
    TriangleMesh a = make_cube();
    TriangleMesh b = make_cube({1.5, 0, 0}, {2.5, 1, 1});
    auto hist = vertex_distance_histogram(b, a, 10);
    CHECK(hist.min == doctest::Approx(0.5).epsilon(0.01));
    int total = 0;
    for (int c : hist.counts) total += c;
    CHECK(total == b.vertex_count());
}

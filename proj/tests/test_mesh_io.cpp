#include <doctest.h>

#include <fstream>

#include "helpers.hpp"
#include "ssm/errors.hpp"
#include "ssm/io.hpp"

using namespace ssm;
using namespace ssm::testing;

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace

TEST_CASE("obj: single triangle loads with matching counts") {
    ScratchDir dir("obj_tri");
    auto path = dir.path() / "tri.obj";
    write_file(path, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
    TriangleMesh m = load_mesh(path);
    CHECK(m.vertex_count() == 3);
    CHECK(m.face_count() == 1);
    CHECK(m.faces[0] == std::array<int, 3>{0, 1, 2});
}

TEST_CASE("obj: unit cube loads with 8 vertices and 12 faces") {
    ScratchDir dir("obj_cube");
    auto path = dir.path() / "cube.obj";
    save_mesh(make_cube(), path);
    TriangleMesh m = load_mesh(path);
    CHECK(m.vertex_count() == 8);
    CHECK(m.face_count() == 12);
}

TEST_CASE("obj: face index out of range is a parse error") {
    ScratchDir dir("obj_idx");
    auto path = dir.path() / "bad.obj";
    std::string body;
    TriangleMesh cube = make_cube();
    for (const Vec3& v : cube.vertices)
        body += "v " + format_double(v.x) + " " + format_double(v.y) + " " + format_double(v.z) + "\n";
    body += "f 1 2 99\n";
    write_file(path, body);
    CHECK_THROWS_AS(load_mesh(path), ParseError);
}

TEST_CASE("obj: malformed coordinate reports the line number") {
    ScratchDir dir("obj_line");
    auto path = dir.path() / "bad.obj";
    write_file(path, "v 0 0 0\nv 1 0 zzz\n");
    try {
        load_mesh(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
}

TEST_CASE("load_mesh: unsupported extension is a format error") {
    ScratchDir dir("fmt");
    auto path = dir.path() / "mesh.stl";
    write_file(path, "solid x\n");
    CHECK_THROWS_AS(load_mesh(path), FormatError);
    CHECK_THROWS_AS(load_mesh(dir.path() / "missing.obj"), IoError);
}

TEST_CASE("obj round trip: identical faces, vertices within 1e-6") {
    ScratchDir dir("obj_rt");
    TriangleMesh cube = make_cube({-0.25, 0.125, -3.0}, {1.0 / 3.0, 2.0, 4.5});
    auto path = dir.path() / "cube.obj";
    save_mesh(cube, path);
    TriangleMesh back = load_mesh(path);
    REQUIRE(back.vertex_count() == cube.vertex_count());
    REQUIRE(back.faces == cube.faces);
    for (int v = 0; v < cube.vertex_count(); ++v)
        CHECK(distance(back.vertices[v], cube.vertices[v]) < 1e-6);
}

TEST_CASE("ply round trip including empty mesh") {
    ScratchDir dir("ply_rt");
    SUBCASE("cube") {
        TriangleMesh cube = make_cube();
        auto path = dir.path() / "cube.ply";
        save_mesh(cube, path);
        TriangleMesh back = load_mesh(path);
        CHECK(back.faces == cube.faces);
        for (int v = 0; v < cube.vertex_count(); ++v)
            CHECK(distance(back.vertices[v], cube.vertices[v]) < 1e-6);
    }
    SUBCASE("empty mesh stays a valid file") {
        TriangleMesh empty;
        auto path = dir.path() / "empty.ply";
        save_mesh(empty, path);
        TriangleMesh back = load_mesh(path);
        CHECK(back.vertex_count() == 0);
        CHECK(back.face_count() == 0);
    }
    SUBCASE("binary ply is rejected") {
        auto path = dir.path() / "bin.ply";
        write_file(path, "ply\nformat binary_little_endian 1.0\nend_header\n");
        CHECK_THROWS_AS(load_mesh(path), FormatError);
    }
}

// Property: save/load of randomly transformed meshes is exact for faces
// and within strict tolerance for positions (both OBJ and PLY).
TEST_CASE("round-trip property on random rigid copies") {
    ScratchDir dir("rt_prop");
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> angle(-180.0, 180.0);
    std::uniform_real_distribution<double> shift(-10.0, 10.0);
    TriangleMesh base = make_icosphere(1, 0.8);
    for (int trial = 0; trial < 5; ++trial) {
        RigidTransform xf = rotation_about_axis(random_unit(rng), angle(rng));
        xf.translation = {shift(rng), shift(rng), shift(rng)};
        TriangleMesh m = apply_transform(base, xf);
        for (const char* ext : {"obj", "ply"}) {
            auto path = dir.path() / ("m" + std::to_string(trial) + "." + ext);
            save_mesh(m, path);
            TriangleMesh back = load_mesh(path);
            REQUIRE(back.faces == m.faces);
            double worst = 0.0;
            for (int v = 0; v < m.vertex_count(); ++v)
                worst = std::max(worst, distance(back.vertices[v], m.vertices[v]));
            CHECK(worst < 1e-12);  // %.17g is exact for doubles
        }
    }
}

TEST_CASE("contour and particle files round trip") {
    ScratchDir dir("contour");
    Contour c;
    c.points = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    auto path = dir.path() / "loop.contour";
    save_contour(c, path);
    Contour back = load_contour(path);
    REQUIRE(back.point_count() == 4);
    for (int i = 0; i < 4; ++i) CHECK(distance(back.points[i], c.points[i]) == 0.0);
    CHECK(back.closed);

    auto ppath = dir.path() / "pts.particles";
    save_particles(c.points, ppath);
    CHECK(load_particles(ppath).size() == 4);
}

// Shared fixtures for the test suites: canonical meshes, deterministic
// RNG helpers, finite-difference utilities, and scratch directories.
#pragma once

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ssm/mesh.hpp"

namespace ssm::testing {

inline bool rel_close(double a, double b, double tol) {
    double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) <= tol * scale;
}

inline TriangleMesh make_cube(const Vec3& lo = {0, 0, 0}, const Vec3& hi = {1, 1, 1}) {
    TriangleMesh m;
    m.vertices = {{lo.x, lo.y, lo.z}, {hi.x, lo.y, lo.z}, {hi.x, hi.y, lo.z}, {lo.x, hi.y, lo.z},
                  {lo.x, lo.y, hi.z}, {hi.x, lo.y, hi.z}, {hi.x, hi.y, hi.z}, {lo.x, hi.y, hi.z}};
    m.faces = {{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7}, {0, 1, 5}, {0, 5, 4},
               {2, 3, 7}, {2, 7, 6}, {0, 4, 7}, {0, 7, 3}, {1, 2, 6}, {1, 6, 5}};
    return m;
}

inline TriangleMesh make_single_triangle() {
    TriangleMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    m.faces = {{0, 1, 2}};
    return m;
}

// Unit square in the z=0 plane, two triangles.
inline TriangleMesh make_square() {
    TriangleMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    m.faces = {{0, 1, 2}, {0, 2, 3}};
    return m;
}

// Icosphere: subdivided icosahedron projected to the given radius.
// Uniform edge lengths, closed, manifold.
inline TriangleMesh make_icosphere(int subdivisions = 2, double radius = 1.0) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    TriangleMesh m;
    m.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                  {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},
               {5, 11, 4}, {11, 10, 2}, {10, 7, 6},  {7, 1, 8},  {3, 9, 4},   {3, 4, 2},
               {3, 2, 6},  {3, 6, 8},  {3, 8, 9},   {4, 9, 5},  {2, 4, 11},  {6, 2, 10},
               {8, 6, 7},  {9, 8, 1}};
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            int idx = m.vertex_count();
            m.vertices.push_back(0.5 * (m.vertices[a] + m.vertices[b]));
            midpoint[key] = idx;
            return idx;
        };
        std::vector<std::array<int, 3>> faces;
        faces.reserve(m.faces.size() * 4);
        for (const auto& f : m.faces) {
            int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            faces.push_back({f[0], ab, ca});
            faces.push_back({f[1], bc, ab});
            faces.push_back({f[2], ca, bc});
            faces.push_back({ab, bc, ca});
        }
        m.faces.swap(faces);
    }
    for (Vec3& v : m.vertices) v = normalized(v) * radius;
    return m;
}

// Latitude/longitude sphere: decidedly non-uniform edge lengths near the
// poles, good input for remeshing tests.
inline TriangleMesh make_uv_sphere(int stacks = 12, int slices = 18, double radius = 1.0) {
    TriangleMesh m;
    m.vertices.push_back({0, 0, radius});
    for (int i = 1; i < stacks; ++i) {
        double phi = std::numbers::pi * i / stacks;
        for (int j = 0; j < slices; ++j) {
            double theta = 2.0 * std::numbers::pi * j / slices;
            m.vertices.push_back({radius * std::sin(phi) * std::cos(theta),
                                  radius * std::sin(phi) * std::sin(theta),
                                  radius * std::cos(phi)});
        }
    }
    m.vertices.push_back({0, 0, -radius});
    int south = m.vertex_count() - 1;
    auto ring = [&](int i, int j) { return 1 + (i - 1) * slices + (j % slices); };
    for (int j = 0; j < slices; ++j) m.faces.push_back({0, ring(1, j), ring(1, j + 1)});
    for (int i = 1; i < stacks - 1; ++i) {
        for (int j = 0; j < slices; ++j) {
            int a = ring(i, j), b = ring(i, j + 1), c = ring(i + 1, j + 1), d = ring(i + 1, j);
            m.faces.push_back({a, c, b});
            m.faces.push_back({a, d, c});
        }
    }
    for (int j = 0; j < slices; ++j)
        m.faces.push_back({south, ring(stacks - 1, j + 1), ring(stacks - 1, j)});
    return m;
}

// Open planar grid in the z=0 plane, (nx+1)×(ny+1) vertices.
inline TriangleMesh make_grid(int nx, int ny, double spacing = 1.0) {
    TriangleMesh m;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) m.vertices.push_back({i * spacing, j * spacing, 0.0});
    auto at = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            m.faces.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
            m.faces.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
        }
    }
    return m;
}

inline double signed_volume(const TriangleMesh& m) {
    double vol = 0.0;
    for (const auto& f : m.faces) {
        const Vec3& a = m.vertices[f[0]];
        const Vec3& b = m.vertices[f[1]];
        const Vec3& c = m.vertices[f[2]];
        vol += dot(a, cross(b, c)) / 6.0;
    }
    return vol;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    while (true) {
        Vec3 v{u(rng), u(rng), u(rng)};
        double n = norm(v);
        if (n > 1e-3 && n <= 1.0) return v / n;
    }
}

inline RigidTransform rotation_about_z(double degrees) {
    double rad = degrees * std::numbers::pi / 180.0;
    RigidTransform xf;
    xf.rotation = {{{std::cos(rad), -std::sin(rad), 0.0},
                    {std::sin(rad), std::cos(rad), 0.0},
                    {0.0, 0.0, 1.0}}};
    return xf;
}

inline RigidTransform rotation_about_axis(const Vec3& axis_in, double degrees) {
    Vec3 axis = normalized(axis_in);
    double rad = degrees * std::numbers::pi / 180.0;
    double c = std::cos(rad), s = std::sin(rad);
    RigidTransform xf;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double kk = axis[i] * axis[j] * (1 - c);
            xf.rotation[i][j] = kk + (i == j ? c : 0.0);
        }
    xf.rotation[0][1] -= s * axis.z;
    xf.rotation[0][2] += s * axis.y;
    xf.rotation[1][0] += s * axis.z;
    xf.rotation[1][2] -= s * axis.x;
    xf.rotation[2][0] -= s * axis.y;
    xf.rotation[2][1] += s * axis.x;
    return xf;
}

// Unique scratch directory under the build tree, removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& label) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("ssm_test_" + label + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace ssm::testing

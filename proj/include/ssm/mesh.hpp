// Core surface types: indexed triangle mesh, closed polyline contour,
// rigid transform, and the on-surface point used to pin particles to
// geometry. All types are plain values; operations on them are free
// functions (implemented in mesh.cpp) and never mutate their inputs.
#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "ssm/vec3.hpp"

namespace ssm {

struct TriangleMesh {
    std::vector<Vec3> vertices;               // positions in mm
    std::vector<std::array<int, 3>> faces;    // vertex index triples
    std::vector<Vec3> normals;                // optional per-vertex unit normals

    bool empty() const { return vertices.empty() && faces.empty(); }
    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int face_count() const { return static_cast<int>(faces.size()); }
};

// Ordered polyline. When closed, the first point is not repeated at the
// end; the closing segment is implicit.
struct Contour {
    std::vector<Vec3> points;
    bool closed = true;

    int point_count() const { return static_cast<int>(points.size()); }
    int segment_count() const {
        int n = point_count();
        if (n < 2) return 0;
        return closed ? n : n - 1;
    }
    // Endpoints of segment s; for a closed contour the last segment wraps.
    std::pair<Vec3, Vec3> segment(int s) const {
        int n = point_count();
        return {points[s], points[(s + 1) % n]};
    }
    Vec3 point_on_segment(int s, double t) const {
        auto [a, b] = segment(s);
        return a + t * (b - a);
    }
    double length() const;
};

struct RigidTransform {
    // Row-major orthonormal rotation, det = +1.
    std::array<std::array<double, 3>, 3> rotation{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    Vec3 translation;

    Vec3 apply(const Vec3& p) const {
        const auto& r = rotation;
        return {r[0][0] * p.x + r[0][1] * p.y + r[0][2] * p.z + translation.x,
                r[1][0] * p.x + r[1][1] * p.y + r[1][2] * p.z + translation.y,
                r[2][0] * p.x + r[2][1] * p.y + r[2][2] * p.z + translation.z};
    }
    Vec3 apply_rotation(const Vec3& p) const {
        const auto& r = rotation;
        return {r[0][0] * p.x + r[0][1] * p.y + r[0][2] * p.z,
                r[1][0] * p.x + r[1][1] * p.y + r[1][2] * p.z,
                r[2][0] * p.x + r[2][1] * p.y + r[2][2] * p.z};
    }
    RigidTransform inverse() const;
    // this ∘ other: applies `other` first, then this.
    RigidTransform compose(const RigidTransform& other) const;
    static RigidTransform identity() { return {}; }
    static RigidTransform translate(const Vec3& t) {
        RigidTransform xf;
        xf.translation = t;
        return xf;
    }
};

// A point constrained to a mesh: position is the barycentric combination
// of the vertices of faces[face_index].
struct SurfacePoint {
    Vec3 position;
    int face_index = -1;
    Vec3 barycentric{1.0, 0.0, 0.0};
};

// ---------------------------------------------------------------------------
// Validation and measures

// Throws TopologyError / Error when face indices are out of range or a face
// repeats a vertex.
void validate_mesh(const TriangleMesh& mesh);

double face_area(const TriangleMesh& mesh, int face);
Vec3 face_normal(const TriangleMesh& mesh, int face);  // unit; zero for degenerate faces
Vec3 face_centroid(const TriangleMesh& mesh, int face);
double surface_area(const TriangleMesh& mesh);
Vec3 vertex_centroid(const TriangleMesh& mesh);
std::pair<Vec3, Vec3> bounding_box(const TriangleMesh& mesh);
double bounding_box_diagonal(const TriangleMesh& mesh);

Vec3 point_from_barycentric(const TriangleMesh& mesh, int face, const Vec3& bary);

struct EdgeLengthStats {
    double mean = 0.0;
    double stddev = 0.0;
    double cv = 0.0;  // coefficient of variation, stddev / mean
    double min = 0.0;
    double max = 0.0;
    int count = 0;
};
EdgeLengthStats edge_length_stats(const TriangleMesh& mesh);

// ---------------------------------------------------------------------------
// Topology

// Undirected edges with the number of incident faces.
struct EdgeUse {
    int a, b;        // a < b
    int face_count;
};
std::vector<EdgeUse> collect_edges(const TriangleMesh& mesh);

bool has_nonmanifold_edges(const TriangleMesh& mesh);
bool is_closed(const TriangleMesh& mesh);  // no boundary edges
int boundary_loop_count(const TriangleMesh& mesh);

// Vertex indices (into mesh.vertices) of the single boundary loop, in
// connectivity order. Throws NoBoundaryError / MultipleLoopsError.
std::vector<int> boundary_loop_vertices(const TriangleMesh& mesh);

// The single boundary loop as a closed contour. Orientation follows the
// face winding; the starting point is the smallest boundary vertex index.
Contour boundary_loop(const TriangleMesh& mesh);

// Connected components over face adjacency (shared edges). Returns one
// component id per face, ids dense from 0.
std::vector<int> face_components(const TriangleMesh& mesh, int* component_count = nullptr);

// ---------------------------------------------------------------------------
// Transforms

TriangleMesh apply_transform(const TriangleMesh& mesh, const RigidTransform& xf);
Contour apply_transform(const Contour& contour, const RigidTransform& xf);

}  // namespace ssm

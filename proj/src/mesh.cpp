#include "ssm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

#include "ssm/errors.hpp"

namespace ssm {

double Contour::length() const {
    double total = 0.0;
    for (int s = 0; s < segment_count(); ++s) {
        auto [a, b] = segment(s);
        total += distance(a, b);
    }
    return total;
}

RigidTransform RigidTransform::inverse() const {
    RigidTransform inv;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) inv.rotation[i][j] = rotation[j][i];
    Vec3 rt = inv.apply_rotation(translation);
    inv.translation = -rt;
    return inv;
}

RigidTransform RigidTransform::compose(const RigidTransform& other) const {
    RigidTransform out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += rotation[i][k] * other.rotation[k][j];
            out.rotation[i][j] = s;
        }
    out.translation = apply(other.translation);
    return out;
}

void validate_mesh(const TriangleMesh& mesh) {
    const int nv = mesh.vertex_count();
    for (int f = 0; f < mesh.face_count(); ++f) {
        const auto& face = mesh.faces[f];
        for (int c = 0; c < 3; ++c) {
            if (face[c] < 0 || face[c] >= nv)
                throw TopologyError("face " + std::to_string(f) + " references vertex " +
                                    std::to_string(face[c]) + " but mesh has " +
                                    std::to_string(nv) + " vertices");
        }
        if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2])
            throw TopologyError("face " + std::to_string(f) + " repeats a vertex");
    }
    if (!mesh.normals.empty() && mesh.normals.size() != mesh.vertices.size())
        throw TopologyError("normal count does not match vertex count");
}

double face_area(const TriangleMesh& mesh, int face) {
    const auto& f = mesh.faces[face];
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    return 0.5 * norm(cross(b - a, c - a));
}

Vec3 face_normal(const TriangleMesh& mesh, int face) {
    const auto& f = mesh.faces[face];
    return normalized(cross(mesh.vertices[f[1]] - mesh.vertices[f[0]],
                            mesh.vertices[f[2]] - mesh.vertices[f[0]]));
}

Vec3 face_centroid(const TriangleMesh& mesh, int face) {
    const auto& f = mesh.faces[face];
    return (mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) / 3.0;
}

double surface_area(const TriangleMesh& mesh) {
    double total = 0.0;
    for (int f = 0; f < mesh.face_count(); ++f) total += face_area(mesh, f);
    return total;
}

Vec3 vertex_centroid(const TriangleMesh& mesh) {
    Vec3 sum;
    for (const Vec3& v : mesh.vertices) sum += v;
    return mesh.vertices.empty() ? Vec3{} : sum / static_cast<double>(mesh.vertices.size());
}

std::pair<Vec3, Vec3> bounding_box(const TriangleMesh& mesh) {
    if (mesh.vertices.empty()) return {Vec3{}, Vec3{}};
    Vec3 lo = mesh.vertices[0], hi = mesh.vertices[0];
    for (const Vec3& v : mesh.vertices) {
        for (int c = 0; c < 3; ++c) {
            lo[c] = std::min(lo[c], v[c]);
            hi[c] = std::max(hi[c], v[c]);
        }
    }
    return {lo, hi};
}

double bounding_box_diagonal(const TriangleMesh& mesh) {
    auto [lo, hi] = bounding_box(mesh);
    return distance(lo, hi);
}

Vec3 point_from_barycentric(const TriangleMesh& mesh, int face, const Vec3& bary) {
    const auto& f = mesh.faces[face];
    return bary.x * mesh.vertices[f[0]] + bary.y * mesh.vertices[f[1]] +
           bary.z * mesh.vertices[f[2]];
}

EdgeLengthStats edge_length_stats(const TriangleMesh& mesh) {
    auto edges = collect_edges(mesh);
    EdgeLengthStats stats;
    stats.count = static_cast<int>(edges.size());
    if (edges.empty()) return stats;
    double sum = 0.0, sum_sq = 0.0;
    stats.min = std::numeric_limits<double>::infinity();
    stats.max = 0.0;
    for (const auto& e : edges) {
        double len = distance(mesh.vertices[e.a], mesh.vertices[e.b]);
        sum += len;
        sum_sq += len * len;
        stats.min = std::min(stats.min, len);
        stats.max = std::max(stats.max, len);
    }
    double n = static_cast<double>(edges.size());
    stats.mean = sum / n;
    double var = std::max(0.0, sum_sq / n - stats.mean * stats.mean);
    stats.stddev = std::sqrt(var);
    stats.cv = stats.mean > 0.0 ? stats.stddev / stats.mean : 0.0;
    return stats;
}

std::vector<EdgeUse> collect_edges(const TriangleMesh& mesh) {
    std::map<std::pair<int, int>, int> counts;
    for (const auto& f : mesh.faces) {
        for (int c = 0; c < 3; ++c) {
            int a = f[c], b = f[(c + 1) % 3];
            if (a > b) std::swap(a, b);
            ++counts[{a, b}];
        }
    }
    std::vector<EdgeUse> edges;
    edges.reserve(counts.size());
    for (const auto& [key, n] : counts) edges.push_back({key.first, key.second, n});
    return edges;
}

bool has_nonmanifold_edges(const TriangleMesh& mesh) {
    for (const auto& e : collect_edges(mesh))
        if (e.face_count > 2) return true;
    return false;
}

bool is_closed(const TriangleMesh& mesh) {
    for (const auto& e : collect_edges(mesh))
        if (e.face_count == 1) return false;
    return true;
}

namespace {

// Directed boundary edges: for each boundary edge {a,b} with a single
// incident face containing the directed edge a->b, the boundary is walked
// b->a so the loop orientation is consistent with the face winding.
std::map<int, int> directed_boundary_successors(const TriangleMesh& mesh) {
    std::map<std::pair<int, int>, int> counts;
    for (const auto& f : mesh.faces) {
        for (int c = 0; c < 3; ++c) {
            int a = f[c], b = f[(c + 1) % 3];
            int lo = std::min(a, b), hi = std::max(a, b);
            ++counts[{lo, hi}];
        }
    }
    std::map<int, int> next;
    for (const auto& f : mesh.faces) {
        for (int c = 0; c < 3; ++c) {
            int a = f[c], b = f[(c + 1) % 3];
            int lo = std::min(a, b), hi = std::max(a, b);
            if (counts[{lo, hi}] == 1) {
                if (next.count(b))
                    throw TopologyError("boundary is not a set of simple loops (vertex " +
                                        std::to_string(b) + " has multiple boundary successors)");
                next[b] = a;  // walk against the interior winding
            }
        }
    }
    return next;
}

}  // namespace

int boundary_loop_count(const TriangleMesh& mesh) {
    auto next = directed_boundary_successors(mesh);
    std::map<int, bool> visited;
    int loops = 0;
    for (const auto& [start, _] : next) {
        if (visited[start]) continue;
        ++loops;
        int v = start;
        while (!visited[v]) {
            visited[v] = true;
            v = next.at(v);
        }
    }
    return loops;
}

std::vector<int> boundary_loop_vertices(const TriangleMesh& mesh) {
    auto next = directed_boundary_successors(mesh);
    if (next.empty()) throw NoBoundaryError("mesh is closed: no boundary loop to extract");
    int loops = boundary_loop_count(mesh);
    if (loops > 1)
        throw MultipleLoopsError("mesh has " + std::to_string(loops) +
                                     " boundary loops, expected exactly one",
                                 loops);
    int start = next.begin()->first;  // smallest boundary vertex index
    std::vector<int> order;
    order.reserve(next.size());
    int v = start;
    do {
        order.push_back(v);
        v = next.at(v);
    } while (v != start);
    if (order.size() != next.size())
        throw TopologyError("boundary walk did not visit every boundary vertex");
    return order;
}

Contour boundary_loop(const TriangleMesh& mesh) {
    Contour contour;
    contour.closed = true;
    for (int v : boundary_loop_vertices(mesh)) contour.points.push_back(mesh.vertices[v]);
    return contour;
}

std::vector<int> face_components(const TriangleMesh& mesh, int* component_count) {
    const int nf = mesh.face_count();
    std::vector<int> parent(nf);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::map<std::pair<int, int>, int> first_face;
    for (int f = 0; f < nf; ++f) {
        for (int c = 0; c < 3; ++c) {
            int a = mesh.faces[f][c], b = mesh.faces[f][(c + 1) % 3];
            if (a > b) std::swap(a, b);
            auto [it, inserted] = first_face.insert({{a, b}, f});
            if (!inserted) {
                int ra = find(it->second), rb = find(f);
                if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
                it->second = f;  // chain through shared edges with >2 faces too
            }
        }
    }
    std::vector<int> id(nf, -1);
    int count = 0;
    for (int f = 0; f < nf; ++f) {
        int r = find(f);
        if (id[r] < 0) id[r] = count++;
        id[f] = id[r];
    }
    if (component_count) *component_count = count;
    return id;
}

TriangleMesh apply_transform(const TriangleMesh& mesh, const RigidTransform& xf) {
    TriangleMesh out = mesh;
    for (Vec3& v : out.vertices) v = xf.apply(v);
    for (Vec3& n : out.normals) n = xf.apply_rotation(n);
    return out;
}

Contour apply_transform(const Contour& contour, const RigidTransform& xf) {
    Contour out = contour;
    for (Vec3& p : out.points) p = xf.apply(p);
    return out;
}

}  // namespace ssm

#include "ssm/smooth.hpp"

#include <set>
#include <vector>

#include "ssm/errors.hpp"

namespace ssm {

TriangleMesh laplacian_smooth(const TriangleMesh& mesh, int iterations, double step) {
    if (iterations < 0) throw Error("smoothing iterations must be non-negative");
    if (step <= 0.0 || step > 1.0) throw Error("smoothing step must lie in (0, 1]");
    TriangleMesh out = mesh;
    if (iterations == 0 || mesh.vertex_count() == 0) return out;

    const int nv = mesh.vertex_count();
    std::vector<std::set<int>> ring(nv);
    for (const auto& f : mesh.faces) {
        for (int c = 0; c < 3; ++c) {
            ring[f[c]].insert(f[(c + 1) % 3]);
            ring[f[c]].insert(f[(c + 2) % 3]);
        }
    }
    std::vector<bool> fixed(nv, false);
    for (const auto& e : collect_edges(mesh)) {
        if (e.face_count == 1) {
            fixed[e.a] = true;
            fixed[e.b] = true;
        }
    }

    std::vector<Vec3> next(nv);
    for (int it = 0; it < iterations; ++it) {
        for (int v = 0; v < nv; ++v) {
            if (fixed[v] || ring[v].empty()) {
                next[v] = out.vertices[v];
                continue;
            }
            Vec3 avg;
            for (int n : ring[v]) avg += out.vertices[n];
            avg /= static_cast<double>(ring[v].size());
            next[v] = out.vertices[v] + step * (avg - out.vertices[v]);
        }
        out.vertices.swap(next);
    }
    out.normals.clear();  // stale after moving vertices
    return out;
}

}  // namespace ssm

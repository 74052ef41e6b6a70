#include "ssm/remesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <vector>

#include "ssm/closest_point.hpp"
#include "ssm/errors.hpp"

namespace ssm {

namespace {

using Face = std::array<int, 3>;

struct EdgeKey {
    int a, b;  // a < b
    bool operator<(const EdgeKey& o) const { return a != o.a ? a < o.a : b < o.b; }
};

EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

// Sharp creases and corners of the input surface. Vertices on these stay
// on them: without the constraint, tangential relaxation rounds every
// sharp edge into a chamfer and measurably shrinks the surface.
struct FeatureConstraints {
    std::vector<std::array<Vec3, 2>> segments;
    std::vector<Vec3> corners;
    double tol = 0.0;

    bool empty() const { return segments.empty(); }

    const Vec3* nearest_corner(const Vec3& p) const {
        for (const Vec3& c : corners)
            if (distance(p, c) <= tol) return &c;
        return nullptr;
    }

    Vec3 project(const Vec3& p) const {
        Vec3 best = p;
        double best_sq = std::numeric_limits<double>::infinity();
        for (const auto& seg : segments) {
            Vec3 ab = seg[1] - seg[0];
            double len_sq = squared_norm(ab);
            double t = len_sq > 0.0 ? std::clamp(dot(p - seg[0], ab) / len_sq, 0.0, 1.0) : 0.0;
            Vec3 q = seg[0] + t * ab;
            double d2 = squared_distance(p, q);
            if (d2 < best_sq) {
                best_sq = d2;
                best = q;
            }
        }
        return best;
    }

    bool on_curve(const Vec3& p) const {
        return !segments.empty() && distance(p, project(p)) <= tol;
    }
};

FeatureConstraints detect_features(const TriangleMesh& mesh, double target_edge_length,
                                   double angle_deg = 40.0) {
    FeatureConstraints features;
    features.tol = 1e-6 * target_edge_length;
    std::map<EdgeKey, std::vector<int>> edge_faces;
    for (int f = 0; f < mesh.face_count(); ++f)
        for (int c = 0; c < 3; ++c)
            edge_faces[edge_key(mesh.faces[f][c], mesh.faces[f][(c + 1) % 3])].push_back(f);

    const double cos_threshold = std::cos(angle_deg * std::numbers::pi / 180.0);
    std::map<int, int> feature_valence;
    for (const auto& [key, faces] : edge_faces) {
        if (faces.size() != 2) continue;
        Vec3 n0 = face_normal(mesh, faces[0]);
        Vec3 n1 = face_normal(mesh, faces[1]);
        if (dot(n0, n1) < cos_threshold) {
            features.segments.push_back({mesh.vertices[key.a], mesh.vertices[key.b]});
            ++feature_valence[key.a];
            ++feature_valence[key.b];
        }
    }
    for (const auto& [v, valence] : feature_valence)
        if (valence != 2) features.corners.push_back(mesh.vertices[v]);  // junctions and path ends
    return features;
}

std::vector<std::vector<int>> vertex_faces(const TriangleMesh& m) {
    std::vector<std::vector<int>> vf(m.vertex_count());
    for (int f = 0; f < m.face_count(); ++f)
        for (int c = 0; c < 3; ++c) vf[m.faces[f][c]].push_back(f);
    return vf;
}

std::vector<bool> boundary_vertex_flags(const TriangleMesh& m) {
    std::vector<bool> flags(m.vertex_count(), false);
    for (const auto& e : collect_edges(m)) {
        if (e.face_count == 1) {
            flags[e.a] = true;
            flags[e.b] = true;
        }
    }
    return flags;
}

double edge_length(const TriangleMesh& m, int a, int b) {
    return distance(m.vertices[a], m.vertices[b]);
}

void split_long_edges(TriangleMesh& m, double high) {
    for (int pass = 0; pass < 30; ++pass) {
        struct LongEdge {
            double len;
            int a, b;
        };
        std::vector<LongEdge> long_edges;
        for (const auto& e : collect_edges(m)) {
            double len = edge_length(m, e.a, e.b);
            if (len > high) long_edges.push_back({len, e.a, e.b});
        }
        if (long_edges.empty()) return;
        std::sort(long_edges.begin(), long_edges.end(), [](const LongEdge& x, const LongEdge& y) {
            if (x.len != y.len) return x.len > y.len;
            if (x.a != y.a) return x.a < y.a;
            return x.b < y.b;
        });

        auto vf = vertex_faces(m);
        for (const auto& e : long_edges) {
            // Gather live faces currently containing the edge.
            std::vector<int> incident;
            for (int f : vf[e.a]) {
                const Face& face = m.faces[f];
                bool has_a = false, has_b = false;
                for (int c = 0; c < 3; ++c) {
                    if (face[c] == e.a) has_a = true;
                    if (face[c] == e.b) has_b = true;
                }
                if (has_a && has_b) incident.push_back(f);
            }
            if (incident.empty()) continue;

            int mid = m.vertex_count();
            m.vertices.push_back(0.5 * (m.vertices[e.a] + m.vertices[e.b]));
            vf.emplace_back();

            std::sort(incident.begin(), incident.end());
            for (int f : incident) {
                Face face = m.faces[f];
                // Rotate so the split edge occupies slots 0-1 and winding survives.
                int rot = 0;
                for (int c = 0; c < 3; ++c) {
                    int u = face[c], v = face[(c + 1) % 3];
                    if ((u == e.a && v == e.b) || (u == e.b && v == e.a)) {
                        rot = c;
                        break;
                    }
                }
                Face r = {face[rot], face[(rot + 1) % 3], face[(rot + 2) % 3]};
                m.faces[f] = {r[0], mid, r[2]};
                int nf = m.face_count();
                m.faces.push_back({mid, r[1], r[2]});
                // Incidence updates: f loses r[1]; nf touches mid, r[1], r[2].
                auto& list = vf[r[1]];
                list.erase(std::find(list.begin(), list.end(), f));
                vf[r[1]].push_back(nf);
                vf[r[2]].push_back(nf);
                vf[mid].push_back(f);
                vf[mid].push_back(nf);
            }
        }
    }
}

void compact(TriangleMesh& m, const std::vector<bool>& face_alive) {
    std::vector<Face> faces;
    faces.reserve(m.faces.size());
    for (int f = 0; f < m.face_count(); ++f)
        if (face_alive.empty() || face_alive[f]) faces.push_back(m.faces[f]);
    m.faces.swap(faces);

    std::vector<int> remap(m.vertex_count(), -1);
    std::vector<Vec3> verts;
    for (auto& f : m.faces) {
        for (int c = 0; c < 3; ++c) {
            if (remap[f[c]] < 0) {
                remap[f[c]] = static_cast<int>(verts.size());
                verts.push_back(m.vertices[f[c]]);
            }
            f[c] = remap[f[c]];
        }
    }
    m.vertices.swap(verts);
    m.normals.clear();
}

void collapse_short_edges(TriangleMesh& m, double low, double high,
                          const FeatureConstraints& features) {
    const int nv = m.vertex_count();
    std::vector<bool> alive(m.face_count(), true);
    auto vf = vertex_faces(m);
    auto boundary = boundary_vertex_flags(m);

    std::vector<bool> at_corner(nv, false), on_feature(nv, false);
    if (!features.empty()) {
        for (int v = 0; v < nv; ++v) {
            at_corner[v] = features.nearest_corner(m.vertices[v]) != nullptr;
            on_feature[v] = at_corner[v] || features.on_curve(m.vertices[v]);
        }
    }

    std::vector<std::set<int>> ring(nv);
    for (const auto& f : m.faces) {
        for (int c = 0; c < 3; ++c) {
            ring[f[c]].insert(f[(c + 1) % 3]);
            ring[f[c]].insert(f[(c + 2) % 3]);
        }
    }

    struct ShortEdge {
        double len;
        int a, b;
    };
    std::vector<ShortEdge> short_edges;
    for (const auto& e : collect_edges(m)) {
        double len = edge_length(m, e.a, e.b);
        if (len < low) short_edges.push_back({len, e.a, e.b});
    }
    std::sort(short_edges.begin(), short_edges.end(), [](const ShortEdge& x, const ShortEdge& y) {
        if (x.len != y.len) return x.len < y.len;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });

    std::vector<bool> locked(nv, false);
    for (const auto& e : short_edges) {
        int a = e.a, b = e.b;
        if (locked[a] || locked[b]) continue;
        if (boundary[a] || boundary[b]) continue;

        std::vector<int> faces_ab;
        for (int f : vf[a]) {
            if (!alive[f]) continue;
            const Face& face = m.faces[f];
            if (std::count(face.begin(), face.end(), b)) faces_ab.push_back(f);
        }
        if (faces_ab.size() != 2) continue;

        std::set<int> opposite;
        for (int f : faces_ab)
            for (int c : m.faces[f])
                if (c != a && c != b) opposite.insert(c);

        // Link condition: shared ring must be exactly the opposite vertices.
        std::set<int> common;
        std::set_intersection(ring[a].begin(), ring[a].end(), ring[b].begin(), ring[b].end(),
                              std::inserter(common, common.begin()));
        if (common != opposite) continue;

        // Placement: corners are immovable, feature vertices absorb plain
        // ones, and collapses along a feature land on the curve.
        Vec3 target;
        if (at_corner[a] && at_corner[b]) continue;
        else if (at_corner[a]) target = m.vertices[a];
        else if (at_corner[b]) target = m.vertices[b];
        else if (on_feature[a] && on_feature[b]) {
            target = 0.5 * (m.vertices[a] + m.vertices[b]);
            if (!features.empty()) {
                Vec3 snapped = features.project(target);
                if (distance(snapped, target) > features.tol) continue;  // would cut the crease
                target = snapped;
            }
        } else if (on_feature[a]) target = m.vertices[a];
        else if (on_feature[b]) target = m.vertices[b];
        else target = 0.5 * (m.vertices[a] + m.vertices[b]);

        // No new overlong edges, no flipped or degenerate faces.
        bool ok = true;
        for (int n : ring[a])
            if (n != b && distance(target, m.vertices[n]) > high) ok = false;
        for (int n : ring[b])
            if (n != a && distance(target, m.vertices[n]) > high) ok = false;
        if (!ok) continue;

        auto check_faces = [&](int v, int other) {
            for (int f : vf[v]) {
                if (!alive[f]) continue;
                Face face = m.faces[f];
                if (std::count(face.begin(), face.end(), other)) continue;  // dies in collapse
                Vec3 p[3], q[3];
                for (int c = 0; c < 3; ++c) {
                    p[c] = m.vertices[face[c]];
                    q[c] = face[c] == v ? target : p[c];
                }
                Vec3 n_old = cross(p[1] - p[0], p[2] - p[0]);
                Vec3 n_new = cross(q[1] - q[0], q[2] - q[0]);
                if (norm(n_new) < 2e-12 || dot(n_old, n_new) <= 0.0) return false;
            }
            return true;
        };
        if (!check_faces(a, b) || !check_faces(b, a)) continue;

        // Collapse b into a at the chosen placement.
        m.vertices[a] = target;
        at_corner[a] = at_corner[a] || at_corner[b];
        on_feature[a] = on_feature[a] || on_feature[b];
        for (int f : faces_ab) alive[f] = false;
        for (int f : vf[b]) {
            if (!alive[f]) continue;
            for (int c = 0; c < 3; ++c)
                if (m.faces[f][c] == b) m.faces[f][c] = a;
            vf[a].push_back(f);
        }
        locked[a] = true;
        locked[b] = true;
        for (int n : ring[a]) locked[n] = true;
        for (int n : ring[b]) locked[n] = true;
    }
    compact(m, alive);
}

void flip_edges_for_valence(TriangleMesh& m, const FeatureConstraints& features) {
    const int nv = m.vertex_count();
    std::vector<int> valence(nv, 0);
    std::set<EdgeKey> edges;
    std::map<EdgeKey, std::vector<int>> edge_faces;
    for (int f = 0; f < m.face_count(); ++f) {
        for (int c = 0; c < 3; ++c) {
            EdgeKey k = edge_key(m.faces[f][c], m.faces[f][(c + 1) % 3]);
            if (edges.insert(k).second) {
                ++valence[k.a];
                ++valence[k.b];
            }
            edge_faces[k].push_back(f);
        }
    }
    auto boundary = boundary_vertex_flags(m);
    std::vector<bool> on_feature(nv, false);
    if (!features.empty())
        for (int v = 0; v < nv; ++v) on_feature[v] = features.on_curve(m.vertices[v]);

    auto target = [&](int v) { return boundary[v] ? 4 : 6; };
    auto deviation = [&](int v, int val) {
        int d = val - target(v);
        return d * d;
    };

    std::vector<bool> face_touched(m.face_count(), false);
    for (const auto& [key, faces] : edge_faces) {
        if (faces.size() != 2) continue;
        int f1 = faces[0], f2 = faces[1];
        if (face_touched[f1] || face_touched[f2]) continue;
        int a = key.a, b = key.b;
        if (on_feature[a] && on_feature[b]) continue;  // may be a crease edge
        int c = -1, d = -1;
        for (int v : m.faces[f1])
            if (v != a && v != b) c = v;
        for (int v : m.faces[f2])
            if (v != a && v != b) d = v;
        if (c < 0 || d < 0 || c == d) continue;
        if (edges.count(edge_key(c, d))) continue;

        int before = deviation(a, valence[a]) + deviation(b, valence[b]) +
                     deviation(c, valence[c]) + deviation(d, valence[d]);
        int after = deviation(a, valence[a] - 1) + deviation(b, valence[b] - 1) +
                    deviation(c, valence[c] + 1) + deviation(d, valence[d] + 1);
        if (after >= before) continue;

        // Orient from f1's winding: f1 = (a,b,c) cyclically, f2 = (b,a,d).
        bool ab_in_f1 = false;
        for (int r = 0; r < 3; ++r)
            if (m.faces[f1][r] == a && m.faces[f1][(r + 1) % 3] == b) ab_in_f1 = true;
        if (!ab_in_f1) std::swap(a, b);

        Face new1 = {a, d, c};
        Face new2 = {b, c, d};
        Vec3 old_n = face_normal(m, f1) + face_normal(m, f2);
        auto face_ok = [&](const Face& f) {
            Vec3 n = cross(m.vertices[f[1]] - m.vertices[f[0]], m.vertices[f[2]] - m.vertices[f[0]]);
            return norm(n) > 2e-12 && dot(n, old_n) > 0.0;
        };
        if (!face_ok(new1) || !face_ok(new2)) continue;

        m.faces[f1] = new1;
        m.faces[f2] = new2;
        edges.erase(key);
        edges.insert(edge_key(c, d));
        --valence[key.a];
        --valence[key.b];
        ++valence[c];
        ++valence[d];
        face_touched[f1] = true;
        face_touched[f2] = true;
    }
}

void tangential_relax(TriangleMesh& m, const AabbTree& original,
                      const FeatureConstraints& features, double lambda) {
    const int nv = m.vertex_count();
    std::vector<std::set<int>> ring(nv);
    for (const auto& f : m.faces) {
        for (int c = 0; c < 3; ++c) {
            ring[f[c]].insert(f[(c + 1) % 3]);
            ring[f[c]].insert(f[(c + 2) % 3]);
        }
    }
    auto boundary = boundary_vertex_flags(m);

    std::vector<Vec3> vertex_normal(nv);
    for (int f = 0; f < m.face_count(); ++f) {
        Vec3 n = cross(m.vertices[m.faces[f][1]] - m.vertices[m.faces[f][0]],
                       m.vertices[m.faces[f][2]] - m.vertices[m.faces[f][0]]);
        for (int c = 0; c < 3; ++c) vertex_normal[m.faces[f][c]] += n;  // area-weighted
    }

    std::vector<Vec3> next = m.vertices;
    for (int v = 0; v < nv; ++v) {
        if (boundary[v] || ring[v].empty()) continue;
        if (!features.empty() && features.nearest_corner(m.vertices[v])) continue;  // pinned
        Vec3 g;
        for (int n : ring[v]) g += m.vertices[n];
        g /= static_cast<double>(ring[v].size());
        Vec3 d = g - m.vertices[v];
        Vec3 n = normalized(vertex_normal[v]);
        d -= dot(d, n) * n;
        Vec3 candidate = m.vertices[v] + lambda * d;
        if (!features.empty() && features.on_curve(m.vertices[v]))
            next[v] = features.project(candidate);  // slide along the crease only
        else
            next[v] = original.closest(candidate).point.position;
    }
    m.vertices.swap(next);
}

// Last-resort cleanup so the output never carries degenerate faces.
void drop_degenerate_faces(TriangleMesh& m) {
    std::vector<bool> alive(m.face_count(), true);
    bool any = false;
    for (int f = 0; f < m.face_count(); ++f) {
        if (face_area(m, f) < 1e-12) {
            alive[f] = false;
            any = true;
        }
    }
    if (any) compact(m, alive);
}

}  // namespace

TriangleMesh isotropic_remesh(const TriangleMesh& mesh, double target_edge_length, int iterations) {
    if (target_edge_length <= 0.0) throw Error("target edge length must be positive");
    if (mesh.face_count() < 1) throw Error("cannot remesh a mesh without faces");
    validate_mesh(mesh);
    for (const auto& e : collect_edges(mesh)) {
        if (e.face_count > 2)
            throw TopologyError("non-manifold edge (" + std::to_string(e.a) + "," +
                                std::to_string(e.b) + ") with " + std::to_string(e.face_count) +
                                " incident faces");
    }

    AabbTree original(mesh);
    FeatureConstraints features = detect_features(mesh, target_edge_length);
    TriangleMesh m = mesh;
    m.normals.clear();
    const double high = 4.0 / 3.0 * target_edge_length;
    const double low = 0.8 * target_edge_length;

    for (int it = 0; it < iterations; ++it) {
        split_long_edges(m, high);
        collapse_short_edges(m, low, high, features);
        flip_edges_for_valence(m, features);
        tangential_relax(m, original, features, 0.5);
    }
    drop_degenerate_faces(m);
    return m;
}

}  // namespace ssm

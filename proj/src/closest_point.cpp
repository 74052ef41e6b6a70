#include "ssm/closest_point.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "ssm/errors.hpp"

namespace ssm {

Vec3 closest_point_on_triangle(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& p,
                               Vec3* barycentric) {
    // Region-based closest point (Ericson, Real-Time Collision Detection).
    Vec3 ab = b - a, ac = c - a, ap = p - a;
    double d1 = dot(ab, ap), d2 = dot(ac, ap);
    if (d1 <= 0.0 && d2 <= 0.0) {
        if (barycentric) *barycentric = {1, 0, 0};
        return a;
    }
    Vec3 bp = p - b;
    double d3 = dot(ab, bp), d4 = dot(ac, bp);
    if (d3 >= 0.0 && d4 <= d3) {
        if (barycentric) *barycentric = {0, 1, 0};
        return b;
    }
    double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        double v = d1 / (d1 - d3);
        if (barycentric) *barycentric = {1 - v, v, 0};
        return a + v * ab;
    }
    Vec3 cp = p - c;
    double d5 = dot(ab, cp), d6 = dot(ac, cp);
    if (d6 >= 0.0 && d5 <= d6) {
        if (barycentric) *barycentric = {0, 0, 1};
        return c;
    }
    double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        double w = d2 / (d2 - d6);
        if (barycentric) *barycentric = {1 - w, 0, w};
        return a + w * ac;
    }
    double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        if (barycentric) *barycentric = {0, 1 - w, w};
        return b + w * (c - b);
    }
    double denom = 1.0 / (va + vb + vc);
    double v = vb * denom, w = vc * denom;
    if (barycentric) *barycentric = {1 - v - w, v, w};
    return a + v * ab + w * ac;
}

AabbTree::AabbTree(const TriangleMesh& mesh) {
    if (mesh.face_count() == 0) throw Error("cannot build a search tree over an empty mesh");
    tris_.reserve(mesh.faces.size());
    for (int f = 0; f < mesh.face_count(); ++f) {
        const auto& face = mesh.faces[f];
        tris_.push_back({mesh.vertices[face[0]], mesh.vertices[face[1]], mesh.vertices[face[2]], f});
    }
    nodes_.reserve(2 * tris_.size());
    root_ = build(0, static_cast<int>(tris_.size()));
}

int AabbTree::build(int begin, int end) {
    Node node;
    node.lo = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
               std::numeric_limits<double>::infinity()};
    node.hi = -node.lo;
    for (int i = begin; i < end; ++i) {
        for (const Vec3* v : {&tris_[i].a, &tris_[i].b, &tris_[i].c}) {
            for (int c = 0; c < 3; ++c) {
                node.lo[c] = std::min(node.lo[c], (*v)[c]);
                node.hi[c] = std::max(node.hi[c], (*v)[c]);
            }
        }
    }
    constexpr int kLeafSize = 8;
    if (end - begin <= kLeafSize) {
        node.begin = begin;
        node.end = end;
        nodes_.push_back(node);
        return static_cast<int>(nodes_.size()) - 1;
    }
    // Median split on the longest axis of the centroid spread.
    Vec3 clo = node.lo, chi = node.hi;
    int axis = 0;
    {
        Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity()};
        Vec3 hi = -lo;
        for (int i = begin; i < end; ++i) {
            Vec3 cen = (tris_[i].a + tris_[i].b + tris_[i].c) / 3.0;
            for (int c = 0; c < 3; ++c) {
                lo[c] = std::min(lo[c], cen[c]);
                hi[c] = std::max(hi[c], cen[c]);
            }
        }
        clo = lo;
        chi = hi;
        Vec3 extent = chi - clo;
        if (extent.y > extent[axis]) axis = 1;
        if (extent.z > extent[axis]) axis = 2;
    }
    int mid = (begin + end) / 2;
    std::nth_element(tris_.begin() + begin, tris_.begin() + mid, tris_.begin() + end,
                     [axis](const Tri& t1, const Tri& t2) {
                         double c1 = (t1.a[axis] + t1.b[axis] + t1.c[axis]);
                         double c2 = (t2.a[axis] + t2.b[axis] + t2.c[axis]);
                         if (c1 != c2) return c1 < c2;
                         return t1.face < t2.face;  // deterministic order
                     });
    int node_index;
    {
        nodes_.push_back(node);
        node_index = static_cast<int>(nodes_.size()) - 1;
    }
    int left = build(begin, mid);
    int right = build(mid, end);
    nodes_[node_index].left = left;
    nodes_[node_index].right = right;
    return node_index;
}

double AabbTree::box_sq_distance(const Node& node, const Vec3& q) const {
    double d2 = 0.0;
    for (int c = 0; c < 3; ++c) {
        double d = 0.0;
        if (q[c] < node.lo[c]) d = node.lo[c] - q[c];
        else if (q[c] > node.hi[c]) d = q[c] - node.hi[c];
        d2 += d * d;
    }
    return d2;
}

ClosestPointResult AabbTree::closest(const Vec3& query) const {
    double best_sq = std::numeric_limits<double>::infinity();
    int best_face = std::numeric_limits<int>::max();
    Vec3 best_point, best_bary;

    // Explicit stack; visit the nearer child first so pruning bites early.
    std::array<int, 96> stack;
    int top = 0;
    stack[top++] = root_;
    while (top > 0) {
        int ni = stack[--top];
        const Node& node = nodes_[ni];
        // Strict > keeps equidistant faces reachable for the index tie-break.
        if (box_sq_distance(node, query) > best_sq) continue;
        if (node.left < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                Vec3 bary;
                Vec3 p = closest_point_on_triangle(tris_[i].a, tris_[i].b, tris_[i].c, query, &bary);
                double d2 = squared_distance(p, query);
                if (d2 < best_sq || (d2 == best_sq && tris_[i].face < best_face)) {
                    best_sq = d2;
                    best_face = tris_[i].face;
                    best_point = p;
                    best_bary = bary;
                }
            }
            continue;
        }
        double dl = box_sq_distance(nodes_[node.left], query);
        double dr = box_sq_distance(nodes_[node.right], query);
        // Push the farther child first.
        if (dl <= dr) {
            stack[top++] = node.right;
            stack[top++] = node.left;
        } else {
            stack[top++] = node.left;
            stack[top++] = node.right;
        }
    }

    ClosestPointResult result;
    result.point.position = best_point;
    result.point.face_index = best_face;
    result.point.barycentric = best_bary;
    result.distance = std::sqrt(best_sq);
    return result;
}

ClosestPointResult closest_point(const TriangleMesh& mesh, const Vec3& query) {
    return AabbTree(mesh).closest(query);
}

ContourClosestResult closest_point_on_contour(const Contour& contour, const Vec3& query) {
    if (contour.point_count() < 2)
        throw Error("contour must have at least 2 points for closest-point queries");
    ContourClosestResult best;
    double best_sq = std::numeric_limits<double>::infinity();
    for (int s = 0; s < contour.segment_count(); ++s) {
        auto [a, b] = contour.segment(s);
        Vec3 ab = b - a;
        double len_sq = squared_norm(ab);
        double t = len_sq > 0.0 ? std::clamp(dot(query - a, ab) / len_sq, 0.0, 1.0) : 0.0;
        Vec3 p = a + t * ab;
        double d2 = squared_distance(p, query);
        if (d2 < best_sq) {
            best_sq = d2;
            best = {s, t, std::sqrt(d2), p};
        }
    }
    return best;
}

}  // namespace ssm

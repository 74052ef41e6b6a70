// Exact closest-point queries against triangle meshes (via a static AABB
// tree) and polyline contours. Trees snapshot the triangle data at
// construction, so queries stay valid and thread-safe regardless of what
// happens to the source mesh afterwards.
#pragma once

#include <vector>

#include "ssm/mesh.hpp"

namespace ssm {

struct ClosestPointResult {
    SurfacePoint point;
    double distance = 0.0;
};

/// Static bounding-volume tree over the faces of a mesh. Immutable after
/// construction; concurrent queries are safe.
class AabbTree {
public:
    explicit AabbTree(const TriangleMesh& mesh);

    /// Globally nearest surface point. Ties between equidistant faces are
    /// broken toward the lowest face index.
    ClosestPointResult closest(const Vec3& query) const;

    int face_count() const { return static_cast<int>(tris_.size()); }

private:
    struct Tri {
        Vec3 a, b, c;
        int face;
    };
    struct Node {
        Vec3 lo, hi;
        int left = -1, right = -1;  // children, or -1 for leaves
        int begin = 0, end = 0;     // leaf range into tris_
    };

    int build(int begin, int end);
    double box_sq_distance(const Node& node, const Vec3& q) const;

    std::vector<Tri> tris_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

/// One-shot query; builds a tree internally. Use AabbTree directly for
/// repeated queries against the same mesh.
ClosestPointResult closest_point(const TriangleMesh& mesh, const Vec3& query);

/// Closest point of a triangle (a,b,c) to p, with barycentric coordinates.
Vec3 closest_point_on_triangle(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& p,
                               Vec3* barycentric = nullptr);

struct ContourClosestResult {
    int segment = 0;
    double parameter = 0.0;  // in [0,1] along the segment
    double distance = 0.0;
    Vec3 point;
};

/// Global minimum over all polyline segments; ties broken toward the
/// lowest segment index.
ContourClosestResult closest_point_on_contour(const Contour& contour, const Vec3& query);

}  // namespace ssm

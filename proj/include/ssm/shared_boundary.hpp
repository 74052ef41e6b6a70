// Decomposition of two adjoining organ meshes into two remainder meshes,
// one shared-boundary surface, and the shared surface's contour. The
// shared surface is taken from the second mesh's contact triangles; the
// first mesh's boundary loop is snapped onto the shared surface's loop.
#pragma once

#include <string>
#include <vector>

#include "ssm/mesh.hpp"

namespace ssm {

struct SharedBoundaryDecomposition {
    TriangleMesh remainder_a;
    TriangleMesh shared;
    TriangleMesh remainder_b;
    Contour contour;
    double threshold_used = 0.0;
};

struct SharedBoundaryOptions {
    double threshold = 0.0;          // contact distance, mm; required, no default
    double remesh_edge_length = 0.0; // required
    int remesh_iterations = 10;
    int smooth_iterations = 5;
    double smooth_step = 0.5;
    bool smooth_all = true;          // smooth A_r and B_r as well as the shared surface
};

struct SharedBoundaryDiagnostics {
    double area_a_selected = 0.0;   // A_s
    double area_b_selected = 0.0;   // B_s
    double area_a_remeshed = 0.0;   // remeshed A_o
    double area_b_remeshed = 0.0;
    double min_vertex_distance = 0.0;  // min over B vertices of distance to A
    std::vector<std::string> warnings;
};

/// Face indices of `source` whose three vertices all lie within
/// `threshold` of `target`. Returned sorted ascending.
std::vector<int> find_close_triangles(const TriangleMesh& source, const TriangleMesh& target,
                                      double threshold);

/// Partition a mesh's faces into (selected, remainder). Both outputs are
/// compacted: vertices re-indexed, unreferenced vertices dropped.
/// `selected` must be sorted ascending and within range.
std::pair<TriangleMesh, TriangleMesh> split_mesh(const TriangleMesh& mesh,
                                                 const std::vector<int>& selected);

/// Relocate every vertex on the (single) boundary loop of `open_mesh` to
/// its closest point on `target_loop`. Interior vertices and connectivity
/// are untouched.
TriangleMesh snap_boundary(const TriangleMesh& open_mesh, const Contour& target_loop);

/// Full pipeline: remesh both inputs, classify contact triangles in both
/// directions, take B's contact patch as the shared surface, form the
/// remainders, snap A_r's boundary onto the shared surface's loop, smooth
/// with boundaries pinned, and extract the contour. Throws
/// NoSharedBoundaryError when no contact is found and TopologyError when
/// the shared surface does not have exactly one boundary loop.
SharedBoundaryDecomposition extract_shared_boundary(const TriangleMesh& a, const TriangleMesh& b,
                                                    const SharedBoundaryOptions& options,
                                                    SharedBoundaryDiagnostics* diagnostics = nullptr);

/// Convenience overload matching the pipeline's three tunable knobs.
SharedBoundaryDecomposition extract_shared_boundary(const TriangleMesh& a, const TriangleMesh& b,
                                                    double threshold, double remesh_edge_length,
                                                    int smooth_iterations);

/// Histogram of vertex-to-other-mesh distances, used by the CLI to guide
/// threshold tuning. Returns bucket upper bounds and counts.
struct DistanceHistogram {
    std::vector<double> upper_bounds;
    std::vector<int> counts;
    double min = 0.0, max = 0.0;
};
DistanceHistogram vertex_distance_histogram(const TriangleMesh& source, const TriangleMesh& target,
                                            int buckets = 20);

}  // namespace ssm

#include "ssm/shared_boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "ssm/closest_point.hpp"
#include "ssm/errors.hpp"
#include "ssm/remesh.hpp"
#include "ssm/smooth.hpp"

namespace ssm {

std::vector<int> find_close_triangles(const TriangleMesh& source, const TriangleMesh& target,
                                      double threshold) {
    if (threshold <= 0.0) throw Error("contact threshold must be positive");
    if (source.face_count() == 0 || target.face_count() == 0) return {};
    AabbTree tree(target);
    std::vector<double> vertex_dist(source.vertex_count());
    for (int v = 0; v < source.vertex_count(); ++v)
        vertex_dist[v] = tree.closest(source.vertices[v]).distance;
    std::vector<int> selected;
    for (int f = 0; f < source.face_count(); ++f) {
        const auto& face = source.faces[f];
        if (vertex_dist[face[0]] < threshold && vertex_dist[face[1]] < threshold &&
            vertex_dist[face[2]] < threshold)
            selected.push_back(f);
    }
    return selected;
}

std::pair<TriangleMesh, TriangleMesh> split_mesh(const TriangleMesh& mesh,
                                                 const std::vector<int>& selected) {
    std::vector<bool> in_selected(mesh.face_count(), false);
    for (int f : selected) {
        if (f < 0 || f >= mesh.face_count())
            throw Error("selected face index " + std::to_string(f) + " out of range");
        in_selected[f] = true;
    }
    auto build = [&](bool keep_selected) {
        TriangleMesh out;
        std::vector<int> remap(mesh.vertex_count(), -1);
        for (int f = 0; f < mesh.face_count(); ++f) {
            if (in_selected[f] != keep_selected) continue;
            std::array<int, 3> face;
            for (int c = 0; c < 3; ++c) {
                int v = mesh.faces[f][c];
                if (remap[v] < 0) {
                    remap[v] = out.vertex_count();
                    out.vertices.push_back(mesh.vertices[v]);
                }
                face[c] = remap[v];
            }
            out.faces.push_back(face);
        }
        return out;
    };
    return {build(true), build(false)};
}

TriangleMesh snap_boundary(const TriangleMesh& open_mesh, const Contour& target_loop) {
    auto loop = boundary_loop_vertices(open_mesh);  // throws if closed or multi-loop
    TriangleMesh out = open_mesh;
    for (int v : loop)
        out.vertices[v] = closest_point_on_contour(target_loop, out.vertices[v]).point;
    out.normals.clear();
    return out;
}

namespace {

// Restrict a selection to its largest connected component (by area);
// returns the reduced selection and whether anything was dropped.
std::vector<int> largest_component_only(const TriangleMesh& mesh, const std::vector<int>& selected,
                                        bool* dropped) {
    *dropped = false;
    if (selected.empty()) return selected;
    auto [patch, rest] = split_mesh(mesh, selected);
    int component_count = 0;
    auto comp = face_components(patch, &component_count);
    if (component_count <= 1) return selected;
    std::vector<double> comp_area(component_count, 0.0);
    for (int f = 0; f < patch.face_count(); ++f) comp_area[comp[f]] += face_area(patch, f);
    int best = static_cast<int>(std::max_element(comp_area.begin(), comp_area.end()) -
                                comp_area.begin());
    std::vector<int> reduced;
    for (int f = 0; f < patch.face_count(); ++f)
        if (comp[f] == best) reduced.push_back(selected[f]);  // split_mesh keeps face order
    *dropped = true;
    return reduced;
}

}  // namespace

SharedBoundaryDecomposition extract_shared_boundary(const TriangleMesh& a, const TriangleMesh& b,
                                                    const SharedBoundaryOptions& options,
                                                    SharedBoundaryDiagnostics* diagnostics) {
    if (a.empty() || b.empty()) throw Error("extract_shared_boundary requires non-empty meshes");
    if (options.threshold <= 0.0) throw Error("contact threshold must be positive");
    if (options.remesh_edge_length <= 0.0) throw Error("remesh edge length must be positive");

    SharedBoundaryDiagnostics local;
    SharedBoundaryDiagnostics& diag = diagnostics ? *diagnostics : local;

    TriangleMesh a_o = isotropic_remesh(a, options.remesh_edge_length, options.remesh_iterations);
    TriangleMesh b_o = isotropic_remesh(b, options.remesh_edge_length, options.remesh_iterations);
    diag.area_a_remeshed = surface_area(a_o);
    diag.area_b_remeshed = surface_area(b_o);

    auto a_selected = find_close_triangles(a_o, b_o, options.threshold);
    auto b_selected = find_close_triangles(b_o, a_o, options.threshold);

    if (a_selected.empty() && b_selected.empty()) {
        double min_dist = std::numeric_limits<double>::infinity();
        AabbTree tree_a(a_o);
        for (const Vec3& v : b_o.vertices) min_dist = std::min(min_dist, tree_a.closest(v).distance);
        diag.min_vertex_distance = min_dist;
        throw NoSharedBoundaryError(
            "no contact triangles found at threshold " + std::to_string(options.threshold) +
                " (minimum inter-mesh vertex distance " + std::to_string(min_dist) + ")",
            min_dist);
    }
    if (b_selected.empty()) {
        throw NoSharedBoundaryError(
            "no contact triangles found on the second mesh at threshold " +
                std::to_string(options.threshold),
            options.threshold);
    }

    bool dropped = false;
    b_selected = largest_component_only(b_o, b_selected, &dropped);
    if (dropped)
        diag.warnings.push_back(
            "shared surface had multiple connected components; keeping the largest and folding "
            "the rest into the remainder (threshold may be too small)");
    bool dropped_a = false;
    a_selected = largest_component_only(a_o, a_selected, &dropped_a);

    auto [a_s, a_r] = split_mesh(a_o, a_selected);
    auto [b_s, b_r] = split_mesh(b_o, b_selected);
    diag.area_a_selected = surface_area(a_s);
    diag.area_b_selected = surface_area(b_s);

    if (diag.area_a_selected > 0.0 && diag.area_b_selected > 0.0) {
        double ratio = std::max(diag.area_a_selected / diag.area_b_selected,
                                diag.area_b_selected / diag.area_a_selected);
        if (ratio > 1.5)
            diag.warnings.push_back(
                "contact patches on the two meshes differ in area by a factor of " +
                std::to_string(ratio) + "; the threshold is likely poorly tuned");
    }

    TriangleMesh shared = b_s;  // B's contact patch is the shared surface
    int loops = boundary_loop_count(shared);
    if (loops != 1)
        throw TopologyError("shared surface has " + std::to_string(loops) +
                            " boundary loops, expected exactly one (threshold likely too small)");

    Contour shared_loop = boundary_loop(shared);
    TriangleMesh a_r_snapped = snap_boundary(a_r, shared_loop);

    // Snapped positions sit on the loop polyline; smoothing pins boundary
    // vertices, so the contour extracted afterwards is exactly the loop of
    // the smoothed shared surface.
    if (options.smooth_iterations > 0) {
        shared = laplacian_smooth(shared, options.smooth_iterations, options.smooth_step);
        if (options.smooth_all) {
            a_r_snapped = laplacian_smooth(a_r_snapped, options.smooth_iterations, options.smooth_step);
            b_r = laplacian_smooth(b_r, options.smooth_iterations, options.smooth_step);
        }
    }

    SharedBoundaryDecomposition out;
    out.remainder_a = std::move(a_r_snapped);
    out.shared = std::move(shared);
    out.remainder_b = std::move(b_r);
    out.contour = boundary_loop(out.shared);
    out.threshold_used = options.threshold;
    return out;
}

SharedBoundaryDecomposition extract_shared_boundary(const TriangleMesh& a, const TriangleMesh& b,
                                                    double threshold, double remesh_edge_length,
                                                    int smooth_iterations) {
    SharedBoundaryOptions options;
    options.threshold = threshold;
    options.remesh_edge_length = remesh_edge_length;
    options.smooth_iterations = smooth_iterations;
    return extract_shared_boundary(a, b, options);
}

DistanceHistogram vertex_distance_histogram(const TriangleMesh& source, const TriangleMesh& target,
                                            int buckets) {
    DistanceHistogram hist;
    if (source.vertices.empty() || target.face_count() == 0) return hist;
    AabbTree tree(target);
    std::vector<double> dists(source.vertex_count());
    for (int v = 0; v < source.vertex_count(); ++v)
        dists[v] = tree.closest(source.vertices[v]).distance;
    hist.min = *std::min_element(dists.begin(), dists.end());
    hist.max = *std::max_element(dists.begin(), dists.end());
    double width = hist.max > 0.0 ? hist.max / buckets : 1.0;
    hist.upper_bounds.resize(buckets);
    hist.counts.assign(buckets, 0);
    for (int i = 0; i < buckets; ++i) hist.upper_bounds[i] = width * (i + 1);
    for (double d : dists) {
        int bucket = std::min(buckets - 1, static_cast<int>(d / width));
        ++hist.counts[bucket];
    }
    return hist;
}

}  // namespace ssm

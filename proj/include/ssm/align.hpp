#pragma once

#include "ssm/mesh.hpp"

namespace ssm {

struct AlignParams {
    // Closest-point ICP converges linearly; smooth shapes routinely need a
    // few hundred iterations to reach sub-0.1-degree recovery.
    int max_iterations = 600;
    double rotation_tolerance = 1e-12;  // convergence on rotation update magnitude
    // Closest-point pairs farther than this multiple of the median pair
    // distance are dropped from the Procrustes fit (0 disables rejection).
    double rejection_multiple = 4.0;
};

struct AlignResult {
    RigidTransform transform;
    bool converged = false;
    int iterations = 0;
    double mean_distance = 0.0;  // mean closest-point distance at the solution
};

/// Iterative-closest-point rigid registration of `moving` onto
/// `reference`, rotation solved per iteration by SVD orthogonal
/// Procrustes. The translation is pinned so the vertex centroids of the
/// two meshes coincide after applying the transform. No scaling or shear.
/// On non-convergence the best transform found so far is returned with
/// converged = false.
AlignResult rigid_align(const TriangleMesh& moving, const TriangleMesh& reference,
                        const AlignParams& params = {});

}  // namespace ssm

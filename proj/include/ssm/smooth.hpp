#pragma once

#include "ssm/mesh.hpp"

namespace ssm {

/// Uniform-weight Laplacian smoothing. Each interior vertex moves toward
/// the average of its 1-ring neighbors by `step` per iteration; vertices
/// on boundary loops are held fixed so downstream contour geometry is
/// preserved. Connectivity is unchanged; step must lie in (0, 1].
TriangleMesh laplacian_smooth(const TriangleMesh& mesh, int iterations, double step);

}  // namespace ssm

#pragma once

#include "ssm/mesh.hpp"

namespace ssm {

/// Incremental isotropic remeshing: per iteration, edges longer than 4/3
/// of the target are split, edges shorter than 4/5 are collapsed, edges
/// are flipped toward regular valence, and vertices are relaxed
/// tangentially and re-projected onto the input surface. Boundary loops
/// are subdivided but never collapsed or displaced off their polygon.
/// Throws TopologyError for non-manifold input edges.
TriangleMesh isotropic_remesh(const TriangleMesh& mesh, double target_edge_length,
                              int iterations = 10);

}  // namespace ssm

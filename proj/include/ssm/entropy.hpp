// Entropy terms of the particle optimization, written against plain
// position arrays so they can be unit-tested (and finite-difference
// checked) without any mesh machinery.
//
// Per-shape sampling term, per domain j:
//   H_j = -(1/M_j) Σ_{i in j} log p(x_i)
//   p(x_i) = 1/(M'_i (2π σ_i²)^{3/2}) Σ_{k in N(i)} exp(-‖x_i-x_k‖²/(2σ_i²))
// where the interaction set N(i) of a surface-domain particle is its own
// domain plus the contour domain's particles (one-directional coupling:
// contour particles are repelled only by each other, so their updates
// never take forces from the surface terms).
//
// Cohort correspondence term over the N×dM shape matrix X:
//   H(Z) = 1/2 Σ_k log(λ_k + α), λ_k eigenvalues of the centered Gram
//   matrix Y Yᵀ/(N-1) — the dual form, identical spectrum to the dM×dM
//   covariance at a fraction of the cost since N ≪ dM.
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ssm/vec3.hpp"

namespace ssm {

enum class DomainKind { surface, contour };

struct DomainSpec {
    DomainKind kind = DomainKind::surface;
    int particle_count = 1;  // target count; must be a power of two
    std::string name;
};

constexpr bool is_power_of_two(int n) { return n >= 1 && (n & (n - 1)) == 0; }

/// World-space particle positions of one shape, one vector per domain.
struct ShapePositions {
    std::vector<std::vector<Vec3>> domains;
};

/// Per-particle kernel bandwidths, laid out like ShapePositions.
using SigmaSet = std::vector<std::vector<double>>;

/// Which domain (if any) is the contour, and whether surface domains are
/// coupled to it. Disabling the coupling reproduces the independent
/// multi-organ objective for ablation runs.
struct InteractionPolicy {
    int contour_domain = -1;
    bool contour_coupling = true;

    bool couples(int domain) const {
        return contour_coupling && contour_domain >= 0 && domain != contour_domain;
    }
};

/// Kernel density estimate p(x_i) over particle i's interaction set.
/// cutoff_multiple > 0 truncates kernel terms beyond that many σ;
/// non-positive means exact summation.
double kernel_density(const ShapePositions& shape, const InteractionPolicy& policy, int domain,
                      int i, double sigma, double cutoff_multiple = 0.0);

/// Σ_j H_j over all domains of one shape.
double sampling_entropy(const ShapePositions& shape, const InteractionPolicy& policy,
                        const SigmaSet& sigmas, double cutoff_multiple = 0.0);

/// ∇_{x_i} H_j in R³ (not yet projected to the domain tangent space),
/// including the cross terms from particle i's appearances in its
/// same-domain neighbors' densities.
Vec3 sampling_gradient(const ShapePositions& shape, const InteractionPolicy& policy, int domain,
                       int i, const SigmaSet& sigmas, double cutoff_multiple = 0.0);

/// Batched ∇H_j for every particle of one domain; identical values to
/// sampling_gradient at O(M·(M+C)) total instead of per particle.
std::vector<Vec3> sampling_gradients(const ShapePositions& shape, const InteractionPolicy& policy,
                                     int domain, const SigmaSet& sigmas,
                                     double cutoff_multiple = 0.0);

/// H(Z) of the cohort. Throws NumericalError when the regularized
/// spectrum is not positive.
double correspondence_entropy(const Eigen::MatrixXd& shape_matrix, double alpha);

/// ∂H(Z)/∂X as an N×dM matrix (the centering chain rule is the identity
/// on this gradient, so it applies to the raw matrix directly).
Eigen::MatrixXd correspondence_gradient(const Eigen::MatrixXd& shape_matrix, double alpha);

}  // namespace ssm

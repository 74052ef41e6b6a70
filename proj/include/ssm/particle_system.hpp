// Binds the entropy machinery to actual geometry: particles live exactly
// on their domain (surface particles as barycentric points, contour
// particles as a segment/parameter pair with a single degree of freedom),
// and all movement re-projects onto the domain.
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ssm/closest_point.hpp"
#include "ssm/entropy.hpp"
#include "ssm/mesh.hpp"

namespace ssm {

struct ContourParticle {
    int segment = 0;
    double t = 0.0;  // in [0,1) along the segment
};

/// Immutable geometry of one domain of one shape, with its acceleration
/// structures built eagerly.
class DomainGeometry {
public:
    static DomainGeometry make_surface(TriangleMesh mesh);
    static DomainGeometry make_contour(Contour contour);

    DomainKind kind() const { return kind_; }
    const TriangleMesh& mesh() const { return mesh_; }
    const Contour& contour() const { return contour_; }
    const AabbTree& tree() const { return *tree_; }
    double diameter() const { return diameter_; }
    Vec3 centroid() const { return centroid_; }

    double total_length() const { return total_length_; }
    double arc_position(const ContourParticle& p) const;
    ContourParticle at_arc_position(double s) const;  // wraps around the loop
    Vec3 contour_point(const ContourParticle& p) const;
    Vec3 contour_tangent(const ContourParticle& p) const;

private:
    DomainKind kind_ = DomainKind::surface;
    TriangleMesh mesh_;
    std::shared_ptr<const AabbTree> tree_;
    Contour contour_;
    std::vector<double> cumulative_;  // arc length before each segment
    double total_length_ = 0.0;
    double diameter_ = 0.0;
    Vec3 centroid_;
};

struct DomainParticles {
    DomainKind kind = DomainKind::surface;
    std::vector<SurfacePoint> surface;
    std::vector<ContourParticle> contour;

    int count() const {
        return static_cast<int>(kind == DomainKind::surface ? surface.size() : contour.size());
    }
};

/// One subject: per-domain geometry plus its particle configuration.
struct MultiDomainShape {
    std::string id;
    std::string group;
    std::vector<DomainGeometry> domains;
    std::vector<DomainParticles> particles;
};

class ParticleSystem {
public:
    ParticleSystem(std::vector<DomainSpec> specs, std::vector<MultiDomainShape> shapes);

    int shape_count() const { return static_cast<int>(shapes_.size()); }
    int domain_count() const { return static_cast<int>(specs_.size()); }
    const std::vector<DomainSpec>& specs() const { return specs_; }
    const MultiDomainShape& shape(int n) const { return shapes_[n]; }
    MultiDomainShape& shape(int n) { return shapes_[n]; }

    /// Current particle count of a domain (identical across shapes).
    int current_count(int domain) const;
    bool at_target() const;

    InteractionPolicy interaction_policy(bool contour_coupling = true) const;
    double domain_diameter(int domain) const;  // max over shapes

    ShapePositions positions(int shape) const;
    Vec3 particle_position(int shape, int domain, int i) const;

    /// N × dM matrix, rows ordered by shape, columns domain-major then
    /// particle-minor then x,y,z.
    Eigen::MatrixXd shape_matrix() const;

    /// One particle per domain, placed at the point of the domain closest
    /// to the domain's centroid. The seed only breaks degenerate ties.
    void initialize_particles(std::uint64_t seed = 0);

    /// Double every domain still below target: each particle spawns a copy
    /// offset by epsilon along a deterministic tangent direction shared
    /// across shapes, so correspondence survives the split. Children take
    /// indices {2i, 2i+1}.
    void split_particles(double epsilon);
    void split_particles(const std::vector<double>& epsilon_per_domain);

    /// Bandwidth = distance to the min(k, M')-th nearest interacting
    /// particle, clamped to [1e-4, domain diameter].
    double estimate_sigma(int shape, int domain, int i, int k_neighbors,
                          const InteractionPolicy& policy) const;
    SigmaSet estimate_sigmas(int shape, int k_neighbors, const InteractionPolicy& policy) const;

    /// Project a vector onto the tangent space at a particle (plane for
    /// surface domains, line for contour domains).
    Vec3 tangent_project(int shape, int domain, int i, const Vec3& v) const;

    /// Move a surface particle by a world-space displacement and re-project
    /// onto the mesh. Returns the realized displacement.
    Vec3 move_surface_particle(int shape, int domain, int i, const Vec3& displacement);

    /// Slide a contour particle by a signed arc length (wrapping); the move
    /// is clamped so particles can never swap cyclic order. Returns the
    /// realized displacement in R³.
    Vec3 move_contour_particle(int shape, int domain, int i, double arc_displacement);

private:
    std::vector<DomainSpec> specs_;
    std::vector<MultiDomainShape> shapes_;
};

/// Deterministic unit vector sequence used for split offsets; identical
/// across shapes by construction.
Vec3 split_direction(int particle_index, int salt = 0);

}  // namespace ssm

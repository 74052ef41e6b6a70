#include "ssm/particle_system.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ssm/errors.hpp"

namespace ssm {

namespace {

double contour_diameter(const Contour& c) {
    if (c.points.empty()) return 0.0;
    Vec3 lo = c.points[0], hi = c.points[0];
    for (const Vec3& p : c.points) {
        for (int i = 0; i < 3; ++i) {
            lo[i] = std::min(lo[i], p[i]);
            hi[i] = std::max(hi[i], p[i]);
        }
    }
    return distance(lo, hi);
}

Vec3 contour_centroid(const Contour& c) {
    Vec3 sum;
    for (const Vec3& p : c.points) sum += p;
    return c.points.empty() ? Vec3{} : sum / static_cast<double>(c.points.size());
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

Vec3 split_direction(int particle_index, int salt) {
    std::uint64_t h = splitmix64(static_cast<std::uint64_t>(particle_index) * 2654435761ULL +
                                 static_cast<std::uint64_t>(salt) * 0x9e3779b9ULL + 17);
    double u = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0,1)
    std::uint64_t h2 = splitmix64(h);
    double v = static_cast<double>(h2 >> 11) * 0x1.0p-53;
    double z = 2.0 * u - 1.0;
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double phi = 2.0 * std::numbers::pi * v;
    return {r * std::cos(phi), r * std::sin(phi), z};
}

DomainGeometry DomainGeometry::make_surface(TriangleMesh mesh) {
    validate_mesh(mesh);
    if (mesh.face_count() == 0) throw Error("surface domain needs faces");
    DomainGeometry g;
    g.kind_ = DomainKind::surface;
    g.mesh_ = std::move(mesh);
    g.tree_ = std::make_shared<AabbTree>(g.mesh_);
    g.diameter_ = bounding_box_diagonal(g.mesh_);
    g.centroid_ = vertex_centroid(g.mesh_);
    return g;
}

DomainGeometry DomainGeometry::make_contour(Contour contour) {
    if (contour.point_count() < 3) throw Error("contour domain needs at least 3 points");
    DomainGeometry g;
    g.kind_ = DomainKind::contour;
    g.contour_ = std::move(contour);
    g.contour_.closed = true;
    g.cumulative_.resize(g.contour_.segment_count());
    double acc = 0.0;
    for (int s = 0; s < g.contour_.segment_count(); ++s) {
        g.cumulative_[s] = acc;
        auto [a, b] = g.contour_.segment(s);
        double len = distance(a, b);
        if (len <= 0.0) throw Error("contour has a zero-length segment");
        acc += len;
    }
    g.total_length_ = acc;
    g.diameter_ = contour_diameter(g.contour_);
    g.centroid_ = contour_centroid(g.contour_);
    return g;
}

double DomainGeometry::arc_position(const ContourParticle& p) const {
    auto [a, b] = contour_.segment(p.segment);
    return cumulative_[p.segment] + p.t * distance(a, b);
}

ContourParticle DomainGeometry::at_arc_position(double s) const {
    s = std::fmod(s, total_length_);
    if (s < 0.0) s += total_length_;
    // Last segment whose start is <= s.
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    int seg = static_cast<int>(it - cumulative_.begin()) - 1;
    auto [a, b] = contour_.segment(seg);
    double len = distance(a, b);
    double t = (s - cumulative_[seg]) / len;
    return {seg, std::clamp(t, 0.0, 1.0)};
}

Vec3 DomainGeometry::contour_point(const ContourParticle& p) const {
    return contour_.point_on_segment(p.segment, p.t);
}

Vec3 DomainGeometry::contour_tangent(const ContourParticle& p) const {
    auto [a, b] = contour_.segment(p.segment);
    return normalized(b - a);
}

ParticleSystem::ParticleSystem(std::vector<DomainSpec> specs, std::vector<MultiDomainShape> shapes)
    : specs_(std::move(specs)), shapes_(std::move(shapes)) {
    if (shapes_.empty()) throw Error("particle system needs at least one shape");
    for (const auto& spec : specs_) {
        if (!is_power_of_two(spec.particle_count))
            throw ConfigError("particle count for domain '" + spec.name +
                              "' must be a power of 2, got " +
                              std::to_string(spec.particle_count));
    }
    int contour_domains = 0;
    for (const auto& spec : specs_)
        if (spec.kind == DomainKind::contour) ++contour_domains;
    if (contour_domains > 1) throw Error("at most one contour domain is supported");
    for (auto& shape : shapes_) {
        if (shape.domains.size() != specs_.size())
            throw Error("shape '" + shape.id + "' has " + std::to_string(shape.domains.size()) +
                        " domains, expected " + std::to_string(specs_.size()));
        for (std::size_t d = 0; d < specs_.size(); ++d) {
            if (shape.domains[d].kind() != specs_[d].kind)
                throw Error("shape '" + shape.id + "' domain " + std::to_string(d) +
                            " kind mismatch");
        }
        if (shape.particles.empty()) {
            shape.particles.resize(specs_.size());
            for (std::size_t d = 0; d < specs_.size(); ++d)
                shape.particles[d].kind = specs_[d].kind;
        }
    }
    for (std::size_t d = 0; d < specs_.size(); ++d) {
        int count = shapes_[0].particles[d].count();
        for (const auto& shape : shapes_)
            if (shape.particles[d].count() != count)
                throw Error("inconsistent particle counts across shapes in domain '" +
                            specs_[d].name + "'");
    }
}

int ParticleSystem::current_count(int domain) const {
    return shapes_[0].particles[domain].count();
}

bool ParticleSystem::at_target() const {
    for (int d = 0; d < domain_count(); ++d)
        if (current_count(d) < specs_[d].particle_count) return false;
    return true;
}

InteractionPolicy ParticleSystem::interaction_policy(bool contour_coupling) const {
    InteractionPolicy policy;
    policy.contour_coupling = contour_coupling;
    for (int d = 0; d < domain_count(); ++d)
        if (specs_[d].kind == DomainKind::contour) policy.contour_domain = d;
    return policy;
}

double ParticleSystem::domain_diameter(int domain) const {
    double diam = 0.0;
    for (const auto& shape : shapes_) diam = std::max(diam, shape.domains[domain].diameter());
    return diam;
}

ShapePositions ParticleSystem::positions(int shape_index) const {
    const auto& shape = shapes_[shape_index];
    ShapePositions pos;
    pos.domains.resize(specs_.size());
    for (std::size_t d = 0; d < specs_.size(); ++d) {
        const auto& particles = shape.particles[d];
        auto& out = pos.domains[d];
        if (particles.kind == DomainKind::surface) {
            out.reserve(particles.surface.size());
            for (const auto& p : particles.surface) out.push_back(p.position);
        } else {
            out.reserve(particles.contour.size());
            for (const auto& p : particles.contour)
                out.push_back(shape.domains[d].contour_point(p));
        }
    }
    return pos;
}

Vec3 ParticleSystem::particle_position(int shape_index, int domain, int i) const {
    const auto& shape = shapes_[shape_index];
    const auto& particles = shape.particles[domain];
    if (particles.kind == DomainKind::surface) return particles.surface[i].position;
    return shape.domains[domain].contour_point(particles.contour[i]);
}

Eigen::MatrixXd ParticleSystem::shape_matrix() const {
    int total = 0;
    for (int d = 0; d < domain_count(); ++d) total += current_count(d);
    Eigen::MatrixXd matrix(shape_count(), 3 * total);
    for (int n = 0; n < shape_count(); ++n) {
        int col = 0;
        for (int d = 0; d < domain_count(); ++d) {
            for (int i = 0; i < current_count(d); ++i) {
                Vec3 p = particle_position(n, d, i);
                matrix(n, col++) = p.x;
                matrix(n, col++) = p.y;
                matrix(n, col++) = p.z;
            }
        }
    }
    return matrix;
}

void ParticleSystem::initialize_particles(std::uint64_t /*seed*/) {
    // Fully deterministic: the domain point nearest the domain centroid.
    // (Ties inside closest-point queries already break toward the lowest
    // face/segment index, so the seed is unused in practice.)
    for (auto& shape : shapes_) {
        for (std::size_t d = 0; d < specs_.size(); ++d) {
            auto& particles = shape.particles[d];
            const auto& geometry = shape.domains[d];
            if (specs_[d].kind == DomainKind::surface) {
                particles.surface.assign(1, geometry.tree().closest(geometry.centroid()).point);
                particles.contour.clear();
            } else {
                auto hit = closest_point_on_contour(geometry.contour(), geometry.centroid());
                particles.contour.assign(1, ContourParticle{hit.segment, hit.parameter});
                particles.surface.clear();
            }
            particles.kind = specs_[d].kind;
        }
    }
}

void ParticleSystem::split_particles(double epsilon) {
    split_particles(std::vector<double>(specs_.size(), epsilon));
}

void ParticleSystem::split_particles(const std::vector<double>& epsilon_per_domain) {
    for (int d = 0; d < domain_count(); ++d) {
        if (current_count(d) == 0)
            throw Error("cannot split an uninitialized domain; call initialize_particles first");
        if (current_count(d) >= specs_[d].particle_count) continue;  // at target: no-op
        double epsilon = epsilon_per_domain[d];
        for (auto& shape : shapes_) {
            auto& particles = shape.particles[d];
            const auto& geometry = shape.domains[d];
            if (particles.kind == DomainKind::surface) {
                std::vector<SurfacePoint> next;
                next.reserve(particles.surface.size() * 2);
                for (std::size_t i = 0; i < particles.surface.size(); ++i) {
                    const SurfacePoint& parent = particles.surface[i];
                    Vec3 normal = face_normal(geometry.mesh(), parent.face_index);
                    Vec3 dir;
                    for (int salt = 0; salt < 32; ++salt) {
                        Vec3 cand = split_direction(static_cast<int>(i), salt);
                        cand -= dot(cand, normal) * normal;
                        if (norm(cand) > 1e-6) {
                            dir = normalized(cand);
                            break;
                        }
                    }
                    SurfacePoint child =
                        geometry.tree().closest(parent.position + epsilon * dir).point;
                    next.push_back(parent);
                    next.push_back(child);
                }
                particles.surface.swap(next);
            } else {
                std::vector<ContourParticle> next;
                next.reserve(particles.contour.size() * 2);
                for (std::size_t i = 0; i < particles.contour.size(); ++i) {
                    const ContourParticle& parent = particles.contour[i];
                    double arc = geometry.arc_position(parent);
                    next.push_back(parent);
                    next.push_back(geometry.at_arc_position(arc + epsilon));
                }
                particles.contour.swap(next);
            }
        }
    }
}

double ParticleSystem::estimate_sigma(int shape_index, int domain, int i, int k_neighbors,
                                      const InteractionPolicy& policy) const {
    ShapePositions pos = positions(shape_index);
    const Vec3 q = pos.domains[domain][i];
    std::vector<double> dists;
    auto add_domain = [&](int d, int skip) {
        const auto& pts = pos.domains[d];
        for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
            if (k == skip) continue;
            dists.push_back(distance(q, pts[k]));
        }
    };
    add_domain(domain, i);
    if (policy.couples(domain)) add_domain(policy.contour_domain, -1);

    const double floor = 1e-4;
    const double ceiling = std::max(floor, shapes_[shape_index].domains[domain].diameter());
    if (dists.empty()) return ceiling;
    int k = std::clamp(k_neighbors, 1, static_cast<int>(dists.size()));
    std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
    return std::clamp(dists[k - 1], floor, ceiling);
}

SigmaSet ParticleSystem::estimate_sigmas(int shape_index, int k_neighbors,
                                         const InteractionPolicy& policy) const {
    SigmaSet sigmas(specs_.size());
    for (int d = 0; d < domain_count(); ++d) {
        sigmas[d].resize(current_count(d));
        for (int i = 0; i < current_count(d); ++i)
            sigmas[d][i] = estimate_sigma(shape_index, d, i, k_neighbors, policy);
    }
    return sigmas;
}

Vec3 ParticleSystem::tangent_project(int shape_index, int domain, int i, const Vec3& v) const {
    const auto& shape = shapes_[shape_index];
    const auto& particles = shape.particles[domain];
    if (particles.kind == DomainKind::surface) {
        Vec3 n = face_normal(shape.domains[domain].mesh(), particles.surface[i].face_index);
        return v - dot(v, n) * n;
    }
    Vec3 t = shape.domains[domain].contour_tangent(particles.contour[i]);
    return dot(v, t) * t;
}

Vec3 ParticleSystem::move_surface_particle(int shape_index, int domain, int i,
                                           const Vec3& displacement) {
    auto& shape = shapes_[shape_index];
    auto& particle = shape.particles[domain].surface[i];
    Vec3 before = particle.position;
    particle = shape.domains[domain].tree().closest(before + displacement).point;
    return particle.position - before;
}

Vec3 ParticleSystem::move_contour_particle(int shape_index, int domain, int i,
                                           double arc_displacement) {
    auto& shape = shapes_[shape_index];
    auto& particles = shape.particles[domain].contour;
    const auto& geometry = shape.domains[domain];
    const int count = static_cast<int>(particles.size());
    Vec3 before = geometry.contour_point(particles[i]);

    if (count > 1) {
        // Clamp to strictly less than half the gap to each cyclic neighbor:
        // contour particles must never swap order.
        const double total = geometry.total_length();
        double arc_i = geometry.arc_position(particles[i]);
        double gap_next = std::numeric_limits<double>::infinity();
        double gap_prev = std::numeric_limits<double>::infinity();
        for (int k = 0; k < count; ++k) {
            if (k == i) continue;
            double delta = geometry.arc_position(particles[k]) - arc_i;
            delta = std::fmod(delta, total);
            if (delta < 0.0) delta += total;
            if (delta > 0.0) gap_next = std::min(gap_next, delta);
            double back = total - delta;
            if (back > 0.0 && delta > 0.0) gap_prev = std::min(gap_prev, back);
            if (delta == 0.0) {  // coincident particle: forbid crossing entirely
                gap_next = 0.0;
                gap_prev = 0.0;
            }
        }
        double limit_fwd = 0.45 * gap_next;
        double limit_back = 0.45 * gap_prev;
        arc_displacement = std::clamp(arc_displacement, -limit_back, limit_fwd);
    }
    particles[i] = geometry.at_arc_position(geometry.arc_position(particles[i]) + arc_displacement);
    return geometry.contour_point(particles[i]) - before;
}

}  // namespace ssm

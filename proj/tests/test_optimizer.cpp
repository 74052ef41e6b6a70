#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "ssm/errors.hpp"
#include "ssm/optimizer.hpp"
#include "ssm/synthetic.hpp"

using namespace ssm;
using namespace ssm::testing;

namespace {

ParticleSystem single_sphere(int target) {
    std::vector<DomainSpec> specs = {{DomainKind::surface, target, "S"}};
    std::vector<MultiDomainShape> cohort(1);
    cohort[0].id = "s0";
    cohort[0].domains.push_back(DomainGeometry::make_surface(make_icosphere(3)));
    return ParticleSystem(std::move(specs), std::move(cohort));
}

// The standard 4-domain system over synth subjects, geometry straight from
// the generator (no grooming) so optimizer tests stay fast.
ParticleSystem boxes_system(int shapes, int surface_target, int contour_target) {
    SynthOptions options;
    options.count = 1;
    options.parameter_ranges = {{0.0, 0.0}};
    auto subject = synthesize_cohort(SynthKind::two_box, options)[0];

    std::vector<DomainSpec> specs = {{DomainKind::surface, surface_target, "A"},
                                     {DomainKind::surface, surface_target, "B"},
                                     {DomainKind::contour, contour_target, "C"}};
    Contour contour;
    contour.points = {{0, -0.5, -0.5}, {0, 0.5, -0.5}, {0, 0.5, 0.5}, {0, -0.5, 0.5}};
    std::vector<MultiDomainShape> cohort;
    for (int i = 0; i < shapes; ++i) {
        MultiDomainShape shape;
        shape.id = "s" + std::to_string(i);
        shape.domains.push_back(DomainGeometry::make_surface(subject.organ_a));
        shape.domains.push_back(DomainGeometry::make_surface(subject.organ_b));
        shape.domains.push_back(DomainGeometry::make_contour(contour));
        cohort.push_back(std::move(shape));
    }
    return ParticleSystem(std::move(specs), std::move(cohort));
}

double nearest_neighbor_cv(const ParticleSystem& system, int shape, int domain) {
    int count = system.current_count(domain);
    std::vector<double> nn(count, std::numeric_limits<double>::infinity());
    for (int i = 0; i < count; ++i)
        for (int j = 0; j < count; ++j) {
            if (i == j) continue;
            nn[i] = std::min(nn[i], distance(system.particle_position(shape, domain, i),
                                             system.particle_position(shape, domain, j)));
        }
    double mean = 0.0;
    for (double d : nn) mean += d;
    mean /= count;
    double ss = 0.0;
    for (double d : nn) ss += (d - mean) * (d - mean);
    return std::sqrt(ss / count) / mean;
}

}  // namespace

TEST_CASE("combined gradient with w=0 equals the sampling gradient") {
    ParticleSystem system = boxes_system(2, 4, 4);
    system.initialize_particles(0);
    while (!system.at_target()) system.split_particles(0.02);

    OptimizationParams params;
    params.cutoff_multiple = 0.0;  // exact
    auto policy = system.interaction_policy();
    for (int d = 0; d < 3; ++d) {
        SigmaSet sigmas = system.estimate_sigmas(0, params.sigma_neighbors, policy);
        Vec3 combined = combined_gradient(system, 0, d, 0, 0.0, params);
        Vec3 sampling = system.tangent_project(
            0, d, 0, sampling_gradient(system.positions(0), policy, d, 0, sigmas, 0.0));
        CHECK(norm(combined - sampling) < 1e-12);
    }
}

TEST_CASE("single-shape cohort: correspondence contributes nothing") {
    ParticleSystem system = single_sphere(4);
    system.initialize_particles(0);
    while (!system.at_target()) system.split_particles(0.02);
    OptimizationParams params;
    params.cutoff_multiple = 0.0;
    Vec3 with_weight = combined_gradient(system, 0, 0, 0, 1.0, params);
    Vec3 without = combined_gradient(system, 0, 0, 0, 0.0, params);
    CHECK(norm(with_weight - without) < 1e-15);
}

TEST_CASE("perturbed particle on one of identical shapes is pulled back") {
    ParticleSystem system = boxes_system(4, 4, 4);
    system.initialize_particles(0);
    while (!system.at_target()) system.split_particles(0.02);
    // Nudge one particle of shape 0 along the surface.
    Vec3 before = system.particle_position(0, 0, 0);
    Vec3 push = system.tangent_project(0, 0, 0, {0.0, 0.13, 0.07});
    system.move_surface_particle(0, 0, 0, push);
    Vec3 after = system.particle_position(0, 0, 0);
    REQUIRE(distance(after, before) > 0.05);

    // The correspondence part of the descent direction points back toward
    // the other shapes' (unperturbed) particle position.
    OptimizationParams params;
    params.cutoff_multiple = 0.0;
    Vec3 to_mean = before - after;
    Vec3 sampling_only = combined_gradient(system, 0, 0, 0, 0.0, params);
    Vec3 combined = combined_gradient(system, 0, 0, 0, 50.0, params);
    Vec3 correspondence_part = combined - sampling_only;
    CHECK(dot(correspondence_part, to_mean) > 0.0);
}

TEST_CASE("64 particles spread uniformly over a sphere (w = 0)") {
    ParticleSystem system = single_sphere(64);
    OptimizationParams params;
    params.relative_weighting = 0.0;
    params.max_iterations = 120;
    OptimizationResult result = optimize(system, params);
    CHECK(system.at_target());
    double cv = nearest_neighbor_cv(system, 0, 0);
    CHECK(cv < 0.15);

    // Monotonicity of the recorded energy within each level.
    for (std::size_t i = 1; i < result.log.size(); ++i) {
        if (result.log[i].level == result.log[i - 1].level)
            CHECK(result.log[i].energy <= result.log[i - 1].energy + 1e-9 * std::abs(result.log[i - 1].energy));
    }
}

TEST_CASE("identical cohort collapses to zero cross-shape variance") {
    ParticleSystem system = boxes_system(4, 8, 4);
    OptimizationParams params;
    params.max_iterations = 60;
    optimize(system, params);
    Eigen::MatrixXd matrix = system.shape_matrix();
    Eigen::MatrixXd centered = matrix.rowwise() - matrix.colwise().mean();
    double diag = 0.0;
    for (int d = 0; d < system.domain_count(); ++d)
        diag = std::max(diag, system.domain_diameter(d));
    CHECK(centered.cwiseAbs().maxCoeff() < 1e-3 * diag);
}

TEST_CASE("all particles stay on their domains through optimization") {
    ParticleSystem system = boxes_system(2, 8, 4);
    OptimizationParams params;
    params.max_iterations = 40;
    optimize(system, params);
    for (int n = 0; n < system.shape_count(); ++n) {
        const auto& shape = system.shape(n);
        for (int d = 0; d < system.domain_count(); ++d) {
            const auto& particles = shape.particles[d];
            if (particles.kind == DomainKind::surface) {
                for (const auto& p : particles.surface) {
                    Vec3 rebuilt =
                        point_from_barycentric(shape.domains[d].mesh(), p.face_index, p.barycentric);
                    CHECK(distance(rebuilt, p.position) < 1e-9);
                }
            }
        }
    }
}

TEST_CASE("relax writes a well-formed log and optimize reports final energy") {
    ParticleSystem system = boxes_system(2, 4, 2);
    OptimizationParams params;
    params.max_iterations = 25;
    std::vector<std::vector<int>> level_counts;
    OptimizationResult result =
        optimize(system, params, [&](const std::vector<int>& c) { level_counts.push_back(c); });
    CHECK(!result.log.empty());
    CHECK(std::isfinite(result.final_energy));
    // One callback per level, counts non-decreasing, last at target.
    REQUIRE(!level_counts.empty());
    CHECK(level_counts.back() == std::vector<int>{4, 4, 2});
}

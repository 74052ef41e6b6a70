#include "ssm/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "ssm/errors.hpp"

namespace ssm {

namespace {

int level_index_for(const ParticleSystem& system) {
    int max_count = 1;
    for (int d = 0; d < system.domain_count(); ++d)
        max_count = std::max(max_count, system.current_count(d));
    int level = 0;
    while ((1 << level) < max_count) ++level;
    return level;
}

struct ShapeState {
    std::vector<DomainParticles> particles;
};

ShapeState snapshot_shape(const MultiDomainShape& shape) { return {shape.particles}; }

void restore_shape(MultiDomainShape& shape, const ShapeState& state) {
    shape.particles = state.particles;
}

// Per-shape sweep: compute descent directions from the snapshot positions
// and apply the moves. Returns total displacement and particle count moved.
struct SweepResult {
    double total_displacement = 0.0;
    int moved = 0;
};

SweepResult sweep_shape(ParticleSystem& system, int n, const InteractionPolicy& policy,
                        const std::vector<ShapePositions>& positions,
                        const std::vector<SigmaSet>& sigmas,
                        const Eigen::MatrixXd* correspondence,  // N×dM or null
                        const std::vector<std::vector<double>>& step,
                        const OptimizationParams& params) {
    SweepResult result;
    const double w = params.relative_weighting;
    int column = 0;
    for (int d = 0; d < system.domain_count(); ++d) {
        const int count = system.current_count(d);
        auto grads = sampling_gradients(positions[n], policy, d, sigmas[n], params.cutoff_multiple);
        const bool contour = system.specs()[d].kind == DomainKind::contour;
        for (int i = 0; i < count; ++i) {
            Vec3 direction = grads[i];
            if (correspondence) {
                Vec3 corr{(*correspondence)(n, column + 3 * i),
                          (*correspondence)(n, column + 3 * i + 1),
                          (*correspondence)(n, column + 3 * i + 2)};
                direction -= w * corr;
            }
            if (!is_finite(direction))
                throw NumericalError("non-finite gradient at shape " + system.shape(n).id +
                                     ", domain " + system.specs()[d].name + ", particle " +
                                     std::to_string(i));
            direction = system.tangent_project(n, d, i, direction);

            double sigma = sigmas[n][d][i];
            Vec3 move = (step[d][i] * sigma * sigma) * direction;
            double limit = params.max_step_sigma * sigma;
            double len = norm(move);
            if (len > limit) move *= limit / len;

            Vec3 realized;
            if (contour) {
                const auto& shape = system.shape(n);
                Vec3 tangent = shape.domains[d].contour_tangent(shape.particles[d].contour[i]);
                realized = system.move_contour_particle(n, d, i, dot(move, tangent));
            } else {
                realized = system.move_surface_particle(n, d, i, move);
            }
            result.total_displacement += norm(realized);
            ++result.moved;
        }
        column += 3 * count;
    }
    return result;
}

}  // namespace

double regularization_alpha(const Eigen::MatrixXd& shape_matrix, const OptimizationParams& params,
                            int level_index) {
    const auto n = shape_matrix.rows();
    Eigen::MatrixXd centered = shape_matrix.rowwise() - shape_matrix.colwise().mean();
    double trace = centered.squaredNorm() / std::max<double>(1.0, static_cast<double>(n - 1));
    double alpha = params.alpha_scale * std::pow(0.5, level_index) * trace / std::max(1.0, static_cast<double>(n));
    return std::max(alpha, params.alpha_floor);
}

double system_energy(const ParticleSystem& system, const OptimizationParams& params,
                     const std::vector<ShapePositions>& positions,
                     const std::vector<SigmaSet>& sigmas, double alpha) {
    const InteractionPolicy policy = system.interaction_policy(params.contour_coupling);
    double energy = 0.0;
    for (int n = 0; n < system.shape_count(); ++n)
        energy -= sampling_entropy(positions[n], policy, sigmas[n], params.cutoff_multiple);
    if (params.relative_weighting > 0.0 && system.shape_count() >= 2)
        energy += params.relative_weighting * correspondence_entropy(system.shape_matrix(), alpha);
    return energy;
}

Vec3 combined_gradient(const ParticleSystem& system, int shape, int domain, int i,
                       double relative_weighting, const OptimizationParams& params) {
    const InteractionPolicy policy = system.interaction_policy(params.contour_coupling);
    SigmaSet sigmas = system.estimate_sigmas(shape, params.sigma_neighbors, policy);
    ShapePositions pos = system.positions(shape);
    Vec3 direction = sampling_gradient(pos, policy, domain, i, sigmas, params.cutoff_multiple);
    if (relative_weighting > 0.0 && system.shape_count() >= 2) {
        Eigen::MatrixXd matrix = system.shape_matrix();
        double alpha = regularization_alpha(matrix, params, level_index_for(system));
        Eigen::MatrixXd grad = correspondence_gradient(matrix, alpha);
        int column = 0;
        for (int d = 0; d < domain; ++d) column += 3 * system.current_count(d);
        column += 3 * i;
        direction -= relative_weighting *
                     Vec3{grad(shape, column), grad(shape, column + 1), grad(shape, column + 2)};
    }
    return system.tangent_project(shape, domain, i, direction);
}

OptimizationResult relax(ParticleSystem& system, const OptimizationParams& params,
                         int level_index) {
    OptimizationResult result;
    const InteractionPolicy policy = system.interaction_policy(params.contour_coupling);
    const int shapes = system.shape_count();
    const bool use_correspondence = params.relative_weighting > 0.0 && shapes >= 2;

    int level_count = 1;
    for (int d = 0; d < system.domain_count(); ++d)
        level_count = std::max(level_count, system.current_count(d));

    std::vector<double> diameters(system.domain_count());
    for (int d = 0; d < system.domain_count(); ++d)
        diameters[d] = std::max(1e-12, system.domain_diameter(d));
    double mean_diameter = 0.0;
    for (double diam : diameters) mean_diameter += diam;
    mean_diameter /= diameters.empty() ? 1.0 : static_cast<double>(diameters.size());

    // Per-particle dimensionless step factors, preconditioned by σ².
    std::vector<std::vector<double>> step(system.domain_count());
    for (int d = 0; d < system.domain_count(); ++d)
        step[d].assign(system.current_count(d), 1.0);

    int accepted = 0;
    for (int iteration = 0; iteration < params.max_iterations; ++iteration) {
        std::vector<ShapePositions> positions(shapes);
        std::vector<SigmaSet> sigmas(shapes);
        for (int n = 0; n < shapes; ++n) {
            positions[n] = system.positions(n);
            sigmas[n] = system.estimate_sigmas(n, params.sigma_neighbors, policy);
        }

        double alpha = 0.0;
        Eigen::MatrixXd correspondence;
        if (use_correspondence) {
            Eigen::MatrixXd matrix = system.shape_matrix();
            alpha = regularization_alpha(matrix, params, level_index);
            correspondence = correspondence_gradient(matrix, alpha);
        }
        const double energy_before = system_energy(system, params, positions, sigmas, alpha);

        std::vector<ShapeState> saved;
        saved.reserve(shapes);
        for (int n = 0; n < shapes; ++n) saved.push_back(snapshot_shape(system.shape(n)));

        SweepResult sweep;
        if (params.threads > 1 && shapes > 1) {
            std::vector<std::future<SweepResult>> futures;
            futures.reserve(shapes);
            for (int n = 0; n < shapes; ++n)
                futures.push_back(std::async(std::launch::async, [&, n] {
                    return sweep_shape(system, n, policy, positions, sigmas,
                                       use_correspondence ? &correspondence : nullptr, step,
                                       params);
                }));
            for (auto& f : futures) {
                SweepResult r = f.get();
                sweep.total_displacement += r.total_displacement;
                sweep.moved += r.moved;
            }
        } else {
            for (int n = 0; n < shapes; ++n) {
                SweepResult r = sweep_shape(system, n, policy, positions, sigmas,
                                            use_correspondence ? &correspondence : nullptr, step,
                                            params);
                sweep.total_displacement += r.total_displacement;
                sweep.moved += r.moved;
            }
        }

        std::vector<ShapePositions> new_positions(shapes);
        for (int n = 0; n < shapes; ++n) new_positions[n] = system.positions(n);
        const double energy_after = system_energy(system, params, new_positions, sigmas, alpha);

        const double tolerance_band = std::abs(energy_before) * 1e-12 + 1e-15;
        if (energy_after <= energy_before + tolerance_band) {
            for (auto& per_domain : step)
                for (double& s : per_domain) s = std::min(s * 1.05, 1e3);
            double mean_disp =
                sweep.moved > 0 ? sweep.total_displacement / sweep.moved / mean_diameter : 0.0;
            ++accepted;
            result.log.push_back({level_count, accepted, energy_after, mean_disp});
            result.final_energy = energy_after;
            if (mean_disp < params.tolerance) break;
        } else {
            for (int n = 0; n < shapes; ++n) restore_shape(system.shape(n), saved[n]);
            bool exhausted = true;
            for (auto& per_domain : step)
                for (double& s : per_domain) {
                    s *= 0.5;
                    if (s > 1e-10) exhausted = false;
                }
            if (exhausted) break;
        }
    }

    if (result.log.empty()) {
        // Nothing moved (e.g. single particles with no interactions): report
        // the current energy once so logs stay well-formed.
        std::vector<ShapePositions> positions(shapes);
        std::vector<SigmaSet> sigmas(shapes);
        for (int n = 0; n < shapes; ++n) {
            positions[n] = system.positions(n);
            sigmas[n] = system.estimate_sigmas(n, params.sigma_neighbors, policy);
        }
        double alpha = use_correspondence
                           ? regularization_alpha(system.shape_matrix(), params, level_index)
                           : 0.0;
        result.final_energy = system_energy(system, params, positions, sigmas, alpha);
        result.log.push_back({level_count, 0, result.final_energy, 0.0});
    }
    return result;
}

OptimizationResult optimize(ParticleSystem& system, const OptimizationParams& params,
                            const LevelCallback& on_level, bool resume) {
    for (int d = 0; d < system.domain_count(); ++d) {
        if (!is_power_of_two(system.specs()[d].particle_count))
            throw ConfigError("particle target for domain '" + system.specs()[d].name +
                              "' is not a power of 2");
    }

    OptimizationResult result;
    bool fresh = system.current_count(0) == 0;
    if (fresh) system.initialize_particles(params.seed);

    auto run_level = [&]() {
        int level = level_index_for(system);
        OptimizationResult level_result = relax(system, params, level);
        result.log.insert(result.log.end(), level_result.log.begin(), level_result.log.end());
        result.final_energy = level_result.final_energy;
        if (on_level) {
            std::vector<int> counts(system.domain_count());
            for (int d = 0; d < system.domain_count(); ++d) counts[d] = system.current_count(d);
            on_level(counts);
        }
    };

    if (!resume || fresh) run_level();
    while (!system.at_target()) {
        std::vector<double> epsilon(system.domain_count());
        for (int d = 0; d < system.domain_count(); ++d)
            epsilon[d] = params.split_epsilon_rel * std::max(1e-9, system.domain_diameter(d));
        system.split_particles(epsilon);
        run_level();
    }
    return result;
}

}  // namespace ssm

// Split-then-optimize ladder: relax at each particle-count level with
// Jacobi sweeps of the combined (correspondence + sampling) descent
// direction, accept a sweep only when the recorded energy does not
// increase, then double the particle counts until every domain reaches
// its target.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ssm/particle_system.hpp"

namespace ssm {

struct OptimizationParams {
    double relative_weighting = 1.0;  // w: correspondence term weight
    double alpha_scale = 1e-2;        // α = alpha_scale · 2^{-level} · trace/N
    double alpha_floor = 1e-6;
    int max_iterations = 200;         // per level
    double tolerance = 1e-4;          // mean displacement / domain diameter
    double cutoff_multiple = 4.0;     // kernel truncation in σ; <= 0 disables
    int sigma_neighbors = 6;
    double split_epsilon_rel = 1e-3;  // split offset as a fraction of domain diameter
    double max_step_sigma = 0.5;      // per-move clip, in units of σ
    bool contour_coupling = true;     // false reproduces the uncoupled objective
    std::uint64_t seed = 0;
    int threads = 1;
};

struct IterationRecord {
    int level = 0;      // max particle count at this level
    int iteration = 0;  // accepted iteration index within the level
    double energy = 0.0;
    double mean_displacement = 0.0;
};

struct OptimizationResult {
    double final_energy = 0.0;
    std::vector<IterationRecord> log;
};

/// Called after each level finishes relaxing; the argument is the current
/// per-domain particle count vector. Used for checkpointing.
using LevelCallback = std::function<void(const std::vector<int>&)>;

/// Q = w·H(Z) − Σ_n Σ_j H_j at the given bandwidths. The correspondence
/// term is skipped for single-shape cohorts or w = 0.
double system_energy(const ParticleSystem& system, const OptimizationParams& params,
                     const std::vector<ShapePositions>& positions,
                     const std::vector<SigmaSet>& sigmas, double alpha);

/// Regularization for the current level, α = max(scale·2^{-level}·tr/N, floor).
double regularization_alpha(const Eigen::MatrixXd& shape_matrix, const OptimizationParams& params,
                            int level_index);

/// Descent direction (already tangent-projected) for one particle,
/// computed from scratch; the optimizer itself uses the batched
/// equivalent. w = 0 reduces to the sampling gradient alone.
Vec3 combined_gradient(const ParticleSystem& system, int shape, int domain, int i,
                       double relative_weighting, const OptimizationParams& params = {});

/// Relax at the current particle counts (no splitting).
OptimizationResult relax(ParticleSystem& system, const OptimizationParams& params,
                         int level_index);

/// Full ladder. When `resume` is true the system is expected to carry a
/// checkpointed configuration whose level has already been relaxed, so
/// optimization continues with the next split.
OptimizationResult optimize(ParticleSystem& system, const OptimizationParams& params,
                            const LevelCallback& on_level = {}, bool resume = false);

}  // namespace ssm

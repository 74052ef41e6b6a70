// Batch pipeline behind the CLI: project configuration, grooming
// (center, align, extract shared boundaries), particle optimization with
// per-level checkpointing, statistical analysis outputs, and synthetic
// cohort generation. All functions are deterministic for a fixed config.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ssm/mesh.hpp"
#include "ssm/optimizer.hpp"
#include "ssm/synthetic.hpp"

namespace ssm {

struct SubjectConfig {
    std::string id;
    std::filesystem::path organ_a;
    std::filesystem::path organ_b;
    std::string group;
};

struct GroomConfig {
    double remesh_edge_length = 0.0;  // required
    int remesh_iterations = 10;
    int smooth_iterations = 5;
    double smooth_step = 0.5;
    double shared_threshold = 0.0;  // required; the paper leaves it to tuning
    std::string reference_subject = "auto";
};

struct OptimizeConfig {
    // Particle targets per domain, in pipeline order.
    int particles_remainder_a = 32;
    int particles_shared = 16;
    int particles_remainder_b = 32;
    int particles_contour = 8;
    OptimizationParams params;
};

struct AnalyzeConfig {
    int trials = 1000;
    int subsample = 0;  // 0: min(group sizes)
    double alpha = 0.01;
    std::uint64_t seed = 0;
    std::string group_a;  // scored -1; empty: lexicographically first label
    std::string group_b;  // scored +1
    int modes = 4;
};

struct ProjectConfig {
    std::filesystem::path output_dir;
    std::vector<SubjectConfig> subjects;
    GroomConfig groom;
    OptimizeConfig optimize;
    AnalyzeConfig analyze;
    int threads = 1;
};

/// Parse and validate a JSON project file. Violations (missing inputs,
/// non-power-of-two counts, duplicate ids, ...) throw ConfigError.
ProjectConfig load_project_config(const std::filesystem::path& path);
void save_project_config(const ProjectConfig& config, const std::filesystem::path& path);

// Domain names in pipeline order; also the file suffixes.
const std::vector<std::string>& pipeline_domain_names();  // {"Ar", "M", "Br", "C"}

struct GroomOutcome {
    int failed = 0;
    std::vector<std::string> errors;  // one entry per failed subject
};

/// Center every subject on its organ-A centroid, rigidly align organ A to
/// the reference subject's organ A (transform applied to both organs),
/// extract the shared boundary, and write the four geometry files plus a
/// transform manifest. Subject failures are recorded, not fatal.
GroomOutcome cmd_groom(const ProjectConfig& config);

struct OptimizeOutcome {
    double final_energy = 0.0;
    bool resumed = false;
};

/// Build the particle system from groomed files and run the optimization
/// ladder, checkpointing after each completed level; re-running resumes
/// from the last completed split level when the config is unchanged.
OptimizeOutcome cmd_optimize(const ProjectConfig& config);

/// PCA, mode walks, group differences, scores and the imbalance test,
/// written as CSVs plus .particles/mesh exports for viewing.
void cmd_analyze(const ProjectConfig& config);

struct SynthCliOptions {
    SynthKind kind = SynthKind::two_box;
    SynthOptions synth;
    std::filesystem::path output_dir;
    bool write_config = true;  // also emit a ready-to-run project config
};

void cmd_synth(const SynthCliOptions& options);

}  // namespace ssm

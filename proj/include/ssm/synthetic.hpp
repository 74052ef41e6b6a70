// Deterministic synthetic cohorts of two adjoining watertight solids
// sharing a wall: boxes sharing a rectangle, dome pairs sharing a flat
// disk, and dome pairs whose shared wall bulges with a curvature
// parameter. Stand-ins for real multi-organ data in tests and demos.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssm/mesh.hpp"

namespace ssm {

enum class SynthKind { two_box, two_ellipsoid, curved_septum };

SynthKind synth_kind_from_string(const std::string& name);
std::string to_string(SynthKind kind);

struct SynthRange {
    double min = 0.0;
    double max = 0.0;
};

struct SynthOptions {
    int count = 4;
    std::uint64_t seed = 0;
    // Subject i draws its parameter uniformly from ranges[i % ranges.size()];
    // several disjoint ranges give gapped two-group cohorts.
    std::vector<SynthRange> parameter_ranges{{-0.5, 0.5}};
    int rings = 6;       // radial resolution of disk-based kinds
    int segments = 18;   // angular resolution
};

struct SynthSubject {
    std::string id;
    std::string group;  // "neg" for parameter < 0, else "pos"
    double parameter = 0.0;
    TriangleMesh organ_a;
    TriangleMesh organ_b;
};

/// The two organ meshes of every subject are watertight and share the
/// wall surface exactly (bitwise-equal vertex positions on the wall).
std::vector<SynthSubject> synthesize_cohort(SynthKind kind, const SynthOptions& options);

/// Single subject for a given parameter value (used by tests that need
/// exact parameter control).
SynthSubject synthesize_subject(SynthKind kind, double parameter, const SynthOptions& options,
                                int index = 0);

}  // namespace ssm

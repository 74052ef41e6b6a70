#include "ssm/synthetic.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "ssm/errors.hpp"

namespace ssm {

SynthKind synth_kind_from_string(const std::string& name) {
    if (name == "two-box") return SynthKind::two_box;
    if (name == "two-ellipsoid") return SynthKind::two_ellipsoid;
    if (name == "curved-septum") return SynthKind::curved_septum;
    throw ConfigError("unknown synthetic kind '" + name +
                      "' (expected two-box, two-ellipsoid or curved-septum)");
}

std::string to_string(SynthKind kind) {
    switch (kind) {
        case SynthKind::two_box: return "two-box";
        case SynthKind::two_ellipsoid: return "two-ellipsoid";
        case SynthKind::curved_septum: return "curved-septum";
    }
    return "?";
}

namespace {

TriangleMesh box(const Vec3& lo, const Vec3& hi) {
    TriangleMesh m;
    m.vertices = {{lo.x, lo.y, lo.z}, {hi.x, lo.y, lo.z}, {hi.x, hi.y, lo.z}, {lo.x, hi.y, lo.z},
                  {lo.x, lo.y, hi.z}, {hi.x, lo.y, hi.z}, {hi.x, hi.y, hi.z}, {lo.x, hi.y, hi.z}};
    m.faces = {{0, 2, 1}, {0, 3, 2},   // z = lo (outward -z)
               {4, 5, 6}, {4, 6, 7},   // z = hi (+z)
               {0, 1, 5}, {0, 5, 4},   // y = lo (-y)
               {2, 3, 7}, {2, 7, 6},   // y = hi (+y)
               {0, 4, 7}, {0, 7, 3},   // x = lo (-x)
               {1, 2, 6}, {1, 6, 5}};  // x = hi (+x)
    return m;
}

using HeightFn = std::function<double(double)>;  // x as a function of radius

// Closed solid bounded by two height fields over a disk of the given
// radius: the far surface (outward +x) and near surface (outward -x) meet
// exactly at the rim, where both height functions must vanish.
TriangleMesh closed_disk_pair(double radius, int rings, int segments, const HeightFn& x_near,
                              const HeightFn& x_far) {
    TriangleMesh m;
    auto ring_radius = [&](int i) { return radius * i / rings; };
    auto angle = [&](int j) { return 2.0 * std::numbers::pi * j / segments; };

    // Far surface vertices: center + rings 1..R. Ring R is the shared rim.
    int far_center = 0;
    m.vertices.push_back({x_far(0.0), 0.0, 0.0});
    auto far_index = [&](int i, int j) { return 1 + (i - 1) * segments + (j % segments); };
    for (int i = 1; i <= rings; ++i) {
        double r = ring_radius(i);
        for (int j = 0; j < segments; ++j)
            m.vertices.push_back({x_far(r), r * std::cos(angle(j)), r * std::sin(angle(j))});
    }
    // Near surface vertices: center + rings 1..R-1; rim reuses the far rim.
    int near_center = m.vertex_count();
    m.vertices.push_back({x_near(0.0), 0.0, 0.0});
    auto near_index = [&](int i, int j) {
        if (i == rings) return far_index(rings, j);
        return near_center + 1 + (i - 1) * segments + (j % segments);
    };
    for (int i = 1; i < rings; ++i) {
        double r = ring_radius(i);
        for (int j = 0; j < segments; ++j)
            m.vertices.push_back({x_near(r), r * std::cos(angle(j)), r * std::sin(angle(j))});
    }

    // Far surface: CCW seen from +x (outward +x normals).
    for (int j = 0; j < segments; ++j)
        m.faces.push_back({far_center, far_index(1, j), far_index(1, j + 1)});
    for (int i = 1; i < rings; ++i) {
        for (int j = 0; j < segments; ++j) {
            int a = far_index(i, j), b = far_index(i, j + 1);
            int c = far_index(i + 1, j + 1), d = far_index(i + 1, j);
            m.faces.push_back({a, d, c});
            m.faces.push_back({a, c, b});
        }
    }
    // Near surface: reversed winding (outward -x normals).
    for (int j = 0; j < segments; ++j)
        m.faces.push_back({near_center, near_index(1, j + 1), near_index(1, j)});
    for (int i = 1; i < rings; ++i) {
        for (int j = 0; j < segments; ++j) {
            int a = near_index(i, j), b = near_index(i, j + 1);
            int c = near_index(i + 1, j + 1), d = near_index(i + 1, j);
            m.faces.push_back({a, b, c});
            m.faces.push_back({a, c, d});
        }
    }
    return m;
}

}  // namespace

SynthSubject synthesize_subject(SynthKind kind, double parameter, const SynthOptions& options,
                                int index) {
    SynthSubject subject;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%02d", index);
    subject.id = buf;
    subject.parameter = parameter;
    subject.group = parameter < 0.0 ? "neg" : "pos";

    switch (kind) {
        case SynthKind::two_box: {
            double half = 0.5 * (1.0 + 0.3 * parameter);  // wall size varies
            subject.organ_a = box({-0.8, -half, -half}, {0.0, half, half});
            subject.organ_b = box({0.0, -half, -half}, {0.7, half, half});
            break;
        }
        case SynthKind::two_ellipsoid: {
            double depth_b = 0.8 * (1.0 + 0.4 * parameter);  // cap size varies, wall flat
            auto flat = [](double) { return 0.0; };
            auto cap_a = [](double r) { return -0.8 * std::sqrt(std::max(0.0, 1.0 - r * r)); };
            auto cap_b = [depth_b](double r) {
                return depth_b * std::sqrt(std::max(0.0, 1.0 - r * r));
            };
            subject.organ_a =
                closed_disk_pair(1.0, options.rings, options.segments, cap_a, flat);
            subject.organ_b =
                closed_disk_pair(1.0, options.rings, options.segments, flat, cap_b);
            break;
        }
        case SynthKind::curved_septum: {
            double curvature = parameter;  // wall apex offset; 0 = flat wall
            auto wall = [curvature](double r) { return curvature * (1.0 - r * r); };
            auto cap_a = [](double r) { return -0.8 * (1.0 - r * r); };
            auto cap_b = [](double r) { return 0.8 * (1.0 - r * r); };
            subject.organ_a =
                closed_disk_pair(1.0, options.rings, options.segments, cap_a, wall);
            subject.organ_b =
                closed_disk_pair(1.0, options.rings, options.segments, wall, cap_b);
            break;
        }
    }
    return subject;
}

std::vector<SynthSubject> synthesize_cohort(SynthKind kind, const SynthOptions& options) {
    if (options.count < 1) throw ConfigError("cohort size must be at least 1");
    if (options.parameter_ranges.empty()) throw ConfigError("need at least one parameter range");
    for (const auto& range : options.parameter_ranges)
        if (!(range.min <= range.max)) throw ConfigError("parameter range has min > max");
    if (kind == SynthKind::curved_septum) {
        for (const auto& range : options.parameter_ranges)
            if (range.min < -0.75 || range.max > 0.75)
                throw ConfigError("curvature parameter must stay within [-0.75, 0.75] so the "
                                  "wall cannot pierce the caps");
    }

    std::mt19937_64 rng(options.seed);
    auto uniform = [&](double lo, double hi) {
        // Fixed 53-bit draw: identical streams on every platform.
        double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    };

    std::vector<SynthSubject> cohort;
    cohort.reserve(options.count);
    for (int i = 0; i < options.count; ++i) {
        const auto& range = options.parameter_ranges[i % options.parameter_ranges.size()];
        double parameter = uniform(range.min, range.max);
        cohort.push_back(synthesize_subject(kind, parameter, options, i));
    }
    return cohort;
}

}  // namespace ssm

#include "ssm/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <iostream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

#include "ssm/align.hpp"
#include "ssm/errors.hpp"
#include "ssm/io.hpp"
#include "ssm/shape_stats.hpp"
#include "ssm/shared_boundary.hpp"

namespace ssm {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

const std::vector<std::string>& pipeline_domain_names() {
    static const std::vector<std::string> names = {"Ar", "M", "Br", "C"};
    return names;
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::ofstream open_output(const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

fs::path groomed_dir(const ProjectConfig& c) { return c.output_dir / "groomed"; }
fs::path particles_dir(const ProjectConfig& c) { return c.output_dir / "particles"; }
fs::path analysis_dir(const ProjectConfig& c) { return c.output_dir / "analysis"; }

fs::path groomed_path(const ProjectConfig& c, const std::string& id, const std::string& dom) {
    return groomed_dir(c) / (id + "_" + dom + (dom == "C" ? ".contour" : ".obj"));
}

fs::path particles_path(const ProjectConfig& c, const std::string& id, const std::string& dom) {
    return particles_dir(c) / (id + "_" + dom + ".particles");
}

std::vector<int> particle_targets(const ProjectConfig& c) {
    return {c.optimize.particles_remainder_a, c.optimize.particles_shared,
            c.optimize.particles_remainder_b, c.optimize.particles_contour};
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

ProjectConfig load_project_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }

    ProjectConfig config;
    try {
        config.output_dir = j.value("output_dir", std::string("output"));
        config.threads = j.value("threads", 1);
        if (!j.contains("subjects") || !j["subjects"].is_array() || j["subjects"].empty())
            throw ConfigError("config needs a non-empty 'subjects' array");
        std::set<std::string> ids;
        for (const auto& s : j["subjects"]) {
            SubjectConfig subject;
            subject.id = s.at("id").get<std::string>();
            subject.organ_a = s.at("organ_a").get<std::string>();
            subject.organ_b = s.at("organ_b").get<std::string>();
            subject.group = s.value("group", std::string("default"));
            if (!ids.insert(subject.id).second)
                throw ConfigError("duplicate subject id '" + subject.id + "'");
            config.subjects.push_back(std::move(subject));
        }

        const auto g = j.value("groom", ordered_json::object());
        config.groom.remesh_edge_length = g.value("remesh_edge_length", 0.0);
        config.groom.remesh_iterations = g.value("remesh_iterations", 10);
        config.groom.smooth_iterations = g.value("smooth_iterations", 5);
        config.groom.smooth_step = g.value("smooth_step", 0.5);
        config.groom.shared_threshold = g.value("shared_threshold", 0.0);
        config.groom.reference_subject = g.value("reference_subject", std::string("auto"));

        const auto o = j.value("optimize", ordered_json::object());
        const auto p = o.value("particles", ordered_json::object());
        config.optimize.particles_remainder_a = p.value("remainder_a", 32);
        config.optimize.particles_shared = p.value("shared", 16);
        config.optimize.particles_remainder_b = p.value("remainder_b", 32);
        config.optimize.particles_contour = p.value("contour", 8);
        auto& params = config.optimize.params;
        params.relative_weighting = o.value("relative_weighting", 1.0);
        params.alpha_scale = o.value("alpha_scale", 1e-2);
        params.alpha_floor = o.value("alpha_floor", 1e-6);
        params.max_iterations = o.value("max_iterations", 200);
        params.tolerance = o.value("tolerance", 1e-4);
        params.cutoff_multiple = o.value("cutoff_multiple", 4.0);
        params.sigma_neighbors = o.value("sigma_neighbors", 6);
        params.split_epsilon_rel = o.value("split_epsilon_rel", 1e-3);
        params.max_step_sigma = o.value("max_step_sigma", 0.5);
        params.contour_coupling = o.value("contour_coupling", true);
        params.seed = o.value("seed", 0ULL);

        const auto a = j.value("analyze", ordered_json::object());
        config.analyze.trials = a.value("trials", 1000);
        config.analyze.subsample = a.value("subsample", 0);
        config.analyze.alpha = a.value("alpha", 0.01);
        config.analyze.seed = a.value("seed", 0ULL);
        config.analyze.group_a = a.value("group_a", std::string());
        config.analyze.group_b = a.value("group_b", std::string());
        config.analyze.modes = a.value("modes", 4);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }

    // Referenced inputs must exist up front.
    fs::path base = path.parent_path();
    for (auto& subject : config.subjects) {
        for (fs::path* mesh_path : {&subject.organ_a, &subject.organ_b}) {
            if (mesh_path->is_relative()) *mesh_path = base / *mesh_path;
            if (!fs::exists(*mesh_path))
                throw ConfigError("subject '" + subject.id + "': missing input file " +
                                  mesh_path->string());
        }
    }
    if (config.output_dir.is_relative()) config.output_dir = base / config.output_dir;

    for (int count : particle_targets(config)) {
        if (!is_power_of_two(count))
            throw ConfigError("particle counts must be powers of 2, got " + std::to_string(count));
    }
    if (config.groom.remesh_edge_length <= 0.0)
        throw ConfigError("groom.remesh_edge_length must be set and positive");
    if (config.groom.shared_threshold <= 0.0)
        throw ConfigError("groom.shared_threshold must be set and positive "
                          "(tune it from the distance histogram)");
    if (config.threads < 1) throw ConfigError("threads must be >= 1");
    return config;
}

void save_project_config(const ProjectConfig& config, const fs::path& path) {
    ordered_json j;
    j["output_dir"] = config.output_dir.string();
    j["threads"] = config.threads;
    j["subjects"] = ordered_json::array();
    for (const auto& s : config.subjects) {
        j["subjects"].push_back({{"id", s.id},
                                 {"organ_a", s.organ_a.string()},
                                 {"organ_b", s.organ_b.string()},
                                 {"group", s.group}});
    }
    j["groom"] = {{"remesh_edge_length", config.groom.remesh_edge_length},
                  {"remesh_iterations", config.groom.remesh_iterations},
                  {"smooth_iterations", config.groom.smooth_iterations},
                  {"smooth_step", config.groom.smooth_step},
                  {"shared_threshold", config.groom.shared_threshold},
                  {"reference_subject", config.groom.reference_subject}};
    const auto& params = config.optimize.params;
    j["optimize"] = {{"particles",
                      {{"remainder_a", config.optimize.particles_remainder_a},
                       {"shared", config.optimize.particles_shared},
                       {"remainder_b", config.optimize.particles_remainder_b},
                       {"contour", config.optimize.particles_contour}}},
                     {"relative_weighting", params.relative_weighting},
                     {"alpha_scale", params.alpha_scale},
                     {"alpha_floor", params.alpha_floor},
                     {"max_iterations", params.max_iterations},
                     {"tolerance", params.tolerance},
                     {"cutoff_multiple", params.cutoff_multiple},
                     {"sigma_neighbors", params.sigma_neighbors},
                     {"split_epsilon_rel", params.split_epsilon_rel},
                     {"max_step_sigma", params.max_step_sigma},
                     {"contour_coupling", params.contour_coupling},
                     {"seed", params.seed}};
    j["analyze"] = {{"trials", config.analyze.trials},   {"subsample", config.analyze.subsample},
                    {"alpha", config.analyze.alpha},     {"seed", config.analyze.seed},
                    {"group_a", config.analyze.group_a}, {"group_b", config.analyze.group_b},
                    {"modes", config.analyze.modes}};
    auto out = open_output(path);
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// groom

namespace {

struct GroomedSubject {
    RigidTransform transform;
    bool align_converged = true;
    double align_mean_distance = 0.0;
};

}  // namespace

GroomOutcome cmd_groom(const ProjectConfig& config) {
    const int n = static_cast<int>(config.subjects.size());

    std::vector<TriangleMesh> organ_a(n), organ_b(n);
    for (int i = 0; i < n; ++i) {
        organ_a[i] = load_mesh(config.subjects[i].organ_a);
        organ_b[i] = load_mesh(config.subjects[i].organ_b);
    }

    // Reference: configured id, or the subject whose organ-A centroid is
    // nearest the cohort centroid.
    int reference = -1;
    if (config.groom.reference_subject != "auto") {
        for (int i = 0; i < n; ++i)
            if (config.subjects[i].id == config.groom.reference_subject) reference = i;
        if (reference < 0)
            throw ConfigError("reference subject '" + config.groom.reference_subject +
                              "' is not in the subject list");
    } else {
        Vec3 cohort_centroid;
        std::vector<Vec3> centroids(n);
        for (int i = 0; i < n; ++i) {
            centroids[i] = vertex_centroid(organ_a[i]);
            cohort_centroid += centroids[i];
        }
        cohort_centroid /= static_cast<double>(n);
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            double d = distance(centroids[i], cohort_centroid);
            if (d < best) {
                best = d;
                reference = i;
            }
        }
    }

    // Center every subject on its organ-A centroid; the same translation is
    // applied to organ B so the relative pose (and the shared wall) survives.
    std::vector<RigidTransform> centering(n);
    for (int i = 0; i < n; ++i) {
        centering[i] = RigidTransform::translate(-vertex_centroid(organ_a[i]));
        organ_a[i] = apply_transform(organ_a[i], centering[i]);
        organ_b[i] = apply_transform(organ_b[i], centering[i]);
    }

    GroomOutcome outcome;
    std::vector<GroomedSubject> results(n);
    std::vector<std::string> subject_errors(n);

    auto groom_one = [&](int i) {
        GroomedSubject& g = results[i];
        RigidTransform icp = RigidTransform::identity();
        if (i != reference) {
            // Alignment transforms are computed from organ A only.
            AlignResult align = rigid_align(organ_a[i], organ_a[reference]);
            icp = align.transform;
            g.align_converged = align.converged;
            g.align_mean_distance = align.mean_distance;
        }
        g.transform = icp.compose(centering[i]);
        TriangleMesh a = apply_transform(organ_a[i], icp);
        TriangleMesh b = apply_transform(organ_b[i], icp);

        SharedBoundaryOptions options;
        options.threshold = config.groom.shared_threshold;
        options.remesh_edge_length = config.groom.remesh_edge_length;
        options.remesh_iterations = config.groom.remesh_iterations;
        options.smooth_iterations = config.groom.smooth_iterations;
        options.smooth_step = config.groom.smooth_step;
        SharedBoundaryDiagnostics diagnostics;
        SharedBoundaryDecomposition parts;
        try {
            parts = extract_shared_boundary(a, b, options, &diagnostics);
        } catch (const NoSharedBoundaryError& e) {
            auto hist = vertex_distance_histogram(b, a);
            std::ostringstream msg;
            msg << e.what() << "\n  vertex-to-other-mesh distance histogram (tune the threshold):";
            for (std::size_t k = 0; k < hist.upper_bounds.size(); ++k)
                if (hist.counts[k] > 0)
                    msg << "\n    <= " << hist.upper_bounds[k] << ": " << hist.counts[k];
            throw NoSharedBoundaryError(msg.str(), e.min_distance);
        }
        for (const auto& warning : diagnostics.warnings)
            std::cerr << "warning: subject " << config.subjects[i].id << ": " << warning << "\n";

        const auto& id = config.subjects[i].id;
        save_mesh(parts.remainder_a, groomed_path(config, id, "Ar"));
        save_mesh(parts.shared, groomed_path(config, id, "M"));
        save_mesh(parts.remainder_b, groomed_path(config, id, "Br"));
        save_contour(parts.contour, groomed_path(config, id, "C"));
    };

    fs::create_directories(groomed_dir(config));
    auto run_subject = [&](int i) {
        try {
            groom_one(i);
        } catch (const std::exception& e) {
            subject_errors[i] = e.what();
        }
    };
    if (config.threads > 1) {
        std::vector<std::future<void>> futures;
        for (int i = 0; i < n; ++i)
            futures.push_back(std::async(std::launch::async, run_subject, i));
        for (auto& f : futures) f.get();
    } else {
        for (int i = 0; i < n; ++i) run_subject(i);
    }

    for (int i = 0; i < n; ++i) {
        if (!subject_errors[i].empty()) {
            ++outcome.failed;
            outcome.errors.push_back("subject " + config.subjects[i].id + ": " +
                                     subject_errors[i]);
        }
    }

    ordered_json manifest;
    manifest["reference_subject"] = config.subjects[reference].id;
    manifest["subjects"] = ordered_json::array();
    for (int i = 0; i < n; ++i) {
        ordered_json entry;
        entry["id"] = config.subjects[i].id;
        entry["group"] = config.subjects[i].group;
        entry["failed"] = !subject_errors[i].empty();
        ordered_json rotation = ordered_json::array();
        for (int r = 0; r < 3; ++r)
            rotation.push_back({results[i].transform.rotation[r][0],
                                results[i].transform.rotation[r][1],
                                results[i].transform.rotation[r][2]});
        entry["rotation"] = rotation;
        entry["translation"] = {results[i].transform.translation.x,
                                results[i].transform.translation.y,
                                results[i].transform.translation.z};
        entry["align_converged"] = results[i].align_converged;
        entry["align_mean_distance"] = results[i].align_mean_distance;
        manifest["subjects"].push_back(entry);
    }
    auto out = open_output(groomed_dir(config) / "transforms.json");
    out << manifest.dump(2) << '\n';
    return outcome;
}

// ---------------------------------------------------------------------------
// optimize

namespace {

std::string optimize_config_hash(const ProjectConfig& config) {
    std::ostringstream key;
    key.precision(17);
    for (const auto& s : config.subjects) key << s.id << ';';
    for (int c : particle_targets(config)) key << c << ';';
    const auto& p = config.optimize.params;
    key << p.relative_weighting << ';' << p.alpha_scale << ';' << p.alpha_floor << ';'
        << p.max_iterations << ';' << p.tolerance << ';' << p.cutoff_multiple << ';'
        << p.sigma_neighbors << ';' << p.split_epsilon_rel << ';' << p.max_step_sigma << ';'
        << p.contour_coupling << ';' << p.seed << ';' << config.groom.remesh_edge_length << ';'
        << config.groom.shared_threshold;
    std::ostringstream hex;
    hex << std::hex << fnv1a(key.str());
    return hex.str();
}

fs::path checkpoint_dir(const ProjectConfig& c) { return particles_dir(c) / "checkpoints"; }

void write_particle_state(const ParticleSystem& system, const ProjectConfig& config,
                          const fs::path& dir) {
    const auto& names = pipeline_domain_names();
    for (int n = 0; n < system.shape_count(); ++n) {
        const auto& shape = system.shape(n);
        for (int d = 0; d < system.domain_count(); ++d) {
            auto out = open_output(dir / (shape.id + "_" + names[d] + ".state"));
            const auto& particles = shape.particles[d];
            if (particles.kind == DomainKind::surface) {
                for (const auto& p : particles.surface)
                    out << p.face_index << ' ' << format_double(p.barycentric.x) << ' '
                        << format_double(p.barycentric.y) << ' '
                        << format_double(p.barycentric.z) << '\n';
            } else {
                for (const auto& p : particles.contour)
                    out << p.segment << ' ' << format_double(p.t) << '\n';
            }
        }
    }
}

bool load_particle_state(ParticleSystem& system, const ProjectConfig& config, const fs::path& dir,
                         const std::vector<int>& counts) {
    const auto& names = pipeline_domain_names();
    for (int n = 0; n < system.shape_count(); ++n) {
        auto& shape = system.shape(n);
        for (int d = 0; d < system.domain_count(); ++d) {
            fs::path path = dir / (shape.id + "_" + names[d] + ".state");
            std::ifstream in(path);
            if (!in) return false;
            auto& particles = shape.particles[d];
            if (particles.kind == DomainKind::surface) {
                particles.surface.clear();
                SurfacePoint p;
                while (in >> p.face_index >> p.barycentric.x >> p.barycentric.y >>
                       p.barycentric.z) {
                    if (p.face_index < 0 || p.face_index >= shape.domains[d].mesh().face_count())
                        return false;
                    p.position =
                        point_from_barycentric(shape.domains[d].mesh(), p.face_index, p.barycentric);
                    particles.surface.push_back(p);
                }
                if (static_cast<int>(particles.surface.size()) != counts[d]) return false;
            } else {
                particles.contour.clear();
                ContourParticle p;
                while (in >> p.segment >> p.t) {
                    if (p.segment < 0 || p.segment >= shape.domains[d].contour().segment_count())
                        return false;
                    particles.contour.push_back(p);
                }
                if (static_cast<int>(particles.contour.size()) != counts[d]) return false;
            }
        }
    }
    return true;
}

ParticleSystem build_particle_system(const ProjectConfig& config) {
    const auto& names = pipeline_domain_names();
    auto targets = particle_targets(config);
    std::vector<DomainSpec> specs = {
        {DomainKind::surface, targets[0], names[0]},
        {DomainKind::surface, targets[1], names[1]},
        {DomainKind::surface, targets[2], names[2]},
        {DomainKind::contour, targets[3], names[3]},
    };
    std::vector<MultiDomainShape> shapes;
    shapes.reserve(config.subjects.size());
    for (const auto& subject : config.subjects) {
        MultiDomainShape shape;
        shape.id = subject.id;
        shape.group = subject.group;
        for (int d = 0; d < 3; ++d) {
            fs::path path = groomed_path(config, subject.id, names[d]);
            if (!fs::exists(path))
                throw ConfigError("missing groomed file " + path.string() + "; run groom first");
            shape.domains.push_back(DomainGeometry::make_surface(load_mesh(path)));
        }
        fs::path contour_path = groomed_path(config, subject.id, "C");
        if (!fs::exists(contour_path))
            throw ConfigError("missing groomed file " + contour_path.string() +
                              "; run groom first");
        shape.domains.push_back(DomainGeometry::make_contour(load_contour(contour_path)));
        shapes.push_back(std::move(shape));
    }
    return ParticleSystem(std::move(specs), std::move(shapes));
}

}  // namespace

OptimizeOutcome cmd_optimize(const ProjectConfig& config) {
    if (config.subjects.empty()) throw ConfigError("no subjects configured");
    ParticleSystem system = build_particle_system(config);

    OptimizationParams params = config.optimize.params;
    params.threads = config.threads;

    const std::string hash = optimize_config_hash(config);
    const fs::path state_path = checkpoint_dir(config) / "state.json";

    OptimizeOutcome outcome;
    if (fs::exists(state_path)) {
        try {
            ordered_json state;
            std::ifstream in(state_path);
            in >> state;
            if (state.value("config_hash", std::string()) == hash) {
                std::vector<int> counts = state.value("counts", std::vector<int>());
                fs::path dir = checkpoint_dir(config) / state.value("level_dir", std::string());
                if (counts.size() == static_cast<std::size_t>(system.domain_count()) &&
                    load_particle_state(system, config, dir, counts))
                    outcome.resumed = true;
            }
        } catch (const std::exception&) {
            outcome.resumed = false;  // unreadable checkpoint: start over
        }
    }

    auto on_level = [&](const std::vector<int>& counts) {
        int max_count = *std::max_element(counts.begin(), counts.end());
        fs::path dir = checkpoint_dir(config) / ("level_" + std::to_string(max_count));
        write_particle_state(system, config, dir);
        ordered_json state;
        state["config_hash"] = hash;
        state["counts"] = counts;
        state["level_dir"] = dir.filename().string();
        auto out = open_output(state_path);
        out << state.dump(2) << '\n';
    };

    OptimizationResult result = optimize(system, params, on_level, outcome.resumed);
    outcome.final_energy = result.final_energy;

    // Final particle files, world positions, domain-major ordering.
    const auto& names = pipeline_domain_names();
    for (int n = 0; n < system.shape_count(); ++n) {
        for (int d = 0; d < system.domain_count(); ++d) {
            std::vector<Vec3> world;
            world.reserve(system.current_count(d));
            for (int i = 0; i < system.current_count(d); ++i)
                world.push_back(system.particle_position(n, d, i));
            save_particles(world, particles_path(config, system.shape(n).id, names[d]));
        }
    }

    auto log = open_output(particles_dir(config) / "optimize_log.csv");
    log << "level,iteration,energy,mean_displacement\n";
    for (const auto& row : result.log)
        log << row.level << ',' << row.iteration << ',' << format_double(row.energy) << ','
            << format_double(row.mean_displacement) << '\n';
    return outcome;
}

// ---------------------------------------------------------------------------
// analyze

namespace {

// Inverse-distance weighted displacement interpolation from particle
// correspondences; good enough to carry meshes along mode walks for
// viewing.
Vec3 idw_displacement(const Vec3& p, const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
    double weight_sum = 0.0;
    Vec3 disp;
    for (std::size_t i = 0; i < from.size(); ++i) {
        double d2 = squared_distance(p, from[i]);
        if (d2 < 1e-20) return to[i] - from[i];
        double w = 1.0 / d2;
        weight_sum += w;
        disp += w * (to[i] - from[i]);
    }
    return weight_sum > 0.0 ? disp / weight_sum : Vec3{};
}

TriangleMesh warp_mesh(const TriangleMesh& mesh, const std::vector<Vec3>& from,
                       const std::vector<Vec3>& to) {
    TriangleMesh out = mesh;
    for (Vec3& v : out.vertices) v += idw_displacement(v, from, to);
    out.normals.clear();
    return out;
}

Contour warp_contour(const Contour& contour, const std::vector<Vec3>& from,
                     const std::vector<Vec3>& to) {
    Contour out = contour;
    for (Vec3& p : out.points) p += idw_displacement(p, from, to);
    return out;
}

std::vector<Vec3> slice_domain(const Eigen::VectorXd& row, int offset, int count) {
    std::vector<Vec3> pts;
    pts.reserve(count);
    for (int i = 0; i < count; ++i)
        pts.push_back({row(offset + 3 * i), row(offset + 3 * i + 1), row(offset + 3 * i + 2)});
    return pts;
}

}  // namespace

void cmd_analyze(const ProjectConfig& config) {
    const int n = static_cast<int>(config.subjects.size());
    if (n < 2) throw ConfigError("analysis needs at least 2 subjects");
    const auto& names = pipeline_domain_names();
    auto counts = particle_targets(config);
    int total = 0;
    for (int c : counts) total += c;

    Eigen::MatrixXd matrix(n, 3 * total);
    for (int i = 0; i < n; ++i) {
        int col = 0;
        for (std::size_t d = 0; d < names.size(); ++d) {
            fs::path path = particles_path(config, config.subjects[i].id, names[d]);
            if (!fs::exists(path))
                throw ConfigError("missing particle file " + path.string() + "; run optimize first");
            auto pts = load_particles(path);
            if (static_cast<int>(pts.size()) != counts[d])
                throw ConfigError(path.string() + " has " + std::to_string(pts.size()) +
                                  " particles, expected " + std::to_string(counts[d]));
            for (const Vec3& p : pts) {
                matrix(i, col++) = p.x;
                matrix(i, col++) = p.y;
                matrix(i, col++) = p.z;
            }
        }
    }

    fs::create_directories(analysis_dir(config));

    // PCA and mode walks.
    PcaModel model = pca(matrix);
    {
        auto out = open_output(analysis_dir(config) / "eigenvalues.csv");
        out << "mode,eigenvalue,explained_variance,cumulative_explained\n";
        for (Eigen::Index k = 0; k < model.eigenvalues.size(); ++k) {
            double explained =
                model.total_variance > 0.0 ? model.eigenvalues(k) / model.total_variance : 0.0;
            out << (k + 1) << ',' << format_double(model.eigenvalues(k)) << ','
                << format_double(explained) << ',' << format_double(model.cumulative_explained[k])
                << '\n';
        }
    }

    // Reference geometry for warped exports.
    std::string reference_id = config.subjects[0].id;
    {
        fs::path manifest_path = groomed_dir(config) / "transforms.json";
        if (fs::exists(manifest_path)) {
            std::ifstream in(manifest_path);
            ordered_json manifest;
            in >> manifest;
            reference_id = manifest.value("reference_subject", reference_id);
        }
    }
    int reference_row = 0;
    for (int i = 0; i < n; ++i)
        if (config.subjects[i].id == reference_id) reference_row = i;

    std::vector<TriangleMesh> reference_meshes(3);
    Contour reference_contour;
    bool have_reference_geometry = true;
    for (int d = 0; d < 3; ++d) {
        fs::path path = groomed_path(config, reference_id, names[d]);
        if (fs::exists(path)) reference_meshes[d] = load_mesh(path);
        else have_reference_geometry = false;
    }
    {
        fs::path path = groomed_path(config, reference_id, "C");
        if (fs::exists(path)) reference_contour = load_contour(path);
        else have_reference_geometry = false;
    }

    auto export_shape_vector = [&](const Eigen::VectorXd& row, const std::string& stem) {
        int offset = 0;
        Eigen::VectorXd ref_row = matrix.row(reference_row).transpose();
        for (std::size_t d = 0; d < names.size(); ++d) {
            auto pts = slice_domain(row, offset, counts[d]);
            save_particles(pts, analysis_dir(config) / "modes" / (stem + "_" + names[d] + ".particles"));
            if (have_reference_geometry) {
                auto from = slice_domain(ref_row, offset, counts[d]);
                if (names[d] == "C")
                    save_contour(warp_contour(reference_contour, from, pts),
                                 analysis_dir(config) / "modes" / (stem + "_C.contour"));
                else
                    save_mesh(warp_mesh(reference_meshes[d], from, pts),
                              analysis_dir(config) / "modes" / (stem + "_" + names[d] + ".obj"));
            }
            offset += 3 * counts[d];
        }
    };

    export_shape_vector(model.mean, "mean");
    int mode_count = std::min<int>(config.analyze.modes, static_cast<int>(model.eigenvalues.size()));
    for (int k = 0; k < mode_count; ++k) {
        for (double sd : {-2.0, -1.0, 1.0, 2.0}) {
            std::ostringstream stem;
            stem << "mode" << (k + 1) << "_sd" << (sd < 0 ? "-" : "+") << std::abs(static_cast<int>(sd));
            export_shape_vector(mode_walk(model, k, sd), stem.str());
        }
    }

    // Group analyses.
    std::vector<std::string> labels;
    labels.reserve(n);
    for (const auto& s : config.subjects) labels.push_back(s.group);
    std::set<std::string> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2) {
        std::cerr << "warning: only one group label present; skipping group analyses\n";
        return;
    }
    if (distinct.size() > 2)
        throw ConfigError("group analyses support exactly 2 labels, found " +
                          std::to_string(distinct.size()));
    std::string group_a = config.analyze.group_a.empty() ? *distinct.begin() : config.analyze.group_a;
    std::string group_b =
        config.analyze.group_b.empty() ? *std::next(distinct.begin()) : config.analyze.group_b;
    if (group_a == group_b) throw ConfigError("group_a and group_b must differ");
    GroupLabels groups = resolve_groups(labels, group_a, group_b);

    GroupDifference diff = group_difference(matrix, groups);
    {
        auto out = open_output(analysis_dir(config) / "group_difference.csv");
        out << "domain,particle,dx,dy,dz,magnitude\n";
        int index = 0;
        for (std::size_t d = 0; d < names.size(); ++d) {
            for (int i = 0; i < counts[d]; ++i, ++index) {
                const Vec3& v = diff.difference_vectors[index];
                out << names[d] << ',' << i << ',' << format_double(v.x) << ','
                    << format_double(v.y) << ',' << format_double(v.z) << ','
                    << format_double(diff.magnitudes[index]) << '\n';
            }
        }
    }

    std::vector<double> scores = shape_scores(matrix, groups);
    {
        auto out = open_output(analysis_dir(config) / "scores.csv");
        out << "subject,group,score\n";
        for (int i = 0; i < n; ++i)
            out << config.subjects[i].id << ',' << labels[i] << ',' << format_double(scores[i])
                << '\n';
    }

    {
        ImbalanceOptions options;
        options.trials = config.analyze.trials;
        options.alpha = config.analyze.alpha;
        options.seed = config.analyze.seed;
        int na = 0, nb = 0;
        for (int g : groups) (g == 0 ? na : nb)++;
        options.subsample = config.analyze.subsample > 0 ? config.analyze.subsample
                                                         : std::min(na, nb);
        auto rows = imbalance_test(matrix, groups, options);
        auto out = open_output(analysis_dir(config) / "imbalance.csv");
        out << "subject,group,full_score,trial_mean,trial_stddev,t_statistic,p_value,"
               "below_alpha,exact_match\n";
        for (int i = 0; i < n; ++i) {
            const auto& row = rows[i];
            out << config.subjects[i].id << ',' << labels[i] << ','
                << format_double(row.full_score) << ',' << format_double(row.trial_mean) << ','
                << format_double(row.trial_stddev) << ',';
            if (row.exact_match) out << ",";  // no t statistic / p value
            else out << format_double(row.t_statistic) << ',' << format_double(row.p_value);
            out << ',' << (row.below_alpha ? 1 : 0) << ',' << (row.exact_match ? 1 : 0) << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// synth

void cmd_synth(const SynthCliOptions& options) {
    auto cohort = synthesize_cohort(options.kind, options.synth);
    fs::path mesh_dir = options.output_dir / "meshes";
    fs::create_directories(mesh_dir);

    ProjectConfig config;
    config.output_dir = options.output_dir / "output";
    {
        auto labels = open_output(options.output_dir / "labels.csv");
        labels << "subject,group,parameter\n";
        for (const auto& subject : cohort) {
            fs::path a = mesh_dir / (subject.id + "_A.obj");
            fs::path b = mesh_dir / (subject.id + "_B.obj");
            save_mesh(subject.organ_a, a);
            save_mesh(subject.organ_b, b);
            labels << subject.id << ',' << subject.group << ','
                   << format_double(subject.parameter) << '\n';
            config.subjects.push_back({subject.id, a, b, subject.group});
        }
    }

    if (options.write_config) {
        // Sensible defaults for the synthetic scale (unit-ish solids).
        config.groom.remesh_edge_length = 0.12;
        config.groom.shared_threshold = 1e-3;
        config.analyze.group_a = "neg";
        config.analyze.group_b = "pos";
        save_project_config(config, options.output_dir / "config.json");
    }
}

}  // namespace ssm

// File formats: ASCII OBJ and ASCII PLY meshes, contour files (one
// "x y z" line per point in loop order), and particle files (one
// "x y z" line per particle, fixed ordering). All writers emit enough
// digits for exact double round-trips.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ssm/mesh.hpp"

namespace ssm {

// Format chosen by extension: .obj or .ply. Unrecognized directives in OBJ
// files are skipped with a warning on stderr.
TriangleMesh load_mesh(const std::filesystem::path& path);
void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path);

Contour load_contour(const std::filesystem::path& path);
void save_contour(const Contour& contour, const std::filesystem::path& path);

std::vector<Vec3> load_particles(const std::filesystem::path& path);
void save_particles(const std::vector<Vec3>& particles, const std::filesystem::path& path);

std::string format_double(double v);  // shortest exact representation

}  // namespace ssm

#include "ssm/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ssm/errors.hpp"

namespace ssm {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, int line, const std::string& what) {
    throw ParseError(path.string() + ":" + std::to_string(line) + ": " + what);
}

bool parse_double(const std::string& tok, double& out) {
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && ptr == tok.data() + tok.size();
}

bool parse_int(const std::string& tok, long& out) {
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && ptr == tok.data() + tok.size();
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream ss(line);
    std::string t;
    while (ss >> t) toks.push_back(t);
    return toks;
}

TriangleMesh load_obj(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    TriangleMesh mesh;
    std::string line;
    int line_no = 0;
    bool warned = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto toks = split_ws(line);
        if (toks.empty() || toks[0][0] == '#') continue;
        if (toks[0] == "v") {
            if (toks.size() < 4) parse_fail(path, line_no, "vertex needs 3 coordinates");
            Vec3 v;
            for (int c = 0; c < 3; ++c)
                if (!parse_double(toks[c + 1], v[c]))
                    parse_fail(path, line_no, "bad vertex coordinate '" + toks[c + 1] + "'");
            mesh.vertices.push_back(v);
        } else if (toks[0] == "f") {
            if (toks.size() != 4) parse_fail(path, line_no, "only triangle faces are supported");
            std::array<int, 3> f;
            for (int c = 0; c < 3; ++c) {
                // accept "i", "i/..", "i//.." forms; only the vertex index is used
                std::string tok = toks[c + 1].substr(0, toks[c + 1].find('/'));
                long idx = 0;
                if (!parse_int(tok, idx) || idx <= 0)
                    parse_fail(path, line_no, "bad face index '" + toks[c + 1] + "'");
                f[c] = static_cast<int>(idx - 1);
            }
            mesh.faces.push_back(f);
        } else {
            if (!warned) {
                std::cerr << "warning: " << path.string() << ": ignoring '" << toks[0]
                          << "' directives\n";
                warned = true;
            }
        }
    }
    try {
        validate_mesh(mesh);
    } catch (const TopologyError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return mesh;
}

TriangleMesh load_ply(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    int line_no = 0;

    auto next_line = [&](const char* what) {
        if (!std::getline(in, line)) parse_fail(path, line_no, std::string("unexpected EOF, expected ") + what);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
    };

    next_line("ply magic");
    if (line != "ply") parse_fail(path, line_no, "missing 'ply' magic");

    long vertex_count = -1, face_count = -1;
    int x_col = -1, y_col = -1, z_col = -1;
    int vertex_props = 0;
    std::string current_element;
    bool ascii = false;
    while (true) {
        next_line("header line");
        auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (toks[0] == "comment") continue;
        if (toks[0] == "format") {
            if (toks.size() < 2 || toks[1] != "ascii")
                throw FormatError(path.string() + ": only ascii PLY is supported");
            ascii = true;
        } else if (toks[0] == "element") {
            if (toks.size() < 3) parse_fail(path, line_no, "bad element line");
            current_element = toks[1];
            long n = 0;
            if (!parse_int(toks[2], n) || n < 0) parse_fail(path, line_no, "bad element count");
            if (current_element == "vertex") vertex_count = n;
            else if (current_element == "face") face_count = n;
        } else if (toks[0] == "property") {
            if (current_element == "vertex" && toks.size() >= 3 && toks[1] != "list") {
                if (toks[2] == "x") x_col = vertex_props;
                if (toks[2] == "y") y_col = vertex_props;
                if (toks[2] == "z") z_col = vertex_props;
                ++vertex_props;
            }
        } else if (toks[0] == "end_header") {
            break;
        }
    }
    if (!ascii) throw FormatError(path.string() + ": missing ascii format declaration");
    if (vertex_count < 0) parse_fail(path, line_no, "missing 'element vertex'");
    if (x_col < 0 || y_col < 0 || z_col < 0)
        parse_fail(path, line_no, "vertex element lacks x/y/z properties");

    TriangleMesh mesh;
    mesh.vertices.reserve(static_cast<size_t>(vertex_count));
    for (long i = 0; i < vertex_count; ++i) {
        next_line("vertex row");
        auto toks = split_ws(line);
        if (static_cast<int>(toks.size()) < vertex_props)
            parse_fail(path, line_no, "vertex row has too few columns");
        Vec3 v;
        if (!parse_double(toks[x_col], v.x) || !parse_double(toks[y_col], v.y) ||
            !parse_double(toks[z_col], v.z))
            parse_fail(path, line_no, "bad vertex coordinate");
        mesh.vertices.push_back(v);
    }
    for (long i = 0; i < std::max(0L, face_count); ++i) {
        next_line("face row");
        auto toks = split_ws(line);
        if (toks.empty()) parse_fail(path, line_no, "empty face row");
        long n = 0;
        if (!parse_int(toks[0], n)) parse_fail(path, line_no, "bad face vertex count");
        if (n != 3) parse_fail(path, line_no, "only triangle faces are supported");
        if (static_cast<long>(toks.size()) < 1 + n) parse_fail(path, line_no, "face row too short");
        std::array<int, 3> f;
        for (int c = 0; c < 3; ++c) {
            long idx = 0;
            if (!parse_int(toks[c + 1], idx) || idx < 0)
                parse_fail(path, line_no, "bad face index '" + toks[c + 1] + "'");
            f[c] = static_cast<int>(idx);
        }
        mesh.faces.push_back(f);
    }
    try {
        validate_mesh(mesh);
    } catch (const TopologyError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return mesh;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
    std::ofstream out = open_for_write(path);
    for (const Vec3& v : mesh.vertices)
        out << "v " << format_double(v.x) << ' ' << format_double(v.y) << ' '
            << format_double(v.z) << '\n';
    for (const auto& f : mesh.faces)
        out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

void save_ply(const TriangleMesh& mesh, const std::filesystem::path& path) {
    std::ofstream out = open_for_write(path);
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << mesh.vertex_count() << '\n';
    out << "property double x\nproperty double y\nproperty double z\n";
    out << "element face " << mesh.face_count() << '\n';
    out << "property list uchar int vertex_indices\nend_header\n";
    for (const Vec3& v : mesh.vertices)
        out << format_double(v.x) << ' ' << format_double(v.y) << ' ' << format_double(v.z)
            << '\n';
    for (const auto& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

TriangleMesh load_mesh(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
    std::string ext = lower_extension(path);
    if (ext == ".obj") return load_obj(path);
    if (ext == ".ply") return load_ply(path);
    throw FormatError("unsupported mesh format '" + ext + "' for " + path.string());
}

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path) {
    std::string ext = lower_extension(path);
    if (ext == ".obj") return save_obj(mesh, path);
    if (ext == ".ply") return save_ply(mesh, path);
    throw FormatError("unsupported mesh format '" + ext + "' for " + path.string());
}

Contour load_contour(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    Contour contour;
    contour.closed = true;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto toks = split_ws(line);
        if (toks.empty() || toks[0][0] == '#') continue;
        if (toks.size() != 3) parse_fail(path, line_no, "expected 'x y z'");
        Vec3 p;
        for (int c = 0; c < 3; ++c)
            if (!parse_double(toks[c], p[c])) parse_fail(path, line_no, "bad coordinate");
        contour.points.push_back(p);
    }
    return contour;
}

void save_contour(const Contour& contour, const std::filesystem::path& path) {
    std::ofstream out = open_for_write(path);
    for (const Vec3& p : contour.points)
        out << format_double(p.x) << ' ' << format_double(p.y) << ' ' << format_double(p.z)
            << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<Vec3> load_particles(const std::filesystem::path& path) {
    return load_contour(path).points;
}

void save_particles(const std::vector<Vec3>& particles, const std::filesystem::path& path) {
    Contour c;
    c.points = particles;
    save_contour(c, path);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace ssm

// Dataset-side input: JSON manifests, OBJ frame sequences, and the mesh
// normalization applied on load.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mspline/archive.hpp"
#include "mspline/errors.hpp"

namespace mspline {

namespace {

struct ObjFrame {
    std::vector<double> vertices;
    std::vector<double> normals;            // raw vn records
    std::vector<std::uint32_t> faces;       // triangulated vertex indices
    std::vector<std::int64_t> corner_normals;  // vn index per face corner, -1 none
};

[[noreturn]] void parse_fail(const std::filesystem::path& file, std::size_t line,
                             const std::string& what) {
    throw DataError("OBJ parse error in '" + file.string() + "' line " +
                    std::to_string(line) + ": " + what);
}

// "7", "7/2", "7//3", "7/2/3", negatives relative to the current counts.
void parse_face_corner(const std::string& token, std::size_t n_vertices,
                       std::size_t n_normals, const std::filesystem::path& file,
                       std::size_t line, std::uint32_t& vertex, std::int64_t& normal) {
    const std::size_t first = token.find('/');
    const std::string vs = token.substr(0, first);
    std::int64_t vi = 0;
    try {
        vi = std::stoll(vs);
    } catch (const std::exception&) {
        parse_fail(file, line, "bad face index '" + token + "'");
    }
    if (vi < 0) vi = static_cast<std::int64_t>(n_vertices) + vi + 1;
    if (vi < 1 || vi > static_cast<std::int64_t>(n_vertices)) {
        parse_fail(file, line, "vertex index " + vs + " out of range");
    }
    vertex = static_cast<std::uint32_t>(vi - 1);

    normal = -1;
    const std::size_t last = token.rfind('/');
    if (first != std::string::npos && last != first) {
        const std::string ns = token.substr(last + 1);
        if (!ns.empty()) {
            std::int64_t ni = 0;
            try {
                ni = std::stoll(ns);
            } catch (const std::exception&) {
                parse_fail(file, line, "bad normal index '" + token + "'");
            }
            if (ni < 0) ni = static_cast<std::int64_t>(n_normals) + ni + 1;
            if (ni < 1 || ni > static_cast<std::int64_t>(n_normals)) {
                parse_fail(file, line, "normal index " + ns + " out of range");
            }
            normal = ni - 1;
        }
    }
}

ObjFrame parse_obj(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open OBJ file '" + file.string() + "'");
    ObjFrame frame;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag.empty() || tag[0] == '#') continue;
        if (tag == "v" || tag == "vn") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) parse_fail(file, line_no, "expected three coordinates");
            auto& dst = tag == "v" ? frame.vertices : frame.normals;
            dst.push_back(x);
            dst.push_back(y);
            dst.push_back(z);
        } else if (tag == "f") {
            std::vector<std::uint32_t> poly;
            std::vector<std::int64_t> poly_normals;
            std::string token;
            while (ls >> token) {
                std::uint32_t v = 0;
                std::int64_t n = -1;
                parse_face_corner(token, frame.vertices.size() / 3,
                                  frame.normals.size() / 3, file, line_no, v, n);
                poly.push_back(v);
                poly_normals.push_back(n);
            }
            if (poly.size() < 3) parse_fail(file, line_no, "face with fewer than 3 corners");
            for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
                frame.faces.insert(frame.faces.end(), {poly[0], poly[i], poly[i + 1]});
                frame.corner_normals.insert(
                    frame.corner_normals.end(),
                    {poly_normals[0], poly_normals[i], poly_normals[i + 1]});
            }
        }
        // Other records (vt, o, g, s, usemtl, mtllib) are ignored.
    }
    if (frame.vertices.empty()) throw DataError("OBJ file '" + file.string() + "' has no vertices");
    return frame;
}

}  // namespace

void normalize_mesh(MeshSequence& mesh) {
    if (mesh.base_vertices.empty()) return;
    double lo[3], hi[3];
    for (int c = 0; c < 3; ++c) {
        lo[c] = mesh.base_vertices[static_cast<std::size_t>(c)];
        hi[c] = lo[c];
    }
    for (std::size_t i = 0; i < mesh.base_vertices.size(); i += 3) {
        for (int c = 0; c < 3; ++c) {
            lo[c] = std::min(lo[c], mesh.base_vertices[i + static_cast<std::size_t>(c)]);
            hi[c] = std::max(hi[c], mesh.base_vertices[i + static_cast<std::size_t>(c)]);
        }
    }
    double half = 0.0;
    for (int c = 0; c < 3; ++c) {
        mesh.norm_center[c] = 0.5 * (lo[c] + hi[c]);
        half = std::max(half, 0.5 * (hi[c] - lo[c]));
    }
    const double scale = half > 0.0 ? 0.9 / half : 1.0;
    mesh.norm_scale = scale;
    for (std::size_t i = 0; i < mesh.base_vertices.size(); i += 3) {
        for (int c = 0; c < 3; ++c) {
            auto& v = mesh.base_vertices[i + static_cast<std::size_t>(c)];
            v = (v - mesh.norm_center[c]) * scale;
        }
    }
    for (double& d : mesh.deltas.deltas) d *= scale;
}

MeshSequence load_obj_frames(std::span<const std::filesystem::path> files,
                             bool normalize) {
    if (files.empty()) throw DataError("mesh entry lists no frame files");
    MeshSequence mesh;
    std::vector<ObjFrame> frames;
    frames.reserve(files.size());
    for (const auto& f : files) frames.push_back(parse_obj(f));

    const ObjFrame& base = frames.front();
    mesh.base_vertices = base.vertices;
    mesh.faces = base.faces;
    for (std::size_t t = 1; t < frames.size(); ++t) {
        if (frames[t].vertices.size() != base.vertices.size()) {
            throw DataError("frame file '" + files[t].string() + "' has " +
                            std::to_string(frames[t].vertices.size() / 3) +
                            " vertices, frame 0 has " +
                            std::to_string(base.vertices.size() / 3));
        }
        if (frames[t].faces != base.faces) {
            throw DataError("frame file '" + files[t].string() +
                            "' changes connectivity relative to frame 0");
        }
    }

    // Per-vertex normals from frame 0's vn records, accumulated over face
    // corners (exact per-vertex tables and indexed variants both reduce to
    // this up to normalization).
    if (!base.normals.empty()) {
        std::vector<double> acc(base.vertices.size(), 0.0);
        bool any = false;
        for (std::size_t c = 0; c < base.corner_normals.size(); ++c) {
            const std::int64_t ni = base.corner_normals[c];
            if (ni < 0) continue;
            any = true;
            const std::uint32_t v = base.faces[c];
            for (int d = 0; d < 3; ++d) {
                acc[std::size_t(v) * 3 + static_cast<std::size_t>(d)] +=
                    base.normals[std::size_t(ni) * 3 + static_cast<std::size_t>(d)];
            }
        }
        if (!any && base.normals.size() == base.vertices.size()) {
            acc = base.normals;  // bare vn table aligned with vertices
            any = true;
        }
        if (any) {
            for (std::size_t i = 0; i < acc.size(); i += 3) {
                const double len = std::sqrt(acc[i] * acc[i] + acc[i + 1] * acc[i + 1] +
                                             acc[i + 2] * acc[i + 2]);
                if (len > 1e-12) {
                    acc[i] /= len;
                    acc[i + 1] /= len;
                    acc[i + 2] /= len;
                }
            }
            mesh.vertex_normals = std::move(acc);
        }
    }

    if (frames.size() > 1) {
        mesh.deltas = TrajectoryGrid(static_cast<int>(frames.size() - 1),
                                     static_cast<int>(mesh.vertex_count()));
        for (std::size_t t = 1; t < frames.size(); ++t) {
            double* dst = mesh.deltas.frame(static_cast<int>(t - 1));
            for (std::size_t i = 0; i < base.vertices.size(); ++i) {
                dst[i] = frames[t].vertices[i] - base.vertices[i];
            }
        }
    }

    if (normalize) normalize_mesh(mesh);

    // Soft range check: motion that leaves the working box by a wide
    // margin is suspicious but not fatal.
    double max_abs = 0.0;
    for (std::size_t i = 0; i < mesh.base_vertices.size(); ++i) {
        max_abs = std::max(max_abs, std::fabs(mesh.base_vertices[i]));
    }
    for (int t = 0; t < mesh.deltas.frame_count; ++t) {
        const double* d = mesh.deltas.frame(t);
        for (std::size_t i = 0; i < mesh.base_vertices.size(); ++i) {
            max_abs = std::max(max_abs, std::fabs(mesh.base_vertices[i] + d[i]));
        }
    }
    if (max_abs > 3.0) {
        std::ostringstream msg;
        msg << "deformed positions reach |" << max_abs << "|, outside the working range";
        mesh.warnings.push_back(msg.str());
    }
    return mesh;
}

void write_obj(const std::filesystem::path& path, std::span<const double> vertices,
               std::span<const std::uint32_t> faces) {
    if (vertices.size() % 3 != 0 || faces.size() % 3 != 0) {
        throw DataError("write_obj expects n x 3 vertices and f x 3 faces");
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    char buf[128];
    for (std::size_t i = 0; i < vertices.size(); i += 3) {
        std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", vertices[i],
                      vertices[i + 1], vertices[i + 2]);
        out << buf;
    }
    for (std::size_t f = 0; f < faces.size(); f += 3) {
        out << "f " << faces[f] + 1 << ' ' << faces[f + 1] + 1 << ' ' << faces[f + 2] + 1
            << '\n';
    }
    if (!out) throw DataError("write to '" + path.string() + "' failed");
}

const ManifestEntry& DatasetManifest::entry(const std::string& id) const {
    for (const ManifestEntry& e : entries) {
        if (e.id == id) return e;
    }
    throw DataError("manifest has no entry '" + id + "'");
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest '" + path.string() + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("manifest '" + path.string() + "' is not valid JSON: " + e.what());
    }
    DatasetManifest manifest;
    manifest.root = path.has_parent_path() ? path.parent_path()
                                           : std::filesystem::path(".");
    try {
        manifest.normalize = doc.value("normalize", false);
        for (const nlohmann::json& je : doc.at("entries")) {
            ManifestEntry entry;
            entry.id = je.at("id").get<std::string>();
            if (entry.id.empty()) throw DataError("manifest entry with empty id");
            for (const auto& existing : manifest.entries) {
                if (existing.id == entry.id) {
                    throw DataError("manifest repeats entry id '" + entry.id + "'");
                }
            }
            if (je.contains("frames")) {
                for (const nlohmann::json& jf : je["frames"]) {
                    entry.frames.emplace_back(jf.get<std::string>());
                }
            }
            if (je.contains("packed")) entry.packed = je["packed"].get<std::string>();
            if (je.contains("trajectory")) {
                entry.trajectory = je["trajectory"].get<std::string>();
            }
            if (je.contains("base_points")) {
                entry.base_points = je["base_points"].get<std::string>();
            }
            if (je.contains("captions")) {
                for (const nlohmann::json& jc : je["captions"]) {
                    entry.captions.push_back(jc.get<std::string>());
                }
            }
            if (entry.frames.empty() && entry.packed.empty() && entry.trajectory.empty()) {
                throw DataError("manifest entry '" + entry.id +
                                "' lists no frames, packed mesh, or trajectory");
            }
            manifest.entries.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError("manifest '" + path.string() + "' is malformed: " + e.what());
    }
    if (manifest.entries.empty()) {
        throw DataError("manifest '" + path.string() + "' lists no entries");
    }
    return manifest;
}

MeshSequence load_mesh_sequence(const DatasetManifest& manifest,
                                const ManifestEntry& entry) {
    MeshSequence mesh;
    if (!entry.frames.empty()) {
        std::vector<std::filesystem::path> resolved;
        resolved.reserve(entry.frames.size());
        for (const auto& f : entry.frames) {
            resolved.push_back(f.is_absolute() ? f : manifest.root / f);
        }
        mesh = load_obj_frames(resolved, manifest.normalize);
    } else if (!entry.packed.empty()) {
        const auto p = entry.packed.is_absolute() ? entry.packed : manifest.root / entry.packed;
        mesh = load_packed_mesh(p);
        if (manifest.normalize && mesh.norm_scale == 1.0) normalize_mesh(mesh);
    } else {
        throw DataError("entry '" + entry.id + "' is not a mesh entry");
    }
    mesh.id = entry.id;
    return mesh;
}

}  // namespace mspline

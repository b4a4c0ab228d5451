#include "mspline/archive.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "mspline/errors.hpp"

namespace mspline {

static_assert(std::endian::native == std::endian::little,
              "archive I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'B', 'S', 'M', 'A'};
constexpr std::uint32_t kVersion = 1;

const std::map<std::string, ArchiveKind>& kind_names() {
    static const std::map<std::string, ArchiveKind> names = {
        {"trajectory", ArchiveKind::trajectory},
        {"controls", ArchiveKind::controls},
        {"surface", ArchiveKind::surface},
        {"embedding", ArchiveKind::embedding},
        {"mesh_motion", ArchiveKind::mesh_motion},
    };
    return names;
}

std::size_t dtype_size(const std::string& dtype) {
    if (dtype == "f32" || dtype == "u32") return 4;
    throw DataError("archive section has unsupported dtype '" + dtype + "'");
}

std::vector<float> to_f32(std::span<const double> values) {
    std::vector<float> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(),
                   [](double v) { return static_cast<float>(v); });
    return out;
}

std::vector<double> to_f64(std::span<const float> values) {
    std::vector<double> out(values.size());
    std::copy(values.begin(), values.end(), out.begin());
    return out;
}

void validate_for_write(const Archive& archive) {
    for (const ArchiveSection& s : archive.sections) {
        const std::size_t count = s.element_count();
        const std::size_t stored = s.dtype == "f32" ? s.f32.size() : s.u32.size();
        dtype_size(s.dtype);
        if (stored != count) {
            throw DataError("archive section '" + s.name + "' stores " +
                            std::to_string(stored) + " elements, shape expects " +
                            std::to_string(count));
        }
        if (s.dtype == "f32") {
            for (const float v : s.f32) {
                if (!std::isfinite(v)) {
                    throw DataError("archive section '" + s.name +
                                    "' contains a non-finite value");
                }
            }
        }
    }
}

nlohmann::json header_json(const Archive& archive) {
    nlohmann::json sections = nlohmann::json::array();
    for (const ArchiveSection& s : archive.sections) {
        sections.push_back({{"name", s.name}, {"dtype", s.dtype}, {"shape", s.shape}});
    }
    nlohmann::json header = {{"kind", to_string(archive.kind)},
                             {"sections", sections},
                             {"meta", archive.meta.is_null() ? nlohmann::json::object()
                                                             : archive.meta},
                             {"layout", archive.layout.is_null()
                                            ? nlohmann::json::object()
                                            : archive.layout}};
    if (!archive.sections.empty()) {
        header["shape"] = archive.sections.front().shape;
        header["dtype"] = archive.sections.front().dtype;
    }
    return header;
}

}  // namespace

std::string to_string(ArchiveKind kind) {
    for (const auto& [name, k] : kind_names()) {
        if (k == kind) return name;
    }
    throw DataError("unknown archive kind");
}

ArchiveKind archive_kind_from_string(const std::string& name) {
    const auto it = kind_names().find(name);
    if (it == kind_names().end()) {
        throw DataError("unknown archive kind '" + name + "'");
    }
    return it->second;
}

std::size_t ArchiveSection::element_count() const {
    std::size_t count = 1;
    for (const std::size_t dim : shape) count *= dim;
    return shape.empty() ? 0 : count;
}

const ArchiveSection& Archive::section(const std::string& name) const {
    for (const ArchiveSection& s : sections) {
        if (s.name == name) return s;
    }
    throw DataError("archive has no section '" + name + "'");
}

void write_archive(const Archive& archive, const std::filesystem::path& path) {
    validate_for_write(archive);
    const std::string header = header_json(archive).dump();

    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open '" + tmp.string() + "' for writing");
        out.write(kMagic, 4);
        const std::uint32_t version = kVersion;
        out.write(reinterpret_cast<const char*>(&version), sizeof(version));
        const std::uint64_t header_len = header.size();
        out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
        out.write(header.data(), static_cast<std::streamsize>(header.size()));
        for (const ArchiveSection& s : archive.sections) {
            const char* bytes = s.dtype == "f32"
                                    ? reinterpret_cast<const char*>(s.f32.data())
                                    : reinterpret_cast<const char*>(s.u32.data());
            out.write(bytes,
                      static_cast<std::streamsize>(s.element_count() * dtype_size(s.dtype)));
        }
        out.flush();
        if (!out) throw DataError("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw DataError("cannot move archive into place at '" + path.string() +
                        "': " + ec.message());
    }
}

Archive read_archive(const std::filesystem::path& path, bool strict_finite) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open archive '" + path.string() + "'");
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    if (bytes.size() < 16) {
        throw DataError("archive '" + path.string() + "' is truncated: " +
                        std::to_string(bytes.size()) + " bytes, prelude needs 16");
    }
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw DataError("'" + path.string() + "' is not a motion archive (bad magic)");
    }
    std::uint32_t version = 0;
    std::memcpy(&version, bytes.data() + 4, sizeof(version));
    if (version != kVersion) {
        throw DataError("archive '" + path.string() + "' has version " +
                        std::to_string(version) + ", this build reads version " +
                        std::to_string(kVersion));
    }
    std::uint64_t header_len = 0;
    std::memcpy(&header_len, bytes.data() + 8, sizeof(header_len));
    if (16 + header_len > bytes.size()) {
        throw DataError("archive '" + path.string() + "' is truncated inside the header");
    }
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.begin() + 16,
                                       bytes.begin() + 16 + static_cast<std::ptrdiff_t>(header_len));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("archive '" + path.string() + "' has a malformed header: " +
                        e.what());
    }

    Archive archive;
    try {
        archive.kind = archive_kind_from_string(header.at("kind").get<std::string>());
        archive.meta = header.value("meta", nlohmann::json::object());
        archive.layout = header.value("layout", nlohmann::json::object());
        std::size_t offset = 16 + header_len;
        std::size_t expected_payload = 0;
        std::vector<ArchiveSection> sections;
        for (const nlohmann::json& js : header.at("sections")) {
            ArchiveSection s;
            s.name = js.at("name").get<std::string>();
            s.dtype = js.at("dtype").get<std::string>();
            s.shape = js.at("shape").get<std::vector<std::size_t>>();
            expected_payload += s.element_count() * dtype_size(s.dtype);
            sections.push_back(std::move(s));
        }
        const std::size_t actual_payload = bytes.size() - 16 - header_len;
        if (expected_payload != actual_payload) {
            throw DataError("archive '" + path.string() + "' payload is " +
                            std::to_string(actual_payload) +
                            " bytes, section table expects " +
                            std::to_string(expected_payload));
        }
        for (ArchiveSection& s : sections) {
            const std::size_t count = s.element_count();
            if (s.dtype == "f32") {
                s.f32.resize(count);
                std::memcpy(s.f32.data(), bytes.data() + offset, count * 4);
            } else {
                s.u32.resize(count);
                std::memcpy(s.u32.data(), bytes.data() + offset, count * 4);
            }
            offset += count * 4;
        }
        archive.sections = std::move(sections);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("archive '" + path.string() + "' has an incomplete header: " +
                        e.what());
    }
    if (strict_finite) {
        for (const ArchiveSection& s : archive.sections) {
            for (const float v : s.f32) {
                if (!std::isfinite(v)) {
                    throw DataError("archive '" + path.string() + "' section '" + s.name +
                                    "' contains a non-finite value");
                }
            }
        }
    }
    return archive;
}

// --- typed wrappers ---

void save_trajectory(const TrajectoryGrid& grid, const nlohmann::json& meta,
                     const std::filesystem::path& path) {
    Archive archive;
    archive.kind = ArchiveKind::trajectory;
    archive.meta = meta.is_null() ? nlohmann::json::object() : meta;
    ArchiveSection s;
    s.name = "deltas";
    s.dtype = "f32";
    s.shape = {static_cast<std::size_t>(grid.frame_count),
               static_cast<std::size_t>(grid.point_count), 3};
    s.f32 = to_f32(grid.deltas);
    archive.sections.push_back(std::move(s));
    write_archive(archive, path);
}

TrajectoryGrid load_trajectory(const std::filesystem::path& path,
                               nlohmann::json* meta_out) {
    const Archive archive = read_archive(path);
    if (archive.kind != ArchiveKind::trajectory) {
        throw DataError("'" + path.string() + "' holds " + to_string(archive.kind) +
                        ", expected trajectory");
    }
    const ArchiveSection& s = archive.section("deltas");
    if (s.shape.size() != 3 || s.shape[2] != 3) {
        throw DataError("trajectory section must be T x n x 3");
    }
    TrajectoryGrid grid(static_cast<int>(s.shape[0]), static_cast<int>(s.shape[1]));
    grid.deltas = to_f64(s.f32);
    if (meta_out) *meta_out = archive.meta;
    return grid;
}

void save_controls(const ControlGrid& grid, const nlohmann::json& meta,
                   const std::filesystem::path& path) {
    Archive archive;
    archive.kind = ArchiveKind::controls;
    archive.meta = meta.is_null() ? nlohmann::json::object() : meta;
    archive.layout["degree"] = grid.degree;
    archive.layout["source_frame_count"] = grid.source_frame_count;
    ArchiveSection s;
    s.name = "control_points";
    s.dtype = "f32";
    s.shape = {static_cast<std::size_t>(grid.control_count),
               static_cast<std::size_t>(grid.point_count), 3};
    s.f32 = to_f32(grid.points);
    archive.sections.push_back(std::move(s));
    write_archive(archive, path);
}

ControlGrid load_controls(const std::filesystem::path& path, nlohmann::json* meta_out) {
    const Archive archive = read_archive(path);
    if (archive.kind != ArchiveKind::controls) {
        throw DataError("'" + path.string() + "' holds " + to_string(archive.kind) +
                        ", expected controls");
    }
    const ArchiveSection& s = archive.section("control_points");
    if (s.shape.size() != 3 || s.shape[2] != 3) {
        throw DataError("controls section must be k x n x 3");
    }
    ControlGrid grid(static_cast<int>(s.shape[0]), static_cast<int>(s.shape[1]),
                     archive.layout.value("degree", 3));
    grid.source_frame_count = archive.layout.value("source_frame_count", 0);
    grid.points = to_f64(s.f32);
    if (meta_out) *meta_out = archive.meta;
    return grid;
}

void save_surface(const SampledSurface& surface, const nlohmann::json& meta,
                  const std::filesystem::path& path) {
    Archive archive;
    archive.kind = ArchiveKind::surface;
    archive.meta = meta.is_null() ? nlohmann::json::object() : meta;
    archive.layout["seed"] = surface.seed;
    const std::size_t n = surface.size();
    ArchiveSection points{"points", "f32", {n, 3}, to_f32(surface.points), {}};
    ArchiveSection normals{"normals", "f32", {n, 3}, to_f32(surface.normals), {}};
    ArchiveSection faces{"face_index", "u32", {n}, {}, surface.face_index};
    ArchiveSection bary{"bary", "f32", {n, 3}, to_f32(surface.bary), {}};
    archive.sections = {std::move(points), std::move(normals), std::move(faces),
                        std::move(bary)};
    write_archive(archive, path);
}

SampledSurface load_surface(const std::filesystem::path& path, nlohmann::json* meta_out) {
    const Archive archive = read_archive(path);
    if (archive.kind != ArchiveKind::surface) {
        throw DataError("'" + path.string() + "' holds " + to_string(archive.kind) +
                        ", expected surface");
    }
    SampledSurface surface;
    surface.points = to_f64(archive.section("points").f32);
    surface.normals = to_f64(archive.section("normals").f32);
    surface.face_index = archive.section("face_index").u32;
    surface.bary = to_f64(archive.section("bary").f32);
    surface.seed = archive.layout.value("seed", std::uint64_t{0});
    if (surface.points.size() != surface.face_index.size() * 3 ||
        surface.bary.size() != surface.face_index.size() * 3) {
        throw DataError("surface sections disagree on sample count");
    }
    if (meta_out) *meta_out = archive.meta;
    return surface;
}

void save_embedding(const EmbeddingStack& stack, const nlohmann::json& meta,
                    const std::filesystem::path& path) {
    if (!stack.basis) throw DataError("embedding stack has no basis to record");
    Archive archive;
    archive.kind = ArchiveKind::embedding;
    archive.meta = meta.is_null() ? nlohmann::json::object() : meta;
    archive.layout["schedule"] = stack.basis->schedule.counts;
    archive.layout["reference_frames"] = stack.basis->schedule.reference_frames;
    archive.layout["mu"] = stack.basis->mu;
    archive.layout["degree"] = stack.basis->degree;
    ArchiveSection s;
    s.name = "stack";
    s.dtype = "f32";
    s.shape = {static_cast<std::size_t>(stack.basis->schedule.total_rows()),
               static_cast<std::size_t>(stack.point_count), 3};
    s.f32 = to_f32(stack.data);
    archive.sections.push_back(std::move(s));
    write_archive(archive, path);
}

EmbeddingStack load_embedding(const std::filesystem::path& path,
                              nlohmann::json* meta_out) {
    const Archive archive = read_archive(path);
    if (archive.kind != ArchiveKind::embedding) {
        throw DataError("'" + path.string() + "' holds " + to_string(archive.kind) +
                        ", expected embedding");
    }
    LevelSchedule schedule;
    try {
        schedule.counts = archive.layout.at("schedule").get<std::vector<int>>();
        schedule.reference_frames = archive.layout.at("reference_frames").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError("embedding archive lacks its schedule: " + std::string(e.what()));
    }
    const double mu = archive.layout.value("mu", 1e-3);
    const int degree = archive.layout.value("degree", 3);

    EmbeddingStack stack;
    stack.basis = std::make_shared<EmbeddingBasis>(
        build_embedding_basis(schedule, degree, mu));
    const ArchiveSection& s = archive.section("stack");
    if (s.shape.size() != 3 || s.shape[2] != 3 ||
        s.shape[0] != static_cast<std::size_t>(schedule.total_rows())) {
        throw DataError("embedding stack section disagrees with its schedule");
    }
    stack.point_count = static_cast<int>(s.shape[1]);
    stack.data = to_f64(s.f32);
    if (meta_out) *meta_out = archive.meta;
    return stack;
}

void save_packed_mesh(const MeshSequence& mesh, const std::filesystem::path& path) {
    Archive archive;
    archive.kind = ArchiveKind::mesh_motion;
    archive.layout = {{"id", mesh.id},
                      {"norm_scale", mesh.norm_scale},
                      {"norm_center", {mesh.norm_center[0], mesh.norm_center[1],
                                       mesh.norm_center[2]}}};
    archive.sections.push_back(
        {"base_vertices", "f32", {mesh.vertex_count(), 3}, to_f32(mesh.base_vertices), {}});
    archive.sections.push_back({"faces", "u32", {mesh.face_count(), 3}, {}, mesh.faces});
    if (mesh.has_normals()) {
        archive.sections.push_back({"vertex_normals",
                                    "f32",
                                    {mesh.vertex_count(), 3},
                                    to_f32(mesh.vertex_normals),
                                    {}});
    }
    if (mesh.deltas.frame_count > 0) {
        archive.sections.push_back({"deltas",
                                    "f32",
                                    {static_cast<std::size_t>(mesh.deltas.frame_count),
                                     static_cast<std::size_t>(mesh.deltas.point_count), 3},
                                    to_f32(mesh.deltas.deltas),
                                    {}});
    }
    write_archive(archive, path);
}

MeshSequence load_packed_mesh(const std::filesystem::path& path) {
    const Archive archive = read_archive(path);
    if (archive.kind != ArchiveKind::mesh_motion) {
        throw DataError("'" + path.string() + "' holds " + to_string(archive.kind) +
                        ", expected mesh_motion");
    }
    MeshSequence mesh;
    mesh.id = archive.layout.value("id", std::string{});
    mesh.norm_scale = archive.layout.value("norm_scale", 1.0);
    if (archive.layout.contains("norm_center")) {
        const auto c = archive.layout["norm_center"].get<std::vector<double>>();
        if (c.size() == 3) std::copy(c.begin(), c.end(), mesh.norm_center);
    }
    mesh.base_vertices = to_f64(archive.section("base_vertices").f32);
    mesh.faces = archive.section("faces").u32;
    for (const ArchiveSection& s : archive.sections) {
        if (s.name == "vertex_normals") mesh.vertex_normals = to_f64(s.f32);
        if (s.name == "deltas") {
            if (s.shape.size() != 3 || s.shape[1] * 3 != mesh.base_vertices.size()) {
                throw DataError("packed mesh motion disagrees with its vertex count");
            }
            mesh.deltas = TrajectoryGrid(static_cast<int>(s.shape[0]),
                                         static_cast<int>(s.shape[1]));
            mesh.deltas.deltas = to_f64(s.f32);
        }
    }
    for (const std::uint32_t idx : mesh.faces) {
        if (std::size_t(idx) >= mesh.vertex_count()) {
            throw DataError("packed mesh face references vertex " + std::to_string(idx) +
                            " beyond vertex count " + std::to_string(mesh.vertex_count()));
        }
    }
    return mesh;
}

}  // namespace mspline

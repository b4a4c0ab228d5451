// Binary motion archives and dataset input.
//
// Archive layout (little-endian):
//   bytes 0..3   magic "BSMA"
//   bytes 4..7   format version, u32 (currently 1)
//   bytes 8..15  header length in bytes, u64
//   ...          UTF-8 JSON header: kind, section table, layout, user metadata
//   ...          section payloads, tightly packed in table order
//
// Payloads are float32 or uint32; numerical state is converted on the
// way in/out, computation stays in doubles. Writes go through a
// temporary file and an atomic rename. Reading back and re-writing an
// archive reproduces it byte for byte.
//
// Dataset input: a JSON manifest listing sequences, each given as OBJ
// frame files, one packed mesh archive, or a trajectory archive.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mspline/embedding.hpp"
#include "mspline/grids.hpp"
#include "mspline/sampling.hpp"

namespace mspline {

enum class ArchiveKind { trajectory, controls, surface, embedding, mesh_motion };

std::string to_string(ArchiveKind kind);
ArchiveKind archive_kind_from_string(const std::string& name);

// One named payload. Exactly one of f32/u32 is populated, matching
// dtype; element count equals the shape product.
struct ArchiveSection {
    std::string name;
    std::string dtype;  // "f32" | "u32"
    std::vector<std::size_t> shape;
    std::vector<float> f32;
    std::vector<std::uint32_t> u32;

    std::size_t element_count() const;
};

struct Archive {
    ArchiveKind kind = ArchiveKind::trajectory;
    nlohmann::json meta;    // free-form user metadata, round-tripped verbatim
    nlohmann::json layout;  // structural keys the typed wrappers read back
    std::vector<ArchiveSection> sections;

    const ArchiveSection& section(const std::string& name) const;
};

// Validates shapes and finiteness, then writes atomically. Throws
// DataError on inconsistent sections or I/O failure.
void write_archive(const Archive& archive, const std::filesystem::path& path);

// Throws DataError on bad magic, unsupported version, malformed header,
// or byte counts that disagree with the section table. strict_finite
// additionally rejects non-finite floats in any payload.
Archive read_archive(const std::filesystem::path& path, bool strict_finite = false);

// Grid/surface/embedding convenience wrappers. Extra metadata lands
// under the archive's meta and is preserved on load.
void save_trajectory(const TrajectoryGrid& grid, const nlohmann::json& meta,
                     const std::filesystem::path& path);
TrajectoryGrid load_trajectory(const std::filesystem::path& path,
                               nlohmann::json* meta_out = nullptr);

void save_controls(const ControlGrid& grid, const nlohmann::json& meta,
                   const std::filesystem::path& path);
ControlGrid load_controls(const std::filesystem::path& path,
                          nlohmann::json* meta_out = nullptr);

void save_surface(const SampledSurface& surface, const nlohmann::json& meta,
                  const std::filesystem::path& path);
SampledSurface load_surface(const std::filesystem::path& path,
                            nlohmann::json* meta_out = nullptr);

// The embedding archive records schedule, reference frames, mu, and
// degree; load rebuilds the deterministic basis from those.
void save_embedding(const EmbeddingStack& stack, const nlohmann::json& meta,
                    const std::filesystem::path& path);
EmbeddingStack load_embedding(const std::filesystem::path& path,
                              nlohmann::json* meta_out = nullptr);

// Packed mesh archive: base vertices, faces, optional normals and motion.
void save_packed_mesh(const MeshSequence& mesh, const std::filesystem::path& path);
MeshSequence load_packed_mesh(const std::filesystem::path& path);

// --- dataset manifests ---

struct ManifestEntry {
    std::string id;
    std::vector<std::filesystem::path> frames;  // OBJ files, frame 0 first
    std::filesystem::path packed;               // packed mesh archive
    std::filesystem::path trajectory;           // trajectory archive
    std::filesystem::path base_points;          // optional points for trajectory entries
    std::vector<std::string> captions;

    bool is_mesh() const { return !frames.empty() || !packed.empty(); }
};

struct DatasetManifest {
    std::filesystem::path root;  // directory relative paths resolve against
    bool normalize = false;
    std::vector<ManifestEntry> entries;

    const ManifestEntry& entry(const std::string& id) const;
};

DatasetManifest load_manifest(const std::filesystem::path& path);

// Loads OBJ frames or a packed mesh for one entry; applies box
// normalization when the manifest requests it. Displacements are taken
// against frame 0, so a sequence of F files yields F-1 motion frames.
MeshSequence load_mesh_sequence(const DatasetManifest& manifest, const ManifestEntry& entry);

// OBJ frame loader used by load_mesh_sequence; exposed for single files.
MeshSequence load_obj_frames(std::span<const std::filesystem::path> files,
                             bool normalize);

// Writes vertices (and the mesh's faces) as a minimal OBJ file.
void write_obj(const std::filesystem::path& path, std::span<const double> vertices,
               std::span<const std::uint32_t> faces);

// Scale-and-center into [-0.9, 0.9]^3 based on the base vertices;
// records scale and center on the mesh and rescales motion to match.
void normalize_mesh(MeshSequence& mesh);

}  // namespace mspline

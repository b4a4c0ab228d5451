// Surface sampling and point-set utilities: area-weighted random sampling
// of triangle meshes with barycentric records, attribute interpolation
// through those records, farthest-point subset selection, and brute-force
// k-nearest-neighbor indices.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mspline/grids.hpp"

namespace mspline {

// A triangle mesh with optional per-vertex normals and optional
// per-vertex motion (displacements from the base vertices).
struct MeshSequence {
    std::string id;
    std::vector<double> base_vertices;        // n_v x 3
    std::vector<std::uint32_t> faces;         // n_f x 3
    std::vector<double> vertex_normals;       // n_v x 3 or empty
    TrajectoryGrid deltas;                    // frame_count may be 0 (static mesh)
    double norm_scale = 1.0;                  // applied normalization, 1/identity
    double norm_center[3] = {0.0, 0.0, 0.0};
    std::vector<std::string> warnings;        // soft validation notes

    std::size_t vertex_count() const { return base_vertices.size() / 3; }
    std::size_t face_count() const { return faces.size() / 3; }
    bool has_normals() const { return !vertex_normals.empty(); }
};

enum class NormalSource {
    automatic,  // provided normals when present, else averaged
    provided,   // require mesh normals
    averaged,   // area-weighted average of incident face normals
    flat        // per-sample face normal
};

// Surface points with everything needed to re-evaluate them on any
// deformed copy of the same mesh: face index and barycentric weights.
struct SampledSurface {
    std::vector<double> points;             // N x 3
    std::vector<double> normals;            // N x 3, unit
    std::vector<std::uint32_t> face_index;  // N
    std::vector<double> bary;               // N x 3, nonnegative, sums to 1
    std::uint64_t seed = 0;

    std::size_t size() const { return face_index.size(); }
};

// Draws `count` points with per-face probability proportional to area.
// Zero-area faces are never selected. The generator is a fixed-width
// Mersenne Twister consuming three draws per sample, so results are
// identical across platforms and runs for the same seed.
SampledSurface sample_surface(const MeshSequence& mesh, std::size_t count,
                              std::uint64_t seed, NormalSource normals = NormalSource::automatic);

// out[s, :] = sum_i bary[s, i] * field[face_vertex_i(s), :]. field is
// vertex_count x width row-major.
std::vector<double> interpolate_attributes(const SampledSurface& surface,
                                           const MeshSequence& mesh,
                                           std::span<const double> field,
                                           std::size_t width);

// Per-frame barycentric transfer of a per-vertex trajectory onto the
// sampled points.
TrajectoryGrid interpolate_trajectory(const SampledSurface& surface,
                                      const MeshSequence& mesh,
                                      const TrajectoryGrid& vertex_motion);

// Same transfer for a fitted control grid.
ControlGrid interpolate_controls(const SampledSurface& surface, const MeshSequence& mesh,
                                 const ControlGrid& vertex_controls);

// Greedy farthest-point selection: starting from start_index, repeatedly
// takes the point maximizing the minimum distance to the selected set,
// ties broken by lowest index. Deterministic.
std::vector<std::uint32_t> farthest_point_sample(std::span<const double> points,
                                                 std::size_t target,
                                                 std::size_t start_index = 0);

// Brute-force k-nearest-neighbors (self excluded), each row sorted by
// (distance, index). points is P x 3; returns P x k indices.
std::vector<std::uint32_t> knn(std::span<const double> points, int k);

}  // namespace mspline

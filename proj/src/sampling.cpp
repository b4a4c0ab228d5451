#include "mspline/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "mspline/errors.hpp"
#include "mspline/kernels.hpp"

namespace mspline {

namespace {

// Uniform double in [0, 1) from the top 53 bits; identical on every
// platform with IEEE doubles.
inline double to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

struct Vec3 {
    double x, y, z;
};

inline Vec3 vertex(const MeshSequence& mesh, std::uint32_t idx) {
    const double* p = mesh.base_vertices.data() + std::size_t(idx) * 3;
    return {p[0], p[1], p[2]};
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline Vec3 sub(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }

inline double norm(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

// Twice the face area times the unit normal.
Vec3 face_cross(const MeshSequence& mesh, std::size_t f) {
    const Vec3 a = vertex(mesh, mesh.faces[3 * f + 0]);
    const Vec3 b = vertex(mesh, mesh.faces[3 * f + 1]);
    const Vec3 c = vertex(mesh, mesh.faces[3 * f + 2]);
    return cross(sub(b, a), sub(c, a));
}

std::vector<double> averaged_vertex_normals(const MeshSequence& mesh) {
    std::vector<double> acc(mesh.base_vertices.size(), 0.0);
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        const Vec3 n = face_cross(mesh, f);  // length-weighted by area
        for (int v = 0; v < 3; ++v) {
            double* slot = acc.data() + std::size_t(mesh.faces[3 * f + v]) * 3;
            slot[0] += n.x;
            slot[1] += n.y;
            slot[2] += n.z;
        }
    }
    for (std::size_t i = 0; i < acc.size(); i += 3) {
        const double len =
            std::sqrt(acc[i] * acc[i] + acc[i + 1] * acc[i + 1] + acc[i + 2] * acc[i + 2]);
        if (len > 1e-12) {
            acc[i] /= len;
            acc[i + 1] /= len;
            acc[i + 2] /= len;
        }
    }
    return acc;
}

void check_mesh(const MeshSequence& mesh) {
    if (mesh.base_vertices.empty() || mesh.base_vertices.size() % 3 != 0) {
        throw DataError("mesh has no valid vertex array");
    }
    if (mesh.faces.empty() || mesh.faces.size() % 3 != 0) {
        throw DataError("mesh has no valid face array");
    }
    for (const std::uint32_t idx : mesh.faces) {
        if (std::size_t(idx) >= mesh.vertex_count()) {
            throw DataError("face references vertex " + std::to_string(idx) +
                            " beyond vertex count " + std::to_string(mesh.vertex_count()));
        }
    }
}

}  // namespace

SampledSurface sample_surface(const MeshSequence& mesh, std::size_t count,
                              std::uint64_t seed, NormalSource normal_source) {
    check_mesh(mesh);
    if (count == 0) throw std::invalid_argument("sample count must be positive");
    if (normal_source == NormalSource::provided && !mesh.has_normals()) {
        throw DataError("mesh provides no vertex normals");
    }

    const std::size_t n_faces = mesh.face_count();
    std::vector<double> cumulative(n_faces);
    std::vector<Vec3> face_normals(n_faces);
    double total = 0.0;
    for (std::size_t f = 0; f < n_faces; ++f) {
        const Vec3 c = face_cross(mesh, f);
        const double area2 = norm(c);
        total += (area2 > 0.0) ? area2 : 0.0;
        cumulative[f] = total;
        face_normals[f] = area2 > 0.0 ? Vec3{c.x / area2, c.y / area2, c.z / area2}
                                      : Vec3{0.0, 0.0, 0.0};
    }
    if (!(total > 0.0)) throw DataError("every face of the mesh is degenerate");

    const std::vector<double>* vertex_normals = nullptr;
    std::vector<double> averaged;
    if (normal_source == NormalSource::provided ||
        (normal_source == NormalSource::automatic && mesh.has_normals())) {
        vertex_normals = &mesh.vertex_normals;
    } else if (normal_source == NormalSource::averaged ||
               normal_source == NormalSource::automatic) {
        averaged = averaged_vertex_normals(mesh);
        vertex_normals = &averaged;
    }

    SampledSurface out;
    out.seed = seed;
    out.points.resize(count * 3);
    out.normals.resize(count * 3);
    out.face_index.resize(count);
    out.bary.resize(count * 3);

    std::mt19937_64 rng(seed);
    for (std::size_t s = 0; s < count; ++s) {
        // Three draws per sample in fixed order: face selector, two
        // barycentric coordinates.
        const double pick = to_unit(rng()) * total;
        double u1 = to_unit(rng());
        double u2 = to_unit(rng());
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
        std::size_t f = std::min<std::size_t>(
            static_cast<std::size_t>(it - cumulative.begin()), n_faces - 1);
        // Rounding can push pick onto the terminal plateau; step back to
        // the face that actually carries measure.
        while (f > 0 && cumulative[f] == cumulative[f - 1]) --f;
        if (u1 + u2 > 1.0) {
            u1 = 1.0 - u1;
            u2 = 1.0 - u2;
        }
        const double w0 = 1.0 - u1 - u2;
        out.face_index[s] = static_cast<std::uint32_t>(f);
        out.bary[3 * s + 0] = w0;
        out.bary[3 * s + 1] = u1;
        out.bary[3 * s + 2] = u2;
        const Vec3 a = vertex(mesh, mesh.faces[3 * f + 0]);
        const Vec3 b = vertex(mesh, mesh.faces[3 * f + 1]);
        const Vec3 c = vertex(mesh, mesh.faces[3 * f + 2]);
        out.points[3 * s + 0] = w0 * a.x + u1 * b.x + u2 * c.x;
        out.points[3 * s + 1] = w0 * a.y + u1 * b.y + u2 * c.y;
        out.points[3 * s + 2] = w0 * a.z + u1 * b.z + u2 * c.z;

        Vec3 n{0.0, 0.0, 0.0};
        if (normal_source != NormalSource::flat && vertex_normals != nullptr) {
            const double* n0 =
                vertex_normals->data() + std::size_t(mesh.faces[3 * f + 0]) * 3;
            const double* n1 =
                vertex_normals->data() + std::size_t(mesh.faces[3 * f + 1]) * 3;
            const double* n2 =
                vertex_normals->data() + std::size_t(mesh.faces[3 * f + 2]) * 3;
            n = {w0 * n0[0] + u1 * n1[0] + u2 * n2[0],
                 w0 * n0[1] + u1 * n1[1] + u2 * n2[1],
                 w0 * n0[2] + u1 * n1[2] + u2 * n2[2]};
            const double len = norm(n);
            if (len > 1e-12) {
                n = {n.x / len, n.y / len, n.z / len};
            } else {
                n = face_normals[f];
            }
        } else {
            n = face_normals[f];
        }
        out.normals[3 * s + 0] = n.x;
        out.normals[3 * s + 1] = n.y;
        out.normals[3 * s + 2] = n.z;
    }
    return out;
}

std::vector<double> interpolate_attributes(const SampledSurface& surface,
                                           const MeshSequence& mesh,
                                           std::span<const double> field,
                                           std::size_t width) {
    if (width == 0 || field.size() != mesh.vertex_count() * width) {
        throw std::invalid_argument("field is not vertex_count x width");
    }
    const std::size_t n = surface.size();
    // Expand face indices to vertex-row indices once, then gather.
    std::vector<std::uint32_t> rows(n * 3);
    for (std::size_t s = 0; s < n; ++s) {
        const std::uint32_t f = surface.face_index[s];
        rows[3 * s + 0] = mesh.faces[3 * f + 0];
        rows[3 * s + 1] = mesh.faces[3 * f + 1];
        rows[3 * s + 2] = mesh.faces[3 * f + 2];
    }
    std::vector<double> out(n * width);
    kernels::bary_gather(rows.data(), surface.bary.data(), n, field.data(), width,
                         out.data());
    return out;
}

TrajectoryGrid interpolate_trajectory(const SampledSurface& surface,
                                      const MeshSequence& mesh,
                                      const TrajectoryGrid& vertex_motion) {
    if (std::size_t(vertex_motion.point_count) != mesh.vertex_count()) {
        throw std::invalid_argument("trajectory point count does not match mesh");
    }
    TrajectoryGrid out(vertex_motion.frame_count, static_cast<int>(surface.size()));
    for (int t = 0; t < vertex_motion.frame_count; ++t) {
        const std::span<const double> slice(vertex_motion.frame(t),
                                            vertex_motion.columns());
        const std::vector<double> frame = interpolate_attributes(surface, mesh, slice, 3);
        std::copy(frame.begin(), frame.end(), out.frame(t));
    }
    return out;
}

ControlGrid interpolate_controls(const SampledSurface& surface, const MeshSequence& mesh,
                                 const ControlGrid& vertex_controls) {
    if (std::size_t(vertex_controls.point_count) != mesh.vertex_count()) {
        throw std::invalid_argument("control point count does not match mesh");
    }
    ControlGrid out(vertex_controls.control_count, static_cast<int>(surface.size()),
                    vertex_controls.degree);
    out.source_frame_count = vertex_controls.source_frame_count;
    for (int i = 0; i < vertex_controls.control_count; ++i) {
        const std::span<const double> slice(vertex_controls.row(i),
                                            vertex_controls.columns());
        const std::vector<double> row = interpolate_attributes(surface, mesh, slice, 3);
        std::copy(row.begin(), row.end(), out.row(i));
    }
    return out;
}

std::vector<std::uint32_t> farthest_point_sample(std::span<const double> points,
                                                 std::size_t target,
                                                 std::size_t start_index) {
    const std::size_t n = points.size() / 3;
    if (points.size() % 3 != 0 || n == 0) {
        throw std::invalid_argument("points must be P x 3");
    }
    if (target == 0 || target > n) {
        throw std::invalid_argument("farthest-point target out of range");
    }
    if (start_index >= n) throw std::invalid_argument("start index out of range");

    std::vector<double> xs(n), ys(n), zs(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = points[3 * i + 0];
        ys[i] = points[3 * i + 1];
        zs[i] = points[3 * i + 2];
    }
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<std::uint32_t> selected;
    selected.reserve(target);
    std::size_t current = start_index;
    selected.push_back(static_cast<std::uint32_t>(current));
    while (selected.size() < target) {
        const double q[3] = {xs[current], ys[current], zs[current]};
        kernels::min_dist_update(xs.data(), ys.data(), zs.data(), n, q, dist.data());
        // Strict > keeps the lowest index on ties; selected points have
        // distance zero and are never re-chosen while others remain.
        std::size_t best = 0;
        double best_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (dist[i] > best_d) {
                best_d = dist[i];
                best = i;
            }
        }
        current = best;
        selected.push_back(static_cast<std::uint32_t>(current));
    }
    return selected;
}

std::vector<std::uint32_t> knn(std::span<const double> points, int k) {
    const std::size_t n = points.size() / 3;
    if (points.size() % 3 != 0 || n == 0) {
        throw std::invalid_argument("points must be P x 3");
    }
    if (k < 1 || static_cast<std::size_t>(k) >= n) {
        throw std::invalid_argument("knn needs 1 <= k < point count");
    }
    const auto kk = static_cast<std::size_t>(k);
    std::vector<std::uint32_t> out(n * kk);
    std::vector<std::pair<double, std::uint32_t>> cand(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double px = points[3 * i], py = points[3 * i + 1], pz = points[3 * i + 2];
        std::size_t m = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dx = points[3 * j] - px;
            const double dy = points[3 * j + 1] - py;
            const double dz = points[3 * j + 2] - pz;
            cand[m++] = {dx * dx + dy * dy + dz * dz, static_cast<std::uint32_t>(j)};
        }
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(kk),
                          cand.end());
        for (std::size_t r = 0; r < kk; ++r) out[i * kk + r] = cand[r].second;
    }
    return out;
}

}  // namespace mspline

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "mspline/errors.hpp"
#include "mspline/sampling.hpp"

#include "oracles.hpp"

using namespace mspline;

namespace {

// Unit square in the xy plane split into two triangles.
MeshSequence unit_square() {
    MeshSequence mesh;
    mesh.id = "square";
    mesh.base_vertices = {0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0};
    mesh.faces = {0, 1, 2, 0, 2, 3};
    return mesh;
}

// Two coplanar triangles with area ratio 1 : 4.
MeshSequence lopsided_pair() {
    MeshSequence mesh;
    mesh.base_vertices = {
        0, 0, 0, 1, 0, 0, 0, 1, 0,   // area 1/2
        5, 0, 0, 9, 0, 0, 5, 1, 0,   // area 2
    };
    mesh.faces = {0, 1, 2, 3, 4, 5};
    return mesh;
}

std::vector<double> random_cloud(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> pts(n * 3);
    for (double& v : pts) v = dist(rng);
    return pts;
}

}  // namespace

TEST_CASE("face selection follows area") {
    const MeshSequence mesh = lopsided_pair();
    const std::size_t n = 20000;
    const SampledSurface surface = sample_surface(mesh, n, 7);
    std::array<std::size_t, 2> counts{0, 0};
    for (const std::uint32_t f : surface.face_index) counts[f]++;
    // Expected 1/5 vs 4/5; chi-square with one degree of freedom.
    const double e0 = n / 5.0, e1 = 4.0 * n / 5.0;
    const double chi2 = (counts[0] - e0) * (counts[0] - e0) / e0 +
                        (counts[1] - e1) * (counts[1] - e1) / e1;
    CHECK(oracles::chi_square_sf(chi2, 1) > 0.001);
}

TEST_CASE("samples are uniform over the surface") {
    const MeshSequence mesh = unit_square();
    const std::size_t n = 20000;
    const SampledSurface surface = sample_surface(mesh, n, 99);
    // Bin into a 4x4 grid over the square.
    std::array<std::size_t, 16> counts{};
    for (std::size_t s = 0; s < n; ++s) {
        const double x = surface.points[3 * s + 0];
        const double y = surface.points[3 * s + 1];
        REQUIRE(x >= 0.0);
        REQUIRE(x <= 1.0);
        const auto cx = std::min<std::size_t>(static_cast<std::size_t>(x * 4.0), 3);
        const auto cy = std::min<std::size_t>(static_cast<std::size_t>(y * 4.0), 3);
        counts[cy * 4 + cx]++;
    }
    const double expected = static_cast<double>(n) / 16.0;
    double chi2 = 0.0;
    for (const std::size_t c : counts) {
        const double d = static_cast<double>(c) - expected;
        chi2 += d * d / expected;
    }
    CHECK(oracles::chi_square_sf(chi2, 15) > 0.001);
}

TEST_CASE("barycentric records reproduce the sampled points") {
    const MeshSequence mesh = lopsided_pair();
    const SampledSurface surface = sample_surface(mesh, 500, 3);
    for (std::size_t s = 0; s < surface.size(); ++s) {
        const double w0 = surface.bary[3 * s + 0];
        const double w1 = surface.bary[3 * s + 1];
        const double w2 = surface.bary[3 * s + 2];
        CHECK(w0 >= 0.0);
        CHECK(w1 >= 0.0);
        CHECK(w2 >= 0.0);
        CHECK(std::fabs(w0 + w1 + w2 - 1.0) <= 1e-15);
    }
    // The interpolation kernel and the sampler accumulate in the same
    // order, so re-evaluating the base positions is bitwise exact.
    const std::vector<double> again =
        interpolate_attributes(surface, mesh, mesh.base_vertices, 3);
    CHECK(again == surface.points);
}

TEST_CASE("sampling is deterministic in the seed") {
    const MeshSequence mesh = unit_square();
    const SampledSurface a = sample_surface(mesh, 300, 12345);
    const SampledSurface b = sample_surface(mesh, 300, 12345);
    CHECK(a.points == b.points);
    CHECK(a.normals == b.normals);
    CHECK(a.face_index == b.face_index);
    CHECK(a.bary == b.bary);
    const SampledSurface c = sample_surface(mesh, 300, 12346);
    CHECK(a.points != c.points);
}

TEST_CASE("degenerate faces are never selected") {
    MeshSequence mesh = unit_square();
    // Append a zero-area face.
    mesh.base_vertices.insert(mesh.base_vertices.end(), {2, 2, 0});
    mesh.faces.insert(mesh.faces.end(), {4, 4, 4});
    const SampledSurface surface = sample_surface(mesh, 2000, 5);
    for (const std::uint32_t f : surface.face_index) CHECK(f < 2);

    MeshSequence dead;
    dead.base_vertices = {0, 0, 0, 1, 1, 1};
    dead.faces = {0, 0, 1};
    CHECK_THROWS_AS(sample_surface(dead, 10, 0), DataError);
}

TEST_CASE("mesh and argument validation") {
    MeshSequence empty;
    CHECK_THROWS_AS(sample_surface(empty, 10, 0), DataError);

    MeshSequence bad_face = unit_square();
    bad_face.faces[0] = 17;
    CHECK_THROWS_AS(sample_surface(bad_face, 10, 0), DataError);

    CHECK_THROWS_AS(sample_surface(unit_square(), 0, 0), std::invalid_argument);
}

TEST_CASE("normal sources") {
    MeshSequence mesh = unit_square();
    const SampledSurface flat = sample_surface(mesh, 50, 1, NormalSource::flat);
    for (std::size_t s = 0; s < flat.size(); ++s) {
        CHECK(flat.normals[3 * s + 0] == 0.0);
        CHECK(flat.normals[3 * s + 1] == 0.0);
        CHECK(flat.normals[3 * s + 2] == 1.0);
    }

    // Averaged normals of a planar mesh coincide with the face normal.
    const SampledSurface avg = sample_surface(mesh, 50, 1, NormalSource::averaged);
    CHECK(avg.normals == flat.normals);

    CHECK_THROWS_AS(sample_surface(mesh, 10, 0, NormalSource::provided), DataError);

    // Provided normals are interpolated and renormalized.
    mesh.vertex_normals.assign(mesh.vertex_count() * 3, 0.0);
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
        mesh.vertex_normals[3 * v + 0] = 3.0;  // deliberately unnormalized
    }
    const SampledSurface provided = sample_surface(mesh, 50, 1, NormalSource::provided);
    for (std::size_t s = 0; s < provided.size(); ++s) {
        CHECK(provided.normals[3 * s + 0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(provided.normals[3 * s + 1] == 0.0);
        CHECK(provided.normals[3 * s + 2] == 0.0);
    }
    // automatic prefers provided normals when present.
    const SampledSurface autosrc = sample_surface(mesh, 50, 1, NormalSource::automatic);
    CHECK(autosrc.normals == provided.normals);

    // Unit length always holds.
    for (std::size_t s = 0; s < avg.size(); ++s) {
        const double* n = avg.normals.data() + 3 * s;
        const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
        CHECK(std::fabs(len - 1.0) <= 1e-12);
    }
}

TEST_CASE("attribute interpolation transfers motion") {
    const MeshSequence mesh = unit_square();
    const SampledSurface surface = sample_surface(mesh, 100, 8);

    // A per-vertex field linear in position transfers exactly.
    std::vector<double> field(mesh.vertex_count());
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
        field[v] = 2.0 * mesh.base_vertices[3 * v + 0] - mesh.base_vertices[3 * v + 1];
    }
    const std::vector<double> values = interpolate_attributes(surface, mesh, field, 1);
    for (std::size_t s = 0; s < surface.size(); ++s) {
        const double want = 2.0 * surface.points[3 * s + 0] - surface.points[3 * s + 1];
        CHECK(std::fabs(values[s] - want) <= 1e-12);
    }

    CHECK_THROWS_AS(interpolate_attributes(surface, mesh, field, 2),
                    std::invalid_argument);

    // Trajectory transfer, frame by frame.
    TrajectoryGrid motion(3, static_cast<int>(mesh.vertex_count()));
    for (int t = 0; t < 3; ++t) {
        for (int p = 0; p < motion.point_count; ++p) {
            motion.at(t, p, 0) = 0.1 * t * mesh.base_vertices[3 * std::size_t(p)];
            motion.at(t, p, 2) = 0.5 * t;
        }
    }
    const TrajectoryGrid transferred = interpolate_trajectory(surface, mesh, motion);
    REQUIRE(transferred.frame_count == 3);
    REQUIRE(transferred.point_count == static_cast<int>(surface.size()));
    for (int t = 0; t < 3; ++t) {
        for (std::size_t s = 0; s < surface.size(); ++s) {
            CHECK(std::fabs(transferred.at(t, static_cast<int>(s), 0) -
                            0.1 * t * surface.points[3 * s]) <= 1e-12);
            CHECK(transferred.at(t, static_cast<int>(s), 1) == 0.0);
            CHECK(std::fabs(transferred.at(t, static_cast<int>(s), 2) - 0.5 * t) <=
                  1e-12);
        }
    }

    TrajectoryGrid mismatched(3, 7);
    CHECK_THROWS_AS(interpolate_trajectory(surface, mesh, mismatched),
                    std::invalid_argument);

    // Control grids transfer the same way.
    ControlGrid controls(4, static_cast<int>(mesh.vertex_count()), 3);
    for (int i = 0; i < 4; ++i) {
        for (int p = 0; p < controls.point_count; ++p) {
            controls.row(i)[3 * p + 1] = static_cast<double>(i);
        }
    }
    const ControlGrid moved = interpolate_controls(surface, mesh, controls);
    REQUIRE(moved.control_count == 4);
    for (int i = 0; i < 4; ++i) {
        for (std::size_t s = 0; s < surface.size(); ++s) {
            CHECK(std::fabs(moved.row(i)[3 * s + 1] - i) <= 1e-12);
        }
    }
}

TEST_CASE("farthest-point selection on a line") {
    std::vector<double> pts(10 * 3, 0.0);
    for (std::size_t i = 0; i < 10; ++i) pts[3 * i] = static_cast<double>(i);
    const std::vector<std::uint32_t> picks = farthest_point_sample(pts, 3);
    REQUIRE(picks.size() == 3);
    CHECK(picks[0] == 0);
    CHECK(picks[1] == 9);
    CHECK(picks[2] == 4);  // tie between 4 and 5 resolves to the lower index

    const std::vector<std::uint32_t> from_nine = farthest_point_sample(pts, 2, 9);
    CHECK(from_nine[0] == 9);
    CHECK(from_nine[1] == 0);
}

TEST_CASE("farthest-point selection matches the reference") {
    for (const std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const std::vector<double> pts = random_cloud(500, seed);
        const std::vector<std::uint32_t> got = farthest_point_sample(pts, 40);
        const std::vector<std::uint32_t> want = oracles::fps_reference(pts, 40, 0);
        CHECK(got == want);
    }
    const std::vector<double> pts = random_cloud(64, 9);
    CHECK(farthest_point_sample(pts, 64).size() == 64);
    CHECK_THROWS_AS(farthest_point_sample(pts, 65), std::invalid_argument);
    CHECK_THROWS_AS(farthest_point_sample(pts, 0), std::invalid_argument);
    CHECK_THROWS_AS(farthest_point_sample(pts, 4, 64), std::invalid_argument);
}

TEST_CASE("knn matches the reference") {
    for (const std::uint64_t seed : {4ull, 5ull}) {
        const std::vector<double> pts = random_cloud(150, seed);
        const std::vector<std::uint32_t> got = knn(pts, 8);
        const std::vector<std::uint32_t> want = oracles::knn_reference(pts, 8);
        CHECK(got == want);
    }

    // A regular grid is full of exact ties; ordering must stay (d, idx).
    std::vector<double> grid;
    for (int x = 0; x < 4; ++x) {
        for (int y = 0; y < 4; ++y) {
            grid.insert(grid.end(), {double(x), double(y), 0.0});
        }
    }
    CHECK(knn(grid, 5) == oracles::knn_reference(grid, 5));

    const std::vector<double> tiny = random_cloud(3, 6);
    CHECK_THROWS_AS(knn(tiny, 3), std::invalid_argument);
    CHECK_THROWS_AS(knn(tiny, 0), std::invalid_argument);
    CHECK(knn(tiny, 2).size() == 6);
}

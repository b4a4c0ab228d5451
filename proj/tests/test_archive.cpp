#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "mspline/archive.hpp"
#include "mspline/errors.hpp"

using namespace mspline;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "mspline_archive_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::vector<char> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::vector<char>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

TrajectoryGrid random_grid(int frames, int points, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    TrajectoryGrid grid(frames, points);
    for (double& v : grid.deltas) v = dist(rng);
    return grid;
}

// The value the archive will hand back: one trip through float32.
double quantized(double v) { return static_cast<double>(static_cast<float>(v)); }

MeshSequence small_mesh() {
    MeshSequence mesh;
    mesh.id = "patch";
    mesh.base_vertices = {0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0};
    mesh.faces = {0, 1, 2, 0, 2, 3};
    mesh.vertex_normals.assign(12, 0.0);
    for (std::size_t v = 0; v < 4; ++v) mesh.vertex_normals[3 * v + 2] = 1.0;
    mesh.deltas = TrajectoryGrid(2, 4);
    mesh.deltas.at(0, 1, 2) = 0.25;
    mesh.deltas.at(1, 1, 2) = 0.5;
    return mesh;
}

std::size_t header_length(const std::vector<char>& bytes) {
    std::uint64_t len = 0;
    std::memcpy(&len, bytes.data() + 8, sizeof(len));
    return static_cast<std::size_t>(len);
}

}  // namespace

TEST_CASE("trajectory archives round trip and rewrite byte-identically") {
    const fs::path path = scratch_dir() / "traj.bsma";
    const TrajectoryGrid grid = random_grid(9, 4, 1);
    save_trajectory(grid, {{"note", "unit"}}, path);

    nlohmann::json meta;
    const TrajectoryGrid back = load_trajectory(path, &meta);
    REQUIRE(back.frame_count == 9);
    REQUIRE(back.point_count == 4);
    CHECK(meta.at("note") == "unit");
    for (std::size_t i = 0; i < grid.deltas.size(); ++i) {
        CHECK(back.deltas[i] == quantized(grid.deltas[i]));
    }

    // Values already quantized: writing what we read reproduces the file.
    const fs::path second = scratch_dir() / "traj2.bsma";
    save_trajectory(back, meta, second);
    CHECK(slurp(path) == slurp(second));

    // And a third trip keeps the payload stable too.
    const TrajectoryGrid third = load_trajectory(second);
    CHECK(third.deltas == back.deltas);
}

TEST_CASE("metadata rides along verbatim") {
    const fs::path path = scratch_dir() / "meta.bsma";
    const nlohmann::json meta = {{"nested", {{"values", {1, 2, 3}}}},
                                 {"text", "free form"},
                                 {"number", 2.5}};
    save_trajectory(random_grid(2, 1, 3), meta, path);
    nlohmann::json out;
    load_trajectory(path, &out);
    CHECK(out == meta);
}

TEST_CASE("controls archives keep degree and provenance") {
    const fs::path path = scratch_dir() / "controls.bsma";
    ControlGrid grid(5, 3, 2);
    grid.source_frame_count = 44;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (double& v : grid.points) v = dist(rng);
    save_controls(grid, {}, path);
    const ControlGrid back = load_controls(path);
    CHECK(back.control_count == 5);
    CHECK(back.point_count == 3);
    CHECK(back.degree == 2);
    CHECK(back.source_frame_count == 44);
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        CHECK(back.points[i] == quantized(grid.points[i]));
    }
}

TEST_CASE("surface archives preserve the resample records") {
    const MeshSequence mesh = small_mesh();
    const SampledSurface surface = sample_surface(mesh, 64, 77);
    const fs::path path = scratch_dir() / "surface.bsma";
    save_surface(surface, {{"source", mesh.id}}, path);
    nlohmann::json meta;
    const SampledSurface back = load_surface(path, &meta);
    REQUIRE(back.size() == 64);
    CHECK(back.seed == 77);
    CHECK(meta.at("source") == "patch");
    CHECK(back.face_index == surface.face_index);
    for (std::size_t i = 0; i < surface.points.size(); ++i) {
        CHECK(back.points[i] == quantized(surface.points[i]));
        CHECK(back.normals[i] == quantized(surface.normals[i]));
        CHECK(back.bary[i] == quantized(surface.bary[i]));
    }
}

TEST_CASE("embedding archives rebuild their basis") {
    const LevelSchedule sched{{9, 7}, 16};
    const auto basis = std::make_shared<EmbeddingBasis>(build_embedding_basis(sched));
    ControlGrid grid(9, 2, 3);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (double& v : grid.points) v = dist(rng);
    const EmbeddingStack stack = embed(grid, basis);

    const fs::path path = scratch_dir() / "embed.bsma";
    save_embedding(stack, {}, path);
    const EmbeddingStack back = load_embedding(path);
    REQUIRE(back.basis != nullptr);
    CHECK(back.basis->schedule.counts == sched.counts);
    CHECK(back.basis->schedule.reference_frames == 16);
    CHECK(back.basis->degree == 3);
    CHECK(back.basis->mu == basis->mu);
    CHECK(back.point_count == 2);
    REQUIRE(back.data.size() == stack.data.size());
    for (std::size_t i = 0; i < stack.data.size(); ++i) {
        CHECK(back.data[i] == quantized(stack.data[i]));
    }
    // The rebuilt basis reconstructs to the quantized grid.
    const ControlGrid recon = reconstruct_from_embedding(back);
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        CHECK(recon.points[i] == doctest::Approx(grid.points[i]).epsilon(1e-5));
    }
}

TEST_CASE("packed meshes round trip") {
    const MeshSequence mesh = small_mesh();
    const fs::path path = scratch_dir() / "mesh.bsma";
    save_packed_mesh(mesh, path);
    const MeshSequence back = load_packed_mesh(path);
    CHECK(back.id == "patch");
    CHECK(back.faces == mesh.faces);
    CHECK(back.vertex_count() == 4);
    CHECK(back.deltas.frame_count == 2);
    CHECK(back.norm_scale == 1.0);
    for (std::size_t i = 0; i < mesh.base_vertices.size(); ++i) {
        CHECK(back.base_vertices[i] == quantized(mesh.base_vertices[i]));
        CHECK(back.vertex_normals[i] == quantized(mesh.vertex_normals[i]));
    }
    CHECK(back.deltas.at(0, 1, 2) == quantized(0.25));

    // Optional parts can be absent.
    MeshSequence bare = mesh;
    bare.vertex_normals.clear();
    bare.deltas = TrajectoryGrid();
    const fs::path bare_path = scratch_dir() / "bare.bsma";
    save_packed_mesh(bare, bare_path);
    const MeshSequence bare_back = load_packed_mesh(bare_path);
    CHECK_FALSE(bare_back.has_normals());
    CHECK(bare_back.deltas.frame_count == 0);
}

TEST_CASE("kind and section mismatches are reported") {
    const fs::path path = scratch_dir() / "kind.bsma";
    save_trajectory(random_grid(3, 1, 9), {}, path);
    CHECK_THROWS_AS(load_controls(path), DataError);
    CHECK_THROWS_AS(load_surface(path), DataError);

    Archive odd;
    odd.kind = ArchiveKind::trajectory;
    odd.sections.push_back({"misnamed", "f32", {1, 1, 3}, {0.f, 0.f, 0.f}, {}});
    const fs::path odd_path = scratch_dir() / "odd.bsma";
    write_archive(odd, odd_path);
    CHECK_THROWS_WITH_AS(load_trajectory(odd_path),
                         doctest::Contains("no section 'deltas'"), DataError);
}

TEST_CASE("write validation rejects inconsistent sections") {
    Archive bad;
    bad.kind = ArchiveKind::trajectory;
    bad.sections.push_back({"deltas", "f32", {2, 1, 3}, {1.f, 2.f}, {}});
    CHECK_THROWS_WITH_AS(write_archive(bad, scratch_dir() / "never.bsma"),
                         doctest::Contains("stores 2 elements, shape expects 6"),
                         DataError);

    Archive nan_archive;
    nan_archive.kind = ArchiveKind::trajectory;
    nan_archive.sections.push_back(
        {"deltas", "f32", {1, 1, 3}, {1.f, std::nanf(""), 3.f}, {}});
    CHECK_THROWS_WITH_AS(write_archive(nan_archive, scratch_dir() / "never.bsma"),
                         doctest::Contains("non-finite"), DataError);
    CHECK_FALSE(fs::exists(scratch_dir() / "never.bsma"));
}

TEST_CASE("corrupted files are rejected with specific errors") {
    const fs::path path = scratch_dir() / "victim.bsma";
    save_trajectory(random_grid(4, 2, 13), {}, path);
    const std::vector<char> good = slurp(path);

    // Bad magic.
    std::vector<char> bytes = good;
    bytes[0] = 'X';
    const fs::path mangled = scratch_dir() / "mangled.bsma";
    spit(mangled, bytes);
    CHECK_THROWS_WITH_AS(read_archive(mangled), doctest::Contains("bad magic"),
                         DataError);

    // Unsupported version.
    bytes = good;
    bytes[4] = 2;
    spit(mangled, bytes);
    CHECK_THROWS_WITH_AS(read_archive(mangled), doctest::Contains("version"), DataError);

    // Truncated payload: byte counts must be named in the message.
    bytes = good;
    bytes.resize(bytes.size() - 5);
    spit(mangled, bytes);
    CHECK_THROWS_WITH_AS(read_archive(mangled), doctest::Contains("payload is"),
                         DataError);

    // Truncated inside the header.
    bytes = good;
    bytes.resize(20);
    spit(mangled, bytes);
    CHECK_THROWS_AS(read_archive(mangled), DataError);

    // Too short for the fixed prelude.
    bytes = good;
    bytes.resize(10);
    spit(mangled, bytes);
    CHECK_THROWS_WITH_AS(read_archive(mangled), doctest::Contains("truncated"),
                         DataError);

    // Header bytes that are not JSON.
    bytes = good;
    bytes[16] = '!';
    spit(mangled, bytes);
    CHECK_THROWS_WITH_AS(read_archive(mangled), doctest::Contains("malformed header"),
                         DataError);

    const fs::path missing = scratch_dir() / "missing.bsma";
    CHECK_THROWS_WITH_AS(read_archive(missing), doctest::Contains("cannot open"),
                         DataError);
}

TEST_CASE("strict finite mode rejects NaN payloads") {
    const fs::path path = scratch_dir() / "naned.bsma";
    save_trajectory(random_grid(2, 1, 17), {}, path);
    std::vector<char> bytes = slurp(path);
    // Overwrite the first payload float with a quiet NaN pattern.
    const std::size_t payload = 16 + header_length(bytes);
    const unsigned char nan_bytes[4] = {0x00, 0x00, 0xC0, 0x7F};
    std::memcpy(bytes.data() + payload, nan_bytes, 4);
    spit(path, bytes);

    CHECK_NOTHROW(read_archive(path));
    CHECK_THROWS_WITH_AS(read_archive(path, true), doctest::Contains("non-finite"),
                         DataError);
}

TEST_CASE("obj parsing handles the corner cases") {
    const fs::path dir = scratch_dir();

    // Quad fan triangulation with per-corner normals.
    const fs::path quad = dir / "quad.obj";
    {
        std::ofstream out(quad);
        out << "# comment line\n"
            << "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
            << "vn 0 0 1\n"
            << "f 1//1 2//1 3//1 4//1\n";
    }
    const MeshSequence mesh = load_obj_frames(std::vector<fs::path>{quad}, false);
    CHECK(mesh.vertex_count() == 4);
    REQUIRE(mesh.face_count() == 2);
    CHECK(mesh.faces == std::vector<std::uint32_t>{0, 1, 2, 0, 2, 3});
    REQUIRE(mesh.has_normals());
    for (std::size_t v = 0; v < 4; ++v) {
        CHECK(mesh.vertex_normals[3 * v + 2] == 1.0);
    }
    CHECK(mesh.deltas.frame_count == 0);

    // Negative indices address from the end.
    const fs::path neg = dir / "neg.obj";
    {
        std::ofstream out(neg);
        out << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n";
    }
    const MeshSequence neg_mesh = load_obj_frames(std::vector<fs::path>{neg}, false);
    CHECK(neg_mesh.faces == std::vector<std::uint32_t>{0, 1, 2});

    // Errors carry file and line.
    const fs::path bad = dir / "bad.obj";
    {
        std::ofstream out(bad);
        out << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n";
    }
    CHECK_THROWS_WITH_AS(load_obj_frames(std::vector<fs::path>{bad}, false),
                         doctest::Contains("line 4"), DataError);

    const fs::path thin = dir / "thin.obj";
    {
        std::ofstream out(thin);
        out << "v 0 0 0\nv 1 0 0\nf 1 2\n";
    }
    CHECK_THROWS_AS(load_obj_frames(std::vector<fs::path>{thin}, false), DataError);

    const fs::path empty_obj = dir / "empty.obj";
    { std::ofstream out(empty_obj); }
    CHECK_THROWS_AS(load_obj_frames(std::vector<fs::path>{empty_obj}, false), DataError);
}

TEST_CASE("obj frame sequences become displacement grids") {
    const fs::path dir = scratch_dir() / "frames";
    fs::create_directories(dir);
    for (int t = 0; t < 3; ++t) {
        std::ofstream out(dir / ("f" + std::to_string(t) + ".obj"));
        out << "v 0 0 " << 0.5 * t << "\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";
    }
    const std::vector<fs::path> files{dir / "f0.obj", dir / "f1.obj", dir / "f2.obj"};
    const MeshSequence mesh = load_obj_frames(files, false);
    CHECK(mesh.deltas.frame_count == 2);
    CHECK(mesh.deltas.point_count == 3);
    CHECK(mesh.deltas.at(0, 0, 2) == 0.5);
    CHECK(mesh.deltas.at(1, 0, 2) == 1.0);
    CHECK(mesh.deltas.at(0, 1, 0) == 0.0);

    // Vertex-count mismatch across frames is a data error.
    {
        std::ofstream out(dir / "f2.obj");
        out << "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 2 2 2\nf 1 2 3\n";
    }
    CHECK_THROWS_WITH_AS(load_obj_frames(files, false), doctest::Contains("vertices"),
                         DataError);

    // Same count, different faces: still a mismatch.
    {
        std::ofstream out(dir / "f2.obj");
        out << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 3 2\n";
    }
    CHECK_THROWS_AS(load_obj_frames(files, false), DataError);
}

TEST_CASE("normalization maps the base box into [-0.9, 0.9]") {
    const fs::path dir = scratch_dir() / "norm";
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "a.obj");
        out << "v 0 0 0\nv 10 0 0\nv 10 10 0\nv 0 10 10\nf 1 2 3\nf 1 3 4\n";
    }
    {
        std::ofstream out(dir / "b.obj");
        out << "v 1 0 0\nv 10 0 0\nv 10 10 0\nv 0 10 10\nf 1 2 3\nf 1 3 4\n";
    }
    const std::vector<fs::path> files{dir / "a.obj", dir / "b.obj"};
    const MeshSequence mesh = load_obj_frames(files, true);
    CHECK(mesh.norm_scale == doctest::Approx(0.18));
    CHECK(mesh.norm_center[0] == doctest::Approx(5.0));
    double lo = 1e9, hi = -1e9;
    for (const double v : mesh.base_vertices) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(lo >= -0.9 - 1e-12);
    CHECK(hi <= 0.9 + 1e-12);
    // Motion scales with the mesh: raw delta 1.0 on x becomes 0.18.
    CHECK(mesh.deltas.at(0, 0, 0) == doctest::Approx(0.18));
}

TEST_CASE("write_obj output parses back") {
    const fs::path path = scratch_dir() / "out.obj";
    const std::vector<double> verts{0.125, -0.25, 0.5, 1.0, 2.0, 3.0, -4.5, 0.0, 1.5};
    const std::vector<std::uint32_t> faces{0, 1, 2};
    write_obj(path, verts, faces);
    const MeshSequence back = load_obj_frames(std::vector<fs::path>{path}, false);
    CHECK(back.base_vertices == verts);
    CHECK(back.faces == faces);

    CHECK_THROWS_AS(write_obj(path, std::vector<double>{1.0}, faces), DataError);
}

TEST_CASE("manifests load and validate") {
    const fs::path dir = scratch_dir() / "dataset";
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "f0.obj");
        out << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";
    }
    {
        std::ofstream out(dir / "f1.obj");
        out << "v 0 0 0.25\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";
    }
    save_trajectory(random_grid(5, 3, 23), {}, dir / "motion.bsma");

    const fs::path manifest_path = dir / "manifest.json";
    {
        std::ofstream out(manifest_path);
        out << R"({
  "normalize": false,
  "entries": [
    {"id": "tri", "frames": ["f0.obj", "f1.obj"], "captions": ["a triangle"]},
    {"id": "cloud", "trajectory": "motion.bsma"}
  ]
})";
    }
    const DatasetManifest manifest = load_manifest(manifest_path);
    CHECK(manifest.root == dir);
    CHECK_FALSE(manifest.normalize);
    REQUIRE(manifest.entries.size() == 2);
    CHECK(manifest.entry("tri").captions.size() == 1);
    CHECK(manifest.entry("tri").is_mesh());
    CHECK_FALSE(manifest.entry("cloud").is_mesh());
    CHECK_THROWS_WITH_AS(manifest.entry("nope"), doctest::Contains("no entry"),
                         DataError);

    const MeshSequence mesh = load_mesh_sequence(manifest, manifest.entry("tri"));
    CHECK(mesh.id == "tri");
    CHECK(mesh.deltas.frame_count == 1);
    CHECK(mesh.deltas.at(0, 0, 2) == 0.25);
    CHECK_THROWS_AS(load_mesh_sequence(manifest, manifest.entry("cloud")), DataError);

    // Schema violations.
    const fs::path bad = dir / "bad.json";
    { std::ofstream(bad) << R"({"entries": []})"; }
    CHECK_THROWS_WITH_AS(load_manifest(bad), doctest::Contains("no entries"), DataError);
    { std::ofstream(bad) << R"({"entries": [{"id": "x"}]})"; }
    CHECK_THROWS_AS(load_manifest(bad), DataError);
    {
        std::ofstream(bad) << R"({"entries": [{"id": "x", "packed": "p.bsma"},
                                                  {"id": "x", "packed": "q.bsma"}]})";
    }
    CHECK_THROWS_WITH_AS(load_manifest(bad), doctest::Contains("repeats"), DataError);
    { std::ofstream(bad) << "not json"; }
    CHECK_THROWS_AS(load_manifest(bad), DataError);
    CHECK_THROWS_WITH_AS(load_manifest(dir / "absent.json"),
                         doctest::Contains("cannot open"), DataError);

    // Packed entries route through the mesh archive reader.
    save_packed_mesh(small_mesh(), dir / "packed.bsma");
    {
        std::ofstream(bad) << R"({"entries": [{"id": "p", "packed": "packed.bsma"}]})";
    }
    const DatasetManifest packed_manifest = load_manifest(bad);
    const MeshSequence packed =
        load_mesh_sequence(packed_manifest, packed_manifest.entry("p"));
    CHECK(packed.id == "p");
    CHECK(packed.vertex_count() == 4);
    CHECK(packed.deltas.frame_count == 2);
}

#include "mspline/commands.hpp"

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "mspline/archive.hpp"
#include "mspline/errors.hpp"
#include "mspline/kernels.hpp"
#include "mspline/metrics.hpp"
#include "mspline/parallel.hpp"
#include "mspline/sampling.hpp"
#include "mspline/solver.hpp"
#include "mspline/synthetic.hpp"

namespace mspline {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

int run_guarded(std::ostream& log, const std::function<int()>& body) {
    try {
        return body();
    } catch (const DataError& e) {
        log << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const NumericalError& e) {
        log << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

// Loads the motion of one manifest entry: per-vertex for mesh entries,
// as stored for trajectory entries. base receives rest positions when
// the entry has them.
TrajectoryGrid load_entry_motion(const DatasetManifest& manifest,
                                 const ManifestEntry& entry,
                                 std::vector<double>* base,
                                 std::vector<std::string>* warnings) {
    if (entry.is_mesh()) {
        MeshSequence mesh = load_mesh_sequence(manifest, entry);
        if (base) *base = mesh.base_vertices;
        if (warnings) *warnings = mesh.warnings;
        return std::move(mesh.deltas);
    }
    const auto traj_path = entry.trajectory.is_absolute()
                               ? entry.trajectory
                               : manifest.root / entry.trajectory;
    TrajectoryGrid grid = load_trajectory(traj_path);
    if (base && !entry.base_points.empty()) {
        const auto base_path = entry.base_points.is_absolute()
                                   ? entry.base_points
                                   : manifest.root / entry.base_points;
        const Archive archive = read_archive(base_path);
        if (archive.sections.empty()) throw DataError("base points archive is empty");
        const ArchiveSection& s = archive.sections.front();
        base->assign(s.f32.begin(), s.f32.end());
        if (base->size() != static_cast<std::size_t>(grid.point_count) * 3) {
            throw DataError("entry '" + entry.id +
                            "' base points disagree with the trajectory point count");
        }
    }
    return grid;
}

}  // namespace

int cmd_fit(const FitOptions& opt, const RunConfig& config, std::ostream& log) {
    return run_guarded(log, [&]() -> int {
        const DatasetManifest manifest = load_manifest(opt.manifest);
        std::filesystem::create_directories(opt.out_dir);
        const int workers = resolve_workers(config.workers);
        int ok = 0, failed = 0;
        for (const ManifestEntry& entry : manifest.entries) {
            const auto start = Clock::now();
            try {
                std::vector<std::string> warnings;
                const TrajectoryGrid motion =
                    load_entry_motion(manifest, entry, nullptr, &warnings);
                for (const std::string& w : warnings) {
                    log << "[fit] " << entry.id << " warning: " << w << '\n';
                }
                if (motion.frame_count < 1) {
                    throw DataError("entry '" + entry.id + "' has no motion frames");
                }
                const ControlGrid controls = fit_variable_sequence(
                    motion, config.control_count, config.degree, config.mu, workers);
                double residual = 0.0;
                if (motion.frame_count > 1) {
                    const BasisMatrix basis = build_uniform_basis_matrix(
                        config.control_count, config.degree, motion.frame_count);
                    residual = fit_rms_residual(basis, controls, motion);
                }
                nlohmann::json meta = {{"id", entry.id},
                                       {"config", config.to_json()}};
                save_controls(controls, meta,
                              opt.out_dir / (entry.id + ".controls.bsma"));
                log << "[fit] id=" << entry.id << " T=" << motion.frame_count
                    << " k=" << config.control_count << " rms_residual=" << residual
                    << " wall_ms=" << ms_since(start) << '\n';
                ++ok;
            } catch (const std::exception& e) {
                if (opt.strict) throw;
                log << "[fit] id=" << entry.id << " skipped: " << e.what() << '\n';
                ++failed;
            }
        }
        if (ok == 0) {
            throw DataError("no sequence could be fitted (" + std::to_string(failed) +
                            " failed)");
        }
        return kExitOk;
    });
}

int cmd_reproject(const ReprojectOptions& opt, const RunConfig& config, std::ostream& log) {
    return run_guarded(log, [&]() -> int {
        if (opt.frames < 1) throw std::invalid_argument("--frames must be positive");
        nlohmann::json controls_meta;
        const ControlGrid controls = load_controls(opt.controls, &controls_meta);
        const auto start = Clock::now();
        const TrajectoryGrid recon =
            reproject(controls, opt.frames, resolve_workers(config.workers));
        nlohmann::json meta = {{"config", config.to_json()},
                               {"source", opt.controls.filename().string()}};
        if (controls_meta.contains("id")) meta["id"] = controls_meta["id"];
        save_trajectory(recon, meta, opt.out);
        log << "[reproject] frames=" << opt.frames << " points=" << recon.point_count
            << " wall_ms=" << ms_since(start) << '\n';

        if (!opt.base_obj.empty()) {
            const MeshSequence base = load_obj_frames({{opt.base_obj}}, false);
            if (base.vertex_count() != static_cast<std::size_t>(recon.point_count)) {
                throw DataError("base mesh has " + std::to_string(base.vertex_count()) +
                                " vertices, controls cover " +
                                std::to_string(recon.point_count));
            }
            const std::filesystem::path dir =
                opt.out.parent_path().empty() ? "." : opt.out.parent_path();
            std::vector<double> positions(base.base_vertices.size());
            for (int t = 0; t < recon.frame_count; ++t) {
                const double* d = recon.frame(t);
                for (std::size_t i = 0; i < positions.size(); ++i) {
                    positions[i] = base.base_vertices[i] + d[i];
                }
                std::ostringstream name;
                name << opt.out.stem().string() << "_" << std::setw(4)
                     << std::setfill('0') << t << ".obj";
                write_obj(dir / name.str(), positions, base.faces);
            }
            log << "[reproject] wrote " << recon.frame_count << " OBJ frames\n";
        }
        return kExitOk;
    });
}

int cmd_compare(const CompareOptions& opt, const RunConfig& config, std::ostream& log) {
    return run_guarded(log, [&]() -> int {
        const DatasetManifest manifest = load_manifest(opt.manifest);
        for (const std::string& m : opt.methods) {
            if (m != "bspline" && m != "linear") {
                throw std::invalid_argument("unknown method '" + m + "'");
            }
        }
        std::vector<int> ks = opt.control_counts;
        if (ks.empty()) ks.push_back(config.control_count);
        const MetricConfig metric_cfg = config.metric_config();
        const int workers = resolve_workers(config.workers);

        std::vector<MetricsRecord> records;
        for (const ManifestEntry& entry : manifest.entries) {
            std::vector<double> base;
            TrajectoryGrid gt;
            try {
                gt = load_entry_motion(manifest, entry, &base, nullptr);
            } catch (const std::exception& e) {
                log << "[compare] id=" << entry.id << " skipped: " << e.what() << '\n';
                continue;
            }
            if (gt.frame_count < 2) {
                log << "[compare] id=" << entry.id << " skipped: needs >= 2 frames\n";
                continue;
            }
            // Neighbor graph over rest positions; first-frame displacements
            // stand in when the entry carries no geometry.
            MetricConfig entry_cfg = metric_cfg;
            std::vector<std::uint32_t> neighbors;
            const std::size_t n = static_cast<std::size_t>(gt.point_count);
            if (entry_cfg.knn_k >= 1 && n > static_cast<std::size_t>(entry_cfg.knn_k)) {
                if (base.size() == n * 3) {
                    neighbors = knn(base, entry_cfg.knn_k);
                } else {
                    neighbors = knn(std::span<const double>(gt.frame(0), n * 3),
                                    entry_cfg.knn_k);
                    entry_cfg.rigidity_on_displacements = true;
                    base.assign(n * 3, 0.0);
                }
            }
            for (const int k : ks) {
                for (const std::string& method : opt.methods) {
                    const auto start = Clock::now();
                    MetricsRecord rec;
                    rec.id = entry.id;
                    rec.frames = gt.frame_count;
                    rec.k = k;
                    rec.method = method;
                    try {
                        TrajectoryGrid recon;
                        if (method == "bspline") {
                            const ControlGrid controls = fit_variable_sequence(
                                gt, k, config.degree, config.mu, workers);
                            recon = reproject(controls, gt.frame_count, workers);
                            rec.correspondence =
                                charbonnier(recon.deltas, gt.deltas, entry_cfg.delta);
                        } else {
                            recon = linear_baseline(gt, k);
                            rec.correspondence =
                                charbonnier(recon.deltas, gt.deltas, entry_cfg.delta);
                        }
                        rec.mean_l1 = mean_l1_error(recon, gt);
                        if (!neighbors.empty()) {
                            rec.rigidity = rigidity_loss(recon, base, neighbors,
                                                         entry_cfg.knn_k, entry_cfg);
                        }
                    } catch (const std::exception& e) {
                        log << "[compare] id=" << entry.id << " method=" << method
                            << " k=" << k << " failed: " << e.what() << '\n';
                        continue;
                    }
                    rec.wall_ms = ms_since(start);
                    log << "[compare] id=" << rec.id << " method=" << rec.method
                        << " k=" << rec.k << " mean_l1=" << rec.mean_l1
                        << " wall_ms=" << rec.wall_ms << '\n';
                    records.push_back(std::move(rec));
                }
            }
        }
        if (records.empty()) throw DataError("no sequence produced comparison records");
        if (opt.out_report.empty()) {
            write_metrics_report(std::cout, records);
        } else {
            std::ofstream out(opt.out_report, std::ios::trunc);
            if (!out) {
                throw DataError("cannot open report '" + opt.out_report.string() + "'");
            }
            write_metrics_report(out, records);
        }
        return kExitOk;
    });
}

int cmd_embed(const EmbedOptions& opt, const RunConfig& config, std::ostream& log) {
    return run_guarded(log, [&]() -> int {
        const ControlGrid controls = load_controls(opt.controls);
        const LevelSchedule schedule = config.level_schedule();
        const auto start = Clock::now();
        const auto basis = std::make_shared<EmbeddingBasis>(
            build_embedding_basis(schedule, config.degree, config.mu));
        const ControlGrid padded = pad_control_points(controls, schedule.counts.front());
        const int workers = resolve_workers(config.workers);
        const EmbeddingStack stack = embed(padded, basis, workers);
        if (opt.verify) {
            const ControlGrid recon = reconstruct_from_embedding(stack, workers);
            double max_abs = 0.0, scale = 0.0;
            for (std::size_t i = 0; i < padded.points.size(); ++i) {
                max_abs = std::max(max_abs,
                                   std::fabs(recon.points[i] - padded.points[i]));
                scale = std::max(scale, std::fabs(padded.points[i]));
            }
            const double rel = max_abs / (scale > 0.0 ? scale : 1.0);
            if (rel > 1e-9) {
                throw NumericalError("embedding round trip error " + std::to_string(rel) +
                                     " exceeds 1e-9");
            }
            log << "[embed] verify ok, max relative error " << rel << '\n';
        }
        save_embedding(stack, {{"config", config.to_json()}}, opt.out);
        log << "[embed] levels=" << schedule.counts.size()
            << " rows=" << schedule.total_rows() << " points=" << stack.point_count
            << " wall_ms=" << ms_since(start) << '\n';
        return kExitOk;
    });
}

int cmd_sample(const SampleOptions& opt, const RunConfig& config, std::ostream& log) {
    return run_guarded(log, [&]() -> int {
        if (opt.shard == 0) throw std::invalid_argument("--shard must be positive");
        const DatasetManifest manifest = load_manifest(opt.manifest);
        std::filesystem::create_directories(opt.out_dir);
        int sampled = 0;
        for (const ManifestEntry& entry : manifest.entries) {
            if (!entry.is_mesh()) continue;
            if (!opt.id.empty() && entry.id != opt.id) continue;
            const auto start = Clock::now();
            const MeshSequence mesh = load_mesh_sequence(manifest, entry);
            for (const std::string& w : mesh.warnings) {
                log << "[sample] " << entry.id << " warning: " << w << '\n';
            }
            const SampledSurface surface =
                sample_surface(mesh, config.sample_count, config.seed);
            const std::uint64_t shards = (surface.size() + opt.shard - 1) / opt.shard;
            for (std::uint64_t s = 0; s < shards; ++s) {
                const std::size_t begin = s * opt.shard;
                const std::size_t end =
                    std::min<std::size_t>(begin + opt.shard, surface.size());
                SampledSurface piece;
                piece.seed = surface.seed;
                piece.points.assign(surface.points.begin() + 3 * begin,
                                    surface.points.begin() + 3 * end);
                piece.normals.assign(surface.normals.begin() + 3 * begin,
                                     surface.normals.begin() + 3 * end);
                piece.face_index.assign(surface.face_index.begin() + begin,
                                        surface.face_index.begin() + end);
                piece.bary.assign(surface.bary.begin() + 3 * begin,
                                  surface.bary.begin() + 3 * end);
                nlohmann::json meta = {{"id", entry.id},
                                       {"shard", s},
                                       {"shard_count", shards},
                                       {"config", config.to_json()}};
                std::ostringstream name;
                name << entry.id << ".surface." << std::setw(3) << std::setfill('0') << s
                     << ".bsma";
                save_surface(piece, meta, opt.out_dir / name.str());
            }
            log << "[sample] id=" << entry.id << " samples=" << surface.size()
                << " shards=" << shards << " wall_ms=" << ms_since(start) << '\n';
            ++sampled;
        }
        if (sampled == 0) {
            throw DataError(opt.id.empty() ? "manifest has no mesh entries"
                                           : "no mesh entry with id '" + opt.id + "'");
        }
        return kExitOk;
    });
}

BenchResult run_bench(const BenchOptions& opt, const RunConfig& config) {
    SyntheticSpec spec;
    spec.frames = opt.frames;
    spec.points = static_cast<int>(opt.points);
    spec.modes = 1;
    spec.max_freq = 3.0;
    spec.seed = config.seed;
    const TrajectoryGrid motion = make_bandlimited_trajectory(spec);

    BenchResult result;
    result.backend = kernels::backend_name();
    const int workers = resolve_workers(config.workers);

    const auto t0 = Clock::now();
    const BasisMatrix basis = build_uniform_basis_matrix(config.control_count,
                                                         config.degree, opt.frames);
    const FittingOperator op = build_fitting_operator(basis, config.mu);
    result.build_ms = ms_since(t0);

    const auto t1 = Clock::now();
    const ControlGrid controls = fit_control_points(op, motion, workers);
    result.fit_ms = ms_since(t1);
    result.total_ms = result.build_ms + result.fit_ms;

    // Keep the result alive and observable.
    if (controls.points.empty()) throw NumericalError("bench fit produced no output");

    rusage usage{};
    getrusage(RUSAGE_SELF, &usage);
    result.peak_rss_kb = usage.ru_maxrss;
    return result;
}

int cmd_bench(const BenchOptions& opt, const RunConfig& config, std::ostream& log) {
    return run_guarded(log, [&]() -> int {
        if (opt.frames < 2 || opt.points == 0) {
            throw std::invalid_argument("bench needs --frames >= 2 and --points >= 1");
        }
        const BenchResult r = run_bench(opt, config);
        nlohmann::json out = {{"frames", opt.frames},
                              {"points", opt.points},
                              {"k", config.control_count},
                              {"build_ms", r.build_ms},
                              {"fit_ms", r.fit_ms},
                              {"total_ms", r.total_ms},
                              {"backend", r.backend},
                              {"peak_rss_kb", r.peak_rss_kb},
                              {"workers", resolve_workers(config.workers)}};
        std::cout << out.dump() << std::endl;
        log << "[bench] total_ms=" << r.total_ms << " backend=" << r.backend << '\n';
        return kExitOk;
    });
}

}  // namespace mspline

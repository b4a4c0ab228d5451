// CLI command implementations, callable in-process. Each command maps
// its failures onto the process exit codes: 0 success, 1 bad usage or
// arguments, 2 malformed data, 3 numerical failure.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mspline/config.hpp"

namespace mspline {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

struct FitOptions {
    std::filesystem::path manifest;
    std::filesystem::path out_dir;
    bool strict = false;  // abort on the first bad sequence instead of skipping
};

int cmd_fit(const FitOptions& opt, const RunConfig& config, std::ostream& log);

struct ReprojectOptions {
    std::filesystem::path controls;
    int frames = 0;
    std::filesystem::path out;      // trajectory archive path
    std::filesystem::path base_obj; // optional: also emit OBJ frames next to `out`
};

int cmd_reproject(const ReprojectOptions& opt, const RunConfig& config, std::ostream& log);

struct CompareOptions {
    std::filesystem::path manifest;
    std::vector<std::string> methods = {"bspline", "linear"};
    std::vector<int> control_counts;  // empty: the configured k
    std::filesystem::path out_report; // empty: stdout
};

int cmd_compare(const CompareOptions& opt, const RunConfig& config, std::ostream& log);

struct EmbedOptions {
    std::filesystem::path controls;
    std::filesystem::path out;
    bool verify = false;  // reconstruct and check the round trip before writing
};

int cmd_embed(const EmbedOptions& opt, const RunConfig& config, std::ostream& log);

struct SampleOptions {
    std::filesystem::path manifest;
    std::string id;  // empty: every mesh entry
    std::filesystem::path out_dir;
    std::uint64_t shard = 20000;  // max samples per output archive
};

int cmd_sample(const SampleOptions& opt, const RunConfig& config, std::ostream& log);

struct BenchOptions {
    int frames = 200;
    std::uint64_t points = 50000;
};

struct BenchResult {
    double build_ms = 0.0;
    double fit_ms = 0.0;
    double total_ms = 0.0;
    std::string backend;
    long peak_rss_kb = 0;
};

// Generates a synthetic clip and times operator construction plus the
// fit, excluding generation.
BenchResult run_bench(const BenchOptions& opt, const RunConfig& config);

int cmd_bench(const BenchOptions& opt, const RunConfig& config, std::ostream& log);

}  // namespace mspline

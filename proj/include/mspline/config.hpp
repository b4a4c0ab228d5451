// Run configuration shared by every CLI command. Values resolve as
// command-line flags over config-file entries over these defaults, and
// the effective configuration is echoed into output metadata.

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "mspline/embedding.hpp"
#include "mspline/metrics.hpp"

namespace mspline {

struct RunConfig {
    int control_count = 16;
    int degree = 3;
    double mu = 1e-3;
    int reference_frames = 16;
    std::vector<int> schedule = {17, 15, 13, 11, 9, 7, 5, 4};
    double delta = 1e-3;
    double lambda1 = 0.3;
    double lambda2 = 0.1;
    int knn_k = 8;
    std::uint64_t sample_count = 20000;
    std::uint64_t seed = 0;
    int workers = 0;  // 0: MSPLINE_WORKERS env or hardware count
    bool rigidity_on_displacements = false;

    MetricConfig metric_config() const {
        MetricConfig m;
        m.delta = delta;
        m.lambda1 = lambda1;
        m.lambda2 = lambda2;
        m.knn_k = knn_k;
        m.rigidity_on_displacements = rigidity_on_displacements;
        return m;
    }

    LevelSchedule level_schedule() const {
        LevelSchedule s;
        s.counts = schedule;
        s.reference_frames = reference_frames;
        return s;
    }

    nlohmann::json to_json() const;
    // Applies the keys present in `overrides` on top of *this; unknown
    // keys are rejected.
    void apply_json(const nlohmann::json& overrides);
};

// Reads a JSON config file and applies it over the defaults.
RunConfig load_config_file(const std::filesystem::path& path);

}  // namespace mspline

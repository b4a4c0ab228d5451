#include "mspline/config.hpp"

#include <fstream>

#include "mspline/errors.hpp"

namespace mspline {

nlohmann::json RunConfig::to_json() const {
    return {{"k", control_count},
            {"degree", degree},
            {"mu", mu},
            {"t_prime", reference_frames},
            {"schedule", schedule},
            {"delta", delta},
            {"lambda1", lambda1},
            {"lambda2", lambda2},
            {"knn", knn_k},
            {"samples", sample_count},
            {"seed", seed},
            {"workers", workers},
            {"rigidity_on_displacements", rigidity_on_displacements}};
}

void RunConfig::apply_json(const nlohmann::json& overrides) {
    if (!overrides.is_object()) throw DataError("config must be a JSON object");
    for (const auto& [key, value] : overrides.items()) {
        try {
            if (key == "k") {
                control_count = value.get<int>();
            } else if (key == "degree") {
                degree = value.get<int>();
            } else if (key == "mu") {
                mu = value.get<double>();
            } else if (key == "t_prime") {
                reference_frames = value.get<int>();
            } else if (key == "schedule") {
                schedule = value.get<std::vector<int>>();
            } else if (key == "delta") {
                delta = value.get<double>();
            } else if (key == "lambda1") {
                lambda1 = value.get<double>();
            } else if (key == "lambda2") {
                lambda2 = value.get<double>();
            } else if (key == "knn") {
                knn_k = value.get<int>();
            } else if (key == "samples") {
                sample_count = value.get<std::uint64_t>();
            } else if (key == "seed") {
                seed = value.get<std::uint64_t>();
            } else if (key == "workers") {
                workers = value.get<int>();
            } else if (key == "rigidity_on_displacements") {
                rigidity_on_displacements = value.get<bool>();
            } else {
                throw DataError("config has unknown key '" + key + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw DataError("config key '" + key + "' has the wrong type: " + e.what());
        }
    }
}

RunConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file '" + path.string() + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("config file '" + path.string() + "' is not valid JSON: " +
                        e.what());
    }
    RunConfig config;
    config.apply_json(doc);
    return config;
}

}  // namespace mspline

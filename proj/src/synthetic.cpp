#include "mspline/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace mspline {

namespace {

inline double to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

}  // namespace

TrajectoryGrid make_bandlimited_trajectory(const SyntheticSpec& spec) {
    if (spec.frames < 1 || spec.points < 1 || spec.modes < 1) {
        throw std::invalid_argument("synthetic spec must be positive in every count");
    }
    TrajectoryGrid out(spec.frames, spec.points);
    std::mt19937_64 rng(spec.seed);
    const double tau_scale =
        spec.frames > 1 ? 1.0 / static_cast<double>(spec.frames - 1) : 0.0;
    const std::size_t channels = static_cast<std::size_t>(spec.points) * 3;
    std::vector<double> freq(static_cast<std::size_t>(spec.modes));
    std::vector<double> amp(static_cast<std::size_t>(spec.modes));
    std::vector<double> phase(static_cast<std::size_t>(spec.modes));
    for (std::size_t ch = 0; ch < channels; ++ch) {
        for (int m = 0; m < spec.modes; ++m) {
            const double f = 0.5 + to_unit(rng()) * (spec.max_freq - 0.5);
            freq[static_cast<std::size_t>(m)] = f;
            // 1/f^2 falloff keeps the field dominated by slow motion.
            amp[static_cast<std::size_t>(m)] =
                spec.amplitude * (2.0 * to_unit(rng()) - 1.0) / (1.0 + f * f);
            phase[static_cast<std::size_t>(m)] =
                2.0 * std::numbers::pi * to_unit(rng());
        }
        for (int t = 0; t < spec.frames; ++t) {
            const double tau = static_cast<double>(t) * tau_scale;
            double v = 0.0;
            for (int m = 0; m < spec.modes; ++m) {
                const auto mi = static_cast<std::size_t>(m);
                v += amp[mi] *
                     std::sin(2.0 * std::numbers::pi * freq[mi] * tau + phase[mi]);
            }
            out.deltas[static_cast<std::size_t>(t) * channels + ch] = v;
        }
    }
    return out;
}

std::vector<double> make_base_points(int count, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("point count must be positive");
    std::vector<double> pts(static_cast<std::size_t>(count) * 3);
    std::mt19937_64 rng(seed);
    for (double& v : pts) v = (2.0 * to_unit(rng()) - 1.0) * 0.9;
    return pts;
}

}  // namespace mspline

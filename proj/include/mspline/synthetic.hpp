// Deterministic synthetic motion for benchmarks and self-tests:
// band-limited sinusoidal displacement fields over a fixed frequency
// budget, plus random base point sets inside the normalized box.

#pragma once

#include <cstdint>

#include "mspline/grids.hpp"

namespace mspline {

struct SyntheticSpec {
    int frames = 64;
    int points = 100;
    int modes = 3;          // sinusoids per point and coordinate
    double max_freq = 4.0;  // cycles across the whole clip
    double amplitude = 0.25;
    std::uint64_t seed = 0;
};

// Displacements sum `modes` sinusoids with frequencies drawn in
// [0.5, max_freq] and amplitudes decaying with frequency, so the motion
// is smooth at the clip scale and fixed-k fits improve steadily as k
// grows.
TrajectoryGrid make_bandlimited_trajectory(const SyntheticSpec& spec);

// Uniform points in [-0.9, 0.9]^3; same platform-stable generator as the
// surface sampler.
std::vector<double> make_base_points(int count, std::uint64_t seed);

}  // namespace mspline

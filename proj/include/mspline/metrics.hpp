// Motion-quality metrics: robust (Charbonnier) fit and correspondence
// losses, a local rigidity penalty over k-nearest-neighbor edges, their
// weighted total, plus the mean-L1 error and the subsampled-linear
// baseline used for method comparisons.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mspline/grids.hpp"

namespace mspline {

struct MetricConfig {
    double delta = 1e-3;    // Charbonnier knee
    double lambda1 = 0.3;   // correspondence weight
    double lambda2 = 0.1;   // rigidity weight
    int knn_k = 8;
    // false: rigidity compares deformed edge lengths between consecutive
    // frames; true: it compares displacement differences instead.
    bool rigidity_on_displacements = false;
};

// sqrt(|pred - target|_F^2 + delta^2). Equal inputs give exactly delta.
double charbonnier(std::span<const double> pred, std::span<const double> target,
                   double delta);

// Charbonnier distance between the spline reprojection of `controls` at
// the ground-truth frame count and the ground truth itself.
double correspondence_loss(const ControlGrid& controls, const TrajectoryGrid& ground_truth,
                           const MetricConfig& cfg);

// Mean over frame pairs, points, and neighbors of
// sqrt((r_t - r_{t-1})^2 + delta^2), where r_t is the deformed edge
// length (or displacement difference, per config). base is n x 3 rest
// positions; neighbors is n x k row-major. Needs at least two frames.
double rigidity_loss(const TrajectoryGrid& motion, std::span<const double> base,
                     std::span<const std::uint32_t> neighbors, int k,
                     const MetricConfig& cfg);

double total_weighted_loss(double fit, double correspondence, double rigidity,
                           const MetricConfig& cfg);

// Mean absolute componentwise difference.
double mean_l1_error(const TrajectoryGrid& pred, const TrajectoryGrid& ground_truth);

// Keeps `samples` frames at indices round(i*(T-1)/(samples-1)) and
// rebuilds the full sequence by piecewise-linear interpolation between
// kept frames. Exact on linear-in-time motion; identity when
// samples == frame count.
TrajectoryGrid linear_baseline(const TrajectoryGrid& motion, int samples = 16);

// One row of the comparison report.
struct MetricsRecord {
    std::string id;
    int frames = 0;
    int k = 0;
    std::string method;
    double mean_l1 = 0.0;
    double rigidity = 0.0;
    double correspondence = 0.0;
    double wall_ms = 0.0;
};

// Tab-separated report: header line, one row per record, then `#`-prefixed
// per-method mean summary lines.
void write_metrics_report(std::ostream& out, std::span<const MetricsRecord> records);

}  // namespace mspline

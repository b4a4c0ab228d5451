// Multilevel control-point embeddings. A fitted grid with k_s control
// points is re-expressed as a stack of levels with decreasing control
// counts: each level stores the residual the next-coarser level cannot
// represent, and the coarsest level stores a fully projected grid. The
// transport between adjacent levels is "resample the coarse spline at a
// reference frame count, then refit at the fine count". Reconstruction
// runs coarsest-to-finest and is exact by construction.

#pragma once

#include <memory>
#include <vector>

#include "mspline/dense.hpp"
#include "mspline/grids.hpp"

namespace mspline {

// Control counts per level, finest first, strictly decreasing, each at
// least degree + 1. reference_frames is the sample count used to build
// the inter-level transports.
struct LevelSchedule {
    std::vector<int> counts{17, 15, 13, 11, 9, 7, 5, 4};
    int reference_frames = 16;

    static LevelSchedule default_schedule() { return LevelSchedule{}; }
    std::size_t level_count() const { return counts.size(); }
    // Sum of all level control counts (the stacked row count).
    int total_rows() const;
};

// Linear map from a coarse control grid to the fine control grid that
// best reproduces its motion, plus its Moore-Penrose pseudo-inverse.
struct TransportOperator {
    Mat matrix;          // k_fine x k_coarse
    Mat pseudo_inverse;  // k_coarse x k_fine
};

// matrix = O_{T', k_fine} * B_{T', k_coarse} with T' = reference_frames.
// k_fine >= k_coarse >= degree + 1; equal counts give the identity map.
// Throws NumericalError when the transport is ill-conditioned
// (condition number above 1e10).
TransportOperator build_transport(int k_fine, int k_coarse, int reference_frames,
                                  int degree = 3, double mu = 1e-3);

// Extends a grid to k_target control points by repeating the last
// control row; reconstruction of clamped splines is unchanged at the
// right endpoint and the map is linear in the input.
ControlGrid pad_control_points(const ControlGrid& controls, int k_target);

// Stacked residual basis for a schedule: level blocks finest-first, the
// coarsest block holding the chained projection instead of a residual.
struct EmbeddingBasis {
    LevelSchedule schedule;
    int degree = 3;
    double mu = 1e-3;
    Mat w;  // total_rows x counts.front()
    std::vector<TransportOperator> transports;  // transports[j]: level j+1 -> level j
    std::vector<int> row_offsets;               // block start row per level
};

EmbeddingBasis build_embedding_basis(const LevelSchedule& schedule, int degree = 3,
                                     double mu = 1e-3);

// Level-stacked embedding of one control grid: data is
// total_rows x n x 3, block j holding level j's rows.
struct EmbeddingStack {
    std::shared_ptr<const EmbeddingBasis> basis;
    int point_count = 0;
    std::vector<double> data;

    std::size_t columns() const { return static_cast<std::size_t>(point_count) * 3; }
    const double* block(std::size_t level) const {
        return data.data() +
               static_cast<std::size_t>(basis->row_offsets[level]) * columns();
    }
    double* block(std::size_t level) {
        return data.data() +
               static_cast<std::size_t>(basis->row_offsets[level]) * columns();
    }
};

// E = W * P. The grid's control count must equal the finest level count
// (pad first if needed). Linear in the input grid.
EmbeddingStack embed(const ControlGrid& controls,
                     std::shared_ptr<const EmbeddingBasis> basis, int workers = 1);

// Recursive reconstruction from the coarsest block upward; exact.
ControlGrid reconstruct_from_embedding(const EmbeddingStack& stack, int workers = 1);

}  // namespace mspline

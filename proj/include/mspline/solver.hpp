// Closed-form ridge/Laplacian-regularized least-squares fitting of
// control grids to displacement trajectories:
//
//   minimize |B P - V|_F^2 + mu |L P|_F^2
//
// with B the sampled basis matrix, L the interior second-difference
// operator on control indices, and V the T x (n*3) trajectory view. The
// minimizer is P = (B^T B + mu L^T L)^{-1} B^T V; the k x T matrix
// applied to V is materialized once per (T, k, mu) via Cholesky solves
// and reused across all point columns.

#pragma once

#include "mspline/dense.hpp"
#include "mspline/grids.hpp"
#include "mspline/spline.hpp"

namespace mspline {

// (k-2) x k matrix with rows [.. 1 -2 1 ..]; row r touches columns
// r, r+1, r+2. Requires k >= 3.
struct SecondDifferenceMatrix {
    Mat entries;
};

SecondDifferenceMatrix build_second_difference(int control_count);

// The fitting map for one (T, k, mu) combination.
struct FittingOperator {
    Mat operator_matrix;  // k x T, applied to trajectory views
    double mu = 0.0;
    BasisMatrix basis;
    Mat gram_factor;  // lower Cholesky factor of B^T B + mu L^T L
};

// mu = 0 demands frame_count >= control_count; below that the normal
// system is singular and construction reports the underdetermined
// regime. Gram indefiniteness (rank-deficient B at mu = 0) surfaces as
// NumericalError from the factorization.
FittingOperator build_fitting_operator(const BasisMatrix& basis, double mu);

// P = operator_matrix * V. Column blocks may be computed by several
// workers; results are identical for every worker count.
ControlGrid fit_control_points(const FittingOperator& op, const TrajectoryGrid& traj,
                               int workers = 1);

// Same fit with the regularizer |P|_F^2 instead of |L P|_F^2.
ControlGrid fit_ridge(const BasisMatrix& basis, double mu, const TrajectoryGrid& traj,
                      int workers = 1);

// Dense resampling of a fitted grid at target_frames uniform times.
TrajectoryGrid reproject(const ControlGrid& controls, int target_frames, int workers = 1);

// Fits an arbitrary-length sequence with fixed k:
//   frame_count == 1       -> constant extension of the single frame
//   frame_count <  k       -> interpolating regime; requires mu > 0 and
//                             clamps it to at least 1e-6
//   frame_count >= k       -> least-squares regime, any mu >= 0
ControlGrid fit_variable_sequence(const TrajectoryGrid& traj, int control_count,
                                  int degree, double mu, int workers = 1);

// |B P - V|_F^2 + mu |L P|_F^2 for diagnostics and model comparison.
// The Laplacian term is dropped when k < 3.
double laplacian_objective(const BasisMatrix& basis, double mu, const ControlGrid& controls,
                           const TrajectoryGrid& traj);

// Ridge counterpart |B P - V|_F^2 + mu |P|_F^2.
double ridge_objective(const BasisMatrix& basis, double mu, const ControlGrid& controls,
                       const TrajectoryGrid& traj);

// Root-mean-square reconstruction residual |B P - V|_F / sqrt(T n 3).
double fit_rms_residual(const BasisMatrix& basis, const ControlGrid& controls,
                        const TrajectoryGrid& traj);

}  // namespace mspline

#include "mspline/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

#include "mspline/kernels.hpp"
#include "mspline/parallel.hpp"

namespace mspline {

namespace {

// dst = m * src with src/dst viewed as (m.cols) x cols and (m.rows) x cols
// row-major blocks. Column blocks go to separate workers; each output
// element is accumulated in the same order regardless of the split.
void apply_matrix(const Mat& m, const double* src, std::size_t cols, double* dst,
                  int workers) {
    parallel_for_blocks(cols, workers, [&](std::size_t j0, std::size_t j1) {
        kernels::matmul(m.data(), m.rows, m.cols, src + j0, cols, j1 - j0, dst + j0,
                        cols);
    });
}

Mat gram_of_basis(const Mat& b) {
    Mat g(b.cols, b.cols);
    for (std::size_t i = 0; i < b.cols; ++i) {
        for (std::size_t j = i; j < b.cols; ++j) {
            double acc = 0.0;
            for (std::size_t t = 0; t < b.rows; ++t) acc += b(t, i) * b(t, j);
            g(i, j) = acc;
            g(j, i) = acc;
        }
    }
    return g;
}

FittingOperator build_operator_with_gram(const BasisMatrix& basis, double mu, Mat gram) {
    FittingOperator op;
    op.mu = mu;
    op.basis = basis;
    op.gram_factor = cholesky_lower(gram);
    op.operator_matrix =
        cholesky_solve(op.gram_factor, transpose(basis.entries));
    return op;
}

void check_fit_shapes(const FittingOperator& op, const TrajectoryGrid& traj) {
    if (traj.frame_count < 1 || traj.point_count < 1) {
        throw std::invalid_argument("trajectory grid is empty");
    }
    if (static_cast<std::size_t>(traj.frame_count) != op.basis.frame_count()) {
        throw std::invalid_argument(
            "operator was built for " + std::to_string(op.basis.frame_count()) +
            " frames, trajectory has " + std::to_string(traj.frame_count));
    }
}

}  // namespace

SecondDifferenceMatrix build_second_difference(int control_count) {
    if (control_count < 3) {
        throw std::invalid_argument("second differences need control_count >= 3");
    }
    const auto k = static_cast<std::size_t>(control_count);
    SecondDifferenceMatrix l;
    l.entries = Mat(k - 2, k);
    for (std::size_t r = 0; r < k - 2; ++r) {
        l.entries(r, r) = 1.0;
        l.entries(r, r + 1) = -2.0;
        l.entries(r, r + 2) = 1.0;
    }
    return l;
}

FittingOperator build_fitting_operator(const BasisMatrix& basis, double mu) {
    if (mu < 0.0) throw std::invalid_argument("mu must be nonnegative");
    const std::size_t t_count = basis.frame_count();
    const std::size_t k = basis.control_count();
    if (mu == 0.0 && t_count < k) {
        throw std::invalid_argument(
            "underdetermined fit: " + std::to_string(t_count) + " frames < " +
            std::to_string(k) + " control points requires mu > 0");
    }
    Mat gram = gram_of_basis(basis.entries);
    if (mu > 0.0 && k >= 3) {
        const SecondDifferenceMatrix l = build_second_difference(static_cast<int>(k));
        const Mat& le = l.entries;
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                double acc = 0.0;
                for (std::size_t r = 0; r < le.rows; ++r) acc += le(r, i) * le(r, j);
                gram(i, j) += mu * acc;
            }
        }
    }
    return build_operator_with_gram(basis, mu, std::move(gram));
}

ControlGrid fit_control_points(const FittingOperator& op, const TrajectoryGrid& traj,
                               int workers) {
    check_fit_shapes(op, traj);
    ControlGrid out(static_cast<int>(op.basis.control_count()), traj.point_count,
                    op.basis.degree());
    out.source_frame_count = traj.frame_count;
    apply_matrix(op.operator_matrix, traj.deltas.data(), traj.columns(),
                 out.points.data(), workers);
    return out;
}

ControlGrid fit_ridge(const BasisMatrix& basis, double mu, const TrajectoryGrid& traj,
                      int workers) {
    if (mu < 0.0) throw std::invalid_argument("mu must be nonnegative");
    const std::size_t k = basis.control_count();
    if (mu == 0.0 && basis.frame_count() < k) {
        throw std::invalid_argument("underdetermined ridge fit requires mu > 0");
    }
    Mat gram = gram_of_basis(basis.entries);
    for (std::size_t i = 0; i < k; ++i) gram(i, i) += mu;
    const FittingOperator op = build_operator_with_gram(basis, mu, std::move(gram));
    return fit_control_points(op, traj, workers);
}

TrajectoryGrid reproject(const ControlGrid& controls, int target_frames, int workers) {
    if (controls.control_count < 1 || controls.point_count < 1) {
        throw std::invalid_argument("control grid is empty");
    }
    const BasisMatrix basis =
        build_uniform_basis_matrix(controls.control_count, controls.degree, target_frames);
    TrajectoryGrid out(target_frames, controls.point_count);
    apply_matrix(basis.entries, controls.points.data(), controls.columns(),
                 out.deltas.data(), workers);
    return out;
}

ControlGrid fit_variable_sequence(const TrajectoryGrid& traj, int control_count,
                                  int degree, double mu, int workers) {
    if (traj.frame_count < 1 || traj.point_count < 1) {
        throw std::invalid_argument("trajectory grid is empty");
    }
    // Validates k and degree even on the short-circuit paths.
    build_clamped_uniform_knots(control_count, degree);
    if (traj.frame_count == 1) {
        // A single frame admits a whole family of interpolating splines;
        // the constant extension is the canonical one (every control row
        // equals the frame, reconstruction is exact at every time).
        ControlGrid out(control_count, traj.point_count, degree);
        out.source_frame_count = 1;
        for (int i = 0; i < control_count; ++i) {
            std::memcpy(out.row(i), traj.frame(0), traj.columns() * sizeof(double));
        }
        return out;
    }
    double effective_mu = mu;
    if (traj.frame_count < control_count) {
        if (!(mu > 0.0)) {
            throw std::invalid_argument(
                "sequence of " + std::to_string(traj.frame_count) +
                " frames is underdetermined for " + std::to_string(control_count) +
                " control points; mu > 0 required");
        }
        effective_mu = std::max(mu, 1e-6);
    }
    const BasisMatrix basis =
        build_uniform_basis_matrix(control_count, degree, traj.frame_count);
    const FittingOperator op = build_fitting_operator(basis, effective_mu);
    return fit_control_points(op, traj, workers);
}

namespace {

void check_objective_shapes(const BasisMatrix& basis, const ControlGrid& controls,
                            const TrajectoryGrid& traj) {
    if (static_cast<std::size_t>(controls.control_count) != basis.control_count() ||
        static_cast<std::size_t>(traj.frame_count) != basis.frame_count() ||
        controls.point_count != traj.point_count) {
        throw std::invalid_argument("objective: basis/controls/trajectory shapes disagree");
    }
}

double fit_term(const BasisMatrix& basis, const ControlGrid& controls,
                const TrajectoryGrid& traj) {
    std::vector<double> recon(traj.deltas.size());
    kernels::matmul(basis.entries.data(), basis.entries.rows, basis.entries.cols,
                    controls.points.data(), controls.columns(), controls.columns(),
                    recon.data(), controls.columns());
    return kernels::sq_diff_sum(recon.data(), traj.deltas.data(), recon.size());
}

}  // namespace

double laplacian_objective(const BasisMatrix& basis, double mu, const ControlGrid& controls,
                           const TrajectoryGrid& traj) {
    check_objective_shapes(basis, controls, traj);
    double obj = fit_term(basis, controls, traj);
    if (mu > 0.0 && controls.control_count >= 3) {
        const SecondDifferenceMatrix l = build_second_difference(controls.control_count);
        std::vector<double> lp(l.entries.rows * controls.columns());
        kernels::matmul(l.entries.data(), l.entries.rows, l.entries.cols,
                        controls.points.data(), controls.columns(), controls.columns(),
                        lp.data(), controls.columns());
        double reg = 0.0;
        for (const double v : lp) reg += v * v;
        obj += mu * reg;
    }
    return obj;
}

double ridge_objective(const BasisMatrix& basis, double mu, const ControlGrid& controls,
                       const TrajectoryGrid& traj) {
    check_objective_shapes(basis, controls, traj);
    double reg = 0.0;
    for (const double v : controls.points) reg += v * v;
    return fit_term(basis, controls, traj) + mu * reg;
}

double fit_rms_residual(const BasisMatrix& basis, const ControlGrid& controls,
                        const TrajectoryGrid& traj) {
    check_objective_shapes(basis, controls, traj);
    return std::sqrt(fit_term(basis, controls, traj) /
                     static_cast<double>(traj.deltas.size()));
}

}  // namespace mspline

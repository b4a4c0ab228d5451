#include "mspline/embedding.hpp"

#include <cstring>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mspline/errors.hpp"
#include "mspline/kernels.hpp"
#include "mspline/parallel.hpp"
#include "mspline/solver.hpp"

namespace mspline {

namespace {

void validate_schedule(const LevelSchedule& schedule, int degree) {
    if (schedule.counts.empty()) throw std::invalid_argument("empty level schedule");
    if (schedule.reference_frames < 2) {
        throw std::invalid_argument("reference_frames must be at least 2");
    }
    for (std::size_t j = 0; j < schedule.counts.size(); ++j) {
        if (schedule.counts[j] < degree + 1) {
            throw std::invalid_argument("level count " + std::to_string(schedule.counts[j]) +
                                        " below degree + 1");
        }
        if (j > 0 && schedule.counts[j] >= schedule.counts[j - 1]) {
            throw std::invalid_argument("level schedule must be strictly decreasing");
        }
    }
}

}  // namespace

int LevelSchedule::total_rows() const {
    return std::accumulate(counts.begin(), counts.end(), 0);
}

TransportOperator build_transport(int k_fine, int k_coarse, int reference_frames,
                                  int degree, double mu) {
    if (k_fine < k_coarse) {
        throw std::invalid_argument("transport requires k_fine >= k_coarse");
    }
    if (reference_frames < 2) {
        throw std::invalid_argument("reference_frames must be at least 2");
    }
    const BasisMatrix coarse_basis =
        build_uniform_basis_matrix(k_coarse, degree, reference_frames);
    const BasisMatrix fine_basis =
        build_uniform_basis_matrix(k_fine, degree, reference_frames);
    const FittingOperator refit = build_fitting_operator(fine_basis, mu);
    TransportOperator transport;
    transport.matrix = matmul(refit.operator_matrix, coarse_basis.entries);
    if (condition_number(transport.matrix) > 1e10) {
        throw NumericalError("transport " + std::to_string(k_fine) + "<-" +
                             std::to_string(k_coarse) + " is ill-conditioned");
    }
    transport.pseudo_inverse = pseudo_inverse(transport.matrix);
    return transport;
}

ControlGrid pad_control_points(const ControlGrid& controls, int k_target) {
    if (k_target < controls.control_count) {
        throw std::invalid_argument("pad target below current control count");
    }
    if (k_target == controls.control_count) return controls;
    ControlGrid out(k_target, controls.point_count, controls.degree);
    out.source_frame_count = controls.source_frame_count;
    const std::size_t bytes = controls.columns() * sizeof(double);
    for (int i = 0; i < k_target; ++i) {
        const int src = std::min(i, controls.control_count - 1);
        std::memcpy(out.row(i), controls.row(src), bytes);
    }
    return out;
}

EmbeddingBasis build_embedding_basis(const LevelSchedule& schedule, int degree, double mu) {
    validate_schedule(schedule, degree);
    EmbeddingBasis basis;
    basis.schedule = schedule;
    basis.degree = degree;
    basis.mu = mu;

    const std::vector<int>& s = schedule.counts;
    basis.row_offsets.resize(s.size());
    int offset = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        basis.row_offsets[j] = offset;
        offset += s[j];
    }

    const auto k_top = static_cast<std::size_t>(s.front());
    basis.w = Mat(static_cast<std::size_t>(schedule.total_rows()), k_top);
    // chain maps the finest grid to the current level's coordinates.
    Mat chain = Mat::identity(k_top);
    for (std::size_t j = 0; j + 1 < s.size(); ++j) {
        TransportOperator t =
            build_transport(s[j], s[j + 1], schedule.reference_frames, degree, mu);
        const Mat projector = matmul(t.matrix, t.pseudo_inverse);
        // Residual block: (I - T T^+) restricted to this level.
        Mat block = matmul(projector, chain);
        for (std::size_t r = 0; r < block.rows; ++r) {
            for (std::size_t c = 0; c < block.cols; ++c) {
                basis.w(static_cast<std::size_t>(basis.row_offsets[j]) + r, c) =
                    chain(r, c) - block(r, c);
            }
        }
        chain = matmul(t.pseudo_inverse, chain);
        basis.transports.push_back(std::move(t));
    }
    // Coarsest block: the fully chained projection itself.
    const std::size_t last = s.size() - 1;
    for (std::size_t r = 0; r < chain.rows; ++r) {
        for (std::size_t c = 0; c < chain.cols; ++c) {
            basis.w(static_cast<std::size_t>(basis.row_offsets[last]) + r, c) = chain(r, c);
        }
    }
    return basis;
}

EmbeddingStack embed(const ControlGrid& controls,
                     std::shared_ptr<const EmbeddingBasis> basis, int workers) {
    if (!basis) throw std::invalid_argument("embedding basis is null");
    if (controls.control_count != basis->schedule.counts.front()) {
        throw std::invalid_argument(
            "control grid has " + std::to_string(controls.control_count) +
            " rows, embedding expects " + std::to_string(basis->schedule.counts.front()));
    }
    EmbeddingStack stack;
    stack.basis = std::move(basis);
    stack.point_count = controls.point_count;
    stack.data.resize(static_cast<std::size_t>(stack.basis->schedule.total_rows()) *
                      stack.columns());
    const Mat& w = stack.basis->w;
    parallel_for_blocks(stack.columns(), workers, [&](std::size_t j0, std::size_t j1) {
        kernels::matmul(w.data(), w.rows, w.cols, controls.points.data() + j0,
                        controls.columns(), j1 - j0, stack.data.data() + j0,
                        stack.columns());
    });
    return stack;
}

ControlGrid reconstruct_from_embedding(const EmbeddingStack& stack, int workers) {
    if (!stack.basis) throw std::invalid_argument("embedding stack has no basis");
    const EmbeddingBasis& basis = *stack.basis;
    const std::vector<int>& s = basis.schedule.counts;
    const std::size_t cols = stack.columns();

    const std::size_t last = s.size() - 1;
    std::vector<double> current(stack.block(last),
                                stack.block(last) + static_cast<std::size_t>(s[last]) * cols);
    for (std::size_t j = last; j-- > 0;) {
        const Mat& t = basis.transports[j].matrix;
        std::vector<double> lifted(static_cast<std::size_t>(s[j]) * cols);
        parallel_for_blocks(cols, workers, [&](std::size_t j0, std::size_t j1) {
            kernels::matmul(t.data(), t.rows, t.cols, current.data() + j0, cols, j1 - j0,
                            lifted.data() + j0, cols);
        });
        const double* residual = stack.block(j);
        for (std::size_t i = 0; i < lifted.size(); ++i) lifted[i] += residual[i];
        current = std::move(lifted);
    }
    ControlGrid out(s.front(), stack.point_count, basis.degree);
    out.points = std::move(current);
    return out;
}

}  // namespace mspline

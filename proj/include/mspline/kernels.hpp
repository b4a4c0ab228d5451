// Data-parallel inner-loop kernels with runtime backend selection.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2 variant. The dispatcher picks the widest backend the CPU supports
// at first use; MSPLINE_KERNELS=scalar|avx2 overrides it.
//
// The AVX2 variants keep the reference rounding: same per-element
// operation order, no FMA contraction. Both backends produce
// bitwise-identical results, and the equivalence tests assert exactly
// that.

#pragma once

#include <cstddef>
#include <cstdint>

namespace mspline::kernels {

enum class Backend { scalar, avx2 };

// Backend currently dispatched to.
Backend active_backend();
const char* backend_name();

// Force a backend (tests, benchmarking). Throws std::invalid_argument if
// the requested backend is not available on this CPU/build.
void force_backend(Backend b);

// True when the AVX2 variants were compiled in and the CPU supports them.
bool avx2_available();

// C = A * X with A row-major rows x inner (contiguous), X row-major
// inner x cols with row stride ldx >= cols, C row-major rows x cols with
// row stride ldc >= cols. Accumulation runs in t-order along `inner`, so
// the value of each output element is independent of how callers split
// the column range across strided blocks.
void matmul(const double* a, std::size_t rows, std::size_t inner,
            const double* x, std::size_t ldx, std::size_t cols,
            double* c, std::size_t ldc);

// Barycentric gather: for each sample s,
//   out[s,:] = w[s,0]*field[tri[s,0],:] + w[s,1]*field[tri[s,1],:]
//            + w[s,2]*field[tri[s,2],:]
// field is n_rows x width row-major; tri holds row indices.
void bary_gather(const std::uint32_t* tri, const double* w,
                 std::size_t n_samples, const double* field,
                 std::size_t width, double* out);

// dist[i] = min(dist[i], |p_i - q|^2) over SoA coordinates.
void min_dist_update(const double* xs, const double* ys, const double* zs,
                     std::size_t n, const double q[3], double* dist);

// sum_i |a_i - b_i|
double abs_diff_sum(const double* a, const double* b, std::size_t n);

// sum_i (a_i - b_i)^2
double sq_diff_sum(const double* a, const double* b, std::size_t n);

namespace scalar {
void matmul(const double* a, std::size_t rows, std::size_t inner,
            const double* x, std::size_t ldx, std::size_t cols,
            double* c, std::size_t ldc);
void bary_gather(const std::uint32_t* tri, const double* w,
                 std::size_t n_samples, const double* field,
                 std::size_t width, double* out);
void min_dist_update(const double* xs, const double* ys, const double* zs,
                     std::size_t n, const double q[3], double* dist);
double abs_diff_sum(const double* a, const double* b, std::size_t n);
double sq_diff_sum(const double* a, const double* b, std::size_t n);
}  // namespace scalar

namespace avx2 {
// Present only when compiled for x86-64; calling them on a CPU without
// AVX2 is undefined. Go through the dispatching functions above.
void matmul(const double* a, std::size_t rows, std::size_t inner,
            const double* x, std::size_t ldx, std::size_t cols,
            double* c, std::size_t ldc);
void bary_gather(const std::uint32_t* tri, const double* w,
                 std::size_t n_samples, const double* field,
                 std::size_t width, double* out);
void min_dist_update(const double* xs, const double* ys, const double* zs,
                     std::size_t n, const double q[3], double* dist);
double abs_diff_sum(const double* a, const double* b, std::size_t n);
double sq_diff_sum(const double* a, const double* b, std::size_t n);
}  // namespace avx2

}  // namespace mspline::kernels

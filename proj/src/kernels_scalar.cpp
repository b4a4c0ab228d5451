#include "mspline/kernels.hpp"

#include <cmath>

namespace mspline::kernels::scalar {

void matmul(const double* a, std::size_t rows, std::size_t inner,
            const double* x, std::size_t ldx, std::size_t cols,
            double* c, std::size_t ldc) {
    // Row-of-C at a time, streaming over rows of X. The accumulation for
    // each output element runs in increasing t, same order as the SIMD
    // variant.
    for (std::size_t i = 0; i < rows; ++i) {
        double* ci = c + i * ldc;
        for (std::size_t j = 0; j < cols; ++j) ci[j] = 0.0;
        const double* ai = a + i * inner;
        for (std::size_t t = 0; t < inner; ++t) {
            const double av = ai[t];
            const double* xt = x + t * ldx;
            for (std::size_t j = 0; j < cols; ++j) ci[j] += av * xt[j];
        }
    }
}

void bary_gather(const std::uint32_t* tri, const double* w,
                 std::size_t n_samples, const double* field,
                 std::size_t width, double* out) {
    for (std::size_t s = 0; s < n_samples; ++s) {
        const double* f0 = field + std::size_t(tri[3 * s + 0]) * width;
        const double* f1 = field + std::size_t(tri[3 * s + 1]) * width;
        const double* f2 = field + std::size_t(tri[3 * s + 2]) * width;
        const double w0 = w[3 * s + 0], w1 = w[3 * s + 1], w2 = w[3 * s + 2];
        double* o = out + s * width;
        for (std::size_t c = 0; c < width; ++c)
            o[c] = w0 * f0[c] + w1 * f1[c] + w2 * f2[c];
    }
}

void min_dist_update(const double* xs, const double* ys, const double* zs,
                     std::size_t n, const double q[3], double* dist) {
    const double qx = q[0], qy = q[1], qz = q[2];
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - qx;
        const double dy = ys[i] - qy;
        const double dz = zs[i] - qz;
        const double d2 = dx * dx + dy * dy + dz * dz;
        if (d2 < dist[i]) dist[i] = d2;
    }
}

double abs_diff_sum(const double* a, const double* b, std::size_t n) {
    // Four independent partial sums, matching the SIMD lane layout.
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += std::fabs(a[i + 0] - b[i + 0]);
        s1 += std::fabs(a[i + 1] - b[i + 1]);
        s2 += std::fabs(a[i + 2] - b[i + 2]);
        s3 += std::fabs(a[i + 3] - b[i + 3]);
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += std::fabs(a[i] - b[i]);
    return ((s0 + s1) + (s2 + s3)) + tail;
}

double sq_diff_sum(const double* a, const double* b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const double d0 = a[i + 0] - b[i + 0];
        const double d1 = a[i + 1] - b[i + 1];
        const double d2 = a[i + 2] - b[i + 2];
        const double d3 = a[i + 3] - b[i + 3];
        s0 += d0 * d0;
        s1 += d1 * d1;
        s2 += d2 * d2;
        s3 += d3 * d3;
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        tail += d * d;
    }
    return ((s0 + s1) + (s2 + s3)) + tail;
}

}  // namespace mspline::kernels::scalar

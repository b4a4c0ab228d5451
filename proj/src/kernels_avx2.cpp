// AVX2 kernel variants. Compiled with -mavx2 on x86-64 only.
//
// These intentionally use separate multiply and add (no FMA contraction)
// so every element is rounded exactly as in the scalar reference; the
// two backends produce bitwise-identical output.

#if defined(__x86_64__) || defined(_M_X64)

#include "mspline/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace mspline::kernels::avx2 {

namespace {

inline double reduce_lanes(__m256d v) {
    // ((lane0 + lane1) + (lane2 + lane3)), matching the scalar partials.
    alignas(32) double lane[4];
    _mm256_store_pd(lane, v);
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace

void matmul(const double* a, std::size_t rows, std::size_t inner,
            const double* x, std::size_t ldx, std::size_t cols,
            double* c, std::size_t ldc) {
    const std::size_t jv = cols - cols % 8;
    std::size_t i = 0;
    for (; i + 4 <= rows; i += 4) {
        const double* a0 = a + (i + 0) * inner;
        const double* a1 = a + (i + 1) * inner;
        const double* a2 = a + (i + 2) * inner;
        const double* a3 = a + (i + 3) * inner;
        double* c0 = c + (i + 0) * ldc;
        double* c1 = c + (i + 1) * ldc;
        double* c2 = c + (i + 2) * ldc;
        double* c3 = c + (i + 3) * ldc;
        for (std::size_t j = 0; j < jv; j += 8) {
            __m256d s00 = _mm256_setzero_pd(), s01 = _mm256_setzero_pd();
            __m256d s10 = _mm256_setzero_pd(), s11 = _mm256_setzero_pd();
            __m256d s20 = _mm256_setzero_pd(), s21 = _mm256_setzero_pd();
            __m256d s30 = _mm256_setzero_pd(), s31 = _mm256_setzero_pd();
            const double* xp = x + j;
            for (std::size_t t = 0; t < inner; ++t, xp += ldx) {
                const __m256d x0 = _mm256_loadu_pd(xp);
                const __m256d x1 = _mm256_loadu_pd(xp + 4);
                __m256d b;
                b = _mm256_set1_pd(a0[t]);
                s00 = _mm256_add_pd(s00, _mm256_mul_pd(b, x0));
                s01 = _mm256_add_pd(s01, _mm256_mul_pd(b, x1));
                b = _mm256_set1_pd(a1[t]);
                s10 = _mm256_add_pd(s10, _mm256_mul_pd(b, x0));
                s11 = _mm256_add_pd(s11, _mm256_mul_pd(b, x1));
                b = _mm256_set1_pd(a2[t]);
                s20 = _mm256_add_pd(s20, _mm256_mul_pd(b, x0));
                s21 = _mm256_add_pd(s21, _mm256_mul_pd(b, x1));
                b = _mm256_set1_pd(a3[t]);
                s30 = _mm256_add_pd(s30, _mm256_mul_pd(b, x0));
                s31 = _mm256_add_pd(s31, _mm256_mul_pd(b, x1));
            }
            _mm256_storeu_pd(c0 + j, s00);
            _mm256_storeu_pd(c0 + j + 4, s01);
            _mm256_storeu_pd(c1 + j, s10);
            _mm256_storeu_pd(c1 + j + 4, s11);
            _mm256_storeu_pd(c2 + j, s20);
            _mm256_storeu_pd(c2 + j + 4, s21);
            _mm256_storeu_pd(c3 + j, s30);
            _mm256_storeu_pd(c3 + j + 4, s31);
        }
        for (std::size_t j = jv; j < cols; ++j) {
            double d0 = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
            const double* xp = x + j;
            for (std::size_t t = 0; t < inner; ++t, xp += ldx) {
                const double xv = *xp;
                d0 += a0[t] * xv;
                d1 += a1[t] * xv;
                d2 += a2[t] * xv;
                d3 += a3[t] * xv;
            }
            c0[j] = d0;
            c1[j] = d1;
            c2[j] = d2;
            c3[j] = d3;
        }
    }
    for (; i < rows; ++i) {
        const double* ai = a + i * inner;
        double* ci = c + i * ldc;
        for (std::size_t j = 0; j < jv; j += 8) {
            __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
            const double* xp = x + j;
            for (std::size_t t = 0; t < inner; ++t, xp += ldx) {
                const __m256d b = _mm256_set1_pd(ai[t]);
                s0 = _mm256_add_pd(s0, _mm256_mul_pd(b, _mm256_loadu_pd(xp)));
                s1 = _mm256_add_pd(s1, _mm256_mul_pd(b, _mm256_loadu_pd(xp + 4)));
            }
            _mm256_storeu_pd(ci + j, s0);
            _mm256_storeu_pd(ci + j + 4, s1);
        }
        for (std::size_t j = jv; j < cols; ++j) {
            double d = 0.0;
            const double* xp = x + j;
            for (std::size_t t = 0; t < inner; ++t, xp += ldx) d += ai[t] * *xp;
            ci[j] = d;
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
        const __m256d w0 = _mm256_set1_pd(w[3 * s + 0]);
        const __m256d w1 = _mm256_set1_pd(w[3 * s + 1]);
        const __m256d w2 = _mm256_set1_pd(w[3 * s + 2]);
        double* o = out + s * width;
        std::size_t c = 0;
        for (; c + 4 <= width; c += 4) {
            __m256d v = _mm256_add_pd(
                _mm256_mul_pd(w0, _mm256_loadu_pd(f0 + c)),
                _mm256_mul_pd(w1, _mm256_loadu_pd(f1 + c)));
            v = _mm256_add_pd(v, _mm256_mul_pd(w2, _mm256_loadu_pd(f2 + c)));
            _mm256_storeu_pd(o + c, v);
        }
        const double s0 = w[3 * s + 0], s1 = w[3 * s + 1], s2 = w[3 * s + 2];
        for (; c < width; ++c) o[c] = s0 * f0[c] + s1 * f1[c] + s2 * f2[c];
    }
}

void min_dist_update(const double* xs, const double* ys, const double* zs,
                     std::size_t n, const double q[3], double* dist) {
    const __m256d qx = _mm256_set1_pd(q[0]);
    const __m256d qy = _mm256_set1_pd(q[1]);
    const __m256d qz = _mm256_set1_pd(q[2]);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), qx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), qy);
        const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + i), qz);
        __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
        d2 = _mm256_add_pd(d2, _mm256_mul_pd(dz, dz));
        const __m256d cur = _mm256_loadu_pd(dist + i);
        _mm256_storeu_pd(dist + i, _mm256_min_pd(d2, cur));
    }
    for (; i < n; ++i) {
        const double dx = xs[i] - q[0];
        const double dy = ys[i] - q[1];
        const double dz = zs[i] - q[2];
        const double d2 = dx * dx + dy * dy + dz * dz;
        if (d2 < dist[i]) dist[i] = d2;
    }
}

double abs_diff_sum(const double* a, const double* b, std::size_t n) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, d));
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += std::fabs(a[i] - b[i]);
    return reduce_lanes(acc) + tail;
}

double sq_diff_sum(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        tail += d * d;
    }
    return reduce_lanes(acc) + tail;
}

}  // namespace mspline::kernels::avx2

#endif  // x86-64

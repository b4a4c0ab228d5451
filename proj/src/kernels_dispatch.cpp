#include "mspline/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace mspline::kernels {

namespace {

bool cpu_has_avx2() {
#if MSPLINE_HAVE_AVX2_TU && defined(__GNUC__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Backend resolve_initial() {
    if (const char* env = std::getenv("MSPLINE_KERNELS")) {
        const std::string s(env);
        if (s == "scalar") return Backend::scalar;
        if (s == "avx2" && cpu_has_avx2()) return Backend::avx2;
        // Unknown or unavailable value falls through to auto.
    }
    return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

Backend& current() {
    static Backend b = resolve_initial();
    return b;
}

}  // namespace

bool avx2_available() { return cpu_has_avx2(); }

Backend active_backend() { return current(); }

const char* backend_name() {
    return current() == Backend::avx2 ? "avx2" : "scalar";
}

void force_backend(Backend b) {
    if (b == Backend::avx2 && !cpu_has_avx2())
        throw std::invalid_argument("kernels: avx2 backend not available on this CPU/build");
    current() = b;
}

#if MSPLINE_HAVE_AVX2_TU
#define MSPLINE_DISPATCH(fn, ...) \
    return current() == Backend::avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__)
#else
#define MSPLINE_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

void matmul(const double* a, std::size_t rows, std::size_t inner,
            const double* x, std::size_t ldx, std::size_t cols,
            double* c, std::size_t ldc) {
    MSPLINE_DISPATCH(matmul, a, rows, inner, x, ldx, cols, c, ldc);
}

void bary_gather(const std::uint32_t* tri, const double* w,
                 std::size_t n_samples, const double* field,
                 std::size_t width, double* out) {
    MSPLINE_DISPATCH(bary_gather, tri, w, n_samples, field, width, out);
}

void min_dist_update(const double* xs, const double* ys, const double* zs,
                     std::size_t n, const double q[3], double* dist) {
    MSPLINE_DISPATCH(min_dist_update, xs, ys, zs, n, q, dist);
}

double abs_diff_sum(const double* a, const double* b, std::size_t n) {
    MSPLINE_DISPATCH(abs_diff_sum, a, b, n);
}

double sq_diff_sum(const double* a, const double* b, std::size_t n) {
    MSPLINE_DISPATCH(sq_diff_sum, a, b, n);
}

#undef MSPLINE_DISPATCH

}  // namespace mspline::kernels

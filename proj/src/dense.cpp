#include "mspline/dense.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mspline/errors.hpp"
#include "mspline/kernels.hpp"

namespace mspline {

Mat Mat::identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat matmul(const Mat& lhs, const Mat& rhs) {
    if (lhs.cols != rhs.rows)
        throw std::invalid_argument("matmul: inner dimensions disagree");
    Mat out(lhs.rows, rhs.cols);
    kernels::matmul(lhs.data(), lhs.rows, lhs.cols, rhs.data(), rhs.cols, rhs.cols,
                    out.data(), rhs.cols);
    return out;
}

Mat transpose(const Mat& m) {
    Mat t(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
    return t;
}

double fro_norm(const Mat& m) {
    double s = 0.0;
    for (double v : m.a) s += v * v;
    return std::sqrt(s);
}

Mat cholesky_lower(const Mat& spd) {
    if (spd.rows != spd.cols)
        throw std::invalid_argument("cholesky: matrix not square");
    const std::size_t n = spd.rows;
    Mat l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = spd(j, j);
        for (std::size_t t = 0; t < j; ++t) d -= l(j, t) * l(j, t);
        if (!(d > 0.0) || !std::isfinite(d))
            throw NumericalError("cholesky: matrix is not positive definite");
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = spd(i, j);
            for (std::size_t t = 0; t < j; ++t) s -= l(i, t) * l(j, t);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

void cholesky_solve(const Mat& chol_lower, std::span<double> b) {
    const std::size_t n = chol_lower.rows;
    if (b.size() != n)
        throw std::invalid_argument("cholesky_solve: rhs length mismatch");
    // L y = b
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t j = 0; j < i; ++j) s -= chol_lower(i, j) * b[j];
        b[i] = s / chol_lower(i, i);
    }
    // L^T x = y
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= chol_lower(j, ii) * b[j];
        b[ii] = s / chol_lower(ii, ii);
    }
}

Mat cholesky_solve(const Mat& chol_lower, const Mat& rhs) {
    if (rhs.rows != chol_lower.rows)
        throw std::invalid_argument("cholesky_solve: rhs rows mismatch");
    Mat x = rhs;
    std::vector<double> col(rhs.rows);
    for (std::size_t j = 0; j < rhs.cols; ++j) {
        for (std::size_t i = 0; i < rhs.rows; ++i) col[i] = rhs(i, j);
        cholesky_solve(chol_lower, col);
        for (std::size_t i = 0; i < rhs.rows; ++i) x(i, j) = col[i];
    }
    return x;
}

namespace {

// One-sided Jacobi on the columns of w (rows >= cols assumed), with the
// right rotations accumulated into v.
void jacobi_orthogonalize(Mat& w, Mat& v) {
    const std::size_t n = w.cols;
    const double tol = 1e-15;
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < w.rows; ++i) {
                    const double wp = w(i, p), wq = w(i, q);
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < w.rows; ++i) {
                    const double wp = w(i, p), wq = w(i, q);
                    w(i, p) = c * wp - s * wq;
                    w(i, q) = s * wp + c * wq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) return;
    }
    throw NumericalError("jacobi_svd: no convergence within sweep limit");
}

}  // namespace

Svd jacobi_svd(const Mat& m) {
    if (m.rows < m.cols) {
        // Work on the transpose and swap the factors back.
        Svd t = jacobi_svd(transpose(m));
        return Svd{std::move(t.v), std::move(t.sigma), std::move(t.u)};
    }
    Mat w = m;
    Mat v = Mat::identity(m.cols);
    jacobi_orthogonalize(w, v);

    const std::size_t n = m.cols;
    std::vector<double> sigma(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < w.rows; ++i) s += w(i, j) * w(i, j);
        sigma[j] = std::sqrt(s);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

    Svd out;
    out.u = Mat(m.rows, n);
    out.v = Mat(n, n);
    out.sigma.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        out.sigma[j] = sigma[src];
        const double inv = sigma[src] > 0.0 ? 1.0 / sigma[src] : 0.0;
        for (std::size_t i = 0; i < m.rows; ++i) out.u(i, j) = w(i, src) * inv;
        for (std::size_t i = 0; i < n; ++i) out.v(i, j) = v(i, src);
    }
    return out;
}

Mat pseudo_inverse(const Mat& m, double rcond) {
    const Svd svd = jacobi_svd(m);
    const double cutoff = svd.sigma.empty() ? 0.0 : rcond * svd.sigma.front();
    // pinv = V diag(1/sigma) U^T over the retained spectrum.
    Mat scaled_v = svd.v;  // cols x r
    for (std::size_t j = 0; j < svd.sigma.size(); ++j) {
        const double inv = svd.sigma[j] > cutoff ? 1.0 / svd.sigma[j] : 0.0;
        for (std::size_t i = 0; i < scaled_v.rows; ++i) scaled_v(i, j) *= inv;
    }
    return matmul(scaled_v, transpose(svd.u));
}

double condition_number(const Mat& m) {
    const Svd svd = jacobi_svd(m);
    if (svd.sigma.empty()) return 0.0;
    const double smin = svd.sigma.back();
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return svd.sigma.front() / smin;
}

}  // namespace mspline

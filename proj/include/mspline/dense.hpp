// Small dense matrices and the factorizations the solver and embedding
// need: Cholesky for the regularized Gram systems and a one-sided Jacobi
// SVD for pseudo-inverses of transport operators. Everything here targets
// matrices on the order of the control-point count (tens of rows), where
// exactness matters more than blocking.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mspline {

struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    double* data() { return a.data(); }
    const double* data() const { return a.data(); }

    double* row(std::size_t i) { return a.data() + i * cols; }
    const double* row(std::size_t i) const { return a.data() + i * cols; }

    static Mat identity(std::size_t n);
};

Mat matmul(const Mat& lhs, const Mat& rhs);
Mat transpose(const Mat& m);

// Frobenius norm.
double fro_norm(const Mat& m);

// Lower-triangular L with L L^T = spd. Throws NumericalError when a pivot
// is not strictly positive.
Mat cholesky_lower(const Mat& spd);

// Solves (L L^T) x = b in place, b of length L.rows.
void cholesky_solve(const Mat& chol_lower, std::span<double> b);

// Solves (L L^T) X = rhs column by column.
Mat cholesky_solve(const Mat& chol_lower, const Mat& rhs);

// Thin SVD a = u * diag(sigma) * v^T with sigma sorted descending.
// u is rows x min(rows,cols), v is cols x min(rows,cols).
struct Svd {
    Mat u;
    std::vector<double> sigma;
    Mat v;
};

Svd jacobi_svd(const Mat& m);

// Moore-Penrose pseudo-inverse with singular values below
// rcond * sigma_max treated as zero.
Mat pseudo_inverse(const Mat& m, double rcond = 1e-10);

// sigma_max / sigma_min from the SVD; infinity when sigma_min == 0.
double condition_number(const Mat& m);

}  // namespace mspline

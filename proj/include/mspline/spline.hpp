// Clamped uniform B-spline knot vectors, Cox-de Boor basis evaluation,
// and sampled basis matrices over the normalized domain [0, 1].

#pragma once

#include <span>
#include <vector>

#include "mspline/dense.hpp"

namespace mspline {

// Knot vector u_0..u_{m-1} with m = control_count + degree + 1, clamped:
// the first and last knot values repeat degree+1 times, interior knots
// uniformly spaced. Immutable after construction.
struct KnotVector {
    std::vector<double> values;
    int degree = 0;
    int control_count = 0;

    double domain_start() const { return values[static_cast<std::size_t>(degree)]; }
    double domain_end() const { return values[static_cast<std::size_t>(control_count)]; }
};

// Clamped knots over [0, 1]. Requires control_count >= degree + 1 and
// degree >= 1; the curve is underdetermined below that.
KnotVector build_clamped_uniform_knots(int control_count, int degree);

// All control_count basis values [N_{0,d}(t), ..., N_{k-1,d}(t)].
// t must lie in [domain_start, domain_end]; the right endpoint evaluates
// as the limit from the left so the last basis function reaches 1.
// The result is a partition of unity with at most degree+1 nonzeros.
std::vector<double> basis_values(const KnotVector& knots, double t);

// Derivatives of order 1..degree of every basis function at t, via the
// standard knot-difference recurrence. Order above the degree is
// rejected; first-derivative rows sum to zero.
std::vector<double> basis_derivative_values(const KnotVector& knots, double t, int order);

// T x k matrix of basis rows sampled at the given parameters, plus the
// knots and times it was built from.
struct BasisMatrix {
    Mat entries;  // frame_count x control_count
    std::vector<double> sample_times;
    KnotVector knots;

    std::size_t frame_count() const { return entries.rows; }
    std::size_t control_count() const { return entries.cols; }
    int degree() const { return knots.degree; }
};

// Frame parameterization: frame_count >= 2 places times evenly over
// [0, 1] inclusive of both endpoints; a single frame maps to 0.
std::vector<double> uniform_sample_times(int frame_count);

BasisMatrix build_basis_matrix(int control_count, int degree,
                               std::span<const double> sample_times);

BasisMatrix build_uniform_basis_matrix(int control_count, int degree, int frame_count);

}  // namespace mspline

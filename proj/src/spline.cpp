#include "mspline/spline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mspline {

namespace {

// Index of the half-open span [u_i, u_{i+1}) containing t, clamped so the
// domain end maps to the last nontrivial span. Valid spans are d..k-1.
std::size_t find_span(const KnotVector& knots, double t) {
    const auto d = static_cast<std::size_t>(knots.degree);
    const auto k = static_cast<std::size_t>(knots.control_count);
    if (t >= knots.domain_end()) return k - 1;
    const auto& u = knots.values;
    auto it = std::upper_bound(u.begin() + static_cast<std::ptrdiff_t>(d),
                               u.begin() + static_cast<std::ptrdiff_t>(k) + 1, t);
    auto span = static_cast<std::size_t>(it - u.begin()) - 1;
    return std::clamp(span, d, k - 1);
}

void check_domain(const KnotVector& knots, double t) {
    if (!(t >= knots.domain_start() && t <= knots.domain_end())) {
        throw std::invalid_argument("parameter " + std::to_string(t) +
                                    " outside clamped domain [0, 1]");
    }
}

// All basis values of the given degree on this knot vector, built bottom-up
// from the degree-0 indicator of the span containing t. Functions whose
// support excludes t stay exactly zero, so local support is exact.
std::vector<double> raise_degree(const KnotVector& knots, double t, int target_degree) {
    const auto& u = knots.values;
    const std::size_t m = u.size();
    std::vector<double> n(m - 1, 0.0);
    n[find_span(knots, t)] = 1.0;
    for (int p = 1; p <= target_degree; ++p) {
        const std::size_t count = m - static_cast<std::size_t>(p) - 1;
        for (std::size_t i = 0; i < count; ++i) {
            double acc = 0.0;
            const double dl = u[i + static_cast<std::size_t>(p)] - u[i];
            if (dl > 0.0) acc += (t - u[i]) / dl * n[i];
            const double dr = u[i + static_cast<std::size_t>(p) + 1] - u[i + 1];
            if (dr > 0.0) acc += (u[i + static_cast<std::size_t>(p) + 1] - t) / dr * n[i + 1];
            n[i] = acc;
        }
        n.resize(count);
    }
    return n;
}

}  // namespace

KnotVector build_clamped_uniform_knots(int control_count, int degree) {
    if (degree < 1) throw std::invalid_argument("degree must be at least 1");
    if (control_count < degree + 1) {
        throw std::invalid_argument("control_count " + std::to_string(control_count) +
                                    " below degree + 1 = " + std::to_string(degree + 1));
    }
    KnotVector knots;
    knots.degree = degree;
    knots.control_count = control_count;
    const int m = control_count + degree + 1;
    const int interior = control_count - degree - 1;
    knots.values.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        double v = 0.0;
        if (i > degree) {
            v = (i >= control_count) ? 1.0
                                     : static_cast<double>(i - degree) /
                                           static_cast<double>(interior + 1);
        }
        knots.values[static_cast<std::size_t>(i)] = v;
    }
    return knots;
}

std::vector<double> basis_values(const KnotVector& knots, double t) {
    check_domain(knots, t);
    return raise_degree(knots, t, knots.degree);
}

std::vector<double> basis_derivative_values(const KnotVector& knots, double t, int order) {
    if (order < 1 || order > knots.degree) {
        throw std::invalid_argument("derivative order must be in [1, degree]");
    }
    check_domain(knots, t);
    const auto& u = knots.values;
    // Start from degree d-order values and raise back up through the
    // derivative recurrence: each step multiplies by the current degree and
    // differences scaled neighbors. Zero knot spans contribute nothing
    // (their basis functions vanish identically).
    std::vector<double> vals = raise_degree(knots, t, knots.degree - order);
    for (int step = 1; step <= order; ++step) {
        const int p = knots.degree - order + step;
        const std::size_t count = u.size() - static_cast<std::size_t>(p) - 1;
        std::vector<double> next(count, 0.0);
        for (std::size_t i = 0; i < count; ++i) {
            double acc = 0.0;
            const double dl = u[i + static_cast<std::size_t>(p)] - u[i];
            if (dl > 0.0) acc += vals[i] / dl;
            const double dr = u[i + static_cast<std::size_t>(p) + 1] - u[i + 1];
            if (dr > 0.0) acc -= vals[i + 1] / dr;
            next[i] = static_cast<double>(p) * acc;
        }
        vals = std::move(next);
    }
    return vals;
}

std::vector<double> uniform_sample_times(int frame_count) {
    if (frame_count < 1) throw std::invalid_argument("frame_count must be positive");
    if (frame_count == 1) return {0.0};
    std::vector<double> times(static_cast<std::size_t>(frame_count));
    for (int i = 0; i < frame_count; ++i) {
        times[static_cast<std::size_t>(i)] =
            static_cast<double>(i) / static_cast<double>(frame_count - 1);
    }
    return times;
}

BasisMatrix build_basis_matrix(int control_count, int degree,
                               std::span<const double> sample_times) {
    if (sample_times.empty()) throw std::invalid_argument("no sample times given");
    BasisMatrix basis;
    basis.knots = build_clamped_uniform_knots(control_count, degree);
    basis.sample_times.assign(sample_times.begin(), sample_times.end());
    basis.entries = Mat(sample_times.size(), static_cast<std::size_t>(control_count));
    for (std::size_t r = 0; r < sample_times.size(); ++r) {
        const std::vector<double> row = basis_values(basis.knots, sample_times[r]);
        std::copy(row.begin(), row.end(), basis.entries.row(r));
    }
    return basis;
}

BasisMatrix build_uniform_basis_matrix(int control_count, int degree, int frame_count) {
    const std::vector<double> times = uniform_sample_times(frame_count);
    return build_basis_matrix(control_count, degree, times);
}

}  // namespace mspline

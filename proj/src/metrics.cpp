#include "mspline/metrics.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <ostream>
#include <stdexcept>

#include "mspline/kernels.hpp"
#include "mspline/solver.hpp"

namespace mspline {

double charbonnier(std::span<const double> pred, std::span<const double> target,
                   double delta) {
    if (pred.size() != target.size()) {
        throw std::invalid_argument("charbonnier operands differ in size");
    }
    const double sq = kernels::sq_diff_sum(pred.data(), target.data(), pred.size());
    return std::sqrt(sq + delta * delta);
}

double correspondence_loss(const ControlGrid& controls, const TrajectoryGrid& ground_truth,
                           const MetricConfig& cfg) {
    if (controls.point_count != ground_truth.point_count) {
        throw std::invalid_argument("correspondence: point counts differ");
    }
    const TrajectoryGrid recon = reproject(controls, ground_truth.frame_count);
    return charbonnier(recon.deltas, ground_truth.deltas, cfg.delta);
}

double rigidity_loss(const TrajectoryGrid& motion, std::span<const double> base,
                     std::span<const std::uint32_t> neighbors, int k,
                     const MetricConfig& cfg) {
    if (motion.frame_count < 2) {
        throw std::invalid_argument("rigidity needs at least two frames");
    }
    const auto n = static_cast<std::size_t>(motion.point_count);
    if (!cfg.rigidity_on_displacements && base.size() != n * 3) {
        throw std::invalid_argument("rigidity: base positions must be n x 3");
    }
    if (k < 1 || neighbors.size() != n * static_cast<std::size_t>(k)) {
        throw std::invalid_argument("rigidity: neighbor table must be n x k");
    }
    const auto kk = static_cast<std::size_t>(k);
    const double d2 = cfg.delta * cfg.delta;
    const bool on_disp = cfg.rigidity_on_displacements;

    auto edge_length = [&](int t, std::size_t i, std::size_t j) {
        const double* di = motion.frame(t) + i * 3;
        const double* dj = motion.frame(t) + j * 3;
        double ex, ey, ez;
        if (on_disp) {
            ex = di[0] - dj[0];
            ey = di[1] - dj[1];
            ez = di[2] - dj[2];
        } else {
            ex = (base[i * 3 + 0] + di[0]) - (base[j * 3 + 0] + dj[0]);
            ey = (base[i * 3 + 1] + di[1]) - (base[j * 3 + 1] + dj[1]);
            ez = (base[i * 3 + 2] + di[2]) - (base[j * 3 + 2] + dj[2]);
        }
        return std::sqrt(ex * ex + ey * ey + ez * ez);
    };

    // Compensated accumulation: on perfectly rigid motion every term is
    // exactly delta and the mean must come back as delta, not delta plus
    // summation drift.
    double acc = 0.0, comp = 0.0;
    auto add = [&](double term) {
        const double y = term - comp;
        const double t2 = acc + y;
        comp = (t2 - acc) - y;
        acc = t2;
    };
    std::vector<double> prev(n * kk), cur(n * kk);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < kk; ++r) {
            prev[i * kk + r] = edge_length(0, i, neighbors[i * kk + r]);
        }
    }
    for (int t = 1; t < motion.frame_count; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t r = 0; r < kk; ++r) {
                const double rt = edge_length(t, i, neighbors[i * kk + r]);
                const double diff = rt - prev[i * kk + r];
                add(std::sqrt(diff * diff + d2));
                cur[i * kk + r] = rt;
            }
        }
        std::swap(prev, cur);
    }
    const double terms = static_cast<double>(motion.frame_count - 1) *
                         static_cast<double>(n) * static_cast<double>(kk);
    return acc / terms;
}

double total_weighted_loss(double fit, double correspondence, double rigidity,
                           const MetricConfig& cfg) {
    return fit + cfg.lambda1 * correspondence + cfg.lambda2 * rigidity;
}

double mean_l1_error(const TrajectoryGrid& pred, const TrajectoryGrid& ground_truth) {
    if (pred.deltas.size() != ground_truth.deltas.size()) {
        throw std::invalid_argument("mean_l1_error operands differ in shape");
    }
    const double sum = kernels::abs_diff_sum(pred.deltas.data(),
                                             ground_truth.deltas.data(),
                                             pred.deltas.size());
    return sum / static_cast<double>(pred.deltas.size());
}

TrajectoryGrid linear_baseline(const TrajectoryGrid& motion, int samples) {
    if (motion.frame_count < 2) {
        throw std::invalid_argument("linear baseline needs at least two frames");
    }
    if (samples < 2) throw std::invalid_argument("linear baseline needs samples >= 2");
    const int t_count = motion.frame_count;

    // Kept frame indices, deduplicated but order-preserving (rounding can
    // repeat an index when samples > T).
    std::vector<int> kept;
    kept.reserve(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        const int idx = static_cast<int>(std::llround(
            static_cast<double>(i) * static_cast<double>(t_count - 1) /
            static_cast<double>(samples - 1)));
        if (kept.empty() || idx != kept.back()) kept.push_back(idx);
    }

    TrajectoryGrid out(t_count, motion.point_count);
    const std::size_t cols = motion.columns();
    std::size_t seg = 0;
    for (int t = 0; t < t_count; ++t) {
        while (seg + 1 < kept.size() && kept[seg + 1] < t) ++seg;
        const int a = kept[seg];
        const int b = kept[std::min(seg + 1, kept.size() - 1)];
        if (t <= a || a == b) {
            std::memcpy(out.frame(t), motion.frame(a), cols * sizeof(double));
        } else if (t >= b) {
            std::memcpy(out.frame(t), motion.frame(b), cols * sizeof(double));
        } else {
            const double w =
                static_cast<double>(t - a) / static_cast<double>(b - a);
            const double* fa = motion.frame(a);
            const double* fb = motion.frame(b);
            double* o = out.frame(t);
            for (std::size_t c = 0; c < cols; ++c) {
                o[c] = fa[c] + (fb[c] - fa[c]) * w;
            }
        }
    }
    return out;
}

void write_metrics_report(std::ostream& out, std::span<const MetricsRecord> records) {
    out << "id\tframes\tk\tmethod\tmean_l1\trigidity\tcorrespondence\twall_ms\n";
    struct Acc {
        double l1 = 0.0, rigid = 0.0, corr = 0.0, wall = 0.0;
        int count = 0;
    };
    std::map<std::string, Acc> by_method;
    for (const MetricsRecord& r : records) {
        out << r.id << '\t' << r.frames << '\t' << r.k << '\t' << r.method << '\t'
            << r.mean_l1 << '\t' << r.rigidity << '\t' << r.correspondence << '\t'
            << r.wall_ms << '\n';
        Acc& a = by_method[r.method];
        a.l1 += r.mean_l1;
        a.rigid += r.rigidity;
        a.corr += r.correspondence;
        a.wall += r.wall_ms;
        a.count += 1;
    }
    for (const auto& [method, a] : by_method) {
        const double n = a.count > 0 ? static_cast<double>(a.count) : 1.0;
        out << "# mean\t" << method << "\tmean_l1=" << a.l1 / n
            << "\trigidity=" << a.rigid / n << "\tcorrespondence=" << a.corr / n
            << "\twall_ms=" << a.wall / n << '\n';
    }
}

}  // namespace mspline

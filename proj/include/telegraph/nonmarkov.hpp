// nonmarkov.hpp: trace-distance based memory measure from coherence
// revivals, computed as the summed regrowth of |F| over increasing runs

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "telegraph/decoherence.hpp"
#include "telegraph/model.hpp"

namespace telegraph {

// Trace distance of two qubit states in Bloch representation.
inline double trace_distance(const std::array<double, 3>& ra,
                             const std::array<double, 3>& rb) {
    const double dx = ra[0] - rb[0];
    const double dy = ra[1] - rb[1];
    const double dz = ra[2] - rb[2];
    return 0.5 * std::sqrt(dx * dx + dy * dy + dz * dz);
}

struct NonMarkovReport {
    std::vector<double> n_t;    // accumulated measure up to each sample
    double n_total{0.0};
    std::vector<std::pair<double, double>> revival_intervals;
    std::vector<double> d_opt;  // optimal-pair trace distance, |F|
    std::vector<std::string> warnings;
};

namespace detail {

// Derivative slopes below this are treated as zero. Roundoff in gamma where
// the exact slope vanishes (t = 0, extrema) would otherwise open spurious
// revival intervals; the residue cancellation behind gamma leaves errors up
// to ~1e-11 at switching rates around 1e6, so the deadband sits above that.
// Revivals suppressed by it contribute at most deadband * t_max to the
// measure, far below the reporting tolerance.
inline constexpr double kSlopeDeadband = 1e-10;

struct RefinedExtremum {
    double t{0.0};
    double value{0.0};
};

// Extremum of the cubic Hermite interpolant of (v0, d0) -- (v1, d1) over
// [t0, t1]. Falls back to the midpoint when the derivative quadratic
// degenerates.
inline RefinedExtremum hermite_extremum(double t0, double t1, double v0,
                                        double v1, double d0, double d1) {
    const double h = t1 - t0;
    const double a = 6.0 * (v0 - v1) + 3.0 * h * (d0 + d1);
    const double b = -6.0 * (v0 - v1) - 2.0 * h * (2.0 * d0 + d1);
    const double c = h * d0;
    double x = 0.5;
    if (a == 0.0) {
        if (b != 0.0) x = -c / b;
    } else {
        const double disc = b * b - 4.0 * a * c;
        if (disc >= 0.0) {
            const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
            const double x1 = q / a;
            const double x2 = q != 0.0 ? c / q : x1;
            x = x1 >= 0.0 && x1 <= 1.0 ? x1 : x2;
        }
    }
    x = std::clamp(x, 0.0, 1.0);
    const double x2v = x * x;
    const double x3 = x2v * x;
    const double value = v0 * (2.0 * x3 - 3.0 * x2v + 1.0) +
                         d0 * h * (x3 - 2.0 * x2v + x) +
                         v1 * (-2.0 * x3 + 3.0 * x2v) + d1 * h * (x3 - x2v);
    return {t0 + x * h, value};
}

}  // namespace detail

// Detects every interval of increasing |F| and sums the regrowth
// |F(end)| - |F(start)|, which equals the integral of the negative-rate
// (backflow) part of gamma |F| without quadrature error. Interval endpoints
// between samples are refined with a Hermite cubic of |F|; a sign flip of
// an exactly real F is a cusp whose minimum is exactly zero.
inline NonMarkovReport non_markovianity(
    const std::vector<CoherenceSample>& coherence) {
    const std::size_t n = coherence.size();
    NonMarkovReport report;
    report.d_opt.resize(n);
    report.n_t.assign(n, 0.0);
    if (n == 0) return report;

    std::vector<double> slope(n);
    for (std::size_t i = 0; i < n; ++i) {
        report.d_opt[i] = coherence[i].abs_f;
        slope[i] = coherence[i].near_zero
                       ? 0.0
                       : -coherence[i].gamma * coherence[i].abs_f;
    }
    const auto increasing = [&](std::size_t i) {
        return slope[i] > detail::kSlopeDeadband;
    };

    struct Run {
        std::size_t first, last;
        double t_start, v_start;
        double t_end, v_end;
    };
    std::vector<Run> runs;
    std::size_t i = 0;
    while (i < n) {
        if (!increasing(i)) {
            ++i;
            continue;
        }
        Run run;
        run.first = i;
        while (i + 1 < n && increasing(i + 1)) ++i;
        run.last = i;
        ++i;

        if (run.first == 0) {
            run.t_start = coherence[0].t;
            run.v_start = coherence[0].abs_f;
        } else {
            const CoherenceSample& lo = coherence[run.first - 1];
            const CoherenceSample& hi = coherence[run.first];
            const bool flip = lo.f.imag() == 0.0 && hi.f.imag() == 0.0 &&
                              std::signbit(lo.f.real()) !=
                                  std::signbit(hi.f.real());
            if (lo.near_zero) {
                run.t_start = lo.t;
                run.v_start = lo.abs_f;
            } else if (flip) {
                run.t_start = lo.t - lo.f.real() * (hi.t - lo.t) /
                                         (hi.f.real() - lo.f.real());
                run.v_start = 0.0;
            } else {
                const auto ext = detail::hermite_extremum(
                    lo.t, hi.t, lo.abs_f, hi.abs_f, slope[run.first - 1],
                    slope[run.first]);
                run.t_start = ext.t;
                run.v_start = std::min({ext.value, lo.abs_f, hi.abs_f});
            }
        }
        if (run.last + 1 == n) {
            run.t_end = coherence[n - 1].t;
            run.v_end = coherence[n - 1].abs_f;
        } else {
            const CoherenceSample& lo = coherence[run.last];
            const CoherenceSample& hi = coherence[run.last + 1];
            const auto ext = detail::hermite_extremum(
                lo.t, hi.t, lo.abs_f, hi.abs_f, slope[run.last],
                slope[run.last + 1]);
            run.t_end = ext.t;
            run.v_end = std::max({ext.value, lo.abs_f, hi.abs_f});
        }
        runs.push_back(run);
        if (run.last - run.first < 2)
            report.warnings.push_back(
                "revival interval near t=" + std::to_string(run.t_start) +
                " spans fewer than two grid steps; refine the time grid");
    }

    double base = 0.0;
    std::size_t next_run = 0;
    for (std::size_t k = 0; k < n; ++k) {
        while (next_run < runs.size() && k > runs[next_run].last) {
            base += runs[next_run].v_end - runs[next_run].v_start;
            ++next_run;
        }
        if (next_run < runs.size() && k >= runs[next_run].first &&
            k <= runs[next_run].last) {
            report.n_t[k] =
                base + std::max(0.0, coherence[k].abs_f - runs[next_run].v_start);
        } else {
            report.n_t[k] = base;
        }
    }
    double total = 0.0;
    for (const Run& run : runs) {
        report.revival_intervals.emplace_back(run.t_start, run.t_end);
        total += run.v_end - run.v_start;
    }
    report.n_total = total;
    return report;
}

}  // namespace telegraph

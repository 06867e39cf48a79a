#include <catch2/catch_amalgamated.hpp>

#include "telegraph/dynamics.hpp"
#include "telegraph/nonmarkov.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace telegraph;
using Catch::Approx;

namespace {

std::vector<CoherenceSample> standard_coherence(const NoiseParams& noise) {
    return sample_coherence(decompose(noise), uniform_grid(15.0, 1501));
}

// Independent reference: locate every critical point of |F| as a sign change
// of h = Re(F' conj F) on a dense grid, refine by bisection, and add up the
// growth of |F| between consecutive critical points. Zeros of F are cusps of
// |F| and show up as sign changes of h as well.
double critical_point_measure(const ModeDecomposition& modes, double t_max) {
    const std::size_t n = 150001;
    const auto slope_sign = [&](double t) {
        return (evaluate_df(modes, t) * std::conj(evaluate_f(modes, t))).real();
    };
    std::vector<double> marks{0.0};
    double prev_t = 0.0;
    double prev_h = slope_sign(0.0);
    for (std::size_t i = 1; i < n; ++i) {
        const double t =
            t_max * static_cast<double>(i) / static_cast<double>(n - 1);
        const double cur = slope_sign(t);
        if ((prev_h < 0.0 && cur > 0.0) || (prev_h > 0.0 && cur < 0.0)) {
            double lo = prev_t, hi = t, h_lo = prev_h;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double h_mid = slope_sign(mid);
                if ((h_lo < 0.0) == (h_mid < 0.0)) {
                    lo = mid;
                    h_lo = h_mid;
                } else {
                    hi = mid;
                }
            }
            marks.push_back(0.5 * (lo + hi));
        } else if (cur == 0.0 && prev_h != 0.0) {
            marks.push_back(t);
        }
        prev_t = t;
        prev_h = cur;
    }
    marks.push_back(t_max);
    double total = 0.0;
    for (std::size_t k = 1; k < marks.size(); ++k) {
        const double gain = std::abs(evaluate_f(modes, marks[k])) -
                            std::abs(evaluate_f(modes, marks[k - 1]));
        if (gain > 0.0) total += gain;
    }
    return total;
}

}  // namespace

TEST_CASE("trace distance of Bloch pairs", "[nonmarkov]") {
    CHECK(trace_distance({1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}) == 1.0);
    CHECK(trace_distance({0.0, 0.0, 0.0}, {0.0, 0.0, 1.0}) == 0.5);
    CHECK(trace_distance({0.3, -0.2, 0.1}, {0.3, -0.2, 0.1}) == 0.0);
}

TEST_CASE("the optimal pair distance is the coherence magnitude",
          "[nonmarkov]") {
    const auto coherence = standard_coherence({2.0, 1.0, 1.0, 0.5});
    const NonMarkovReport report = non_markovianity(coherence);
    REQUIRE(report.d_opt.size() == coherence.size());
    for (std::size_t i = 0; i < coherence.size(); ++i)
        CHECK(report.d_opt[i] == coherence[i].abs_f);
}

TEST_CASE("memory measure matches frozen values and decreases with bias",
          "[nonmarkov][regression]") {
    // lambda = kappa = 1, grid [0, 15] x 1501; references from the
    // critical-point construction on a 100x denser grid
    const NonMarkovReport unbiased = non_markovianity(standard_coherence({2.0, 1.0, 1.0, 0.0}));
    const NonMarkovReport half = non_markovianity(standard_coherence({2.0, 1.0, 1.0, 0.5}));
    const NonMarkovReport full = non_markovianity(standard_coherence({2.0, 1.0, 1.0, 1.0}));

    CHECK(unbiased.n_total == Approx(2.745808689318).margin(1e-6));
    CHECK(half.n_total == Approx(0.902806744172).margin(1e-6));
    CHECK(full.n_total == Approx(0.377864758922).margin(1e-6));

    CHECK(unbiased.n_total > half.n_total);
    CHECK(half.n_total > full.n_total);
    CHECK(full.n_total > 0.0);
}

TEST_CASE("memory measure agrees with the critical-point reference",
          "[nonmarkov][oracle]") {
    for (const double a : {0.0, 0.5, 1.0}) {
        const ModeDecomposition modes = decompose({2.0, 1.0, 1.0, a});
        const double reference = critical_point_measure(modes, 15.0);
        const NonMarkovReport report =
            non_markovianity(sample_coherence(modes, uniform_grid(15.0, 1501)));
        CHECK(report.n_total == Approx(reference).margin(5e-8));
    }
}

TEST_CASE("slow noise has no coherence revivals", "[nonmarkov]") {
    for (const double a : {0.0, 1.0}) {
        const NonMarkovReport report =
            non_markovianity(standard_coherence({0.5, 1.0, 1.0, a}));
        CHECK(report.n_total == 0.0);
        CHECK(report.revival_intervals.empty());
        CHECK(report.warnings.empty());
        for (const double v : report.n_t) CHECK(v == 0.0);
    }
}

TEST_CASE("fast switching erases the memory", "[nonmarkov]") {
    const NonMarkovReport report =
        non_markovianity(standard_coherence({0.5, 1.0, 1e6, 0.0}));
    CHECK(report.n_total == 0.0);
    CHECK(report.revival_intervals.empty());
}

TEST_CASE("no pair of states can beat the reported backflow",
          "[nonmarkov][property]") {
    const NoiseParams noise{2.0, 1.0, 1.0, 0.5};
    const TimeGrid grid = uniform_grid(15.0, 1501);
    const ModeDecomposition modes = decompose(noise);
    const auto coherence = sample_coherence(modes, grid);
    const NonMarkovReport report = non_markovianity(coherence);

    std::mt19937 rng(41);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    const auto draw_state = [&]() {
        for (;;) {
            const double x = coord(rng), y = coord(rng), z = coord(rng);
            if (x * x + y * y + z * z <= 1.0) return std::array<double, 3>{x, y, z};
        }
    };

    for (int pair = 0; pair < 200; ++pair) {
        SystemConfig sys_a, sys_b;
        sys_a.omega0 = sys_b.omega0 = 1.0;
        sys_a.r0 = draw_state();
        sys_b.r0 = draw_state();
        const Trajectory ta = evolve_from_coherence(sys_a, grid, coherence);
        const Trajectory tb = evolve_from_coherence(sys_b, grid, coherence);
        double gains = 0.0;
        double prev = trace_distance({ta.states[0].rx, ta.states[0].ry, ta.states[0].rz},
                                     {tb.states[0].rx, tb.states[0].ry, tb.states[0].rz});
        for (std::size_t i = 1; i < grid.samples.size(); ++i) {
            const double cur =
                trace_distance({ta.states[i].rx, ta.states[i].ry, ta.states[i].rz},
                               {tb.states[i].rx, tb.states[i].ry, tb.states[i].rz});
            if (cur > prev) gains += cur - prev;
            prev = cur;
        }
        CHECK(gains <= report.n_total + 1e-9);
    }
}

TEST_CASE("revival intervals are disjoint and start at the coherence zeros",
          "[nonmarkov]") {
    const NonMarkovReport report =
        non_markovianity(standard_coherence({2.0, 1.0, 1.0, 0.0}));
    REQUIRE(report.revival_intervals.size() >= 10);
    CHECK(report.warnings.empty());
    for (std::size_t k = 0; k < report.revival_intervals.size(); ++k) {
        const auto& [lo, hi] = report.revival_intervals[k];
        CHECK(lo < hi);
        if (k > 0) CHECK(report.revival_intervals[k - 1].second <= lo);
    }
    // unbiased revivals climb out of an exact zero of |F|
    CHECK(report.revival_intervals.front().first ==
          Approx(0.841070561).margin(1e-6));
}

TEST_CASE("a too-coarse grid triggers a refinement warning", "[nonmarkov]") {
    const auto coarse =
        sample_coherence(decompose({2.0, 1.0, 1.0, 0.5}), uniform_grid(15.0, 31));
    const NonMarkovReport report = non_markovianity(coarse);
    REQUIRE_FALSE(report.warnings.empty());
    CHECK(report.warnings.front().find("refine the time grid") !=
          std::string::npos);
}

TEST_CASE("the running measure accumulates monotonically to the total",
          "[nonmarkov]") {
    const NonMarkovReport report =
        non_markovianity(standard_coherence({2.0, 1.0, 1.0, 0.5}));
    REQUIRE_FALSE(report.n_t.empty());
    CHECK(report.n_t.front() == 0.0);
    for (std::size_t i = 1; i < report.n_t.size(); ++i)
        CHECK(report.n_t[i] >= report.n_t[i - 1]);
    CHECK(report.n_t.back() == report.n_total);
}

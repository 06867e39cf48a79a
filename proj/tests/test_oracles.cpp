#include <catch2/catch_amalgamated.hpp>

#include "telegraph/oracles.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

using namespace telegraph;
using Catch::Approx;

TEST_CASE("ODE integration reproduces the mode decomposition", "[oracles][ode]") {
    const TimeGrid grid = uniform_grid(15.0, 1501);
    const NoiseParams cases[] = {
        {0.5, 1.0, 1.0, 0.5},
        {2.0, 1.0, 1.0, 1.0},
        {2.0, 0.3, 10.0, -0.7},
    };
    for (const NoiseParams& p : cases) {
        const ModeDecomposition modes = decompose(p);
        REQUIRE_FALSE(modes.degenerate);
        const std::vector<Complex> f = ode_f(p, grid);
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.samples.size(); ++i)
            worst = std::max(worst,
                             std::abs(f[i] - evaluate_f(modes, grid.samples[i])));
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("ODE integration reproduces the static-amplitude coherence",
          "[oracles][ode]") {
    const NoiseParams p{2.0, 0.0, 1.0, 0.6};
    const TimeGrid grid = uniform_grid(10.0, 501);
    const std::vector<Complex> f = ode_f(p, grid);
    for (std::size_t i = 0; i < grid.samples.size(); ++i) {
        const double t = grid.samples[i];
        const Complex exact(std::cos(p.nu * t), p.a * std::sin(p.nu * t));
        CHECK(std::abs(f[i] - exact) < 1e-9);
    }
}

TEST_CASE("ODE evaluator answers random-access queries", "[oracles][ode]") {
    const NoiseParams p{2.0, 1.0, 1.0, 0.8};
    const ModeDecomposition modes = decompose(p);
    const OdeCoherenceEvaluator eval(p, uniform_grid(15.0, 301));

    for (const double t : {7.3, 2.1, 14.99, 0.0}) {
        CHECK(std::abs(eval.f_at(t) - evaluate_f(modes, t)) < 1e-8);
        CHECK(std::abs(eval.df_at(t) - evaluate_df(modes, t)) < 1e-8);
        const auto [f, df] = eval.f_df_at(t);
        CHECK(f == eval.f_at(t));
        CHECK(df == eval.df_at(t));
    }
    CHECK_THROWS_AS(eval.state_at(-1.0), NumericError);
}

TEST_CASE("ODE coherence samples carry shift, rate, and phase", "[oracles][ode]") {
    const NoiseParams p{0.5, 1.0, 1.0, 0.5};
    const TimeGrid grid = uniform_grid(10.0, 501);
    const ModeDecomposition modes = decompose(p);
    const auto direct = sample_coherence(modes, grid);
    const auto via_ode = ode_coherence(p, grid);
    REQUIRE(via_ode.size() == direct.size());
    for (std::size_t i = 0; i < direct.size(); ++i) {
        CHECK(via_ode[i].t == direct[i].t);
        CHECK(std::abs(via_ode[i].f - direct[i].f) < 1e-8);
        CHECK(via_ode[i].phi == Approx(direct[i].phi).margin(1e-7));
        CHECK(via_ode[i].s == Approx(direct[i].s).margin(1e-6));
        CHECK(via_ode[i].gamma == Approx(direct[i].gamma).margin(1e-6));
    }
}

TEST_CASE("ODE evaluation requires finite memory", "[oracles][ode]") {
    NoiseParams p;
    p.kappa = std::numeric_limits<double>::infinity();
    try {
        ode_f(p, uniform_grid(1.0, 11));
        FAIL("expected a ValidationError");
    } catch (const ValidationError& err) {
        CHECK(err.field == "noise.kappa");
    }
}

TEST_CASE("closed-form memoryless coherence matches frozen values",
          "[oracles][closed-form][regression]") {
    // overdamped: lam > nu
    CHECK(closed_form_markov_f({0.5, 1.0, 1.0, 0.0}, 1.0) ==
          Approx(0.930294794098).margin(1e-10));
    // critical: lam == nu gives e^{-t} (1 + lam t)
    CHECK(closed_form_markov_f({1.0, 1.0, 1.0, 0.0}, 1.0) ==
          Approx(2.0 / std::exp(1.0)).margin(1e-12));
    // oscillatory: first zero at 2 pi / (3 sqrt(3)) for nu = 2, lam = 1
    const double t_star = 2.0 * std::numbers::pi / (3.0 * std::sqrt(3.0));
    CHECK(std::abs(closed_form_markov_f({2.0, 1.0, 1.0, 0.0}, t_star)) < 1e-15);
    CHECK(closed_form_markov_f({2.0, 1.0, 1.0, 0.0}, 0.0) == 1.0);

    try {
        closed_form_markov_f({2.0, 1.0, 1.0, 0.5}, 1.0);
        FAIL("expected a ValidationError");
    } catch (const ValidationError& err) {
        CHECK(err.field == "noise.a");
    }
}

TEST_CASE("Monte Carlo is exact for a frozen trajectory ensemble",
          "[oracles][mc]") {
    // a = 1 puts every trajectory in the + state; lam = 0 means no switches,
    // so each trajectory is exactly e^{i nu t} and the spread is zero
    const NoiseParams p{1.0, 0.0, 1.0, 1.0};
    McConfig mc;
    mc.n_traj = 64;
    const TimeGrid grid = uniform_grid(5.0, 26);
    const auto est = mc_f(p, mc, grid);
    REQUIRE(est.size() == grid.samples.size());
    for (std::size_t i = 0; i < est.size(); ++i) {
        const double t = grid.samples[i];
        CHECK(est[i].mean.real() == std::cos(p.nu * t));
        CHECK(est[i].mean.imag() == std::sin(p.nu * t));
        CHECK(est[i].se == 0.0);
        CHECK(est[i].n_traj == 64);
    }
}

TEST_CASE("Monte Carlo agrees with the closed form within three sigma",
          "[oracles][mc]") {
    const NoiseParams p{0.5, 1.0, 1.0, 0.0};
    McConfig mc;
    mc.n_traj = 20000;
    mc.dt = 0.005;
    mc.seed = 1;
    const TimeGrid grid = uniform_grid(10.0, 101);
    const auto est = mc_f(p, mc, grid);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < est.size(); ++i) {
        const double ref = closed_form_markov_f(p, grid.samples[i]);
        const double dev = std::abs(est[i].mean - Complex(ref, 0.0));
        worst = std::max(worst, dev - 3.0 * est[i].se);
    }
    CHECK(worst <= 0.0);
}

TEST_CASE("Monte Carlo results do not depend on the worker count",
          "[oracles][mc]") {
    const NoiseParams p{0.5, 1.0, 1.0, 0.3};
    const TimeGrid grid = uniform_grid(10.0, 101);
    McConfig serial;
    serial.n_traj = 8192;
    McConfig threaded = serial;
    threaded.workers = 4;
    const auto a = mc_f(p, serial, grid);
    const auto b = mc_f(p, threaded, grid);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].mean.real() == b[i].mean.real());
        CHECK(a[i].mean.imag() == b[i].mean.imag());
        CHECK(a[i].se == b[i].se);
        CHECK(a[i].n_traj == b[i].n_traj);
    }
}

TEST_CASE("Monte Carlo error shrinks like one over sqrt(n)", "[oracles][mc]") {
    const NoiseParams p{0.5, 1.0, 1.0, 0.0};
    const TimeGrid grid = uniform_grid(10.0, 51);
    McConfig small;
    small.n_traj = 4096;
    McConfig large;
    large.n_traj = 16384;
    const auto a = mc_f(p, small, grid);
    const auto b = mc_f(p, large, grid);
    const double ratio = b.back().se / a.back().se;
    CHECK(ratio > 0.4);
    CHECK(ratio < 0.6);
}

TEST_CASE("Monte Carlo configuration is validated", "[oracles][mc]") {
    const NoiseParams p{0.5, 1.0, 1.0, 0.0};
    const auto rejected_field = [&](McConfig mc) -> std::string {
        try {
            validate_mc(p, mc);
        } catch (const ValidationError& err) {
            return err.field;
        }
        return "";
    };

    McConfig mc;
    CHECK(rejected_field(mc).empty());

    McConfig coarse;
    coarse.dt = 0.02;  // exceeds 0.01/max(lambda, nu) for lambda = 1
    CHECK(rejected_field(coarse) == "mc.dt");

    McConfig zero_dt;
    zero_dt.dt = 0.0;
    CHECK(rejected_field(zero_dt) == "mc.dt");

    McConfig no_workers;
    no_workers.workers = 0;
    CHECK(rejected_field(no_workers) == "mc.workers");

    McConfig no_traj;
    no_traj.n_traj = 0;
    CHECK(rejected_field(no_traj) == "mc.n_traj");

    // a faster amplitude tightens the dt bound
    McConfig fast;
    fast.dt = 0.01;
    CHECK(rejected_field(fast).empty());
    const NoiseParams fast_noise{2.0, 1.0, 1.0, 0.0};
    try {
        validate_mc(fast_noise, fast);
        FAIL("expected a ValidationError");
    } catch (const ValidationError& err) {
        CHECK(err.field == "mc.dt");
    }
}

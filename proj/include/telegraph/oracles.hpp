// oracles.hpp: independent evaluators for the coherence factor: direct ODE
// integration, closed-form limit formulas, and a Monte Carlo trajectory
// average in the memoryless-noise limit

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include "telegraph/decoherence.hpp"
#include "telegraph/model.hpp"
#include "telegraph/ode.hpp"

namespace telegraph {

inline constexpr OdeTolerance kOracleTol{1e-10, 1e-13};

namespace detail {

// State (F, F', F'') of the third-order coherence equation
//   F''' + kappa F'' + (2 kappa lambda + nu^2) F' + kappa nu^2 F = 0
// with F(0) = 1, F'(0) = i a nu, F''(0) = -nu^2.
struct CoherenceOde {
    double c2, c1, c0;

    explicit CoherenceOde(const NoiseParams& p)
        : c2(p.kappa),
          c1(2.0 * p.kappa * p.lam + p.nu * p.nu),
          c0(p.kappa * p.nu * p.nu) {}

    std::array<Complex, 3> operator()(double, const std::array<Complex, 3>& y) const {
        return {y[1], y[2], -(c2 * y[2] + c1 * y[1] + c0 * y[0])};
    }

    static std::array<Complex, 3> initial(const NoiseParams& p) {
        return {Complex(1.0, 0.0), Complex(0.0, p.a * p.nu),
                Complex(-p.nu * p.nu, 0.0)};
    }
};

inline void require_finite_kappa(const NoiseParams& params) {
    if (!std::isfinite(params.kappa))
        throw ValidationError("noise.kappa",
                              "ODE evaluation requires a finite value");
}

}  // namespace detail

// Integrates the coherence ODE across the grid and returns F at each sample.
inline std::vector<Complex> ode_f(const NoiseParams& params, const TimeGrid& grid,
                                  const OdeTolerance& tol = kOracleTol) {
    detail::require_finite_kappa(params);
    const detail::CoherenceOde rhs(params);
    std::vector<Complex> out(grid.samples.size());
    integrate_over_grid(rhs, detail::CoherenceOde::initial(params), grid, tol,
                        [&](std::size_t i, const std::array<Complex, 3>& y) {
                            out[i] = y[0];
                        });
    return out;
}

// Random-access ODE evaluator. Integrates once across the grid, keeps the
// full state at every sample as a checkpoint, and answers queries at
// arbitrary times by re-integrating from the nearest checkpoint at or
// before the query. Queries need not be ordered.
class OdeCoherenceEvaluator {
  public:
    OdeCoherenceEvaluator(const NoiseParams& params, const TimeGrid& grid,
                          const OdeTolerance& tol = kOracleTol)
        : rhs_((detail::require_finite_kappa(params), params)),
          tol_(tol),
          times_(grid.samples) {
        states_.resize(times_.size());
        integrate_over_grid(rhs_, detail::CoherenceOde::initial(params), grid,
                            tol_,
                            [&](std::size_t i, const std::array<Complex, 3>& y) {
                                states_[i] = y;
                            });
    }

    std::array<Complex, 3> state_at(double t) const {
        if (t < times_.front())
            throw NumericError("query before the start of the evaluator grid");
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        const std::size_t idx = static_cast<std::size_t>(it - times_.begin()) - 1;
        return integrate_ode(rhs_, states_[idx], times_[idx], t, tol_);
    }

    Complex f_at(double t) const { return state_at(t)[0]; }
    Complex df_at(double t) const { return state_at(t)[1]; }

    std::pair<Complex, Complex> f_df_at(double t) const {
        const auto y = state_at(t);
        return {y[0], y[1]};
    }

    // Shift, rate, and unwrapped phase assembled from the stored checkpoints.
    std::vector<CoherenceSample> coherence_samples() const {
        const std::size_t n = times_.size();
        std::vector<CoherenceSample> out(n);
        std::vector<Complex> fs(n);
        for (std::size_t i = 0; i < n; ++i) {
            const ShiftAndRate sr = shift_and_rate(states_[i][0], states_[i][1]);
            out[i] = CoherenceSample{times_[i],         states_[i][0],
                                     std::abs(states_[i][0]), 0.0,
                                     sr.s,              sr.gamma,
                                     sr.near_zero};
            fs[i] = states_[i][0];
        }
        const std::vector<double> phi = unwrap_phase(fs);
        for (std::size_t i = 0; i < n; ++i) out[i].phi = phi[i];
        return out;
    }

  private:
    detail::CoherenceOde rhs_;
    OdeTolerance tol_;
    std::vector<double> times_;
    std::vector<std::array<Complex, 3>> states_;
};

// Full coherence samples (shift, rate, unwrapped phase) from the ODE path.
// Serves as the fallback when the mode decomposition is degenerate.
inline std::vector<CoherenceSample> ode_coherence(const NoiseParams& params,
                                                  const TimeGrid& grid,
                                                  const OdeTolerance& tol = kOracleTol) {
    return OdeCoherenceEvaluator(params, grid, tol).coherence_samples();
}

// Coherence factor of unbiased telegraph noise with memoryless switching:
// F = e^{-lam t} [cosh(W t) + (lam/W) sinh(W t)], W = sqrt(lam^2 - nu^2),
// continued to the oscillatory form for nu > lam.
inline double closed_form_markov_f(const NoiseParams& params, double t) {
    if (params.a != 0.0)
        throw ValidationError("noise.a",
                              "closed-form memoryless coherence requires a = 0");
    const double lam = params.lam;
    const double nu = params.nu;
    const double damp = std::exp(-lam * t);
    if (nu == lam) return damp * (1.0 + lam * t);
    if (nu < lam) {
        const double w = std::sqrt((lam - nu) * (lam + nu));
        return damp * (std::cosh(w * t) + lam / w * std::sinh(w * t));
    }
    const double w = std::sqrt((nu - lam) * (nu + lam));
    return damp * (std::cos(w * t) + lam / w * std::sin(w * t));
}

struct McConfig {
    std::size_t n_traj{100000};
    std::uint64_t seed{1};
    double dt{0.01};  // output sampling hint; trajectories are exact
    std::size_t workers{1};
};

struct McEstimate {
    Complex mean{0.0, 0.0};
    double se{0.0};
    std::size_t n_traj{0};
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based stream split: the engine for a trajectory depends only on
// the master seed and the trajectory's global index, never on scheduling.
inline std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t index) {
    const std::uint64_t mixed =
        splitmix64(seed + 0x9e3779b97f4a7c15ULL * (index + 1));
    return std::mt19937_64(mixed);
}

inline double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

struct WelfordAccumulator {
    std::vector<Complex> mean;
    std::vector<double> m2;
    std::size_t count{0};

    explicit WelfordAccumulator(std::size_t n_samples)
        : mean(n_samples, Complex(0.0, 0.0)), m2(n_samples, 0.0) {}

    void add(const std::vector<Complex>& z) {
        ++count;
        const double inv = 1.0 / static_cast<double>(count);
        for (std::size_t k = 0; k < mean.size(); ++k) {
            const Complex delta = z[k] - mean[k];
            mean[k] += delta * inv;
            m2[k] += (std::conj(delta) * (z[k] - mean[k])).real();
        }
    }

    void merge(const WelfordAccumulator& other) {
        if (other.count == 0) return;
        if (count == 0) {
            *this = other;
            return;
        }
        const double na = static_cast<double>(count);
        const double nb = static_cast<double>(other.count);
        const double inv = 1.0 / (na + nb);
        for (std::size_t k = 0; k < mean.size(); ++k) {
            const Complex delta = other.mean[k] - mean[k];
            mean[k] += delta * (nb * inv);
            m2[k] += other.m2[k] + std::norm(delta) * na * nb * inv;
        }
        count += other.count;
    }
};

// Walks one telegraph trajectory across the grid, accumulating the exact
// piecewise-linear phase between jump events.
inline void run_trajectory(const NoiseParams& params, std::uint64_t seed,
                           std::uint64_t index, const std::vector<double>& ts,
                           std::vector<Complex>& z) {
    std::mt19937_64 eng = trajectory_rng(seed, index);
    constexpr double inf = std::numeric_limits<double>::infinity();
    double sign = uniform01(eng) < 0.5 * (1.0 + params.a) ? 1.0 : -1.0;
    const auto next_wait = [&]() {
        return params.lam > 0.0 ? -std::log1p(-uniform01(eng)) / params.lam : inf;
    };
    double theta = 0.0;
    double t_prev = 0.0;
    double t_jump = next_wait();
    for (std::size_t k = 0; k < ts.size(); ++k) {
        while (t_jump <= ts[k]) {
            theta += sign * params.nu * (t_jump - t_prev);
            t_prev = t_jump;
            sign = -sign;
            t_jump = t_prev + next_wait();
        }
        const double phase = theta + sign * params.nu * (ts[k] - t_prev);
        z[k] = Complex(std::cos(phase), std::sin(phase));
    }
}

}  // namespace detail

inline void validate_mc(const NoiseParams& params, const McConfig& mc) {
    if (mc.n_traj < 1)
        throw ValidationError("mc.n_traj", "at least one trajectory required");
    const double rate = std::max(params.lam, params.nu);
    if (!(mc.dt > 0.0) || !std::isfinite(mc.dt))
        throw ValidationError("mc.dt", "must be positive and finite");
    if (rate > 0.0 && mc.dt > 0.01 / rate)
        throw ValidationError("mc.dt", "must not exceed 0.01/max(lambda, nu)");
    if (mc.workers < 1)
        throw ValidationError("mc.workers", "at least one worker required");
}

// Monte Carlo estimate of F on the grid for memoryless telegraph noise
// (kappa is treated as infinite and ignored). Trajectories are reduced in
// fixed chunks of 1024 and the chunks merged in index order, so the result
// is bit-identical for any worker count.
inline std::vector<McEstimate> mc_f(const NoiseParams& params, const McConfig& mc,
                                    const TimeGrid& grid) {
    validate_mc(params, mc);
    const std::vector<double>& ts = grid.samples;
    constexpr std::size_t kChunk = 1024;
    const std::size_t n_chunks = (mc.n_traj + kChunk - 1) / kChunk;
    std::vector<detail::WelfordAccumulator> chunks(
        n_chunks, detail::WelfordAccumulator(ts.size()));

    std::atomic<std::size_t> next_chunk{0};
    const auto work = [&]() {
        std::vector<Complex> z(ts.size());
        for (;;) {
            const std::size_t c = next_chunk.fetch_add(1);
            if (c >= n_chunks) break;
            const std::size_t begin = c * kChunk;
            const std::size_t end = std::min(mc.n_traj, begin + kChunk);
            for (std::size_t i = begin; i < end; ++i) {
                detail::run_trajectory(params, mc.seed, i, ts, z);
                chunks[c].add(z);
            }
        }
    };

    const std::size_t n_workers = std::min(mc.workers, n_chunks);
    if (n_workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    detail::WelfordAccumulator total(ts.size());
    for (const auto& chunk : chunks) total.merge(chunk);

    std::vector<McEstimate> out(ts.size());
    const double n = static_cast<double>(total.count);
    for (std::size_t k = 0; k < ts.size(); ++k) {
        out[k].mean = total.mean[k];
        out[k].n_traj = total.count;
        out[k].se = total.count > 1
                        ? std::sqrt(total.m2[k] / (n - 1.0) / n)
                        : std::numeric_limits<double>::infinity();
    }
    return out;
}

}  // namespace telegraph

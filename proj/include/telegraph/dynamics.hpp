// dynamics.hpp: Bloch-vector evolution under pure dephasing, spectral
// decomposition of the density matrix, and evolution path length

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "telegraph/decoherence.hpp"
#include "telegraph/model.hpp"
#include "telegraph/ode.hpp"
#include "telegraph/oracles.hpp"

namespace telegraph {

inline constexpr OdeTolerance kDynamicsTol{1e-9, 1e-12};

struct BlochState {
    double t{0.0};
    double rx{0.0};
    double ry{0.0};
    double rz{0.0};
};

// Eigen-decomposition of rho = (I + r.sigma)/2 in the (|e>, |g>) basis.
// theta_plus parameterizes the + eigenvector as (cos, sin) of its |e>, |g>
// weights; both eigenvectors are kept with the phase convention that the
// |g> component of the + branch is real and nonnegative.
struct SpectralState {
    double eps_plus{0.5};
    double eps_minus{0.5};
    Complex c_plus_e{1.0, 0.0};
    Complex c_plus_g{0.0, 0.0};
    Complex c_minus_e{0.0, 0.0};
    Complex c_minus_g{1.0, 0.0};
    double theta_plus{0.0};
};

// |e> weight of the + eigenvector as a function of r_z and the transverse
// radius. The r_perp -> 0 limits follow the continuous branch, which keeps
// the weight exact at the poles of the generic formula.
inline double plus_e_weight(double rz, double rho_perp) {
    if (rho_perp == 0.0) return rz >= 0.0 ? 1.0 : 0.0;
    const double r = std::hypot(rz, rho_perp);
    const double d = r - rz;
    return rho_perp * rho_perp / (d * d + rho_perp * rho_perp);
}

inline double minus_e_weight(double rz, double rho_perp) {
    if (rho_perp == 0.0) return rz < 0.0 ? 1.0 : 0.0;
    const double r = std::hypot(rz, rho_perp);
    const double d = r + rz;
    return rho_perp * rho_perp / (d * d + rho_perp * rho_perp);
}

inline SpectralState spectral(const BlochState& state) {
    SpectralState out;
    const double rperp2 = state.rx * state.rx + state.ry * state.ry;
    const double r = std::sqrt(rperp2 + state.rz * state.rz);
    out.eps_plus = 0.5 * (1.0 + r);
    out.eps_minus = 0.5 * (1.0 - r);
    if (rperp2 == 0.0 || r == 0.0) {
        // Transversally depolarized (or fully mixed): eigenvectors are the
        // poles; pick the branch continuous in r_perp -> 0.
        if (state.rz >= 0.0) {
            out.c_plus_e = Complex(1.0, 0.0);
            out.c_plus_g = Complex(0.0, 0.0);
            out.c_minus_e = Complex(0.0, 0.0);
            out.c_minus_g = state.rz > 0.0 ? Complex(-1.0, 0.0) : Complex(1.0, 0.0);
        } else {
            out.c_plus_e = Complex(0.0, 0.0);
            out.c_plus_g = Complex(1.0, 0.0);
            out.c_minus_e = Complex(1.0, 0.0);
            out.c_minus_g = Complex(0.0, 0.0);
        }
        out.theta_plus = state.rz >= 0.0 ? 0.0 : 0.5 * std::numbers::pi;
        return out;
    }
    const Complex conj_rperp(state.rx, -state.ry);
    const double gp = r - state.rz;
    const double gm = -r - state.rz;
    const double np = std::sqrt(gp * gp + rperp2);
    const double nm = std::sqrt(gm * gm + rperp2);
    out.c_plus_e = conj_rperp / np;
    out.c_plus_g = Complex(gp / np, 0.0);
    out.c_minus_e = conj_rperp / nm;
    out.c_minus_g = Complex(gm / nm, 0.0);
    out.theta_plus = std::atan2(std::abs(out.c_plus_g), std::abs(out.c_plus_e));
    return out;
}

struct Trajectory {
    std::vector<BlochState> states;
    std::vector<CoherenceSample> coherence;
    std::vector<SpectralState> spectra;
    std::vector<double> length;
    bool used_coherence_fallback{false};
};

// Cumulative path length of the Bloch trajectory. Chords over consecutive
// sample pairs are promoted to fourth order by Richardson extrapolation
// against the double-width chord; the correction is split between the two
// chords in proportion so every sample carries a length value.
inline std::vector<double> path_length(const std::vector<BlochState>& states) {
    const std::size_t n = states.size();
    std::vector<double> len(n, 0.0);
    const auto chord = [&](std::size_t i, std::size_t j) {
        const double dx = states[j].rx - states[i].rx;
        const double dy = states[j].ry - states[i].ry;
        const double dz = states[j].rz - states[i].rz;
        return std::sqrt(dx * dx + dy * dy + dz * dz);
    };
    std::size_t i = 0;
    double acc = 0.0;
    while (i + 2 < n) {
        const double c1 = chord(i, i + 1);
        const double c2 = chord(i + 1, i + 2);
        const double c3 = chord(i, i + 2);
        const double both = c1 + c2;
        const double correction = both > 0.0 ? (both - c3) / 3.0 : 0.0;
        acc += c1 + (both > 0.0 ? correction * (c1 / both) : 0.0);
        len[i + 1] = acc;
        acc += c2 + (both > 0.0 ? correction * (c2 / both) : 0.0);
        len[i + 2] = acc;
        i += 2;
    }
    if (i + 1 < n) {
        acc += chord(i, i + 1);
        len[i + 1] = acc;
    }
    return len;
}

// Maps coherence samples onto the Bloch ball: the transverse component
// rotates at the bare frequency and shrinks by F, the longitudinal
// component is conserved.
inline Trajectory evolve_from_coherence(const SystemConfig& config,
                                        const TimeGrid& grid,
                                        std::vector<CoherenceSample> coherence) {
    const std::array<double, 3> r0 = initial_bloch(config);
    const Complex rperp0(r0[0], r0[1]);
    Trajectory traj;
    traj.coherence = std::move(coherence);
    traj.states.resize(grid.samples.size());
    traj.spectra.resize(grid.samples.size());
    for (std::size_t i = 0; i < grid.samples.size(); ++i) {
        const double t = grid.samples[i];
        BlochState state{t, 0.0, 0.0, r0[2]};
        if (rperp0 != Complex(0.0, 0.0)) {
            const Complex rot(std::cos(config.omega0 * t),
                              std::sin(config.omega0 * t));
            const Complex w = rperp0 * traj.coherence[i].f * rot;
            state.rx = w.real();
            state.ry = w.imag();
        }
        traj.states[i] = state;
        traj.spectra[i] = spectral(state);
    }
    traj.length = path_length(traj.states);
    return traj;
}

// Closed-form evolution from the mode decomposition. Falls back to the ODE
// coherence when the decomposition is degenerate.
inline Trajectory evolve_analytic(const ModeDecomposition& modes,
                                  const SystemConfig& config,
                                  const TimeGrid& grid) {
    if (modes.degenerate) {
        Trajectory traj =
            evolve_from_coherence(config, grid, ode_coherence(modes.params, grid));
        traj.used_coherence_fallback = true;
        return traj;
    }
    return evolve_from_coherence(config, grid, sample_coherence(modes, grid));
}

// Direct numerical evolution, independent of the residue algebra. When the
// coherence stays clear of zero the Bloch equations
//   drx/dt = -gamma rx - (omega0 - s) ry
//   dry/dt = (omega0 - s) rx - gamma ry
// are integrated as written; near or across a coherence zero (where s and
// gamma diverge) the integration moves to the coherence level, which is
// regular everywhere.
inline Trajectory evolve_ode(const ModeDecomposition& modes,
                             const SystemConfig& config, const TimeGrid& grid) {
    const OdeCoherenceEvaluator eval(modes.params, grid, kOracleTol);
    std::vector<CoherenceSample> coherence = eval.coherence_samples();

    bool coherence_level = false;
    for (std::size_t i = 0; i < coherence.size() && !coherence_level; ++i) {
        if (coherence[i].near_zero) coherence_level = true;
        if (i > 0 && coherence[i].f.imag() == 0.0 &&
            coherence[i - 1].f.imag() == 0.0 &&
            std::signbit(coherence[i].f.real()) !=
                std::signbit(coherence[i - 1].f.real()))
            coherence_level = true;
    }

    const std::array<double, 3> r0 = initial_bloch(config);
    if (coherence_level || (r0[0] == 0.0 && r0[1] == 0.0))
        return evolve_from_coherence(config, grid, std::move(coherence));

    Trajectory traj;
    traj.coherence = std::move(coherence);
    traj.states.resize(grid.samples.size());
    traj.spectra.resize(grid.samples.size());
    const auto rhs = [&](double t, const std::array<double, 2>& y) {
        const auto [f, df] = eval.f_df_at(t);
        const ShiftAndRate sr = shift_and_rate(f, df);
        const double detuned = config.omega0 - sr.s;
        return std::array<double, 2>{-sr.gamma * y[0] - detuned * y[1],
                                     detuned * y[0] - sr.gamma * y[1]};
    };
    integrate_over_grid(rhs, std::array<double, 2>{r0[0], r0[1]}, grid,
                        kDynamicsTol,
                        [&](std::size_t i, const std::array<double, 2>& y) {
                            traj.states[i] =
                                BlochState{grid.samples[i], y[0], y[1], r0[2]};
                            traj.spectra[i] = spectral(traj.states[i]);
                        });
    traj.length = path_length(traj.states);
    return traj;
}

}  // namespace telegraph

// geometry.hpp: Pancharatnam, effective, and total geometric phases along
// the dephasing trajectory, for pure and mixed initial states

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "telegraph/decoherence.hpp"
#include "telegraph/dynamics.hpp"
#include "telegraph/model.hpp"
#include "telegraph/quadrature.hpp"

namespace telegraph {

// Evaluates (F, dF/dt) at an arbitrary time; lets phase quadrature run off
// either the mode decomposition or the ODE evaluator.
using CoherenceFn = std::function<std::pair<Complex, Complex>(double)>;

inline CoherenceFn modes_fn(const ModeDecomposition& modes) {
    return [modes](double t) {
        return std::make_pair(evaluate_f(modes, t), evaluate_df(modes, t));
    };
}

struct PhaseBreakdown {
    double t{0.0};
    double phi_p{0.0};
    double phi_e{0.0};
    double phi_g{0.0};
    double phi_e_u{0.0};
    double delta_phi_e{0.0};
    bool defined{true};  // false where the reference overlap vanishes
};

struct MixedPhaseTerms {
    double r_plus{0.0};
    double r_minus{0.0};
    double varphi_plus{0.0};   // NaN where the + overlap vanishes
    double varphi_minus{0.0};  // NaN where the - overlap vanishes
    double psi_plus{0.0};
    double psi_minus{0.0};
};

struct MixedPhaseSeries {
    std::vector<MixedPhaseTerms> terms;
    std::vector<double> phi_g_principal;    // NaN where undefined
    std::vector<double> phi_g_accumulated;  // holds its value where undefined
    std::vector<char> defined;
};

namespace detail {

// Weight carried by the coherence phase when it jumps by pi at a zero of an
// exactly real F. The value is the vanishing-bias limit of the eigenvector
// weight as the transverse radius collapses at the crossing.
inline double plus_jump_weight(double rz0, double aperp) {
    if (rz0 != 0.0) return rz0 > 0.0 ? 1.0 : 0.0;
    return aperp > 0.0 ? 0.5 : 1.0;
}

inline double minus_jump_weight(double rz0, double aperp) {
    if (rz0 != 0.0) return rz0 < 0.0 ? 1.0 : 0.0;
    return aperp > 0.0 ? 0.5 : 0.0;
}

// Zeros of an exactly real coherence on the grid: flagged samples count
// directly, sign flips between unflagged real samples are refined by
// bisection on Re F.
inline std::vector<double> real_coherence_zeros(const CoherenceFn& fn,
                                                const std::vector<double>& ts,
                                                const std::vector<Complex>& fs) {
    std::vector<double> zeros;
    const auto re_f = [&](double t) { return fn(t).first.real(); };
    bool prev_flagged = std::abs(fs[0]) <= kZeroTol;
    if (prev_flagged) zeros.push_back(ts[0]);
    for (std::size_t i = 1; i < fs.size(); ++i) {
        const bool flagged = std::abs(fs[i]) <= kZeroTol;
        if (flagged) {
            zeros.push_back(ts[i]);
        } else if (!prev_flagged && fs[i].imag() == 0.0 &&
                   fs[i - 1].imag() == 0.0 &&
                   std::signbit(fs[i].real()) != std::signbit(fs[i - 1].real())) {
            zeros.push_back(bisect_root(re_f, ts[i - 1], ts[i]));
        }
        prev_flagged = flagged;
    }
    return zeros;
}

// Cumulative parallel-transport phase of one spectral branch:
//   psi(t) = int_0^t (omega0 - s) |C_e|^2 dtau  +  pi-jumps at F-zeros.
// The quadrature runs per grid interval with panels split at the zeros; the
// jump terms are the concentrated remainder of -s |C_e|^2 in the
// vanishing-bias limit, where s turns into a pi-mass at each crossing.
inline std::vector<double> transport_phase(double rz0, double aperp, bool plus,
                                           double omega0, const CoherenceFn& fn,
                                           const TimeGrid& grid) {
    const std::vector<double>& ts = grid.samples;
    std::vector<Complex> fs(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) fs[i] = fn(ts[i]).first;
    const std::vector<double> zeros = real_coherence_zeros(fn, ts, fs);
    const double jump = std::numbers::pi * (plus ? plus_jump_weight(rz0, aperp)
                                                 : minus_jump_weight(rz0, aperp));

    const auto weight = [&](double rho) {
        return plus ? plus_e_weight(rz0, rho) : minus_e_weight(rz0, rho);
    };
    const auto integrand = [&](double tau) {
        const auto [f, df] = fn(tau);
        const ShiftAndRate sr = shift_and_rate(f, df);
        // A divergent shift only occurs inside kZeroTol of an exact zero;
        // its integrable mass is carried by the jump term instead.
        const double s = std::isfinite(sr.s) ? sr.s : 0.0;
        return (omega0 - s) * weight(aperp * std::abs(f));
    };

    std::vector<double> psi(ts.size(), 0.0);
    std::size_t next_zero = 0;
    double acc = 0.0;
    double jump_acc = 0.0;
    while (next_zero < zeros.size() && zeros[next_zero] <= ts[0]) {
        jump_acc += jump;
        ++next_zero;
    }
    for (std::size_t i = 1; i < ts.size(); ++i) {
        double left = ts[i - 1];
        while (next_zero < zeros.size() && zeros[next_zero] <= ts[i]) {
            const double z = zeros[next_zero];
            acc += adaptive_simpson(integrand, left, z, 1e-9);
            jump_acc += jump;
            left = z;
            ++next_zero;
        }
        acc += adaptive_simpson(integrand, left, ts[i], 1e-9);
        psi[i] = acc + jump_acc;
    }
    return psi;
}

inline BlochState bloch_at(const std::array<double, 3>& r0, double omega0,
                           const CoherenceSample& sample) {
    BlochState state{sample.t, 0.0, 0.0, r0[2]};
    const Complex rperp0(r0[0], r0[1]);
    if (rperp0 != Complex(0.0, 0.0)) {
        const Complex rot(std::cos(omega0 * sample.t),
                          std::sin(omega0 * sample.t));
        const Complex w = rperp0 * sample.f * rot;
        state.rx = w.real();
        state.ry = w.imag();
    }
    return state;
}

}  // namespace detail

// Accumulated phase of the + spectral branch from the initial state's point
// of view; reduces to the effective geometric phase
// int (omega0 - s) cos^2(theta_plus) dtau for pure initial states.
inline std::vector<double> effective_phase(const SystemConfig& config,
                                           const CoherenceFn& fn,
                                           const TimeGrid& grid) {
    const std::array<double, 3> r0 = initial_bloch(config);
    const double aperp = std::hypot(r0[0], r0[1]);
    return detail::transport_phase(r0[2], aperp, true, config.omega0, fn, grid);
}

// Pancharatnam relative phase at one sample: the argument of the overlap
// between the initial and current + eigenvectors. Empty when the overlap
// magnitude is below kZeroTol, where the argument carries no information.
inline std::optional<double> pancharatnam_phase(
    const SystemConfig& config, const std::vector<CoherenceSample>& coherence,
    std::size_t index) {
    const std::array<double, 3> r0 = initial_bloch(config);
    const SpectralState s0 =
        spectral(detail::bloch_at(r0, config.omega0, coherence.front()));
    const SpectralState st =
        spectral(detail::bloch_at(r0, config.omega0, coherence[index]));
    const Complex overlap = std::conj(s0.c_plus_e) * st.c_plus_e +
                            std::conj(s0.c_plus_g) * st.c_plus_g;
    if (std::abs(overlap) < kZeroTol) return std::nullopt;
    return std::arg(overlap);
}

// Phase breakdown along the trajectory for a (nominally pure) initial
// state: Pancharatnam phase, effective phase, their sum as the total
// geometric phase, and the deviation from the unitary effective phase.
inline std::vector<PhaseBreakdown> total_phase_pure(
    const SystemConfig& config, const CoherenceFn& fn,
    const std::vector<CoherenceSample>& coherence, const TimeGrid& grid) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    const std::array<double, 3> r0 = initial_bloch(config);
    const double aperp = std::hypot(r0[0], r0[1]);
    const double u_weight = plus_e_weight(r0[2], aperp);
    const std::vector<double> phi_e = effective_phase(config, fn, grid);

    std::vector<PhaseBreakdown> out(grid.samples.size());
    for (std::size_t i = 0; i < grid.samples.size(); ++i) {
        PhaseBreakdown& row = out[i];
        row.t = grid.samples[i];
        row.phi_e = phi_e[i];
        row.phi_e_u = config.omega0 * row.t * u_weight;
        row.delta_phi_e = row.phi_e - row.phi_e_u;
        const std::optional<double> phi_p =
            pancharatnam_phase(config, coherence, i);
        row.defined = phi_p.has_value();
        row.phi_p = phi_p.value_or(nan);
        row.phi_g = row.phi_p + row.phi_e;
    }
    return out;
}

// Interferometric total phase for a general (mixed) initial state:
//   Phi_g(t) = arg sum_k r_k exp(i (varphi_k + psi_k)),
// where r_k weighs each spectral branch by its visibility, varphi_k is the
// branch Pancharatnam phase and psi_k its transport phase. Reported both as
// the principal value and as a continuity-accumulated branch.
inline MixedPhaseSeries total_phase_mixed(
    const SystemConfig& config, const CoherenceFn& fn,
    const std::vector<CoherenceSample>& coherence, const TimeGrid& grid) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const std::array<double, 3> r0 = initial_bloch(config);
    const double aperp = std::hypot(r0[0], r0[1]);
    const std::size_t n = grid.samples.size();

    const SpectralState s0 =
        spectral(detail::bloch_at(r0, config.omega0, coherence.front()));
    const double rmag0 = bloch_norm(r0);
    const double eps_plus_0 = 0.5 * (1.0 + rmag0);
    const double eps_minus_0 = std::max(0.0, 0.5 * (1.0 - rmag0));
    const bool minus_active = eps_minus_0 > 1e-14;

    const std::vector<double> psi_plus =
        detail::transport_phase(r0[2], aperp, true, config.omega0, fn, grid);
    const std::vector<double> psi_minus =
        minus_active
            ? detail::transport_phase(r0[2], aperp, false, config.omega0, fn, grid)
            : std::vector<double>(n, 0.0);

    MixedPhaseSeries series;
    series.terms.resize(n);
    series.phi_g_principal.assign(n, nan);
    series.phi_g_accumulated.assign(n, 0.0);
    series.defined.assign(n, 0);

    double acc = 0.0;
    bool have_prev = false;
    double prev_principal = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const SpectralState st =
            spectral(detail::bloch_at(r0, config.omega0, coherence[i]));
        MixedPhaseTerms& term = series.terms[i];
        term.psi_plus = psi_plus[i];
        term.psi_minus = psi_minus[i];

        const Complex op = std::conj(s0.c_plus_e) * st.c_plus_e +
                           std::conj(s0.c_plus_g) * st.c_plus_g;
        const double eps_plus_t = std::max(0.0, st.eps_plus);
        term.r_plus = std::sqrt(eps_plus_0 * eps_plus_t) * std::abs(op);
        term.varphi_plus = std::abs(op) < kZeroTol ? nan : std::arg(op);

        Complex g(0.0, 0.0);
        {
            const double ang =
                (std::isnan(term.varphi_plus) ? 0.0 : term.varphi_plus) +
                term.psi_plus;
            g += term.r_plus * Complex(std::cos(ang), std::sin(ang));
        }
        if (minus_active) {
            const Complex om = std::conj(s0.c_minus_e) * st.c_minus_e +
                               std::conj(s0.c_minus_g) * st.c_minus_g;
            const double eps_minus_t = std::max(0.0, st.eps_minus);
            term.r_minus = std::sqrt(eps_minus_0 * eps_minus_t) * std::abs(om);
            term.varphi_minus = std::abs(om) < kZeroTol ? nan : std::arg(om);
            const double ang =
                (std::isnan(term.varphi_minus) ? 0.0 : term.varphi_minus) +
                term.psi_minus;
            g += term.r_minus * Complex(std::cos(ang), std::sin(ang));
        }

        if (std::abs(g) >= kZeroTol) {
            const double principal = std::arg(g);
            series.phi_g_principal[i] = principal;
            series.defined[i] = 1;
            if (have_prev) {
                acc += std::remainder(principal - prev_principal, two_pi);
            } else {
                acc = principal;
                have_prev = true;
            }
            prev_principal = principal;
        }
        series.phi_g_accumulated[i] = acc;
    }
    return series;
}

}  // namespace telegraph

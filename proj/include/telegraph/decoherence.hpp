// decoherence.hpp: coherence factor of a qubit dephased by nonstationary
// telegraph noise, via pole decomposition of its Laplace transform

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "telegraph/cubic.hpp"
#include "telegraph/model.hpp"
#include "telegraph/quadrature.hpp"

namespace telegraph {

using Complex = std::complex<double>;

// Magnitudes at or below this are treated as a vanishing coherence; the
// phase is held and the shift/rate are reported as signed infinities.
inline constexpr double kZeroTol = 1e-12;

// F(t) = sum_j R_j exp(p_j t) where the p_j are the roots of
//   p^3 + kappa p^2 + (2 kappa lambda + nu^2) p + kappa nu^2
// and R_j = N(p_j) / D'(p_j) with N(p) = p(p + kappa) + 2 kappa lambda
// + i a nu (p + kappa). Complex roots come in exact conjugate pairs, so
// for a = 0 the imaginary parts cancel bitwise and F is exactly real.
struct ModeDecomposition {
    NoiseParams params{};
    std::array<Complex, 3> roots{};
    std::array<Complex, 3> residues{};
    bool degenerate{false};  // residues unusable, caller must fall back
};

struct CoherenceSample {
    double t{0.0};
    Complex f{1.0, 0.0};
    double abs_f{1.0};
    double phi{0.0};    // unwrapped arg F
    double s{0.0};      // frequency shift, -Im[F'/F]
    double gamma{0.0};  // decoherence rate, -Re[F'/F]
    bool near_zero{false};
};

namespace detail {

inline Complex numerator_at(const NoiseParams& p, Complex root) {
    const Complex w = root + p.kappa;
    return root * w + 2.0 * p.kappa * p.lam + Complex(0.0, p.a * p.nu) * w;
}

inline Complex denominator_slope_at(const NoiseParams& p, Complex root) {
    const double c1 = 2.0 * p.kappa * p.lam + p.nu * p.nu;
    return (3.0 * root + 2.0 * p.kappa) * root + c1;
}

inline void sort_modes(std::array<Complex, 3>& roots,
                       std::array<Complex, 3>& residues) {
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2 - i; ++j) {
            const bool swap = roots[j].real() > roots[j + 1].real() ||
                              (roots[j].real() == roots[j + 1].real() &&
                               roots[j].imag() > roots[j + 1].imag());
            if (swap) {
                std::swap(roots[j], roots[j + 1]);
                std::swap(residues[j], residues[j + 1]);
            }
        }
    }
}

}  // namespace detail

// Splits the coherence transform into exponential modes. Throws
// ValidationError for a non-finite switching rate; the memoryless limit has
// no three-mode form and is handled by the closed-form path instead.
inline ModeDecomposition decompose(const NoiseParams& params) {
    if (!std::isfinite(params.kappa))
        throw ValidationError("noise.kappa",
                              "mode decomposition requires a finite value");
    ModeDecomposition out;
    out.params = params;

    if (params.nu == 0.0) {
        // Noise amplitude zero: F(p) = 1/p, so F(t) = 1 exactly. The other
        // two poles carry zero weight and are kept only for reporting.
        const double half = 0.5 * params.kappa;
        const double disc = half * half - 2.0 * params.kappa * params.lam;
        if (disc >= 0.0) {
            const double w = std::sqrt(disc);
            const double y1 = -half - w;
            const double y2 =
                y1 == 0.0 ? -half + w : 2.0 * params.kappa * params.lam / y1;
            out.roots = {Complex(0.0, 0.0), Complex(y1, 0.0), Complex(y2, 0.0)};
        } else {
            const double w = std::sqrt(-disc);
            out.roots = {Complex(0.0, 0.0), Complex(-half, -w), Complex(-half, w)};
        }
        out.residues = {Complex(1.0, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.0)};
        detail::sort_modes(out.roots, out.residues);
        return out;
    }

    if (params.lam == 0.0) {
        // Static amplitude distribution: poles sit exactly at -kappa and
        // +-i nu, so place them directly instead of solving the cubic.
        out.roots = {Complex(-params.kappa, 0.0), Complex(0.0, -params.nu),
                     Complex(0.0, params.nu)};
    } else {
        const double c1 = 2.0 * params.kappa * params.lam + params.nu * params.nu;
        out.roots = cubic_roots(params.kappa, c1, params.kappa * params.nu * params.nu);
        double max_mag = 0.0;
        for (const auto& r : out.roots) max_mag = std::max(max_mag, std::abs(r));
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = i + 1; j < 3; ++j)
                if (std::abs(out.roots[i] - out.roots[j]) < 1e-9 * max_mag)
                    out.degenerate = true;
        if (out.degenerate) return out;
    }

    for (std::size_t j = 0; j < 3; ++j)
        out.residues[j] = detail::numerator_at(params, out.roots[j]) /
                          detail::denominator_slope_at(params, out.roots[j]);
    detail::sort_modes(out.roots, out.residues);
    return out;
}

// Terms belonging to a conjugate root pair are summed apart from the
// real-root terms. Addition commutes bitwise, so reversing the noise bias
// conjugates the result exactly whatever position the sort gave the real
// root.
inline Complex evaluate_f(const ModeDecomposition& modes, double t) {
    if (modes.degenerate)
        throw DegenerateModesError(
            "nearly repeated coherence modes, use the ODE evaluator");
    Complex pair{0.0, 0.0};
    Complex real_roots{0.0, 0.0};
    for (std::size_t j = 0; j < 3; ++j) {
        const Complex term = modes.residues[j] * std::exp(modes.roots[j] * t);
        (modes.roots[j].imag() == 0.0 ? real_roots : pair) += term;
    }
    return pair + real_roots;
}

inline Complex evaluate_df(const ModeDecomposition& modes, double t) {
    if (modes.degenerate)
        throw DegenerateModesError(
            "nearly repeated coherence modes, use the ODE evaluator");
    Complex pair{0.0, 0.0};
    Complex real_roots{0.0, 0.0};
    for (std::size_t j = 0; j < 3; ++j) {
        const Complex term =
            modes.residues[j] * modes.roots[j] * std::exp(modes.roots[j] * t);
        (modes.roots[j].imag() == 0.0 ? real_roots : pair) += term;
    }
    return pair + real_roots;
}

struct ShiftAndRate {
    double s{0.0};
    double gamma{0.0};
    bool near_zero{false};
};

// Frequency shift s = -Im[F'/F] and decoherence rate gamma = -Re[F'/F].
// When |F| falls below kZeroTol both diverge; the sign of the divergence is
// kept and exact-zero numerators still map to 0 so that an unbiased (real)
// coherence reports s = 0 even at its zero crossings.
inline ShiftAndRate shift_and_rate(Complex f, Complex df) {
    ShiftAndRate out;
    const Complex w = df * std::conj(f);
    if (std::abs(f) <= kZeroTol) {
        constexpr double inf = std::numeric_limits<double>::infinity();
        out.near_zero = true;
        out.s = w.imag() == 0.0 ? 0.0 : std::copysign(inf, -w.imag());
        out.gamma = w.real() == 0.0 ? 0.0 : std::copysign(inf, -w.real());
        return out;
    }
    const double denom = std::norm(f);
    out.s = -w.imag() / denom;
    out.gamma = -w.real() / denom;
    return out;
}

// Unwraps arg f[i] into a continuous branch. Steps are reduced to (-pi, pi];
// a sign flip of an exactly real coherence counts as +pi (the limit of a
// vanishing bias). Near-zero samples hold the previous phase. A reduced step
// of magnitude >= pi - 1e-9 that is not a real sign flip is refused, since
// the branch is then ambiguous at this sampling density.
inline std::vector<double> unwrap_phase(const std::vector<Complex>& f) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> phi(f.size(), 0.0);
    if (f.empty()) return phi;

    double acc = std::arg(f[0]);
    Complex last_good = f[0];
    bool have_good = std::abs(f[0]) > kZeroTol;
    if (!have_good) acc = 0.0;
    phi[0] = acc;

    for (std::size_t i = 1; i < f.size(); ++i) {
        if (std::abs(f[i]) <= kZeroTol) {
            phi[i] = acc;
            continue;
        }
        if (!have_good) {
            acc = std::arg(f[i]);
            phi[i] = acc;
            last_good = f[i];
            have_good = true;
            continue;
        }
        const bool real_flip = f[i].imag() == 0.0 && last_good.imag() == 0.0 &&
                               std::signbit(f[i].real()) !=
                                   std::signbit(last_good.real());
        double step;
        if (real_flip) {
            step = std::numbers::pi;
        } else {
            step = std::remainder(std::arg(f[i]) - std::arg(last_good), two_pi);
            if (std::abs(step) >= std::numbers::pi - 1e-9)
                throw UndersampledError(
                    i, "phase step of " + std::to_string(step) +
                           " rad between adjacent samples, refine the time grid");
        }
        acc += step;
        phi[i] = acc;
        last_good = f[i];
    }
    return phi;
}

// Evaluates the coherence and its logarithmic derivative on a grid.
inline std::vector<CoherenceSample> sample_coherence(const ModeDecomposition& modes,
                                                     const TimeGrid& grid) {
    std::vector<CoherenceSample> out(grid.samples.size());
    std::vector<Complex> fs(grid.samples.size());
    for (std::size_t i = 0; i < grid.samples.size(); ++i) {
        const double t = grid.samples[i];
        const Complex f = evaluate_f(modes, t);
        const Complex df = evaluate_df(modes, t);
        const ShiftAndRate sr = shift_and_rate(f, df);
        out[i] = CoherenceSample{t, f, std::abs(f), 0.0, sr.s, sr.gamma,
                                 sr.near_zero};
        fs[i] = f;
    }
    const std::vector<double> phi = unwrap_phase(fs);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].phi = phi[i];
    return out;
}

// Finds zeros of a real-valued function between consecutive grid times,
// refined by bisection. Exact zeros at samples are reported as-is.
template <class F>
std::vector<double> find_real_zeros(F&& f, const std::vector<double>& ts) {
    std::vector<double> zeros;
    if (ts.empty()) return zeros;
    double prev = f(ts[0]);
    if (prev == 0.0) zeros.push_back(ts[0]);
    for (std::size_t i = 1; i < ts.size(); ++i) {
        const double cur = f(ts[i]);
        if (cur == 0.0) {
            zeros.push_back(ts[i]);
        } else if (prev != 0.0 && std::signbit(prev) != std::signbit(cur)) {
            zeros.push_back(bisect_root(f, ts[i - 1], ts[i]));
        }
        prev = cur;
    }
    return zeros;
}

}  // namespace telegraph

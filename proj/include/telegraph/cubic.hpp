// cubic.hpp: closed-form roots of a real cubic with Newton polish

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace telegraph {

namespace detail {

inline std::complex<double> cubic_value(double c2, double c1, double c0,
                                        std::complex<double> p) {
    return ((p + c2) * p + c1) * p + c0;
}

inline std::complex<double> cubic_derivative(double c2, double c1,
                                             std::complex<double> p) {
    return (3.0 * p + 2.0 * c2) * p + c1;
}

// One Newton correction, kept only while it shrinks the residual. A second
// correction runs when the first leaves more than half the contracted
// residual bound, which happens for badly scaled coefficients (kappa ~ 1e6).
inline std::complex<double> polish_root(double c2, double c1, double c0,
                                        std::complex<double> p) {
    const double bound = 1e-10 * std::max(1.0, std::pow(std::abs(p), 3.0));
    for (int pass = 0; pass < 2; ++pass) {
        const std::complex<double> f = cubic_value(c2, c1, c0, p);
        if (pass == 1 && std::abs(f) <= 0.5 * bound) break;
        const std::complex<double> df = cubic_derivative(c2, c1, p);
        if (df == 0.0) break;
        const std::complex<double> candidate = p - f / df;
        if (std::abs(cubic_value(c2, c1, c0, candidate)) < std::abs(f))
            p = candidate;
        else
            break;
    }
    return p;
}

}  // namespace detail

// Roots of p^3 + c2 p^2 + c1 p + c0 with real coefficients, sorted by
// (real, imaginary) ascending. A complex pair is returned as exact IEEE
// conjugates so that downstream sums over the pair have a hard-zero
// imaginary part when the remaining data are real.
inline std::array<std::complex<double>, 3> cubic_roots(double c2, double c1, double c0) {
    using C = std::complex<double>;
    std::array<C, 3> roots;

    const double q = (c2 * c2 - 3.0 * c1) / 9.0;
    const double r = (2.0 * c2 * c2 * c2 - 9.0 * c2 * c1 + 27.0 * c0) / 54.0;
    const double q3 = q * q * q;

    if (r * r < q3) {
        // Three real roots via the trigonometric form.
        const double angle = std::acos(std::clamp(r / std::sqrt(q3), -1.0, 1.0));
        const double m = -2.0 * std::sqrt(q);
        const double shift = c2 / 3.0;
        for (int k = 0; k < 3; ++k) {
            const double x =
                m * std::cos((angle + 2.0 * std::numbers::pi * k) / 3.0) - shift;
            roots[k] = detail::polish_root(c2, c1, c0, C(x, 0.0));
        }
    } else {
        // One real root via Cardano, then a stable quadratic for the rest.
        const double s = -std::copysign(
            std::cbrt(std::abs(r) + std::sqrt(r * r - q3)), r);
        const double u = (s == 0.0) ? 0.0 : q / s;
        const double x1 = s + u - c2 / 3.0;
        const C real_root = detail::polish_root(c2, c1, c0, C(x1, 0.0));
        const double p1 = real_root.real();

        // Remaining pair solves p^2 + b p + c with b, c recovered from the
        // factored coefficients. b avoids the cancellation of c2 + p1 when
        // one root dwarfs the others.
        const double c_q = (p1 != 0.0) ? -c0 / p1 : c1;
        const double b_q = (p1 != 0.0) ? -(c1 - c_q) / p1 : c2;
        const double half = -b_q / 2.0;
        const double disc = c_q - half * half;
        if (disc > 0.0) {
            C z = detail::polish_root(c2, c1, c0, C(half, std::sqrt(disc)));
            if (z.imag() < 0.0) z = std::conj(z);
            roots = {real_root, std::conj(z), z};
        } else {
            const double w = std::sqrt(-disc);
            const double y1 = (half >= 0.0) ? half + w : half - w;
            const double y2 = (y1 != 0.0) ? c_q / y1 : half - w;
            roots = {real_root,
                     detail::polish_root(c2, c1, c0, C(y1, 0.0)),
                     detail::polish_root(c2, c1, c0, C(y2, 0.0))};
        }
    }

    std::sort(roots.begin(), roots.end(), [](const C& lhs, const C& rhs) {
        if (lhs.real() != rhs.real()) return lhs.real() < rhs.real();
        return lhs.imag() < rhs.imag();
    });
    return roots;
}

}  // namespace telegraph

// quadrature.hpp: adaptive Simpson integration and bisection root refinement

#pragma once

#include <cmath>
#include <string>

#include "telegraph/model.hpp"

namespace telegraph {

namespace detail {

template <class F>
double simpson_recurse(F&& f, double a, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth <= 0)
        throw NumericError("adaptive Simpson failed to converge on [" +
                           std::to_string(a) + ", " + std::to_string(b) + "]");
    return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Integrates f over [a, b] to absolute tolerance abs_tol.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol,
                        int max_depth = 40) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_recurse(f, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

// Refines a sign change of f bracketed by [lo, hi] down to interval width
// abs_tol. Expects f(lo) and f(hi) to have opposite signs (either may be 0).
template <class F>
double bisect_root(F&& f, double lo, double hi, double abs_tol = 1e-13) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    double fhi = f(hi);
    if (fhi == 0.0) return hi;
    if ((flo < 0.0) == (fhi < 0.0))
        throw NumericError("bisection bracket does not straddle a sign change");
    while (hi - lo > abs_tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fmid = f(mid);
        if (fmid == 0.0) return mid;
        if ((fmid < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace telegraph

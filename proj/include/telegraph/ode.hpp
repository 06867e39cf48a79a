// ode.hpp: adaptive Dormand-Prince 5(4) integration over small state arrays

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "telegraph/model.hpp"

namespace telegraph {

struct OdeTolerance {
    double rtol{1e-9};
    double atol{1e-12};
};

namespace detail {

template <class T, std::size_t N>
std::array<T, N> axpy(const std::array<T, N>& y, double h,
                      const std::array<T, N>& dy) {
    std::array<T, N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + h * dy[i];
    return out;
}

}  // namespace detail

// Integrates dy/dt = rhs(t, y) from t0 to t1 and returns y(t1). The stepper
// is the classic 7-stage FSAL Dormand-Prince pair with a PI-free step
// controller clamped to [0.2, 5] growth.
template <class T, std::size_t N, class Rhs>
std::array<T, N> integrate_ode(Rhs&& rhs, std::array<T, N> y, double t0, double t1,
                               const OdeTolerance& tol = {}) {
    using State = std::array<T, N>;
    if (t1 <= t0) return y;

    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                     a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                     b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

    double t = t0;
    double h = (t1 - t0) / 16.0;
    State k1 = rhs(t, y);
    bool k1_fresh = true;

    while (t < t1) {
        if (h > t1 - t) h = t1 - t;
        if (!(h > 1e-14 * std::max(1.0, std::abs(t))))
            throw NumericError("ode step size underflow at t=" + std::to_string(t));
        if (!k1_fresh) k1 = rhs(t, y);
        k1_fresh = true;

        State y2, y3, y4, y5, y6, y7;
        for (std::size_t i = 0; i < N; ++i) y2[i] = y[i] + h * (a21 * k1[i]);
        const State k2 = rhs(t + c2 * h, y2);
        for (std::size_t i = 0; i < N; ++i)
            y3[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        const State k3 = rhs(t + c3 * h, y3);
        for (std::size_t i = 0; i < N; ++i)
            y4[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        const State k4 = rhs(t + c4 * h, y4);
        for (std::size_t i = 0; i < N; ++i)
            y5[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        const State k5 = rhs(t + c5 * h, y5);
        for (std::size_t i = 0; i < N; ++i)
            y6[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                                a64 * k4[i] + a65 * k5[i]);
        const State k6 = rhs(t + h, y6);
        for (std::size_t i = 0; i < N; ++i)
            y7[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                                b5 * k5[i] + b6 * k6[i]);
        const State k7 = rhs(t + h, y7);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const T diff = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                                e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double scale =
                tol.atol + tol.rtol * std::max(std::abs(y[i]), std::abs(y7[i]));
            const double ratio = std::abs(diff) / scale;
            err += ratio * ratio;
        }
        err = std::sqrt(err / N);

        if (err <= 1.0) {
            t += h;
            y = y7;
            k1 = k7;  // FSAL
        } else {
            k1_fresh = false;
        }
        const double grow =
            (err == 0.0) ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h *= grow;
    }
    return y;
}

// Integrates across grid.samples, invoking observe(index, y) at every sample
// including index 0.
template <class T, std::size_t N, class Rhs, class Observer>
void integrate_over_grid(Rhs&& rhs, std::array<T, N> y, const TimeGrid& grid,
                         const OdeTolerance& tol, Observer&& observe) {
    observe(std::size_t{0}, y);
    for (std::size_t i = 1; i < grid.samples.size(); ++i) {
        y = integrate_ode(rhs, y, grid.samples[i - 1], grid.samples[i], tol);
        observe(i, y);
    }
}

}  // namespace telegraph

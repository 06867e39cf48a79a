// model.hpp: parameter records, validation, error types, and time grids

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace telegraph {

struct ValidationError : std::runtime_error {
    std::string field;  // name of the offending parameter
    ValidationError(std::string field_name, const std::string& message)
        : std::runtime_error(field_name + ": " + message), field(std::move(field_name)) {}
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateModesError : NumericError {
    using NumericError::NumericError;
};

struct UndersampledError : NumericError {
    std::size_t index;  // first sample whose spacing is too coarse
    UndersampledError(std::size_t sample_index, const std::string& message)
        : NumericError(message), index(sample_index) {}
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoiseParams {
    double nu{0.5};     // telegraph amplitude, the noise jumps between +nu and -nu
    double lam{1.0};    // switching rate of the telegraph process
    double kappa{1.0};  // decay rate of the exponential memory kernel; +inf marks the memoryless limit
    double a{0.0};      // preparation asymmetry, P(+-nu at t=0) = (1 +- a)/2
};

struct SystemConfig {
    double omega0{0.0};                          // intrinsic level splitting
    double theta{std::numbers::pi / 2};          // initial pure state cos(theta/2)|e> + sin(theta/2)|g>
    std::optional<std::array<double, 3>> r0{};   // overrides theta with an arbitrary (possibly mixed) Bloch vector
};

struct TimeGrid {
    double t_max{15.0};
    std::size_t n_samples{1501};
    std::vector<double> samples;  // strictly increasing, samples[0] == 0
};

inline double bloch_norm(const std::array<double, 3>& r) {
    return std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
}

// Initial Bloch vector implied by the configuration: r0 verbatim when set,
// otherwise the pure state (sin theta, 0, cos theta). Components within a
// few ulps of zero snap to exact zero so that a polar angle written as pi/2
// or pi lands on the equator or pole exactly; the branch cuts of the phase
// weights distinguish an exact zero from 1e-16.
inline std::array<double, 3> initial_bloch(const SystemConfig& config) {
    if (config.r0) return *config.r0;
    double rx = std::sin(config.theta);
    double rz = std::cos(config.theta);
    if (std::abs(rx) < 1e-15) rx = 0.0;
    if (std::abs(rz) < 1e-15) rz = 0.0;
    return {rx, 0.0, rz};
}

inline std::pair<NoiseParams, SystemConfig> validate(const NoiseParams& params,
                                                     const SystemConfig& config) {
    if (!(params.nu >= 0.0) || !std::isfinite(params.nu))
        throw ValidationError("noise.nu", "must be a finite value >= 0");
    if (!(params.lam >= 0.0) || !std::isfinite(params.lam))
        throw ValidationError("noise.lambda", "must be a finite value >= 0");
    if (std::isnan(params.kappa) || !(params.kappa > 0.0))
        throw ValidationError("noise.kappa", "must be > 0 (+inf selects the memoryless limit)");
    if (!(params.a >= -1.0 && params.a <= 1.0))
        throw ValidationError("noise.a", "must lie in [-1, 1]");
    if (params.nu == 0.0 && params.lam == 0.0)
        throw ValidationError("noise.nu", "nu and lambda cannot both be zero");
    if (!std::isfinite(config.omega0))
        throw ValidationError("system.omega0", "must be finite");
    if (!(config.theta >= 0.0 && config.theta <= std::numbers::pi))
        throw ValidationError("system.theta", "must lie in [0, pi]");
    if (config.r0) {
        const auto& r = *config.r0;
        if (!std::isfinite(r[0]) || !std::isfinite(r[1]) || !std::isfinite(r[2]))
            throw ValidationError("system.r0", "components must be finite");
        if (bloch_norm(r) > 1.0 + 1e-12)
            throw ValidationError("system.r0", "|r(0)| must not exceed 1");
    }
    return {params, config};
}

inline TimeGrid uniform_grid(double t_max, std::size_t n) {
    if (!(t_max > 0.0) || !std::isfinite(t_max))
        throw ValidationError("grid.t_max", "must be a finite value > 0");
    if (n < 2)
        throw ValidationError("grid.n_samples", "need at least 2 samples");
    TimeGrid grid;
    grid.t_max = t_max;
    grid.n_samples = n;
    grid.samples.resize(n);
    const double h = t_max / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        grid.samples[i] = h * static_cast<double>(i);
    return grid;
}

}  // namespace telegraph

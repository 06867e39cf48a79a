// runner.hpp: run configuration, simulation driver, CSV emission,
// parameter sweeps, oracle comparison, and figure presets

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "telegraph/decoherence.hpp"
#include "telegraph/dynamics.hpp"
#include "telegraph/geometry.hpp"
#include "telegraph/model.hpp"
#include "telegraph/nonmarkov.hpp"
#include "telegraph/oracles.hpp"

namespace telegraph {

struct RunConfig {
    NoiseParams noise{};
    SystemConfig system{};
    double t_max{15.0};
    std::size_t n_samples{1501};
    std::vector<std::string> columns{};  // empty selects every column
    McConfig mc{};
    std::optional<bool> oracle_ode{};
    std::optional<bool> oracle_mc{};
};

struct RunResult {
    TimeGrid grid;
    ModeDecomposition modes;
    Trajectory trajectory;
    std::vector<PhaseBreakdown> phases;
    MixedPhaseSeries mixed;
    NonMarkovReport report;
};

inline constexpr std::array<std::string_view, 18> kCsvColumns = {
    "t",        "Re F",       "Im F",  "absF",  "phi",   "s",
    "gamma",    "r_x",        "r_y",   "r_z",   "eps_plus", "Phi_P",
    "Phi_e",    "Phi_g",      "delta_Phi_e", "N", "L",    "near_zero_flag"};

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline std::string trim(std::string_view text) {
    const auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return {};
    const auto end = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(begin, end - begin + 1));
}

inline std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = text.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(trim(text.substr(start)));
            return parts;
        }
        parts.push_back(trim(text.substr(start, pos - start)));
        start = pos + 1;
    }
}

inline double parse_double_value(const std::string& key, const std::string& text) {
    const std::string body = trim(text);
    try {
        std::size_t used = 0;
        const double v = std::stod(body, &used);
        if (used != body.size())
            throw ValidationError(key, "trailing characters in '" + body + "'");
        return v;
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception&) {
        throw ValidationError(key, "cannot parse '" + body + "' as a number");
    }
}

inline std::size_t parse_size_value(const std::string& key, const std::string& text) {
    const std::string body = trim(text);
    try {
        std::size_t used = 0;
        if (!body.empty() && body[0] == '-')
            throw ValidationError(key, "must be a nonnegative integer");
        const unsigned long long v = std::stoull(body, &used);
        if (used != body.size())
            throw ValidationError(key, "trailing characters in '" + body + "'");
        return static_cast<std::size_t>(v);
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception&) {
        throw ValidationError(key, "cannot parse '" + body + "' as an integer");
    }
}

inline bool parse_bool_value(const std::string& key, const std::string& text) {
    const std::string body = trim(text);
    if (body == "true" || body == "1") return true;
    if (body == "false" || body == "0") return false;
    throw ValidationError(key, "cannot parse '" + body + "' as a boolean");
}

}  // namespace detail

// Applies one key=value setting. Keys use section prefixes: noise.nu,
// noise.lambda, noise.kappa (the literal "inf" marks the memoryless
// limit), noise.a, system.omega0, system.theta, system.r0 (three
// comma-separated components), grid.t_max, grid.n_samples, output.columns,
// mc.n_traj, mc.seed, mc.dt, mc.workers, oracle.ode, oracle.mc.
inline void apply_setting(RunConfig& config, const std::string& key,
                          const std::string& value) {
    if (key == "noise.nu") {
        config.noise.nu = detail::parse_double_value(key, value);
    } else if (key == "noise.lambda") {
        config.noise.lam = detail::parse_double_value(key, value);
    } else if (key == "noise.kappa") {
        config.noise.kappa = detail::parse_double_value(key, value);
    } else if (key == "noise.a") {
        config.noise.a = detail::parse_double_value(key, value);
    } else if (key == "system.omega0") {
        config.system.omega0 = detail::parse_double_value(key, value);
    } else if (key == "system.theta") {
        config.system.theta = detail::parse_double_value(key, value);
    } else if (key == "system.r0") {
        const std::vector<std::string> parts = detail::split(value, ',');
        if (parts.size() != 3)
            throw ValidationError(key, "expected three comma-separated components");
        std::array<double, 3> r0;
        for (std::size_t k = 0; k < 3; ++k)
            r0[k] = detail::parse_double_value(key, parts[k]);
        config.system.r0 = r0;
    } else if (key == "grid.t_max") {
        config.t_max = detail::parse_double_value(key, value);
    } else if (key == "grid.n_samples") {
        config.n_samples = detail::parse_size_value(key, value);
    } else if (key == "output.columns") {
        const std::vector<std::string> parts = detail::split(value, ',');
        for (const std::string& name : parts) {
            if (std::find(kCsvColumns.begin(), kCsvColumns.end(), name) ==
                kCsvColumns.end())
                throw ValidationError(key, "unknown column '" + name + "'");
        }
        config.columns = parts;
    } else if (key == "mc.n_traj") {
        config.mc.n_traj = detail::parse_size_value(key, value);
    } else if (key == "mc.seed") {
        config.mc.seed = detail::parse_size_value(key, value);
    } else if (key == "mc.dt") {
        config.mc.dt = detail::parse_double_value(key, value);
    } else if (key == "mc.workers") {
        config.mc.workers = detail::parse_size_value(key, value);
    } else if (key == "oracle.ode") {
        config.oracle_ode = detail::parse_bool_value(key, value);
    } else if (key == "oracle.mc") {
        config.oracle_mc = detail::parse_bool_value(key, value);
    } else {
        throw ValidationError(key, "unknown configuration key");
    }
}

// Parses one "key=value" line (used both for config files and --set flags).
inline void apply_setting_line(RunConfig& config, const std::string& line) {
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
        throw ValidationError(detail::trim(line), "expected key=value");
    apply_setting(config, detail::trim(line.substr(0, eq)),
                  detail::trim(line.substr(eq + 1)));
}

// Loads a flat key=value config file. '#' starts a comment; blank lines are
// skipped.
inline void load_config_file(RunConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = detail::trim(line);
        if (body.empty()) continue;
        apply_setting_line(config, body);
    }
}

// Full simulation for one parameter point: coherence, Bloch trajectory,
// phases (pure breakdown and mixed-state series), and the memory measure.
inline RunResult run_simulation(const RunConfig& config) {
    const auto [noise, system] = validate(config.noise, config.system);
    if (!std::isfinite(noise.kappa))
        throw ValidationError("noise.kappa",
                              "time-series runs require a finite value; the "
                              "memoryless limit is exercised by compare-oracles");
    RunResult result;
    result.grid = uniform_grid(config.t_max, config.n_samples);
    result.modes = decompose(noise);
    result.trajectory = evolve_analytic(result.modes, system, result.grid);

    std::optional<OdeCoherenceEvaluator> eval;
    CoherenceFn fn;
    if (result.modes.degenerate) {
        eval.emplace(noise, result.grid);
        fn = [&eval](double t) { return eval->f_df_at(t); };
    } else {
        fn = modes_fn(result.modes);
    }
    result.phases =
        total_phase_pure(system, fn, result.trajectory.coherence, result.grid);
    result.mixed =
        total_phase_mixed(system, fn, result.trajectory.coherence, result.grid);
    result.report = non_markovianity(result.trajectory.coherence);
    return result;
}

namespace detail {

inline std::vector<std::size_t> resolve_columns(const RunConfig& config) {
    std::vector<std::size_t> idx;
    if (config.columns.empty()) {
        idx.resize(kCsvColumns.size());
        for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
        return idx;
    }
    for (const std::string& name : config.columns) {
        const auto it = std::find(kCsvColumns.begin(), kCsvColumns.end(), name);
        if (it == kCsvColumns.end())
            throw ValidationError("output.columns", "unknown column '" + name + "'");
        idx.push_back(static_cast<std::size_t>(it - kCsvColumns.begin()));
    }
    return idx;
}

inline double column_value(const RunResult& result, std::size_t col,
                           std::size_t i) {
    const CoherenceSample& c = result.trajectory.coherence[i];
    switch (col) {
        case 0: return result.grid.samples[i];
        case 1: return c.f.real();
        case 2: return c.f.imag();
        case 3: return c.abs_f;
        case 4: return c.phi;
        case 5: return c.s;
        case 6: return c.gamma;
        case 7: return result.trajectory.states[i].rx;
        case 8: return result.trajectory.states[i].ry;
        case 9: return result.trajectory.states[i].rz;
        case 10: return result.trajectory.spectra[i].eps_plus;
        case 11: return result.mixed.terms[i].varphi_plus;
        case 12: return result.mixed.terms[i].psi_plus;
        case 13: return result.mixed.phi_g_accumulated[i];
        case 14: return result.phases[i].delta_phi_e;
        case 15: return result.report.n_t[i];
        case 16: return result.trajectory.length[i];
        default: return c.near_zero ? 1.0 : 0.0;
    }
}

}  // namespace detail

// Emits the time series as CSV: '#' metadata lines recording every
// parameter, one header line, then one row per sample at full (17
// significant digit) precision. Undefined phases are emitted as nan.
inline void write_csv(std::ostream& os, const RunConfig& config,
                      const RunResult& result) {
    using detail::fmt17;
    os << "# noise.nu = " << fmt17(config.noise.nu) << "\n";
    os << "# noise.lambda = " << fmt17(config.noise.lam) << "\n";
    os << "# noise.kappa = " << fmt17(config.noise.kappa) << "\n";
    os << "# noise.a = " << fmt17(config.noise.a) << "\n";
    os << "# system.omega0 = " << fmt17(config.system.omega0) << "\n";
    os << "# system.theta = " << fmt17(config.system.theta) << "\n";
    if (config.system.r0) {
        const auto& r0 = *config.system.r0;
        os << "# system.r0 = " << fmt17(r0[0]) << "," << fmt17(r0[1]) << ","
           << fmt17(r0[2]) << "\n";
    }
    os << "# grid.t_max = " << fmt17(config.t_max) << "\n";
    os << "# grid.n_samples = " << config.n_samples << "\n";
    os << "# mc.n_traj = " << config.mc.n_traj << "\n";
    os << "# mc.seed = " << config.mc.seed << "\n";
    os << "# mc.dt = " << fmt17(config.mc.dt) << "\n";
    os << "# mc.workers = " << config.mc.workers << "\n";

    const std::vector<std::size_t> cols = detail::resolve_columns(config);
    for (std::size_t k = 0; k < cols.size(); ++k)
        os << (k == 0 ? "" : ",") << kCsvColumns[cols[k]];
    os << "\n";
    for (std::size_t i = 0; i < result.grid.samples.size(); ++i) {
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (k > 0) os << ",";
            if (cols[k] == 17) {
                os << (result.trajectory.coherence[i].near_zero ? 1 : 0);
            } else {
                os << fmt17(detail::column_value(result, cols[k], i));
            }
        }
        os << "\n";
    }
}

inline void write_csv_file(const std::filesystem::path& path,
                           const RunConfig& config, const RunResult& result) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open output file " + path.string());
    write_csv(out, config, result);
    if (!out) throw IoError("failed while writing " + path.string());
}

// Runs one simulation and writes <out_dir>/run.csv.
inline std::filesystem::path run(const RunConfig& config,
                                 const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string());
    const RunResult result = run_simulation(config);
    const std::filesystem::path path = out_dir / "run.csv";
    write_csv_file(path, config, result);
    return path;
}

inline constexpr std::array<std::string_view, 6> kSweepAxes = {
    "a", "nu", "kappa", "lambda", "theta", "omega0"};

namespace detail {

inline void set_axis(RunConfig& config, const std::string& axis, double value) {
    if (axis == "a") config.noise.a = value;
    else if (axis == "nu") config.noise.nu = value;
    else if (axis == "kappa") config.noise.kappa = value;
    else if (axis == "lambda") config.noise.lam = value;
    else if (axis == "theta") config.system.theta = value;
    else if (axis == "omega0") config.system.omega0 = value;
    else throw ValidationError("sweep.axis", "unknown axis '" + axis + "'");
}

}  // namespace detail

// Runs the base config once per axis value, concurrently. Each point is
// written to <axis>=<value>.csv; summary.csv collects the final-time
// effective phase, memory measure, and path length sorted by value.
inline void sweep(const std::string& axis, std::vector<double> values,
                  const RunConfig& base, const std::filesystem::path& out_dir) {
    if (std::find(kSweepAxes.begin(), kSweepAxes.end(), axis) == kSweepAxes.end())
        throw ValidationError("sweep.axis", "unknown axis '" + axis + "'");
    if (values.empty())
        throw ValidationError("sweep.values", "at least one value required");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string());

    std::sort(values.begin(), values.end());
    struct Point {
        double value;
        double phi_e{0.0}, n{0.0}, l{0.0};
        std::exception_ptr error{};
    };
    std::vector<Point> points(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) points[k].value = values[k];

    std::atomic<std::size_t> next{0};
    const auto worker = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= points.size()) break;
            try {
                RunConfig config = base;
                detail::set_axis(config, axis, points[k].value);
                const RunResult result = run_simulation(config);
                const std::filesystem::path path =
                    out_dir / (axis + "=" + detail::fmt_short(points[k].value) +
                               ".csv");
                write_csv_file(path, config, result);
                points[k].phi_e = result.mixed.terms.back().psi_plus;
                points[k].n = result.report.n_total;
                points[k].l = result.trajectory.length.back();
            } catch (...) {
                points[k].error = std::current_exception();
            }
        }
    };
    const std::size_t n_workers = std::min<std::size_t>(
        points.size(), std::max(1u, std::thread::hardware_concurrency()));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const Point& point : points)
        if (point.error) std::rethrow_exception(point.error);

    std::ofstream summary(out_dir / "summary.csv");
    if (!summary) throw IoError("cannot open " + (out_dir / "summary.csv").string());
    summary << axis << ",Phi_e,N,L\n";
    for (const Point& point : points)
        summary << detail::fmt17(point.value) << "," << detail::fmt17(point.phi_e)
                << "," << detail::fmt17(point.n) << "," << detail::fmt17(point.l)
                << "\n";
}

struct OracleComparison {
    struct Lane {
        std::string quantity;
        double max_dev{0.0};
        double tolerance{0.0};
        bool pass{true};
    };
    std::vector<Lane> lanes;
    bool pass{true};
};

// Cross-checks the coherence evaluators. With finite kappa the analytic
// mode sum is compared against the ODE integration; in the memoryless
// limit (kappa = inf) the Monte Carlo average is compared against the
// closed form. corrupt_residue deliberately perturbs the first residue to
// exercise the failure path.
inline OracleComparison compare_oracles(const RunConfig& config,
                                        bool corrupt_residue = false) {
    const auto [noise, system] = validate(config.noise, config.system);
    (void)system;
    const TimeGrid grid = uniform_grid(config.t_max, config.n_samples);
    OracleComparison report;

    if (std::isfinite(noise.kappa)) {
        if (config.oracle_mc.value_or(false))
            throw ValidationError("oracle.mc",
                                  "Monte Carlo comparison requires noise.kappa = inf");
        if (config.oracle_ode.value_or(true)) {
            ModeDecomposition modes = decompose(noise);
            if (corrupt_residue) modes.residues[0] += Complex(1e-3, 0.0);
            const std::vector<Complex> reference = ode_f(noise, grid);
            double max_dev = 0.0;
            for (std::size_t i = 0; i < grid.samples.size(); ++i)
                max_dev = std::max(
                    max_dev,
                    std::abs(evaluate_f(modes, grid.samples[i]) - reference[i]));
            OracleComparison::Lane lane{"analytic vs ode", max_dev, 1e-6,
                                        max_dev < 1e-6};
            report.pass = report.pass && lane.pass;
            report.lanes.push_back(std::move(lane));
        }
    } else {
        if (config.oracle_ode.value_or(false))
            throw ValidationError("oracle.ode",
                                  "ODE comparison requires finite noise.kappa");
        if (noise.a != 0.0)
            throw ValidationError(
                "noise.a", "memoryless-limit comparison requires a = 0");
        if (config.oracle_mc.value_or(true)) {
            const std::vector<McEstimate> estimates = mc_f(noise, config.mc, grid);
            double max_dev = 0.0;
            double max_excess = 0.0;
            double max_se = 0.0;
            for (std::size_t i = 0; i < grid.samples.size(); ++i) {
                const double closed =
                    closed_form_markov_f(noise, grid.samples[i]);
                const double dev = std::abs(estimates[i].mean - closed);
                max_dev = std::max(max_dev, dev);
                max_se = std::max(max_se, estimates[i].se);
                max_excess = std::max(max_excess, dev - 3.0 * estimates[i].se);
            }
            OracleComparison::Lane lane{"mc vs closed form", max_dev, 3.0 * max_se,
                                        max_excess <= 0.0};
            report.pass = report.pass && lane.pass;
            report.lanes.push_back(std::move(lane));
            OracleComparison::Lane se_lane{"mc standard error", max_se, 5e-3,
                                           max_se < 5e-3};
            report.pass = report.pass && se_lane.pass;
            report.lanes.push_back(std::move(se_lane));
        }
    }
    return report;
}

inline constexpr std::array<std::string_view, 5> kPresetNames = {
    "fig1a", "fig1b", "fig2a", "fig2b", "fig3"};

// Writes the CSV set behind one of the figure presets. All presets share
// theta = pi/2, omega0 = 0, kappa = lambda = 1 and the five preparation
// biases {0, +-0.5, +-1}; the 'a' suffix marks nu = 0.5 (no coherence
// revivals), 'b' marks nu = 2 (revivals present). fig3 emits both regimes.
inline std::vector<std::filesystem::path> reproduce(
    const std::string& preset, const RunConfig& base,
    const std::filesystem::path& out_dir) {
    if (std::find(kPresetNames.begin(), kPresetNames.end(), preset) ==
        kPresetNames.end())
        throw ValidationError("preset", "unknown preset '" + preset + "'");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string());

    struct Variant {
        std::string prefix;
        double nu;
    };
    std::vector<Variant> variants;
    if (preset == "fig3") {
        variants.push_back({"fig3a", 0.5});
        variants.push_back({"fig3b", 2.0});
    } else {
        variants.push_back({preset, preset.back() == 'a' ? 0.5 : 2.0});
    }

    const std::array<double, 5> biases = {-1.0, -0.5, 0.0, 0.5, 1.0};
    std::vector<std::filesystem::path> written;
    for (const Variant& variant : variants) {
        for (const double a : biases) {
            RunConfig config = base;
            config.noise.nu = variant.nu;
            config.noise.lam = 1.0;
            config.noise.kappa = 1.0;
            config.noise.a = a;
            config.system.omega0 = 0.0;
            config.system.theta = 0.5 * std::numbers::pi;
            config.system.r0.reset();
            const RunResult result = run_simulation(config);
            const std::filesystem::path path =
                out_dir /
                (variant.prefix + "_a=" + detail::fmt_short(a) + ".csv");
            write_csv_file(path, config, result);
            written.push_back(path);
        }
    }
    return written;
}

}  // namespace telegraph

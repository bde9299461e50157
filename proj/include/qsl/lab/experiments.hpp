// Copyright 2026 The qsl-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment harness: each run_* turns a validated configuration into a
// result table, SVG plots, a text report and a list of embedded checks.
// Outputs depend only on the configuration (including its seed); thread
// count and wall-clock never reach the table.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "qsl/dynamics.hpp"
#include "qsl/lab/config.hpp"
#include "qsl/lab/svg.hpp"
#include "qsl/lab/table.hpp"
#include "qsl/speed_limit.hpp"
#include "qsl/states.hpp"
#include "qsl/swap_test.hpp"

namespace qsl::lab {

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct OutputFile {
    std::string name;
    std::string contents;
};

struct ExperimentResult {
    ResultTable table{{}};
    std::vector<OutputFile> plots;
    std::string report;
    std::vector<Check> checks;

    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
    }
};

struct RunOptions {
    unsigned threads = 1;
};

namespace detail {

inline std::string fmt(double v, const char* spec = "%.10g") {
    if (std::isnan(v)) return "n/a";
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

inline std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string("n/a"); }

inline double or_nan(const std::optional<double>& v) { return v ? *v : std::numeric_limits<double>::quiet_NaN(); }

inline void add_provenance(ResultTable& table, const ExperimentConfig& c) {
    table.add_metadata("generator", toolkit_version);
    for (const auto& [key, value] : config_echo(c)) table.add_metadata("config." + key, value);
}

inline Vec3 rotation_axis(const ExperimentConfig& c) { return Vec3(c.nx, c.ny, c.nz); }

inline HamiltonianSpec hamiltonian(const ExperimentConfig& c) {
    if (c.model == ModelKind::landau_zener) return landau_zener(c.V, c.Delta);
    return qubit_hamiltonian(c.A, rotation_axis(c), c.B);
}

inline DynamicsModel model(const ExperimentConfig& c) {
    std::vector<Matrix> jumps;
    if (c.dephasing > 0.0) jumps.push_back(Matrix(std::sqrt(c.dephasing / 2.0) * pauli::z()));
    if (c.decay > 0.0) jumps.push_back(Matrix(std::sqrt(c.decay) * pauli::lowering()));
    if (jumps.empty()) return to_model(hamiltonian(c));
    return LindbladModel{hamiltonian(c), std::move(jumps)};
}

inline std::size_t steps(const ExperimentConfig& c, const DynamicsModel& m) {
    return c.steps ? *c.steps : default_steps(m, c.T_max);
}

inline DensityMatrix initial_state(const ExperimentConfig& c) {
    return qubit_state(SphereDirection{c.polar, c.azimuth}, c.purity);
}

/// Least-squares slope of y against x.
inline double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

inline const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2"};
    return colors[i % 7];
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::string checks_block(const std::vector<Check>& checks) {
    std::string out;
    for (const auto& c : checks) out += std::string(c.passed ? "PASS " : "FAIL ") + c.name + ": " + c.detail + "\n";
    return out;
}

}  // namespace detail

/// Largest negative discrete second difference of s over grid points whose
/// right neighbour is at or before t_end (0 when s is convex there).
inline double worst_concavity(const std::vector<double>& t, const std::vector<double>& s, double t_end) {
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < s.size() && t[k + 1] <= t_end; ++k)
        worst = std::min(worst, s[k + 1] - 2.0 * s[k] + s[k - 1]);
    return worst;
}

inline constexpr double slope_tolerance = 1e-6;
inline constexpr double convexity_floor = 1e-8;
inline constexpr double tie_tolerance = 1e-9;

/// Path length under a constant Hamiltonian for several initial angles to
/// the rotation axis; each series must be a straight line of slope
/// |A| sin(angle).
inline ExperimentResult run_fig4(const ExperimentConfig& c) {
    ExperimentResult out;
    out.table = ResultTable({{"angle", ColumnType::real}, {"t", ColumnType::real}, {"s", ColumnType::real}});
    detail::add_provenance(out.table, c);
    const DynamicsModel m = detail::model(c);
    const std::size_t M = detail::steps(c, m);
    const Vec3 axis = detail::rotation_axis(c).normalized();

    svg::Chart chart{"Path length under constant H", "t", "s(t)", {}, {}};
    std::ostringstream report;
    report << "fig4: path length s(t) for H = " << c.A << " n.sigma/2 + " << c.B << " I, T = " << c.T_max
           << ", M = " << M << "\n";
    for (std::size_t a = 0; a < c.angles.size(); ++a) {
        const double angle = c.angles[a];
        const DensityMatrix rho0 = qubit_state(SphereDirection{angle, 0.0}, 1.0);
        const Trajectory traj = accumulate_path(propagate(m, rho0, c.T_max, M));
        for (std::size_t k = 0; k < traj.size(); ++k) out.table.add_row({angle, traj.times[k], traj.cumulative_path[k]});

        const double expected = std::abs(c.A) * qubit_bloch(rho0).normalized().cross(axis).norm();
        const double slope = detail::fitted_slope(traj.times, traj.cumulative_path);
        const double err = std::abs(slope - expected);
        out.checks.push_back({"slope(angle=" + detail::fmt(angle, "%.6g") + ")", err <= slope_tolerance,
                              "fitted " + detail::fmt(slope, "%.12g") + ", expected " +
                                  detail::fmt(expected, "%.12g") + ", |diff| " + detail::fmt(err, "%.3g")});
        report << "  angle " << detail::fmt(angle, "%.6g") << ": slope " << detail::fmt(slope, "%.12g")
               << " (expected " << detail::fmt(expected, "%.12g") << ")\n";
        chart.series.push_back({"angle " + detail::fmt(angle, "%.4g"), traj.times, traj.cumulative_path, {},
                                detail::palette(a), svg::Style::line});
    }
    out.plots.push_back({"fig4.svg", svg::render(chart)});
    out.report = report.str();
    return out;
}

/// Path length, Bloch angle and both bounds along one trajectory. The path
/// length is convex while the speed grows, which forces
/// tau_tilde <= tau_new <= T whenever the target is reached in that regime.
inline ExperimentResult run_fig5(const ExperimentConfig& c) {
    ExperimentResult out;
    out.table = ResultTable({{"t", ColumnType::real}, {"s", ColumnType::real}, {"theta", ColumnType::real}});
    detail::add_provenance(out.table, c);
    const DynamicsModel m = detail::model(c);
    const std::size_t M = detail::steps(c, m);
    const DensityMatrix rho0 = detail::initial_state(c);
    const Trajectory traj = accumulate_path(propagate(m, rho0, c.T_max, M));
    std::vector<double> theta(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        theta[k] = bloch_angle(rho0, traj.states[k]);
        out.table.add_row({traj.times[k], traj.cumulative_path[k], theta[k]});
    }
    const QslReport q = qsl_from_trajectory(traj, c.theta_target);

    std::ostringstream report;
    report << "fig5: target angle " << detail::fmt(c.theta_target) << ", T_max = " << c.T_max << ", M = " << M
           << "\n";
    report << "  tau_new   = " << detail::fmt(q.tau_new) << "\n";
    report << "  tau_tilde = " << detail::fmt(q.tau_existing) << "\n";
    report << "  T         = " << detail::fmt(q.actual_T) << "\n";
    report << "  s(T)      = " << detail::fmt(q.path_at_T) << "\n";
    if (!q.reachable) {
        report << "  target not reached by T_max; bounds undefined\n";
    } else {
        const double tn = *q.tau_new;
        const double te = *q.tau_existing;
        const double T = *q.actual_T;
        out.checks.push_back({"ordering", te <= tn && tn <= T,
                              "tau_tilde " + detail::fmt(te) + " <= tau_new " + detail::fmt(tn) + " <= T " +
                                  detail::fmt(T)});
        const double worst = worst_concavity(traj.times, traj.cumulative_path, T);
        out.checks.push_back({"convexity", worst >= -convexity_floor,
                              "min second difference of s on [0, T] = " + detail::fmt(worst, "%.3g")});
    }

    svg::Chart chart{"Path length and Bloch angle", "t", "angle", {}, {}};
    chart.series.push_back({"s(t)", traj.times, traj.cumulative_path, {}, detail::palette(0), svg::Style::line});
    chart.series.push_back({"Theta(rho0, rho_t)", traj.times, theta, {}, detail::palette(1), svg::Style::line});
    chart.series.push_back({"target", {traj.times.front(), traj.times.back()}, {c.theta_target, c.theta_target}, {},
                            "#7f7f7f", svg::Style::line});
    if (q.reachable) {
        chart.markers.push_back({"tau_tilde", *q.tau_existing, "#2ca02c"});
        chart.markers.push_back({"tau_new", *q.tau_new, "#d62728"});
        chart.markers.push_back({"T", *q.actual_T, "#000000"});
    }
    out.plots.push_back({"fig5.svg", svg::render(chart)});
    out.report = report.str();
    return out;
}

enum class BoundClass { red, blue, tie, black };

inline const char* to_string(BoundClass k) {
    switch (k) {
        case BoundClass::red: return "red";
        case BoundClass::blue: return "blue";
        case BoundClass::tie: return "tie";
        case BoundClass::black: return "black";
    }
    return "?";
}

/// red: tau_new > tau_tilde (new bound tighter); blue: tau_new < tau_tilde;
/// tie within 1e-9; black: target not reached.
inline BoundClass classify(const QslReport& q) {
    if (!q.reachable || !q.tau_new) return BoundClass::black;
    const double d = *q.tau_new - *q.tau_existing;
    if (d > tie_tolerance) return BoundClass::red;
    if (d < -tie_tolerance) return BoundClass::blue;
    return BoundClass::tie;
}

/// Direction of sample i. Depends on the base seed and sample index only, so
/// every purity sees the same set of directions.
inline SphereDirection sample_direction(std::uint64_t base_seed, std::size_t sample) {
    std::mt19937_64 engine(detail::splitmix64(base_seed ^ detail::splitmix64(sample)));
    return sample_sphere_direction(engine);
}

/// Random initial directions at several purities under the same dynamics,
/// classified by which bound is tighter.
inline ExperimentResult run_appendix_c(const ExperimentConfig& c, const RunOptions& opts = {}) {
    ExperimentResult out;
    out.table = ResultTable({{"phi", ColumnType::real},
                             {"varphi", ColumnType::real},
                             {"purity", ColumnType::real},
                             {"tau", ColumnType::real},
                             {"tau_tilde", ColumnType::real},
                             {"class", ColumnType::text}});
    detail::add_provenance(out.table, c);
    const DynamicsModel m = detail::model(c);
    const std::size_t M = detail::steps(c, m);
    const std::size_t n = c.samples;
    const std::size_t jobs = n * c.purities.size();

    std::vector<SphereDirection> directions(n);
    for (std::size_t i = 0; i < n; ++i) directions[i] = sample_direction(c.seed, i);

    std::vector<QslReport> reports(jobs);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        for (std::size_t j = next++; j < jobs; j = next++) {
            try {
                const DensityMatrix rho0 = qubit_state(directions[j % n], c.purities[j / n]);
                reports[j] = evaluate_qsl(m, rho0, c.theta_target, c.T_max, M);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = jobs;
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(jobs)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::ostringstream report;
    report << "appendix-c: " << n << " directions x " << c.purities.size() << " purities, target "
           << detail::fmt(c.theta_target) << ", T_max = " << c.T_max << ", M = " << M << "\n";
    std::vector<svg::Chart> panels;
    std::vector<BoundClass> klass(jobs);
    bool majority_everywhere = true;
    std::string majority_detail;
    for (std::size_t p = 0; p < c.purities.size(); ++p) {
        std::size_t counts[4] = {0, 0, 0, 0};
        svg::Chart chart{"purity " + detail::fmt(c.purities[p], "%.3g"), "varphi (azimuth)", "phi (polar)", {}, {}};
        chart.width = 520.0;
        chart.height = 400.0;
        svg::Series series[4] = {{"red", {}, {}, {}, "#d62728", svg::Style::scatter},
                                 {"blue", {}, {}, {}, "#1f77b4", svg::Style::scatter},
                                 {"tie", {}, {}, {}, "#2ca02c", svg::Style::scatter},
                                 {"black", {}, {}, {}, "#000000", svg::Style::scatter}};
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = p * n + i;
            const QslReport& q = reports[j];
            klass[j] = classify(q);
            ++counts[static_cast<int>(klass[j])];
            series[static_cast<int>(klass[j])].x.push_back(directions[i].azimuth);
            series[static_cast<int>(klass[j])].y.push_back(directions[i].polar);
            out.table.add_row({directions[i].polar, directions[i].azimuth, c.purities[p], detail::or_nan(q.tau_new),
                               detail::or_nan(q.tau_existing), std::string(to_string(klass[j]))});
        }
        for (auto& s : series) chart.series.push_back(std::move(s));
        const double red_fraction = static_cast<double>(counts[0]) / static_cast<double>(n);
        report << "  purity " << detail::fmt(c.purities[p], "%.3g") << ": red " << counts[0] << ", blue " << counts[1]
               << ", tie " << counts[2] << ", black " << counts[3] << " (red fraction "
               << detail::fmt(red_fraction, "%.4f") << ")\n";
        if (!(red_fraction > 0.5)) majority_everywhere = false;
        majority_detail += (p ? ", " : "") + detail::fmt(red_fraction, "%.4f");
        char name[64];
        std::snprintf(name, sizeof name, "appendix-c_purity_%.3g.svg", c.purities[p]);
        out.plots.push_back({name, svg::render(chart)});
        panels.push_back(std::move(chart));
    }
    out.checks.push_back({"majority-red", majority_everywhere, "red fraction per purity: " + majority_detail});

    // A direction counts if it reaches the target at every purity.
    std::size_t compared = 0;
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < n; ++i) {
        bool all_reachable = true;
        for (std::size_t p = 0; p < c.purities.size(); ++p)
            all_reachable = all_reachable && klass[p * n + i] != BoundClass::black;
        if (!all_reachable) continue;
        ++compared;
        for (std::size_t p = 1; p < c.purities.size(); ++p)
            if (klass[p * n + i] != klass[i]) {
                ++mismatches;
                break;
            }
    }
    report << "  directions reachable at every purity: " << compared << ", classification mismatches: " << mismatches
           << "\n";
    out.checks.push_back({"purity-consistency", mismatches == 0,
                          std::to_string(mismatches) + " mismatches among " + std::to_string(compared) +
                              " directions reachable at every purity"});
    out.plots.insert(out.plots.begin(), {"appendix-c.svg", svg::render_panels(panels, 2)});
    out.report = report.str();
    return out;
}

/// Engine seed for the swap tests of initial angle `index`.
inline std::uint64_t series_seed(std::uint64_t base_seed, std::size_t index) {
    return detail::splitmix64(base_seed + detail::splitmix64(index));
}

/// Swap-test estimate of the fig4 path lengths. shots = exact uses the exact
/// outcome probabilities.
inline ExperimentResult run_swapdemo(const ExperimentConfig& c) {
    ExperimentResult out;
    out.table = ResultTable({{"angle", ColumnType::real},
                             {"t", ColumnType::real},
                             {"s_exact", ColumnType::real},
                             {"s_est", ColumnType::real},
                             {"s_err", ColumnType::real}});
    detail::add_provenance(out.table, c);
    const DynamicsModel m = detail::model(c);
    const std::size_t M = detail::steps(c, m);
    svg::Chart chart{"Swap-test estimate of s(t)", "t", "s(t)", {}, {}};
    std::size_t points = 0;
    std::size_t within[3] = {0, 0, 0};
    for (std::size_t a = 0; a < c.angles.size(); ++a) {
        const double angle = c.angles[a];
        const DensityMatrix rho0 = qubit_state(SphereDirection{angle, 0.0}, 1.0);
        const Trajectory exact = accumulate_path(propagate(m, rho0, c.T_max, M));
        const PathMeasurement meas =
            simulate_path_measurement(m, rho0, TimeGrid{c.T_max, M}, c.shots, series_seed(c.seed, a));
        for (std::size_t k = 0; k < exact.size(); ++k) {
            out.table.add_row({angle, exact.times[k], exact.cumulative_path[k], meas.path[k], meas.path_error[k]});
            if (k == 0) continue;
            ++points;
            const double diff = std::abs(meas.path[k] - exact.cumulative_path[k]);
            for (int z = 0; z < 3; ++z)
                if (diff <= std::max((z + 1) * meas.path_error[k], 1e-12)) ++within[z];
        }
        chart.series.push_back({"exact " + detail::fmt(angle, "%.4g"), exact.times, exact.cumulative_path, {},
                                detail::palette(a), svg::Style::line});
        chart.series.push_back({"", meas.times, meas.path, meas.path_error, detail::palette(a), svg::Style::scatter});
    }
    std::ostringstream report;
    report << "swap-demo: " << c.angles.size() << " angles, M = " << M << ", shots per swap test "
           << (c.shots ? std::to_string(*c.shots) : std::string("exact")) << "\n";
    const double total = static_cast<double>(std::max<std::size_t>(points, 1));
    report << "  coverage within 1/2/3 sigma: " << detail::fmt(within[0] / total, "%.4f") << " / "
           << detail::fmt(within[1] / total, "%.4f") << " / " << detail::fmt(within[2] / total, "%.4f") << " of "
           << points << " points\n";
    out.checks.push_back({"coverage-3sigma", within[2] / total >= 0.99,
                          detail::fmt(within[2] / total, "%.4f") + " of points within 3 sigma (need >= 0.99)"});
    out.plots.push_back({"swap-demo.svg", svg::render(chart)});
    out.report = report.str();
    return out;
}

/// Any supported qubit model: path length, Bloch angle and speed series plus
/// both bounds for theta_target.
inline ExperimentResult run_custom(const ExperimentConfig& c) {
    ExperimentResult out;
    out.table = ResultTable({{"t", ColumnType::real},
                             {"s", ColumnType::real},
                             {"theta", ColumnType::real},
                             {"v", ColumnType::real}});
    detail::add_provenance(out.table, c);
    const DynamicsModel m = detail::model(c);
    const std::size_t M = detail::steps(c, m);
    const DensityMatrix rho0 = detail::initial_state(c);
    const Trajectory traj = accumulate_path(propagate(m, rho0, c.T_max, M));
    std::vector<double> theta(traj.size());
    std::vector<double> v(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        theta[k] = bloch_angle(rho0, traj.states[k]);
        v[k] = velocity_general(m, traj.states[k], traj.times[k]);
        out.table.add_row({traj.times[k], traj.cumulative_path[k], theta[k], v[k]});
    }
    const QslReport q = qsl_from_trajectory(traj, c.theta_target);
    std::ostringstream report;
    report << "custom: target angle " << detail::fmt(c.theta_target) << ", T_max = " << c.T_max << ", M = " << M
           << "\n";
    report << "  tau_new   = " << detail::fmt(q.tau_new) << "\n";
    report << "  tau_tilde = " << detail::fmt(q.tau_existing) << "\n";
    report << "  T         = " << detail::fmt(q.actual_T) << "\n";
    report << "  geodesic defect s(T_max) - Theta(rho0, rho_T_max) = " << detail::fmt(geodesic_defect(traj), "%.3g")
           << "\n";
    if (const auto* h = std::get_if<ConstantHamiltonian>(&m); h && q.reachable) {
        const DensityMatrix target = evolve(m, rho0, *q.actual_T, std::max<std::size_t>(1, M));
        try {
            report << "  Bures bound to rho_T = " << detail::fmt(bures_qsl(*h, rho0, target)) << "\n";
        } catch (const Error& e) {
            report << "  Bures bound undefined: " << e.what() << "\n";
        }
    }
    svg::Chart chart{"Custom dynamics", "t", "value", {}, {}};
    chart.series.push_back({"s(t)", traj.times, traj.cumulative_path, {}, detail::palette(0), svg::Style::line});
    chart.series.push_back({"Theta(rho0, rho_t)", traj.times, theta, {}, detail::palette(1), svg::Style::line});
    chart.series.push_back({"v(t)", traj.times, v, {}, detail::palette(2), svg::Style::line});
    if (q.reachable) {
        chart.markers.push_back({"tau_tilde", *q.tau_existing, "#2ca02c"});
        chart.markers.push_back({"tau_new", *q.tau_new, "#d62728"});
        chart.markers.push_back({"T", *q.actual_T, "#000000"});
    }
    out.plots.push_back({"custom.svg", svg::render(chart)});
    out.report = report.str();
    return out;
}

inline ExperimentResult run_experiment(const ExperimentConfig& c, const RunOptions& opts = {}) {
    ExperimentResult r;
    switch (c.experiment) {
        case Experiment::fig4: r = run_fig4(c); break;
        case Experiment::fig5: r = run_fig5(c); break;
        case Experiment::appendix_c: r = run_appendix_c(c, opts); break;
        case Experiment::swapdemo: r = run_swapdemo(c); break;
        case Experiment::custom: r = run_custom(c); break;
    }
    if (!r.checks.empty()) r.report += detail::checks_block(r.checks);
    return r;
}

}  // namespace qsl::lab

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

// Plain-text experiment configuration.
//
//   # comment
//   key = value
//
// One assignment per line; blank lines and '#' comments are ignored. Real
// values accept a decimal number or a multiple of pi: `0.5`, `pi`, `-pi/2`,
// `2*pi/3`. Lists are comma-separated. Every key is documented in
// configs/README.md; unknown or repeated keys are errors.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qsl/core.hpp"

namespace qsl::lab {

enum class Experiment { fig4, fig5, appendix_c, swapdemo, custom };

/// Names as used on the command line.
inline const char* command_name(Experiment e) {
    switch (e) {
        case Experiment::fig4: return "fig4";
        case Experiment::fig5: return "fig5";
        case Experiment::appendix_c: return "appendix-c";
        case Experiment::swapdemo: return "swap-demo";
        case Experiment::custom: return "custom";
    }
    return "?";
}

/// Accepts both the command-line names and the config ids
/// (fig4 | fig5 | appendixC | swapdemo | custom).
inline std::optional<Experiment> parse_experiment(const std::string& s) {
    if (s == "fig4") return Experiment::fig4;
    if (s == "fig5") return Experiment::fig5;
    if (s == "appendix-c" || s == "appendixC") return Experiment::appendix_c;
    if (s == "swap-demo" || s == "swapdemo") return Experiment::swapdemo;
    if (s == "custom") return Experiment::custom;
    return std::nullopt;
}

enum class ModelKind { rotation, landau_zener };

struct ExperimentConfig {
    Experiment experiment = Experiment::custom;

    // H = V t sigma_z + Delta sigma_x, or H = A n.sigma / 2 + B I.
    ModelKind model = ModelKind::rotation;
    double V = 1.0;
    double Delta = 1.0;
    double A = 1.0;
    double nx = 0.0;
    double ny = 0.0;
    double nz = 1.0;
    double B = 0.0;
    // Lindblad rates for sigma_z dephasing (jump sqrt(g/2) sigma_z) and
    // amplitude damping (jump sqrt(g) |0><1|). custom only.
    double dephasing = 0.0;
    double decay = 0.0;

    // Initial state: Bloch polar and azimuthal angles and purity.
    double polar = 0.0;
    double azimuth = 0.0;
    double purity = 1.0;

    double T_max = 1.0;
    std::optional<std::size_t> steps;  // nullopt = automatic
    double theta_target = 0.0;
    std::optional<std::uint64_t> shots;  // nullopt = exact probabilities
    std::uint64_t seed = 12345;

    std::vector<double> angles;
    std::size_t samples = 2000;
    std::vector<double> purities;

    // key -> value text as given, for the metadata echo.
    std::map<std::string, std::string> given;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& source, int line, const std::string& message)
        : Error(ErrorCode::config, format(source, line, message)), line_(line) {}

    int line() const noexcept { return line_; }

private:
    static std::string format(const std::string& source, int line, const std::string& message) {
        std::ostringstream os;
        os << source;
        if (line > 0) os << ":" << line;
        os << ": " << message;
        return os.str();
    }
    int line_;
};

/// Experiment-specific defaults, before any file is applied.
inline ExperimentConfig default_config(Experiment e) {
    ExperimentConfig c;
    c.experiment = e;
    switch (e) {
        case Experiment::fig4:
        case Experiment::swapdemo:
            // H = -sigma_z / 2
            c.model = ModelKind::rotation;
            c.A = 1.0;
            c.nz = -1.0;
            c.T_max = 2.0;
            c.steps = e == Experiment::fig4 ? 2000 : 50;
            c.angles = {pi / 2.0, pi / 3.0, pi / 6.0};
            if (e == Experiment::swapdemo) c.shots = 100000;
            break;
        case Experiment::fig5:
            c.model = ModelKind::landau_zener;
            c.polar = pi / 2.0;
            c.theta_target = 1.4;
            c.T_max = 2.0;
            break;
        case Experiment::appendix_c:
            c.model = ModelKind::landau_zener;
            c.theta_target = pi / 2.0;
            c.T_max = 10.0;
            c.purities = {1.0, 0.9, 0.8, 0.7};
            break;
        case Experiment::custom:
            c.model = ModelKind::rotation;
            c.polar = pi / 2.0;
            c.theta_target = pi / 2.0;
            c.T_max = 4.0;
            break;
    }
    return c;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

inline std::optional<double> parse_plain_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    if (used != s.size()) return std::nullopt;
    return v;
}

/// x | pi | x*pi | pi/y | x*pi/y, optionally signed.
inline std::optional<double> parse_real(std::string s) {
    s = trim(s);
    if (auto plain = parse_plain_number(s)) return plain;
    double sign = 1.0;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
        if (s[0] == '-') sign = -1.0;
        s = s.substr(1);
    }
    const auto at = s.find("pi");
    if (at == std::string::npos) return std::nullopt;
    double factor = 1.0;
    if (at > 0) {
        std::string head = s.substr(0, at);
        if (head.back() != '*') return std::nullopt;
        head.pop_back();
        auto f = parse_plain_number(head);
        if (!f) return std::nullopt;
        factor = *f;
    }
    double divisor = 1.0;
    const std::string tail = s.substr(at + 2);
    if (!tail.empty()) {
        if (tail[0] != '/') return std::nullopt;
        auto d = parse_plain_number(tail.substr(1));
        if (!d || *d == 0.0) return std::nullopt;
        divisor = *d;
    }
    return sign * factor * pi / divisor;
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

inline std::optional<std::uint64_t> parse_count(const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace detail

/// Parses `text` on top of the defaults for `experiment`. `source` names the
/// input in error messages. Throws ConfigError for syntax errors, unknown or
/// repeated keys, malformed values and failed validation.
inline ExperimentConfig parse_config(const std::string& text, Experiment experiment,
                                     const std::string& source = "<config>") {
    ExperimentConfig c = default_config(experiment);
    std::map<std::string, int> line_of;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string body = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError(source, line, "expected key = value");
        const std::string key = detail::trim(body.substr(0, eq));
        const std::string value = detail::trim(body.substr(eq + 1));
        if (key.empty()) throw ConfigError(source, line, "missing key before '='");
        if (value.empty()) throw ConfigError(source, line, "missing value for '" + key + "'");
        if (line_of.count(key)) {
            std::ostringstream os;
            os << "key '" << key << "' already set on line " << line_of[key];
            throw ConfigError(source, line, os.str());
        }
        line_of[key] = line;

        auto real = [&]() {
            auto v = detail::parse_real(value);
            if (!v || !std::isfinite(*v)) throw ConfigError(source, line, "'" + key + "' needs a real number, got '" + value + "'");
            return *v;
        };
        auto count = [&]() {
            auto v = detail::parse_count(value);
            if (!v) throw ConfigError(source, line, "'" + key + "' needs a non-negative integer, got '" + value + "'");
            return *v;
        };
        auto reals = [&]() {
            std::vector<double> out;
            for (const std::string& item : detail::split_list(value)) {
                auto v = detail::parse_real(item);
                if (!v || !std::isfinite(*v))
                    throw ConfigError(source, line, "'" + key + "' needs a list of real numbers, got '" + item + "'");
                out.push_back(*v);
            }
            return out;
        };

        if (key == "experiment") {
            auto e = parse_experiment(value);
            if (!e) throw ConfigError(source, line, "unknown experiment '" + value + "'");
            if (*e != experiment)
                throw ConfigError(source, line,
                                  "config is for '" + value + "' but the command is '" + command_name(experiment) + "'");
        } else if (key == "model") {
            if (value == "rotation")
                c.model = ModelKind::rotation;
            else if (value == "landau_zener")
                c.model = ModelKind::landau_zener;
            else
                throw ConfigError(source, line, "model must be 'rotation' or 'landau_zener'");
        } else if (key == "V") {
            c.V = real();
        } else if (key == "Delta") {
            c.Delta = real();
        } else if (key == "A") {
            c.A = real();
        } else if (key == "nx") {
            c.nx = real();
        } else if (key == "ny") {
            c.ny = real();
        } else if (key == "nz") {
            c.nz = real();
        } else if (key == "B") {
            c.B = real();
        } else if (key == "dephasing") {
            c.dephasing = real();
        } else if (key == "decay") {
            c.decay = real();
        } else if (key == "polar") {
            c.polar = real();
        } else if (key == "azimuth") {
            c.azimuth = real();
        } else if (key == "purity") {
            c.purity = real();
        } else if (key == "T_max") {
            c.T_max = real();
        } else if (key == "steps") {
            if (value == "auto")
                c.steps.reset();
            else
                c.steps = count();
        } else if (key == "theta_target") {
            c.theta_target = real();
        } else if (key == "shots") {
            if (value == "exact")
                c.shots.reset();
            else
                c.shots = count();
        } else if (key == "seed") {
            c.seed = count();
        } else if (key == "angles") {
            c.angles = reals();
        } else if (key == "samples") {
            c.samples = count();
        } else if (key == "purities") {
            c.purities = reals();
        } else {
            throw ConfigError(source, line, "unknown key '" + key + "'");
        }
        c.given[key] = value;
    }

    // Validation; errors point at the line that set the offending key, or at
    // the file when the value is a default.
    auto fail = [&](const std::string& key, const std::string& message) {
        const auto it = line_of.find(key);
        throw ConfigError(source, it == line_of.end() ? 0 : it->second, message);
    };
    const double axis = std::sqrt(c.nx * c.nx + c.ny * c.ny + c.nz * c.nz);
    if (c.model == ModelKind::rotation && std::abs(axis - 1.0) > 1e-10) {
        std::ostringstream os;
        os << "rotation axis (nx, ny, nz) must have unit length, has " << axis;
        fail(line_of.count("nx") ? "nx" : line_of.count("ny") ? "ny" : "nz", os.str());
    }
    if (!(c.T_max > 0.0)) fail("T_max", "T_max must be > 0");
    if (c.steps && *c.steps < 1) fail("steps", "steps must be >= 1 or 'auto'");
    if (!(c.theta_target >= 0.0 && c.theta_target <= pi)) fail("theta_target", "theta_target must lie in [0, pi]");
    if (c.shots && *c.shots < 1) fail("shots", "shots must be >= 1 or 'exact'");
    if (!(c.purity > 0.5 && c.purity <= 1.0)) fail("purity", "purity must lie in (1/2, 1]");
    for (double p : c.purities)
        if (!(p > 0.5 && p <= 1.0)) fail("purities", "every purity must lie in (1/2, 1]");
    if (c.dephasing < 0.0) fail("dephasing", "dephasing rate must be >= 0");
    if (c.decay < 0.0) fail("decay", "decay rate must be >= 0");
    if ((c.dephasing > 0.0 || c.decay > 0.0) && experiment != Experiment::custom)
        fail(c.dephasing > 0.0 ? "dephasing" : "decay", "dissipation is only supported by the custom experiment");
    if ((experiment == Experiment::fig4 || experiment == Experiment::swapdemo) && c.angles.empty())
        fail("angles", "angles must list at least one initial angle");
    if (experiment == Experiment::appendix_c) {
        if (c.samples < 1) fail("samples", "samples must be >= 1");
        if (c.purities.empty()) fail("purities", "purities must list at least one value");
    }
    return c;
}

inline ExperimentConfig load_config(const std::string& path, Experiment experiment) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "cannot open config file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), experiment, path);
}

/// Canonical key = value listing of the effective configuration, one key per
/// line in a fixed order, for provenance headers.
inline std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& c) {
    auto num = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    auto list = [&](const std::vector<double>& xs) {
        std::string out;
        for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + num(xs[i]);
        return out;
    };
    std::vector<std::pair<std::string, std::string>> out;
    out.emplace_back("experiment", command_name(c.experiment));
    out.emplace_back("model", c.model == ModelKind::rotation ? "rotation" : "landau_zener");
    if (c.model == ModelKind::landau_zener) {
        out.emplace_back("V", num(c.V));
        out.emplace_back("Delta", num(c.Delta));
    } else {
        out.emplace_back("A", num(c.A));
        out.emplace_back("nx", num(c.nx));
        out.emplace_back("ny", num(c.ny));
        out.emplace_back("nz", num(c.nz));
        out.emplace_back("B", num(c.B));
    }
    if (c.experiment == Experiment::custom) {
        out.emplace_back("dephasing", num(c.dephasing));
        out.emplace_back("decay", num(c.decay));
    }
    if (c.experiment == Experiment::fig4 || c.experiment == Experiment::swapdemo) {
        out.emplace_back("angles", list(c.angles));
    } else if (c.experiment == Experiment::appendix_c) {
        out.emplace_back("samples", std::to_string(c.samples));
        out.emplace_back("purities", list(c.purities));
    } else {
        out.emplace_back("polar", num(c.polar));
        out.emplace_back("azimuth", num(c.azimuth));
        out.emplace_back("purity", num(c.purity));
    }
    out.emplace_back("T_max", num(c.T_max));
    out.emplace_back("steps", c.steps ? std::to_string(*c.steps) : "auto");
    if (c.experiment != Experiment::fig4 && c.experiment != Experiment::swapdemo)
        out.emplace_back("theta_target", num(c.theta_target));
    if (c.experiment == Experiment::swapdemo) out.emplace_back("shots", c.shots ? std::to_string(*c.shots) : "exact");
    out.emplace_back("seed", std::to_string(c.seed));
    return out;
}

}  // namespace qsl::lab

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

// qsl-lab <fig4|fig5|appendix-c|swap-demo|custom> --config <path> --out <dir>
//         [--seed N] [--threads N]
//
// Exit status: 0 on success, 1 if an embedded check failed, 2 for usage or
// configuration errors, 3 for runtime errors.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "qsl/lab/experiments.hpp"

namespace {

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << contents;
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bloch-angle quantum speed limit experiments"};
    std::string experiment_name;
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    app.add_option("experiment", experiment_name, "fig4 | fig5 | appendix-c | swap-demo | custom")
        ->required()
        ->check(CLI::IsMember({"fig4", "fig5", "appendix-c", "swap-demo", "custom"}));
    app.add_option("--config", config_path, "key = value configuration file (defaults apply when omitted)");
    app.add_option("--out", out_dir, "output directory")->required();
    app.add_option("--seed", seed, "overrides the config seed");
    app.add_option("--threads", threads, "worker threads for appendix-c")->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const qsl::lab::Experiment experiment = *qsl::lab::parse_experiment(experiment_name);
    qsl::lab::ExperimentConfig config;
    try {
        config = config_path.empty() ? qsl::lab::parse_config("", experiment, "<defaults>")
                                     : qsl::lab::load_config(config_path, experiment);
    } catch (const qsl::Error& e) {
        std::cerr << "qsl-lab: " << e.what() << "\n";
        return 2;
    }
    if (seed) config.seed = *seed;

    try {
        const auto start = std::chrono::steady_clock::now();
        const std::string started = utc_now();
        const qsl::lab::ExperimentResult result = qsl::lab::run_experiment(config, {threads});
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        const std::filesystem::path dir(out_dir);
        std::filesystem::create_directories(dir);
        write_file(dir / (experiment_name + ".csv"), result.table.to_csv());
        for (const auto& plot : result.plots) write_file(dir / plot.name, plot.contents);

        std::string report = std::string(qsl::lab::toolkit_version) + "\n";
        report += "started " + started + ", wall-clock " + qsl::lab::detail::fmt(seconds, "%.3f") + " s, threads " +
                  std::to_string(threads) + "\n";
        report += result.report;
        write_file(dir / "report.txt", report);
        std::cout << result.report;
        if (!result.passed()) {
            std::cerr << "qsl-lab: embedded check failed\n";
            return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "qsl-lab: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

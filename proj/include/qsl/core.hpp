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

// Shared aliases, error type and warning hook used by every qsl header.

#pragma once

#include <complex>
#include <functional>
#include <iostream>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

namespace qsl {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Matrix2 = Eigen::Matrix2cd;
using Vec3 = Eigen::Vector3d;

inline constexpr double pi = std::numbers::pi;
inline constexpr Complex I_unit{0.0, 1.0};

enum class ErrorCode {
    invalid_dimension,
    dimension_mismatch,
    invalid_state,
    maximally_mixed,
    non_hermitian,
    non_unitary,
    invalid_argument,
    invalid_probability,
    step_size_too_large,
    undefined_bound,
    config,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_dimension: return "invalid-dimension";
        case ErrorCode::dimension_mismatch: return "dimension-mismatch";
        case ErrorCode::invalid_state: return "invalid-state";
        case ErrorCode::maximally_mixed: return "maximally-mixed";
        case ErrorCode::non_hermitian: return "non-hermitian";
        case ErrorCode::non_unitary: return "non-unitary";
        case ErrorCode::invalid_argument: return "invalid-argument";
        case ErrorCode::invalid_probability: return "invalid-probability";
        case ErrorCode::step_size_too_large: return "step-size-too-large";
        case ErrorCode::undefined_bound: return "undefined-bound";
        case ErrorCode::config: return "config";
    }
    return "unknown";
}

/// The single exception type thrown by the library. `code()` identifies the
/// failed precondition; `what()` carries the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

namespace detail {

struct WarningSink {
    std::mutex mutex;
    std::function<void(std::string_view)> handler = [](std::string_view msg) {
        std::cerr << "qsl warning: " << msg << '\n';
    };
};

inline WarningSink& warning_sink() {
    static WarningSink sink;
    return sink;
}

}  // namespace detail

/// Replace the process-wide warning handler. Returns the previous handler.
inline std::function<void(std::string_view)> set_warning_handler(std::function<void(std::string_view)> handler) {
    auto& sink = detail::warning_sink();
    std::lock_guard lock(sink.mutex);
    return std::exchange(sink.handler, std::move(handler));
}

inline void warn(std::string_view message) {
    auto& sink = detail::warning_sink();
    std::lock_guard lock(sink.mutex);
    if (sink.handler) sink.handler(message);
}

}  // namespace qsl

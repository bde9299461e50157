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

// Bloch-angle velocity, path length, the two Bloch-angle speed limits, the
// Bures-angle baseline and geodesic diagnostics.
//
// Two bounds are computed for a target angle Theta:
//   tau        the first time the path length s(t) = int_0^t v reaches Theta;
//   tau_tilde  Theta * T / s(T), with T the first time Theta(rho_0, rho_T) = Theta.
// Both are located on the propagation grid and refined inside the bracketing
// step by linear interpolation, which matches the O(dt^2) integrators.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "qsl/core.hpp"
#include "qsl/dynamics.hpp"
#include "qsl/linalg.hpp"
#include "qsl/states.hpp"

namespace qsl {

namespace detail {

/// N * ||rho - I/N||_F^2, which equals N Tr(rho^2) - 1 for unit trace.
template <class Derived>
double bloch_weight(const Eigen::MatrixBase<Derived>& rho) {
    const Eigen::Index n = rho.rows();
    Matrix x = rho;
    x.diagonal().array() -= 1.0 / static_cast<double>(n);
    return static_cast<double>(n) * x.squaredNorm();
}

/// Re Tr(A^dag B) for matrices viewed as vectors.
inline double frobenius_dot(const Matrix& a, const Matrix& b) {
    return (a.array().conjugate() * b.array()).sum().real();
}

}  // namespace detail

/// Instantaneous Bloch-angle speed under H:
/// v = sqrt(2N Tr[H^2 rho^2 - (H rho)^2] / (N Tr rho^2 - 1)).
///
/// The numerator equals N ||[H, rho]||_F^2 for Hermitian H and rho, which is
/// how it is evaluated; this keeps the radicand nonnegative by construction.
inline double velocity_unitary(const Matrix& h, const DensityMatrix& rho) {
    if (h.rows() != rho.dim()) throw Error(ErrorCode::dimension_mismatch, "Hamiltonian and state differ in size");
    require_hermitian(h, "Hamiltonian");
    const double n = static_cast<double>(rho.dim());
    const double f = detail::bloch_weight(rho.matrix());
    detail::require_not_maximally_mixed(f);
    const Matrix comm = h * rho.matrix() - rho.matrix() * h;
    double radicand = n * comm.squaredNorm() / f;
    if (radicand < 0.0 && radicand >= -1e-12) radicand = 0.0;
    return std::sqrt(radicand);
}

/// f = N Tr(rho^2) - 1, g = N Tr(rho L(rho)), h = N Tr(L(rho)^2).
struct VelocityDecomposition {
    double f = 0.0;
    double g = 0.0;
    double h = 0.0;
};

inline VelocityDecomposition velocity_decomposition(const DynamicsModel& model, const DensityMatrix& rho,
                                                    double t = 0.0) {
    if (model_dim(model) != rho.dim()) throw Error(ErrorCode::dimension_mismatch, "model and state differ in size");
    const double n = static_cast<double>(rho.dim());
    const Matrix l = generator(model, rho.matrix(), t);
    return VelocityDecomposition{n * trace_product(rho.matrix(), rho.matrix()).real() - 1.0,
                                 n * trace_product(rho.matrix(), l).real(), n * trace_product(l, l).real()};
}

/// Bloch-angle speed for general (Lindblad) dynamics at time t.
///
/// Expanding the Bloch angle between rho and rho + L(rho) dt to second order
/// gives 1 - cos = (h/f - (g/f)^2) dt^2 / 2, so v = sqrt(h/f - (g/f)^2).
/// The g term removes the purely radial part of the motion (a Bloch vector
/// shrinking along its own direction does not change its angle). It is
/// evaluated as ||L_perp||_F / ||rho - I/N||_F, the component of L(rho)
/// orthogonal to the traceless part of rho, which is the same quantity
/// without the cancellation. Under unitary dynamics g = 0 and this reduces
/// to velocity_unitary().
inline double velocity_general(const DynamicsModel& model, const DensityMatrix& rho, double t = 0.0) {
    if (model_dim(model) != rho.dim()) throw Error(ErrorCode::dimension_mismatch, "model and state differ in size");
    const Eigen::Index n = rho.dim();
    Matrix x = rho.matrix();
    x.diagonal().array() -= 1.0 / static_cast<double>(n);
    const double f = static_cast<double>(n) * x.squaredNorm();
    detail::require_not_maximally_mixed(f);
    const Matrix l = generator(model, rho.matrix(), t);
    const Matrix perp = l - (detail::frobenius_dot(x, l) / x.squaredNorm()) * x;
    return perp.norm() / x.norm();
}

/// Fills cumulative_path with s(t_k) = sum_{j<k} Theta(rho_j, rho_{j+1}).
inline Trajectory accumulate_path(Trajectory traj) {
    if (traj.states.size() < 2) throw Error(ErrorCode::invalid_argument, "path length needs at least 2 samples");
    traj.cumulative_path.assign(traj.states.size(), 0.0);
    for (std::size_t k = 1; k < traj.states.size(); ++k)
        traj.cumulative_path[k] =
            traj.cumulative_path[k - 1] + bloch_angle_kernel(traj.states[k - 1].matrix(), traj.states[k].matrix());
    return traj;
}

struct QslReport {
    double theta_target = 0.0;
    /// First time s(t) = theta_target.
    std::optional<double> tau_new;
    /// theta_target * T / s(T); present iff reachable.
    std::optional<double> tau_existing;
    /// First time Theta(rho_0, rho_T) = theta_target.
    std::optional<double> actual_T;
    bool reachable = false;
    std::optional<double> path_at_T;
    /// s at the last scanned grid time.
    double path_scanned = 0.0;
    double time_scanned = 0.0;

    /// Average speed over [0, T] and over [0, tau].
    std::optional<double> mean_velocity() const {
        if (!actual_T || !path_at_T || *actual_T <= 0.0) return std::nullopt;
        return *path_at_T / *actual_T;
    }
    std::optional<double> mean_velocity_to_tau() const {
        if (!tau_new || *tau_new <= 0.0) return std::nullopt;
        return theta_target / *tau_new;
    }
};

namespace detail {

inline constexpr double tangential_window = 1e-9;

/// Consumes the states of a trajectory in order and locates tau and T.
template <class Mat>
class QslScanner {
public:
    QslScanner(double theta, bool stop_after_tau) : theta_(theta), stop_after_tau_(stop_after_tau) {
        report_.theta_target = theta;
    }

    /// Returns false once nothing more needs scanning.
    bool push(double t, const Mat& rho) {
        if (!started_) {
            started_ = true;
            initial_ = rho;
            prev_ = rho;
            prev_t_ = t;
            // Validates that rho_0 has a nonzero Bloch vector.
            bloch_angle_kernel(initial_, initial_);
            if (theta_ == 0.0) {
                report_.tau_new = 0.0;
                report_.actual_T = 0.0;
                report_.tau_existing = 0.0;
                report_.path_at_T = 0.0;
                report_.reachable = true;
                return false;
            }
            return true;
        }
        const double dt = t - prev_t_;
        const double step = bloch_angle_kernel(prev_, rho);
        const double path_next = path_ + step;
        if (!report_.tau_new && path_next >= theta_) {
            const double frac = step > 0.0 ? (theta_ - path_) / step : 1.0;
            report_.tau_new = prev_t_ + frac * dt;
            if (stop_after_tau_) {
                finish(t, path_next);
                return false;
            }
        }
        const double angle = bloch_angle_kernel(initial_, rho);
        max_angle_ = std::max(max_angle_, angle);
        if (angle >= theta_ && prev_angle_ < theta_) {
            const double w = refine_crossing(rho);
            report_.actual_T = prev_t_ + w * dt;
            report_.path_at_T = path_ + w * step;
            report_.tau_existing = theta_ * *report_.actual_T / *report_.path_at_T;
            report_.reachable = true;
            // s >= Theta by the triangle inequality; on a geodesic the chord
            // sum can trail the angle by rounding, so tau lands on T.
            if (!report_.tau_new) report_.tau_new = report_.actual_T;
            finish(t, path_next);
            return false;
        }
        prev_angle_ = angle;
        prev_ = rho;
        prev_t_ = t;
        path_ = path_next;
        report_.path_scanned = path_;
        report_.time_scanned = t;
        return true;
    }

    QslReport result() const {
        if (!report_.reachable && !stop_after_tau_ && max_angle_ > theta_ - tangential_window) {
            std::ostringstream os;
            os << "Bloch angle approaches the target " << theta_ << " within " << theta_ - max_angle_
               << " without crossing; reported unreachable";
            warn(os.str());
        }
        return report_;
    }

private:
    void finish(double t, double path) {
        report_.path_scanned = path;
        report_.time_scanned = t;
    }

    // Bisection on the linear interpolation (1 - w) rho_k + w rho_{k+1}.
    double refine_crossing(const Mat& next) const {
        double lo = 0.0;
        double hi = 1.0;
        for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
            const double mid = 0.5 * (lo + hi);
            const Mat interp = (1.0 - mid) * prev_ + mid * next;
            if (bloch_angle_kernel(initial_, interp) >= theta_)
                hi = mid;
            else
                lo = mid;
        }
        return 0.5 * (lo + hi);
    }

    double theta_;
    bool stop_after_tau_;
    bool started_ = false;
    Mat initial_;
    Mat prev_;
    double prev_t_ = 0.0;
    double path_ = 0.0;
    double prev_angle_ = 0.0;
    double max_angle_ = 0.0;
    QslReport report_;
};

inline void require_target(double theta) {
    if (!(theta >= 0.0) || !std::isfinite(theta)) {
        std::ostringstream os;
        os << "target angle " << theta << " must be finite and >= 0";
        throw Error(ErrorCode::invalid_argument, os.str());
    }
}

inline QslReport scan_model(const DynamicsModel& model, const DensityMatrix& rho0, double theta, double t_max,
                            std::size_t steps, bool stop_after_tau) {
    require_target(theta);
    std::optional<QslScanner<Matrix2>> qubit;
    std::optional<QslScanner<Matrix>> general;
    for_each_state(model, rho0, TimeGrid{t_max, steps}, [&](std::size_t, double t, const auto& rho) {
        using M = std::decay_t<decltype(rho)>;
        if constexpr (std::is_same_v<M, Matrix2>) {
            if (!qubit) qubit.emplace(theta, stop_after_tau);
            return qubit->push(t, rho);
        } else {
            if (!general) general.emplace(theta, stop_after_tau);
            return general->push(t, rho);
        }
    });
    return qubit ? qubit->result() : general->result();
}

}  // namespace detail

/// Both bounds from a stored trajectory.
inline QslReport qsl_from_trajectory(const Trajectory& traj, double theta_target) {
    detail::require_target(theta_target);
    if (traj.states.empty()) throw Error(ErrorCode::invalid_argument, "empty trajectory");
    detail::QslScanner<Matrix> scanner(theta_target, false);
    for (std::size_t k = 0; k < traj.states.size(); ++k)
        if (!scanner.push(traj.times[k], traj.states[k].matrix())) break;
    return scanner.result();
}

/// Propagates on [0, t_max] with `steps` steps, stopping as soon as the target
/// angle is reached, and reports both bounds.
inline QslReport evaluate_qsl(const DynamicsModel& model, const DensityMatrix& rho0, double theta_target,
                              double t_max, std::size_t steps) {
    return detail::scan_model(model, rho0, theta_target, t_max, steps, false);
}

/// Smallest tau with int_0^tau v dt = theta_target; nullopt if s(t_max) falls
/// short. Only propagates up to tau.
inline std::optional<double> qsl_new(const DynamicsModel& model, const DensityMatrix& rho0, double theta_target,
                                     double t_max, std::size_t steps) {
    if (!(theta_target > 0.0)) {
        detail::require_target(theta_target);
        return 0.0;
    }
    return detail::scan_model(model, rho0, theta_target, t_max, steps, true).tau_new;
}

struct ExistingBound {
    double tau = 0.0;
    double actual_time = 0.0;
};

/// (Theta T / s(T), T) with T the first crossing of the target angle; nullopt
/// if the angle never reaches it before t_max.
inline std::optional<ExistingBound> qsl_existing(const DynamicsModel& model, const DensityMatrix& rho0,
                                                 double theta_target, double t_max, std::size_t steps) {
    if (theta_target > pi) throw Error(ErrorCode::invalid_argument, "target Bloch angle exceeds pi");
    const QslReport report = evaluate_qsl(model, rho0, theta_target, t_max, steps);
    if (!report.reachable) return std::nullopt;
    return ExistingBound{*report.tau_existing, *report.actual_T};
}

/// max{L / dH, 2 L^2 / (pi <H>)} with L the Bures angle between rho0 and the
/// target and moments taken in rho0. <H> is measured from the ground-state
/// energy (H -> H - E_min I). A branch with a vanishing denominator is 0 when
/// L = 0 and +inf otherwise.
inline double bures_qsl(const ConstantHamiltonian& h, const DensityMatrix& rho0, const DensityMatrix& target) {
    require_same_dim(rho0, target);
    if (h.dim() != rho0.dim()) throw Error(ErrorCode::dimension_mismatch, "Hamiltonian and state differ in size");
    const Matrix& hm = h.matrix();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hm, Eigen::EigenvaluesOnly);
    const double ground = solver.eigenvalues()(0);
    const double mean = trace_product(rho0.matrix(), hm).real();
    const double second = trace_product(rho0.matrix(), Matrix(hm * hm)).real();
    const double spread = std::sqrt(std::max(0.0, second - mean * mean));
    const double shifted_mean = std::max(0.0, mean - ground);
    constexpr double zero = 1e-12;
    if (spread <= zero && shifted_mean <= zero)
        throw Error(ErrorCode::undefined_bound, "energy spread and mean energy both vanish");
    const double angle = bures_angle(rho0, target);
    auto branch = [angle](double numer, double denom) {
        if (numer == 0.0) return 0.0;
        return denom <= zero ? std::numeric_limits<double>::infinity() : numer / denom;
    };
    return std::max(branch(angle, spread), branch(2.0 * angle * angle, pi * shifted_mean));
}

/// s(T) - Theta(rho_0, rho_T) >= 0, zero exactly on geodesics.
inline double geodesic_defect(const Trajectory& traj) {
    if (traj.states.size() < 2) return 0.0;
    const Trajectory filled = traj.cumulative_path.size() == traj.states.size() ? traj : accumulate_path(traj);
    const double raw = filled.cumulative_path.back() - bloch_angle(filled.states.front(), filled.states.back());
    if (raw < -1e-8) {
        std::ostringstream os;
        os << "negative geodesic defect " << raw;
        warn(os.str());
    }
    return std::max(0.0, raw);
}

/// max_k ||r''_k + alpha^2 r_k|| / ||r_k|| for a qubit trajectory, with r'' from
/// central differences and alpha = mean_k ||r'_k|| / ||r_k|| (the Bloch speed).
/// Zero for great-circle motion at constant speed.
inline double geodesic_ode_residual(const Trajectory& traj) {
    if (traj.states.size() < 3) throw Error(ErrorCode::invalid_argument, "geodesic residual needs >= 3 samples");
    if (traj.states.front().dim() != 2) throw Error(ErrorCode::invalid_dimension, "geodesic residual is qubit-only");
    const double dt = traj.dt();
    std::vector<Vec3> r;
    r.reserve(traj.states.size());
    for (const auto& s : traj.states) {
        r.push_back(qubit_bloch(s));
        detail::require_not_maximally_mixed(r.back().squaredNorm());
    }
    double alpha = 0.0;
    for (std::size_t k = 1; k + 1 < r.size(); ++k) alpha += ((r[k + 1] - r[k - 1]) / (2.0 * dt)).norm() / r[k].norm();
    alpha /= static_cast<double>(r.size() - 2);
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < r.size(); ++k) {
        const Vec3 acc = (r[k + 1] - 2.0 * r[k] + r[k - 1]) / (dt * dt);
        worst = std::max(worst, (acc + alpha * alpha * r[k]).norm() / r[k].norm());
    }
    return worst;
}

}  // namespace qsl

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

// Propagators on a uniform time grid: exact exponentials for constant
// Hamiltonians, midpoint exponentials for driven Hamiltonians, and classical
// RK4 for the Lindblad master equation.
//
// Every propagator is built on for_each_state(), which streams the states of
// the grid to a visitor and lets it stop early. Qubit problems run on fixed
// 2x2 matrices so long sweeps do not allocate per step.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <type_traits>
#include <variant>
#include <vector>

#include "qsl/core.hpp"
#include "qsl/linalg.hpp"
#include "qsl/states.hpp"

namespace qsl {

/// Time-independent Hermitian Hamiltonian (hbar = 1).
class ConstantHamiltonian {
public:
    explicit ConstantHamiltonian(Matrix h) : h_(std::move(h)) { require_hermitian(h_, "Hamiltonian"); }

    const Matrix& matrix() const { return h_; }
    Eigen::Index dim() const { return h_.rows(); }

private:
    Matrix h_;
};

/// t -> H(t). Hermiticity is checked at every time the propagators evaluate.
struct DrivenHamiltonian {
    Eigen::Index dim = 2;
    std::function<Matrix(double)> at;
};

using HamiltonianSpec = std::variant<ConstantHamiltonian, DrivenHamiltonian>;

/// H plus jump operators L_a; an empty jump list is plain unitary dynamics.
struct LindbladModel {
    HamiltonianSpec hamiltonian;
    std::vector<Matrix> jumps;
};

using DynamicsModel = std::variant<ConstantHamiltonian, DrivenHamiltonian, LindbladModel>;

inline DynamicsModel to_model(const HamiltonianSpec& hs) {
    return std::visit([](const auto& h) -> DynamicsModel { return h; }, hs);
}

namespace detail {

inline Eigen::Index hamiltonian_dim(const HamiltonianSpec& hs) {
    if (const auto* c = std::get_if<ConstantHamiltonian>(&hs)) return c->dim();
    return std::get<DrivenHamiltonian>(hs).dim;
}

inline Matrix evaluate_driven(const DrivenHamiltonian& h, double t) {
    Matrix m = h.at(t);
    if (m.rows() != h.dim || m.cols() != h.dim)
        throw Error(ErrorCode::dimension_mismatch, "driven Hamiltonian returned a matrix of the wrong size");
    const double scale = std::max(1.0, max_abs_entry(m));
    if (hermitian_defect(m) > 1e-12 * scale) {
        std::ostringstream what;
        what << "H(t = " << t << ")";
        require_hermitian(m, what.str());
    }
    return m;
}

}  // namespace detail

inline Matrix hamiltonian_at(const HamiltonianSpec& hs, double t) {
    if (const auto* c = std::get_if<ConstantHamiltonian>(&hs)) return c->matrix();
    return detail::evaluate_driven(std::get<DrivenHamiltonian>(hs), t);
}

inline Eigen::Index model_dim(const DynamicsModel& model) {
    if (const auto* c = std::get_if<ConstantHamiltonian>(&model)) return c->dim();
    if (const auto* d = std::get_if<DrivenHamiltonian>(&model)) return d->dim;
    return detail::hamiltonian_dim(std::get<LindbladModel>(model).hamiltonian);
}

inline bool is_unitary_model(const DynamicsModel& model) {
    if (const auto* l = std::get_if<LindbladModel>(&model)) return l->jumps.empty();
    return true;
}

/// H = V t sigma_z + Delta sigma_x. V = 0 degenerates to a constant Hamiltonian.
inline HamiltonianSpec landau_zener(double sweep_rate, double gap) {
    if (sweep_rate == 0.0) return ConstantHamiltonian(Matrix(gap * pauli::x()));
    return DrivenHamiltonian{2, [sweep_rate, gap](double t) -> Matrix {
                                 return sweep_rate * t * pauli::z() + gap * pauli::x();
                             }};
}

/// Rotation rate A(t) = 2 sqrt((V t)^2 + Delta^2) of the Landau-Zener Bloch vector.
inline double landau_zener_angular_speed(double sweep_rate, double gap, double t) {
    return 2.0 * std::hypot(sweep_rate * t, gap);
}

/// H = A n.sigma / 2 + B I, rotating Bloch vectors about n at angular speed A.
inline ConstantHamiltonian qubit_hamiltonian(double rate, const Vec3& axis, double offset) {
    if (std::abs(axis.norm() - 1.0) > 1e-10) {
        std::ostringstream os;
        os << "rotation axis must be a unit vector (|n| = " << axis.norm() << ")";
        throw Error(ErrorCode::invalid_argument, os.str());
    }
    return ConstantHamiltonian(Matrix(0.5 * rate * pauli::dot(axis) + offset * Matrix2::Identity()));
}

/// Uniform grid t_k = T k / M, k = 0..M.
struct TimeGrid {
    double horizon = 1.0;
    std::size_t steps = 1;

    double dt() const { return horizon / static_cast<double>(steps); }
    double time(std::size_t k) const {
        return k == steps ? horizon : horizon * static_cast<double>(k) / static_cast<double>(steps);
    }
};

inline void require_valid_grid(const TimeGrid& grid) {
    if (grid.steps < 1) throw Error(ErrorCode::invalid_argument, "time grid needs M >= 1 steps");
    if (!(grid.horizon > 0.0) || !std::isfinite(grid.horizon))
        throw Error(ErrorCode::invalid_argument, "time grid needs a finite horizon T > 0");
}

/// Sampled states on a uniform grid. cumulative_path is empty until
/// accumulate_path() fills it.
struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    std::vector<double> cumulative_path;

    std::size_t size() const { return states.size(); }
    double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

/// The Lindblad generator
/// L(rho) = -i[H, rho] + sum_a (L_a rho L_a^dag - {L_a^dag L_a, rho}/2).
inline Matrix lindbladian(const Matrix& h, const std::vector<Matrix>& jumps, const Matrix& rho) {
    Matrix out = -I_unit * (h * rho - rho * h);
    for (const Matrix& l : jumps) {
        const Matrix ldl = l.adjoint() * l;
        out += l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl);
    }
    return out;
}

inline Matrix lindbladian(const LindbladModel& model, const Matrix& rho, double t = 0.0) {
    return lindbladian(hamiltonian_at(model.hamiltonian, t), model.jumps, rho);
}

/// The model's generator applied to rho at time t.
inline Matrix generator(const DynamicsModel& model, const Matrix& rho, double t = 0.0) {
    if (const auto* l = std::get_if<LindbladModel>(&model)) return lindbladian(*l, rho, t);
    const Matrix h = std::holds_alternative<ConstantHamiltonian>(model)
                         ? std::get<ConstantHamiltonian>(model).matrix()
                         : detail::evaluate_driven(std::get<DrivenHamiltonian>(model), t);
    return -I_unit * (h * rho - rho * h);
}

inline constexpr double default_step_rate_product = 1e-3;
/// Largest dt * (bound on the Lindbladian norm) accepted by the RK4 integrator.
inline constexpr double rk4_stability_limit = 2.0;
inline constexpr double trace_drift_warning = 1e-9;
inline constexpr double trace_drift_error = 1e-6;

namespace detail {

inline double traceless_frobenius(const Matrix& h) {
    Matrix t = h;
    t.diagonal().array() -= h.trace() / static_cast<double>(h.rows());
    return t.norm();
}

inline double dissipation_rate(const std::vector<Matrix>& jumps) {
    double rate = 0.0;
    for (const Matrix& l : jumps) rate += spectral_norm(l) * spectral_norm(l);
    return rate;
}

inline double max_hamiltonian_rate(const HamiltonianSpec& hs, double horizon) {
    if (const auto* c = std::get_if<ConstantHamiltonian>(&hs)) return traceless_spectral_norm(c->matrix());
    const auto& driven = std::get<DrivenHamiltonian>(hs);
    constexpr int samples = 256;
    double rate = 0.0;
    for (int i = 0; i <= samples; ++i) {
        const double t = horizon * static_cast<double>(i) / samples;
        rate = std::max(rate, traceless_spectral_norm(evaluate_driven(driven, t)));
    }
    return rate;
}

}  // namespace detail

/// Smallest M with dt * max_t ||H(t)|| <= 1e-3 on [0, T], where ||H|| is the
/// spectral norm of the traceless part (plus sum ||L_a||^2 for Lindblad
/// models). Driven Hamiltonians are sampled at 257 points.
inline std::size_t default_steps(const DynamicsModel& model, double horizon) {
    double rate = 0.0;
    if (const auto* c = std::get_if<ConstantHamiltonian>(&model)) rate = traceless_spectral_norm(c->matrix());
    if (const auto* d = std::get_if<DrivenHamiltonian>(&model)) rate = detail::max_hamiltonian_rate(*d, horizon);
    if (const auto* l = std::get_if<LindbladModel>(&model))
        rate = detail::max_hamiltonian_rate(l->hamiltonian, horizon) + detail::dissipation_rate(l->jumps);
    const double m = std::ceil(horizon * rate / default_step_rate_product);
    return static_cast<std::size_t>(std::max(1.0, m));
}

namespace detail {

inline void require_state_dim(const DynamicsModel& model, const DensityMatrix& rho0) {
    if (model_dim(model) != rho0.dim())
        throw Error(ErrorCode::dimension_mismatch, "initial state and Hamiltonian have different dimensions");
}

template <class Visitor, class Mat>
bool visit_state(Visitor& visit, std::size_t k, double t, const Mat& rho) {
    if constexpr (std::is_same_v<std::invoke_result_t<Visitor&, std::size_t, double, const Mat&>, void>) {
        visit(k, t, rho);
        return true;
    } else {
        return static_cast<bool>(visit(k, t, rho));
    }
}

template <class Visitor>
void stream_constant(const ConstantHamiltonian& h, const DensityMatrix& rho0, const TimeGrid& grid, Visitor& visit) {
    if (h.dim() == 2) {
        const Matrix2 hq = h.matrix();
        const Matrix2 r0 = rho0.matrix();
        for (std::size_t k = 0; k <= grid.steps; ++k) {
            const double t = grid.time(k);
            const Matrix2 u = expm_qubit(hq, t);
            const Matrix2 rho = u * r0 * u.adjoint();
            if (!visit_state(visit, k, t, rho)) return;
        }
        return;
    }
    const HermitianExponential expo(h.matrix());
    for (std::size_t k = 0; k <= grid.steps; ++k) {
        const double t = grid.time(k);
        const Matrix u = expo.at(t);
        const Matrix rho = u * rho0.matrix() * u.adjoint();
        if (!visit_state(visit, k, t, rho)) return;
    }
}

template <class Visitor>
void stream_driven(const DrivenHamiltonian& h, const DensityMatrix& rho0, const TimeGrid& grid, Visitor& visit) {
    const double dt = grid.dt();
    if (h.dim == 2) {
        Matrix2 rho = rho0.matrix();
        if (!visit_state(visit, 0, 0.0, rho)) return;
        for (std::size_t k = 0; k < grid.steps; ++k) {
            const double mid = grid.time(k) + 0.5 * dt;
            const Matrix2 u = expm_qubit(Matrix2(evaluate_driven(h, mid)), dt);
            rho = (u * rho * u.adjoint()).eval();
            if (!visit_state(visit, k + 1, grid.time(k + 1), rho)) return;
        }
        return;
    }
    Matrix rho = rho0.matrix();
    if (!visit_state(visit, 0, 0.0, rho)) return;
    for (std::size_t k = 0; k < grid.steps; ++k) {
        const double mid = grid.time(k) + 0.5 * dt;
        const Matrix u = expm_hermitian(evaluate_driven(h, mid), dt);
        rho = (u * rho * u.adjoint()).eval();
        if (!visit_state(visit, k + 1, grid.time(k + 1), rho)) return;
    }
}

inline void require_rk4_step(const Matrix& h, const std::vector<Matrix>& jumps, double dt, double t) {
    double bound = 2.0 * traceless_frobenius(h);
    for (const Matrix& l : jumps) bound += 2.0 * l.squaredNorm();
    if (dt * bound > rk4_stability_limit) {
        std::ostringstream os;
        os << "RK4 step dt = " << dt << " too large at t = " << t << " (dt * ||L|| bound = " << dt * bound
           << " > " << rk4_stability_limit << ")";
        throw Error(ErrorCode::step_size_too_large, os.str());
    }
}

template <class Visitor>
void stream_lindblad(const LindbladModel& model, const DensityMatrix& rho0, const TimeGrid& grid, Visitor& visit) {
    const Eigen::Index n = rho0.dim();
    for (const Matrix& l : model.jumps)
        if (l.rows() != n || l.cols() != n)
            throw Error(ErrorCode::dimension_mismatch, "jump operator dimension differs from the state");
    const double dt = grid.dt();
    const bool constant = std::holds_alternative<ConstantHamiltonian>(model.hamiltonian);
    const Matrix h_const = constant ? std::get<ConstantHamiltonian>(model.hamiltonian).matrix() : Matrix();
    auto h_at = [&](double t) { return constant ? h_const : hamiltonian_at(model.hamiltonian, t); };

    if (constant) require_rk4_step(h_const, model.jumps, dt, 0.0);
    bool warned = false;
    Matrix rho = rho0.matrix();
    if (!visit_state(visit, 0, 0.0, rho)) return;
    for (std::size_t k = 0; k < grid.steps; ++k) {
        const double t = grid.time(k);
        const Matrix h0 = h_at(t);
        const Matrix hm = h_at(t + 0.5 * dt);
        const Matrix h1 = h_at(t + dt);
        if (!constant) require_rk4_step(hm, model.jumps, dt, t);
        const Matrix k1 = lindbladian(h0, model.jumps, rho);
        const Matrix k2 = lindbladian(hm, model.jumps, rho + 0.5 * dt * k1);
        const Matrix k3 = lindbladian(hm, model.jumps, rho + 0.5 * dt * k2);
        const Matrix k4 = lindbladian(h1, model.jumps, rho + dt * k3);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        const double drift = std::abs(rho.trace() - 1.0);
        if (drift > trace_drift_error || !std::isfinite(drift)) {
            std::ostringstream os;
            os << "trace drift " << drift << " at t = " << grid.time(k + 1) << "; reduce the step size";
            throw Error(ErrorCode::step_size_too_large, os.str());
        }
        if (drift > trace_drift_warning && !warned) {
            std::ostringstream os;
            os << "Lindblad trace drift " << drift << " exceeds " << trace_drift_warning;
            warn(os.str());
            warned = true;
        }
        if (!visit_state(visit, k + 1, grid.time(k + 1), rho)) return;
    }
}

}  // namespace detail

/// Streams (k, t_k, rho_k) for k = 0..M to `visit`. rho_k is an Eigen 2x2
/// matrix for unitary qubit dynamics and a dynamic matrix otherwise; write the
/// visitor as a generic lambda. Returning false from the visitor stops the
/// propagation.
template <class Visitor>
void for_each_state(const DynamicsModel& model, const DensityMatrix& rho0, const TimeGrid& grid, Visitor&& visit) {
    require_valid_grid(grid);
    detail::require_state_dim(model, rho0);
    if (const auto* c = std::get_if<ConstantHamiltonian>(&model)) {
        detail::stream_constant(*c, rho0, grid, visit);
    } else if (const auto* d = std::get_if<DrivenHamiltonian>(&model)) {
        detail::stream_driven(*d, rho0, grid, visit);
    } else {
        detail::stream_lindblad(std::get<LindbladModel>(model), rho0, grid, visit);
    }
}

inline Trajectory propagate(const DynamicsModel& model, const DensityMatrix& rho0, double horizon, std::size_t steps) {
    const TimeGrid grid{horizon, steps};
    Trajectory traj;
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    for_each_state(model, rho0, grid, [&](std::size_t, double t, const auto& rho) {
        traj.times.push_back(t);
        traj.states.push_back(DensityMatrix::assume_valid(Matrix(rho)));
    });
    return traj;
}

/// rho_k = U(t_k) rho0 U(t_k)^dag with U evaluated directly at each t_k, so
/// the result is unitary to machine precision for any M.
inline Trajectory propagate_const(const ConstantHamiltonian& h, const DensityMatrix& rho0, double horizon,
                                  std::size_t steps) {
    return propagate(h, rho0, horizon, steps);
}

/// Midpoint exponential steps rho_{k+1} = U_k rho_k U_k^dag,
/// U_k = exp(-i H(t_k + dt/2) dt); second order in dt, exactly unitary.
inline Trajectory propagate_timedep(const DrivenHamiltonian& h, const DensityMatrix& rho0, double horizon,
                                    std::size_t steps) {
    return propagate(h, rho0, horizon, steps);
}

/// Classical RK4 on d rho/dt = L(rho). No renormalisation; trace drift above
/// 1e-6 or a step outside the RK4 stability bound throws step_size_too_large.
inline Trajectory propagate_lindblad(const LindbladModel& model, const DensityMatrix& rho0, double horizon,
                                     std::size_t steps) {
    return propagate(model, rho0, horizon, steps);
}

/// Final state only, without storing the trajectory.
inline DensityMatrix evolve(const DynamicsModel& model, const DensityMatrix& rho0, double horizon, std::size_t steps) {
    Matrix last;
    for_each_state(model, rho0, TimeGrid{horizon, steps}, [&](std::size_t k, double, const auto& rho) {
        if (k == steps) last = rho;
    });
    return DensityMatrix::assume_valid(std::move(last));
}

}  // namespace qsl

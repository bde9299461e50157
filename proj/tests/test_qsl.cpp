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

#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qsl/speed_limit.hpp"

using namespace qsl;

namespace {

template <class F>
ErrorCode error_code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no qsl::Error thrown";
    return ErrorCode::config;
}

struct CaptureWarnings {
    std::vector<std::string> messages;
    std::function<void(std::string_view)> previous;
    CaptureWarnings() {
        previous = set_warning_handler([this](std::string_view m) { messages.emplace_back(m); });
    }
    ~CaptureWarnings() { set_warning_handler(previous); }
};

// Central finite difference of the Bloch angle along exact unitary motion.
double fd_speed_unitary(const Matrix& h, const Matrix& rho, double dt) {
    const Matrix up = oracle::expm_series(h, dt);
    const Matrix dn = oracle::expm_series(h, -dt);
    const Matrix a = dn * rho * dn.adjoint();
    const Matrix b = up * rho * up.adjoint();
    return oracle::bloch_angle_coefficients(a, b) / (2 * dt);
}

}  // namespace

TEST(Velocity, ClosedFormForRotation) {
    for (double theta : {0.0, 0.3, pi / 3, pi / 2, 2.5}) {
        const DensityMatrix rho = qubit_state({theta, 0.7}, 0.85);
        EXPECT_NEAR(velocity_unitary(Matrix(-0.5 * pauli::z()), rho), std::sin(theta), 1e-14);
    }
}

TEST(Velocity, UnitaryMatchesFiniteDifference) {
    std::mt19937_64 rng(21);
    for (int n : {2, 3}) {
        for (int rep = 0; rep < 20; ++rep) {
            const Matrix h = oracle::random_hermitian(n, rng);
            const Matrix rho = oracle::random_density(n, rng);
            EXPECT_NEAR(velocity_unitary(h, DensityMatrix(rho)), fd_speed_unitary(h, rho, 1e-4), 1e-6);
        }
    }
}

TEST(Velocity, GeneralWithoutJumpsEqualsUnitary) {
    std::mt19937_64 rng(22);
    for (int rep = 0; rep < 50; ++rep) {
        const Matrix h = oracle::random_hermitian(3, rng);
        const DensityMatrix rho(oracle::random_density(3, rng));
        const double vu = velocity_unitary(h, rho);
        EXPECT_NEAR(velocity_general(ConstantHamiltonian(h), rho), vu, 1e-12);
        EXPECT_NEAR(velocity_general(LindbladModel{ConstantHamiltonian(h), {}}, rho), vu, 1e-12);
    }
}

TEST(Velocity, DecompositionIdentity) {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 30; ++rep) {
        const LindbladModel m{ConstantHamiltonian(oracle::random_hermitian(2, rng)),
                              {Matrix(0.4 * pauli::lowering()), Matrix(0.3 * pauli::z())}};
        const DensityMatrix rho(oracle::random_density(2, rng));
        const VelocityDecomposition d = velocity_decomposition(m, rho);
        const double v = velocity_general(m, rho);
        EXPECT_NEAR(v * v, d.h / d.f - (d.g / d.f) * (d.g / d.f), 1e-10);
    }
}

TEST(Velocity, PureDephasingOnEquatorDoesNotTurn) {
    // The Bloch vector only shrinks, so its direction and the Bloch angle
    // stay fixed.
    const LindbladModel m{ConstantHamiltonian(Matrix(Matrix2::Zero())), {Matrix(0.5 * pauli::z())}};
    const DensityMatrix rho = qubit_from_bloch(Vec3(0.9, 0.0, 0.0));
    EXPECT_NEAR(velocity_general(m, rho), 0.0, 1e-15);
}

TEST(Velocity, GeneralMatchesLindbladFiniteDifference) {
    std::mt19937_64 rng(24);
    for (int rep = 0; rep < 20; ++rep) {
        const LindbladModel m{ConstantHamiltonian(oracle::random_hermitian(2, rng)),
                              {Matrix(0.5 * pauli::lowering()), Matrix(0.3 * pauli::z())}};
        const DensityMatrix rho0(oracle::random_density(2, rng));
        const double h = 1e-4;
        const Trajectory traj = propagate(m, rho0, h, 20);
        const double fd = bloch_angle(traj.states.front(), traj.states.back()) / h;
        EXPECT_NEAR(velocity_general(m, rho0), fd, 1e-3 * std::max(1.0, fd));
    }
}

TEST(Velocity, MaximallyMixedRejected) {
    EXPECT_EQ(error_code_of([] { velocity_unitary(Matrix(pauli::x()), maximally_mixed(2)); }),
              ErrorCode::maximally_mixed);
}

TEST(Path, LinearForEquatorialRotation) {
    const Trajectory traj = accumulate_path(
        propagate(qubit_hamiltonian(1.0, Vec3(0, 0, -1), 0.0), qubit_state({pi / 2, 0.0}, 1.0), 2.0, 2000));
    for (std::size_t k = 0; k < traj.size(); k += 100) EXPECT_NEAR(traj.cumulative_path[k], traj.times[k], 1e-12);
}

TEST(Path, NeverShorterThanEndpointAngle) {
    std::mt19937_64 rng(25);
    for (int rep = 0; rep < 20; ++rep) {
        const DensityMatrix rho0(oracle::random_density(2, rng));
        const Trajectory traj = accumulate_path(propagate(to_model(landau_zener(1.0, 0.7)), rho0, 3.0, 3000));
        for (std::size_t k = 1; k < traj.size(); ++k) {
            EXPECT_GE(traj.cumulative_path[k], traj.cumulative_path[k - 1]);
            EXPECT_GE(traj.cumulative_path[k] + 1e-12, bloch_angle(rho0, traj.states[k]));
        }
    }
}

TEST(Bounds, ZeroTarget) {
    const QslReport r = evaluate_qsl(to_model(landau_zener(1.0, 1.0)), qubit_state({pi / 2, 0}, 1.0), 0.0, 3.0, 100);
    EXPECT_EQ(*r.tau_new, 0.0);
    EXPECT_EQ(*r.tau_existing, 0.0);
    EXPECT_EQ(*r.actual_T, 0.0);
    EXPECT_EQ(*qsl_new(to_model(landau_zener(1.0, 1.0)), qubit_state({pi / 2, 0}, 1.0), 0.0, 3.0, 100), 0.0);
}

TEST(Bounds, GeodesicSaturates) {
    // Equatorial start, rotation about z at unit speed: great circle.
    const DynamicsModel m = qubit_hamiltonian(1.0, Vec3(0, 0, -1), 0.0);
    for (double theta : {0.4, 1.0, pi / 2, 2.5}) {
        const QslReport r = evaluate_qsl(m, qubit_state({pi / 2, 0.3}, 0.8), theta, 3.2, 32000);
        ASSERT_TRUE(r.reachable);
        EXPECT_NEAR(*r.tau_new, theta, 1e-9);
        EXPECT_NEAR(*r.actual_T, theta, 1e-9);
        EXPECT_NEAR(*r.tau_existing, theta, 1e-9);
    }
}

TEST(Bounds, GeodesicNearAntipodeKeepsTau) {
    // chord sums can trail the endpoint angle by one ulp here
    const DynamicsModel m = ConstantHamiltonian(Matrix(-0.5 * pauli::z()));
    const DensityMatrix rho0 = qubit_state({pi / 2, 0.0}, 1.0);
    const QslReport r = evaluate_qsl(m, rho0, 0.99 * pi, pi, 20000);
    ASSERT_TRUE(r.reachable);
    ASSERT_TRUE(r.tau_new.has_value());
    EXPECT_NEAR(*r.tau_new, 0.99 * pi, 1e-9);
    const auto tau = qsl_new(ConstantHamiltonian(pauli::z() / 2), qubit_state({pi / 2, 0.0}, 1.0), 1.2, 2.0, 20000);
    ASSERT_TRUE(tau.has_value());
    EXPECT_NEAR(*tau, 1.2, 1e-9);
}

TEST(Bounds, ConstantHamiltonianBoundsCoincide) {
    std::mt19937_64 rng(26);
    std::normal_distribution<double> g;
    for (int rep = 0; rep < 20; ++rep) {
        const Vec3 n = Vec3(g(rng), g(rng), g(rng)).normalized();
        const double rate = 0.5 + std::abs(g(rng));
        const DensityMatrix rho0 = random_state_fixed_purity(0.9, rng);
        const Vec3 r0 = qubit_bloch(rho0).normalized();
        // largest reachable angle on the precession cone is 2 * angle(r0, n)
        const double cone = std::acos(std::clamp(r0.dot(n), -1.0, 1.0));
        const double reach = 2 * std::min(cone, pi - cone);
        const double theta = 0.8 * reach;
        const double period = 2 * pi / rate;
        const QslReport r = evaluate_qsl(qubit_hamiltonian(rate, n, 0.1), rho0, theta, period, 20000);
        ASSERT_TRUE(r.reachable);
        EXPECT_NEAR(*r.tau_new, *r.tau_existing, 1e-8);
        // constant speed rate * sin(cone)
        EXPECT_NEAR(*r.tau_new, theta / (rate * std::sin(cone)), 1e-6);
    }
}

TEST(Bounds, LandauZenerMatchesReference) {
    const oracle::ReferenceBounds ref =
        oracle::landau_zener_reference(oracle::V3(1, 0, 0), 1.0, 1.0, 1.4, 3.0, 300000);
    const QslReport r = evaluate_qsl(to_model(landau_zener(1.0, 1.0)), qubit_state({pi / 2, 0}, 1.0), 1.4, 3.0,
                                     default_steps(to_model(landau_zener(1.0, 1.0)), 3.0));
    ASSERT_TRUE(r.reachable);
    EXPECT_NEAR(*r.tau_new, *ref.tau_new, 1e-5);
    EXPECT_NEAR(*r.tau_existing, *ref.tau_tilde, 1e-5);
    EXPECT_NEAR(*r.actual_T, *ref.T, 1e-5);
}

TEST(Bounds, ConvexPathOrdersBounds) {
    // While s(t) is convex, s(t)/t is nondecreasing, so
    // tau_tilde <= tau_new <= T.
    const DynamicsModel m = to_model(landau_zener(1.0, 1.0));
    for (double theta : {0.3, 0.7, 1.0, 1.4}) {
        const QslReport r = evaluate_qsl(m, qubit_state({pi / 2, 0}, 1.0), theta, 3.0, 20000);
        ASSERT_TRUE(r.reachable);
        EXPECT_LE(*r.tau_existing, *r.tau_new);
        EXPECT_LE(*r.tau_new, *r.actual_T);
    }
}

TEST(Bounds, PurityInvariantUnderUnitalDynamics) {
    const DynamicsModel m = to_model(landau_zener(1.0, 1.0));
    const QslReport base = evaluate_qsl(m, qubit_state({1.1, 0.4}, 1.0), 1.2, 4.0, 20000);
    for (double p : {0.9, 0.7, 0.55}) {
        const QslReport r = evaluate_qsl(m, qubit_state({1.1, 0.4}, p), 1.2, 4.0, 20000);
        EXPECT_NEAR(*r.tau_new, *base.tau_new, 1e-10);
        EXPECT_NEAR(*r.tau_existing, *base.tau_existing, 1e-10);
    }
}

TEST(Bounds, UnreachableTarget) {
    // Start near the rotation axis: the angle never exceeds 2 * 0.2.
    const DynamicsModel m = qubit_hamiltonian(1.0, Vec3(0, 0, 1), 0.0);
    const DensityMatrix rho0 = qubit_state({0.2, 0.0}, 1.0);
    const QslReport r = evaluate_qsl(m, rho0, 1.0, 20.0, 2000);
    EXPECT_FALSE(r.reachable);
    EXPECT_FALSE(r.actual_T.has_value());
    EXPECT_FALSE(qsl_existing(m, rho0, 1.0, 20.0, 2000).has_value());
    // the path still grows past the target
    EXPECT_TRUE(qsl_new(m, rho0, 1.0, 20.0, 2000).has_value());
    EXPECT_FALSE(qsl_new(m, rho0, 10.0, 20.0, 2000).has_value());
}

TEST(Bounds, TangentialApproachWarns) {
    // Maximum reachable angle is exactly 2 * 0.5 = 1; a target a hair below
    // it is barely reached, a hair above it is not.
    CaptureWarnings w;
    const DynamicsModel m = qubit_hamiltonian(1.0, Vec3(0, 0, 1), 0.0);
    const QslReport r = evaluate_qsl(m, qubit_state({0.5, 0.0}, 1.0), 1.0 + 1e-10, 2 * pi, 4000);
    EXPECT_FALSE(r.reachable);
    EXPECT_EQ(w.messages.size(), 1u);
}

TEST(Bounds, InvalidTargets) {
    const DynamicsModel m = qubit_hamiltonian(1.0, Vec3(0, 0, 1), 0.0);
    EXPECT_EQ(error_code_of([&] { evaluate_qsl(m, qubit_state({1.0, 0.0}, 1.0), -0.1, 1.0, 10); }),
              ErrorCode::invalid_argument);
    EXPECT_EQ(error_code_of([&] { qsl_existing(m, qubit_state({1.0, 0.0}, 1.0), 4.0, 1.0, 10); }),
              ErrorCode::invalid_argument);
    EXPECT_EQ(error_code_of([&] { evaluate_qsl(m, maximally_mixed(2), 1.0, 1.0, 10); }), ErrorCode::maximally_mixed);
}

TEST(Bounds, FromStoredTrajectoryMatchesStreaming) {
    const DynamicsModel m = to_model(landau_zener(1.0, 1.0));
    const DensityMatrix rho0 = qubit_state({0.8, 2.0}, 0.9);
    const QslReport a = evaluate_qsl(m, rho0, 1.0, 3.0, 6000);
    const QslReport b = qsl_from_trajectory(propagate(m, rho0, 3.0, 6000), 1.0);
    EXPECT_NEAR(*a.tau_new, *b.tau_new, 1e-13);
    EXPECT_NEAR(*a.actual_T, *b.actual_T, 1e-13);
    EXPECT_NEAR(*a.tau_existing, *b.tau_existing, 1e-13);
}

TEST(Bures, OrthogonalPureStates) {
    for (double rate : {0.5, 1.0, 3.0}) {
        const ConstantHamiltonian h = qubit_hamiltonian(rate, Vec3(1, 0, 0), 0.7);
        // Delta H = rate / 2 in |0>, so pi / (2 Delta H) = pi / rate
        EXPECT_NEAR(bures_qsl(h, basis_state(2, 0), basis_state(2, 1)), pi / rate, 1e-12);
    }
}

TEST(Bures, DegenerateCases) {
    const ConstantHamiltonian h = qubit_hamiltonian(1.0, Vec3(0, 0, 1), 0.0);
    // H = sigma_z / 2 with ground state |1>: no spread and no energy above it
    EXPECT_EQ(error_code_of([&] { bures_qsl(h, basis_state(2, 1), basis_state(2, 1)); }), ErrorCode::undefined_bound);
    // eigenstate |0>: zero spread with a nonzero angle makes that branch infinite
    EXPECT_TRUE(std::isinf(bures_qsl(h, basis_state(2, 0), basis_state(2, 1))));
}

TEST(Bures, MixingShrinksBoundButNotBlochAngleBound) {
    const ConstantHamiltonian h = qubit_hamiltonian(1.0, Vec3(0, 0, 1), 0.0);
    double previous = std::numeric_limits<double>::infinity();
    std::optional<double> tau_pure;
    for (double eta : {1.0, 0.8, 0.6, 0.4, 0.2, 0.05}) {
        const DensityMatrix rho0 = qubit_state({pi / 2, 0}, 0.5 * (1 + eta * eta));
        const DensityMatrix target = propagate(h, rho0, pi / 2, 1).states.back();
        const double bures = bures_qsl(h, rho0, target);
        EXPECT_LT(bures, previous);
        previous = bures;
        const auto tau = qsl_new(h, rho0, pi / 2, 2.0, 4000);
        if (!tau_pure) tau_pure = tau;
        EXPECT_NEAR(*tau, *tau_pure, 1e-10);
    }
}

TEST(Geodesic, GreatCircleHasNoDefect) {
    const Trajectory traj = accumulate_path(
        propagate(qubit_hamiltonian(2.0, Vec3(0, 1, 0), 0.0), qubit_state({pi / 2, 0}, 1.0), 1.5, 1500));
    EXPECT_LE(geodesic_defect(traj), 1e-12);
    EXPECT_LE(geodesic_ode_residual(traj), 1e-5);
}

TEST(Geodesic, SmallCircleHasDefect) {
    const Trajectory traj = accumulate_path(
        propagate(qubit_hamiltonian(1.0, Vec3(0, 0, 1), 0.0), qubit_state({pi / 4, 0}, 1.0), 3.0, 3000));
    EXPECT_GT(geodesic_defect(traj), 0.1);
    EXPECT_GT(geodesic_ode_residual(traj), 0.1);
}

TEST(Geodesic, ResidualNeedsQubitAndThreeSamples) {
    const Trajectory two = propagate(qubit_hamiltonian(1.0, Vec3(0, 0, 1), 0.0), qubit_state({1.0, 0}, 1.0), 1.0, 1);
    EXPECT_EQ(error_code_of([&] { geodesic_ode_residual(two); }), ErrorCode::invalid_argument);
    const Trajectory qutrit = propagate(ConstantHamiltonian(Matrix(Matrix::Identity(3, 3))), basis_state(3, 0), 1.0, 4);
    EXPECT_EQ(error_code_of([&] { geodesic_ode_residual(qutrit); }), ErrorCode::invalid_dimension);
}

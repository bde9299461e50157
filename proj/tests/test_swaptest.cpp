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

#include "oracles.hpp"
#include "qsl/speed_limit.hpp"
#include "qsl/swap_test.hpp"

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

}  // namespace

TEST(Swap, MatchesBruteForceAndAlgebra) {
    for (Eigen::Index n : {2, 3, 4}) {
        const Matrix s = swap_operator(n);
        const Matrix id = Matrix::Identity(n * n, n * n);
        EXPECT_EQ(s, oracle::swap_brute(static_cast<int>(n)));
        EXPECT_EQ(s, Matrix(s.adjoint()));
        EXPECT_EQ(Matrix(s * s), id);
        EXPECT_EQ(s, Matrix(symmetric_projector(n) - antisymmetric_projector(n)));
        EXPECT_EQ(Matrix(symmetric_projector(n) + antisymmetric_projector(n)), id);
        EXPECT_NEAR(symmetric_projector(n).trace().real(), n * (n + 1) / 2.0, 0.0);
    }
    EXPECT_EQ(error_code_of([] { swap_operator(1); }), ErrorCode::invalid_dimension);
}

TEST(Swap, TraceOfSwapGivesOverlap) {
    std::mt19937_64 rng(31);
    for (int n : {2, 3}) {
        const Matrix a = oracle::random_density(n, rng);
        const Matrix b = oracle::random_density(n, rng);
        const Complex tr = (swap_operator(n) * kron(a, b)).trace();
        EXPECT_NEAR(tr.real(), (a * b).trace().real(), 1e-15);
    }
}

TEST(SwapTest, BasisIsOrthonormalWithSingletAtC) {
    const MeasurementBasis basis = MeasurementBasis::swap_test();
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            EXPECT_NEAR(std::abs(basis.states[i].dot(basis.states[j])), i == j ? 1.0 : 0.0, 1e-15);
    // the singlet is the only antisymmetric vector
    const Matrix s = swap_operator(2);
    EXPECT_LE((s * basis.states[outcome_c] + basis.states[outcome_c]).norm(), 1e-15);
    for (std::size_t x : {0, 1, 3}) EXPECT_LE((s * basis.states[x] - basis.states[x]).norm(), 1e-15);
}

TEST(SwapTest, ProbabilitiesMatchBruteForce) {
    std::mt19937_64 rng(32);
    for (int rep = 0; rep < 200; ++rep) {
        const Matrix a = oracle::random_density(2, rng);
        const Matrix b = oracle::random_density(2, rng);
        const OutcomeProbabilities p = measurement_probabilities(TwoCopyState(DensityMatrix(a), DensityMatrix(b)));
        EXPECT_NEAR(p[0] + p[1] + p[2] + p[3], 1.0, 1e-14);
        EXPECT_NEAR(p[outcome_c], oracle::singlet_probability(a, b), 1e-15);
        EXPECT_NEAR(overlap_from_pc(p[outcome_c]), (a * b).trace().real(), 1e-14);
        EXPECT_LE(p[outcome_c], 0.5 + 1e-15);
    }
}

TEST(SwapTest, QubitsOnly) {
    EXPECT_EQ(error_code_of([] { measurement_probabilities(TwoCopyState(basis_state(3, 0), basis_state(3, 1))); }),
              ErrorCode::invalid_dimension);
    EXPECT_EQ(error_code_of([] { TwoCopyState(basis_state(2, 0), basis_state(3, 1)); }),
              ErrorCode::dimension_mismatch);
}

TEST(SwapTest, PcAboveHalfRejected) {
    EXPECT_EQ(error_code_of([] { overlap_from_pc(0.5 + 1e-9); }), ErrorCode::invalid_probability);
    EXPECT_NEAR(overlap_from_pc(0.5 + 1e-13), 0.0, 1e-12);
}

TEST(TwoCopy, JointMatrixMustBeProduct) {
    const Matrix a = basis_state(2, 0).matrix();
    const Matrix b = qubit_state({1.0, 0.5}, 0.8).matrix();
    const TwoCopyState ok = TwoCopyState::from_joint(kron(a, b), 2);
    EXPECT_LE(max_abs_entry(Matrix(ok.joint() - kron(a, b))), 1e-15);
    // a Bell state has maximally mixed marginals and is not their product
    Vector bell = Vector::Zero(4);
    bell(0) = bell(3) = 1 / std::sqrt(2.0);
    EXPECT_EQ(error_code_of([&] { TwoCopyState::from_joint(bell * bell.adjoint(), 2); }), ErrorCode::invalid_state);
}

TEST(Shots, CountsAddUpAndAreSeeded) {
    const OutcomeProbabilities p{0.1, 0.2, 0.3, 0.4};
    const ShotRecord a = sample_shots(p, 10000, std::uint64_t{77});
    const ShotRecord b = sample_shots(p, 10000, std::uint64_t{77});
    EXPECT_EQ(a.counts, b.counts);
    EXPECT_EQ(a.counts[0] + a.counts[1] + a.counts[2] + a.counts[3], 10000u);
    EXPECT_EQ(error_code_of([&] { sample_shots(p, 0, std::uint64_t{1}); }), ErrorCode::invalid_argument);
    EXPECT_EQ(error_code_of([] { sample_shots({0.5, 0.5, 0.5, -0.5}, 10, std::uint64_t{1}); }),
              ErrorCode::invalid_probability);
}

TEST(Shots, MultinomialMoments) {
    const OutcomeProbabilities p{0.1, 0.2, 0.3, 0.4};
    std::mt19937_64 engine(5);
    const int trials = 4000;
    const std::uint64_t n = 1000;
    double mean[4] = {0, 0, 0, 0};
    double sq[4] = {0, 0, 0, 0};
    for (int t = 0; t < trials; ++t) {
        const ShotRecord r = sample_shots(p, n, engine);
        for (int x = 0; x < 4; ++x) {
            mean[x] += r.counts[x];
            sq[x] += static_cast<double>(r.counts[x]) * r.counts[x];
        }
    }
    for (int x = 0; x < 4; ++x) {
        const double m = mean[x] / trials;
        const double var = sq[x] / trials - m * m;
        const double expected_var = n * p[x] * (1 - p[x]);
        EXPECT_NEAR(m, n * p[x], 5 * std::sqrt(expected_var / trials));
        EXPECT_NEAR(var / expected_var, 1.0, 0.1);
    }
}

TEST(Shots, ZeroProbabilityNeverSampled) {
    const ShotRecord r = sample_shots({0.5, 0.5, 0.0, 0.0}, 100000, std::uint64_t{3});
    EXPECT_EQ(r.counts[outcome_c], 0u);
    EXPECT_EQ(r.counts[outcome_d], 0u);
    const OverlapEstimate e = estimate_overlap(r);
    EXPECT_EQ(e.estimate, 1.0);
    EXPECT_EQ(e.std_error, 0.0);
}

TEST(Estimate, StandardErrorIsBinomial) {
    ShotRecord r;
    r.total = 10000;
    r.counts = {5000, 2000, 2500, 500};
    const OverlapEstimate e = estimate_overlap(r);
    EXPECT_NEAR(e.estimate, 0.5, 1e-15);
    EXPECT_NEAR(e.std_error, 2 * std::sqrt(0.25 * 0.75 / 10000), 1e-15);
}

TEST(Angle, FromExactOverlapsMatchesBlochAngle) {
    std::mt19937_64 rng(33);
    for (int rep = 0; rep < 100; ++rep) {
        const DensityMatrix a(oracle::random_density(2, rng));
        const DensityMatrix b(oracle::random_density(2, rng));
        EXPECT_NEAR(bloch_angle_from_overlaps(overlap(a, b), purity(a), purity(b), 2), bloch_angle(a, b), 1e-7);
    }
    EXPECT_EQ(error_code_of([] { bloch_angle_from_overlaps(0.5, 0.5, 1.0, 2); }), ErrorCode::maximally_mixed);
}

TEST(Angle, ErrorPropagationMatchesMonteCarlo) {
    const DensityMatrix a = qubit_state({0.0, 0.0}, 0.9);
    const DensityMatrix b = qubit_state({1.0, 0.0}, 0.9);
    const std::uint64_t shots = 100000;
    std::mt19937_64 engine(34);
    auto probs = [](const DensityMatrix& x, const DensityMatrix& y) {
        return measurement_probabilities(TwoCopyState(x, y));
    };
    const int trials = 2000;
    double sum = 0.0;
    double sq = 0.0;
    double quoted = 0.0;
    for (int t = 0; t < trials; ++t) {
        const OverlapEstimate o12 = estimate_overlap(sample_shots(probs(a, b), shots, engine));
        const OverlapEstimate o11 = estimate_overlap(sample_shots(probs(a, a), shots, engine));
        const OverlapEstimate o22 = estimate_overlap(sample_shots(probs(b, b), shots, engine));
        const AngleEstimate e = angle_from_overlap_estimates(o12, o11, o22, 2);
        sum += e.angle;
        sq += e.angle * e.angle;
        quoted += e.std_error;
    }
    const double mean = sum / trials;
    const double sd = std::sqrt(sq / trials - mean * mean);
    EXPECT_NEAR(mean, 1.0, 5 * sd / std::sqrt(trials));
    EXPECT_NEAR(quoted / trials / sd, 1.0, 0.1);
}

TEST(Waveplates, AreSpecialUnitary) {
    for (double theta : {0.0, 0.3, pi / 8, 1.9}) {
        for (Waveplate w : {Waveplate::half, Waveplate::quarter}) {
            const Matrix2 u = waveplate_unitary(w, theta);
            EXPECT_LE(unitarity_defect(u), 1e-15);
            EXPECT_NEAR(std::abs(u.determinant() - 1.0), 0.0, 1e-15);
        }
    }
}

TEST(Waveplates, HalfWaveAt22p5IsHadamard) {
    Matrix hadamard(2, 2);
    hadamard << 1, 1, 1, -1;
    hadamard /= std::sqrt(2.0);
    EXPECT_LE(phase_invariant_distance(waveplate_unitary(Waveplate::half, pi / 8), hadamard), 1e-15);
}

TEST(Waveplates, QuarterWaveSquaredIsHalfWave) {
    for (double theta : {0.1, 0.7, 2.2}) {
        const Matrix2 q = waveplate_unitary(Waveplate::quarter, theta);
        EXPECT_LE(phase_invariant_distance(q * q, waveplate_unitary(Waveplate::half, theta)), 1e-15);
    }
}

TEST(Waveplates, QuarterWaveAtZeroIsPhaseGate) {
    Matrix s(2, 2);
    s << 1, 0, 0, I_unit;
    EXPECT_LE(phase_invariant_distance(waveplate_unitary(Waveplate::quarter, 0.0), s), 1e-15);
}

TEST(Compiler, HaarTargets) {
    std::mt19937_64 rng(35);
    for (int rep = 0; rep < 500; ++rep) {
        const Matrix2 u = oracle::haar_su2(rng);
        const WaveplateSequence seq = compile_su2(u);
        EXPECT_LE(phase_invariant_distance(seq.jones(), u), 1e-10);
    }
}

TEST(Compiler, SpecialTargetsAndGlobalPhase) {
    std::vector<Matrix2> targets{Matrix2::Identity(), pauli::x(), pauli::y(), pauli::z(),
                                 waveplate_unitary(Waveplate::half, pi / 8)};
    for (Matrix2 u : targets) {
        for (double phase : {0.0, 0.4, -2.0}) {
            const Matrix2 v = std::polar(1.0, phase) * u;
            EXPECT_LE(phase_invariant_distance(compile_su2(v).jones(), v), 1e-10);
        }
    }
}

TEST(Compiler, RejectsNonUnitary) {
    Matrix2 m;
    m << 1, 0, 0, 1.1;
    EXPECT_EQ(error_code_of([&] { compile_su2(m); }), ErrorCode::non_unitary);
}

TEST(PathMeasurement, ExactModeMatchesPath) {
    const DynamicsModel m = qubit_hamiltonian(1.0, Vec3(0, 0, -1), 0.0);
    const DensityMatrix rho0 = qubit_state({pi / 3, 0.0}, 1.0);
    const PathMeasurement meas = simulate_path_measurement(m, rho0, TimeGrid{2.0, 50}, std::nullopt, 1);
    const Trajectory traj = accumulate_path(propagate(m, rho0, 2.0, 50));
    for (std::size_t k = 0; k < traj.size(); ++k) {
        EXPECT_NEAR(meas.path[k], traj.cumulative_path[k], 1e-12);
        EXPECT_EQ(meas.path_error[k], 0.0);
    }
}

TEST(PathMeasurement, SeededAndOrderIndependent) {
    const DynamicsModel m = qubit_hamiltonian(1.0, Vec3(0, 0, -1), 0.0);
    const DensityMatrix rho0 = qubit_state({pi / 2, 0.0}, 1.0);
    const PathMeasurement a = simulate_path_measurement(m, rho0, TimeGrid{2.0, 50}, 100000, 9);
    const PathMeasurement b = simulate_path_measurement(m, rho0, TimeGrid{2.0, 50}, 100000, 9);
    EXPECT_EQ(a.path, b.path);
    // the first 20 pairs of a shorter grid with the same dt draw the same shots
    const PathMeasurement c = simulate_path_measurement(m, rho0, TimeGrid{0.8, 20}, 100000, 9);
    for (std::size_t k = 0; k < 20; ++k) EXPECT_NEAR(c.step_angle[k], a.step_angle[k], 1e-12);
}

TEST(PathMeasurement, Coverage) {
    const DynamicsModel m = qubit_hamiltonian(1.0, Vec3(0, 0, -1), 0.0);
    const DensityMatrix rho0 = qubit_state({pi / 2, 0.0}, 1.0);
    const Trajectory traj = accumulate_path(propagate(m, rho0, 2.0, 50));
    int inside = 0;
    int total = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const PathMeasurement meas = simulate_path_measurement(m, rho0, TimeGrid{2.0, 50}, 100000, seed);
        const std::size_t k = 50;
        ++total;
        if (std::abs(meas.path[k] - traj.cumulative_path[k]) <= 3 * meas.path_error[k]) ++inside;
    }
    EXPECT_GE(inside, 38);
}

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

// Short tour of the library: a mixed qubit under a Landau-Zener sweep, both
// speed limits, and the same angle recovered from simulated swap tests.

#include <cstdio>

#include "qsl/qsl.hpp"

int main() {
    using namespace qsl;

    const DensityMatrix rho0 = qubit_state({pi / 2, 0.0}, 0.9);
    const DynamicsModel lz = to_model(landau_zener(1.0, 1.0));

    const QslReport r = evaluate_qsl(lz, rho0, 1.0, 3.0, default_steps(lz, 3.0));
    if (!r.reachable) {
        std::printf("target not reached by t = 3\n");
        return 1;
    }
    std::printf("target angle 1.0\n");
    std::printf("  new bound       %.6f\n", *r.tau_new);
    std::printf("  existing bound  %.6f\n", *r.tau_existing);
    std::printf("  actual time     %.6f\n", *r.actual_T);

    const DensityMatrix rhoT = evolve(lz, rho0, *r.actual_T, 4000);
    const double o12 = overlap(rho0, rhoT);
    const double o11 = purity(rho0);
    const double o22 = purity(rhoT);
    std::printf("angle from exact overlaps   %.6f\n", bloch_angle_from_overlaps(o12, o11, o22, 2));

    auto est = [&](const DensityMatrix& a, const DensityMatrix& b, std::uint64_t seed) {
        return estimate_overlap(sample_shots(measurement_probabilities(TwoCopyState(a, b)), 100000, seed));
    };
    const AngleEstimate a = angle_from_overlap_estimates(est(rho0, rhoT, 1), est(rho0, rho0, 2), est(rhoT, rhoT, 3), 2);
    std::printf("angle from 1e5 shots each   %.4f +- %.4f\n", a.angle, a.std_error);
    return 0;
}

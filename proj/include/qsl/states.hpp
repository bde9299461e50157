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

// Density matrices, generalized Bloch vectors and the distances between
// states (overlap, Bloch angle, Bures angle).

#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "qsl/core.hpp"
#include "qsl/linalg.hpp"

namespace qsl {

/// Ordered SU(N) generators with Tr(l_i l_j) = 2 delta_ij: symmetric
/// off-diagonal pairs, then antisymmetric pairs, then the diagonal
/// generators. For N = 2 this is exactly (sigma_x, sigma_y, sigma_z).
class GellMannBasis {
public:
    explicit GellMannBasis(Eigen::Index n) : dim_(n) {
        if (n < 2) throw Error(ErrorCode::invalid_dimension, "Gell-Mann basis needs N >= 2");
        generators_.reserve(static_cast<std::size_t>(n * n - 1));
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index k = j + 1; k < n; ++k) {
                Matrix m = Matrix::Zero(n, n);
                m(j, k) = 1.0;
                m(k, j) = 1.0;
                generators_.push_back(std::move(m));
            }
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index k = j + 1; k < n; ++k) {
                Matrix m = Matrix::Zero(n, n);
                m(j, k) = -I_unit;
                m(k, j) = I_unit;
                generators_.push_back(std::move(m));
            }
        }
        for (Eigen::Index l = 1; l < n; ++l) {
            Matrix m = Matrix::Zero(n, n);
            const double norm = std::sqrt(2.0 / static_cast<double>(l * (l + 1)));
            for (Eigen::Index j = 0; j < l; ++j) m(j, j) = norm;
            m(l, l) = -static_cast<double>(l) * norm;
            generators_.push_back(std::move(m));
        }
    }

    Eigen::Index dim() const { return dim_; }
    std::size_t size() const { return generators_.size(); }
    const Matrix& operator[](std::size_t i) const { return generators_[i]; }
    const std::vector<Matrix>& generators() const { return generators_; }

private:
    Eigen::Index dim_;
    std::vector<Matrix> generators_;
};

inline GellMannBasis gell_mann_basis(Eigen::Index n) { return GellMannBasis(n); }

/// Hermitian, unit-trace, positive semidefinite N x N matrix.
class DensityMatrix {
public:
    static constexpr double hermitian_tol = 1e-12;
    static constexpr double trace_tol = 1e-12;
    static constexpr double psd_tol = 1e-10;

    /// Validates every invariant; throws Error(invalid_state) otherwise.
    explicit DensityMatrix(Matrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols() || m_.rows() < 2)
            throw Error(ErrorCode::invalid_dimension, "density matrix must be square with N >= 2");
        const double herm = hermitian_defect(m_);
        if (herm > hermitian_tol) {
            std::ostringstream os;
            os << "density matrix not Hermitian (defect " << herm << ")";
            throw Error(ErrorCode::invalid_state, os.str());
        }
        const double tr_err = std::abs(m_.trace() - 1.0);
        if (tr_err > trace_tol) {
            std::ostringstream os;
            os << "density matrix trace differs from 1 by " << tr_err;
            throw Error(ErrorCode::invalid_state, os.str());
        }
        const double min_ev = min_eigenvalue(m_);
        if (min_ev < -psd_tol) {
            std::ostringstream os;
            os << "density matrix not positive semidefinite (eigenvalue " << min_ev << ")";
            throw Error(ErrorCode::invalid_state, os.str());
        }
    }

    /// Skips validation. For propagators whose output is valid by construction.
    static DensityMatrix assume_valid(Matrix m) { return DensityMatrix(std::move(m), Trusted{}); }

    const Matrix& matrix() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }
    Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

    static double min_eigenvalue(const Matrix& m) {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
        return solver.eigenvalues()(0);
    }

private:
    struct Trusted {};
    DensityMatrix(Matrix m, Trusted) : m_(std::move(m)) {}

    Matrix m_;
};

/// Real (N^2 - 1)-vector in the Gell-Mann expansion
/// rho = (I + sqrt(N(N-1)/2) r . lambda) / N.
struct BlochVector {
    Eigen::Index dim = 2;
    RealVector components;

    double norm() const { return components.norm(); }
};

inline BlochVector bloch_from_density(const DensityMatrix& rho) {
    const Eigen::Index n = rho.dim();
    const GellMannBasis basis(n);
    const double scale = std::sqrt(static_cast<double>(n) / (2.0 * static_cast<double>(n - 1)));
    BlochVector r{n, RealVector(static_cast<Eigen::Index>(basis.size()))};
    for (std::size_t j = 0; j < basis.size(); ++j)
        r.components(static_cast<Eigen::Index>(j)) = scale * trace_product(rho.matrix(), basis[j]).real();
    return r;
}

inline DensityMatrix density_from_bloch(const BlochVector& r) {
    const Eigen::Index n = r.dim;
    if (n < 2) throw Error(ErrorCode::invalid_dimension, "Bloch vector dimension must be >= 2");
    if (r.components.size() != n * n - 1)
        throw Error(ErrorCode::dimension_mismatch, "Bloch vector needs N^2 - 1 components");
    const GellMannBasis basis(n);
    const double scale = std::sqrt(static_cast<double>(n * (n - 1)) / 2.0);
    Matrix m = Matrix::Identity(n, n);
    for (std::size_t j = 0; j < basis.size(); ++j) m += scale * r.components(static_cast<Eigen::Index>(j)) * basis[j];
    m /= static_cast<double>(n);
    const double min_ev = DensityMatrix::min_eigenvalue(m);
    if (min_ev < -DensityMatrix::psd_tol) {
        std::ostringstream os;
        os << "Bloch vector outside the state space: eigenvalue " << min_ev;
        throw Error(ErrorCode::invalid_state, os.str());
    }
    return DensityMatrix::assume_valid(std::move(m));
}

inline DensityMatrix qubit_from_bloch(const Vec3& r) {
    Matrix m = 0.5 * (Matrix2::Identity() + pauli::dot(r));
    return DensityMatrix(std::move(m));
}

inline Vec3 qubit_bloch(const DensityMatrix& rho) {
    if (rho.dim() != 2) throw Error(ErrorCode::invalid_dimension, "qubit Bloch vector requested for N != 2");
    return qubit_bloch_components(rho.matrix());
}

/// |psi><psi| for a nonzero ket, normalised.
inline DensityMatrix pure_state(const Vector& ket) {
    const double norm = ket.norm();
    if (!(norm > 0.0)) throw Error(ErrorCode::invalid_state, "zero ket");
    const Vector psi = ket / norm;
    return DensityMatrix(psi * psi.adjoint());
}

inline DensityMatrix basis_state(Eigen::Index n, Eigen::Index k) {
    Vector ket = Vector::Zero(n);
    ket(k) = 1.0;
    return pure_state(ket);
}

inline DensityMatrix maximally_mixed(Eigen::Index n) {
    return DensityMatrix(Matrix::Identity(n, n) / static_cast<double>(n));
}

/// eta rho + (1 - eta) I/N: same Bloch direction, Bloch length scaled by eta.
inline DensityMatrix depolarize(const DensityMatrix& rho, double eta) {
    const Eigen::Index n = rho.dim();
    return DensityMatrix(eta * rho.matrix() + (1.0 - eta) * Matrix::Identity(n, n) / static_cast<double>(n));
}

inline void require_same_dim(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.dim() != b.dim()) throw Error(ErrorCode::dimension_mismatch, "states of different dimension");
}

/// Tr(rho sigma), real and clamped to [0, 1].
inline double overlap(const DensityMatrix& rho, const DensityMatrix& sigma) {
    require_same_dim(rho, sigma);
    const double value = trace_product(rho.matrix(), sigma.matrix()).real();
    return std::clamp(value, 0.0, 1.0);
}

inline double purity(const DensityMatrix& rho) { return overlap(rho, rho); }

/// arccos with the argument clamped to [-1, 1]; warns if the raw value was
/// outside by more than 1e-8.
inline double clamped_arccos(double x) {
    if (std::abs(x) > 1.0 + 1e-8) {
        std::ostringstream os;
        os << "arccos argument " << x << " outside [-1, 1]; clamped";
        warn(os.str());
    }
    return std::acos(std::clamp(x, -1.0, 1.0));
}

inline constexpr double maximally_mixed_threshold = 1e-10;

namespace detail {

inline void require_not_maximally_mixed(double bloch_weight) {
    if (!(bloch_weight > maximally_mixed_threshold))
        throw Error(ErrorCode::maximally_mixed, "Bloch angle undefined for a maximally mixed state");
}

}  // namespace detail

/// Bloch angle between two states given as raw matrices (no validation).
///
/// Evaluated as the angle between the traceless parts rho - I/N and
/// sigma - I/N in the Frobenius inner product. This is algebraically the
/// same as arccos[(N Tr(rho sigma) - 1) / sqrt((N Tr rho^2 - 1)(N Tr sigma^2 - 1))]
/// but the atan2 form keeps full precision for nearly parallel states, where
/// arccos of a ratio near 1 loses half the significant digits.
template <class A, class B>
double bloch_angle_kernel(const Eigen::MatrixBase<A>& rho, const Eigen::MatrixBase<B>& sigma) {
    const Eigen::Index n = rho.rows();
    if (n == 2) {
        const Vec3 r = qubit_bloch_components(rho);
        const Vec3 s = qubit_bloch_components(sigma);
        detail::require_not_maximally_mixed(r.squaredNorm());
        detail::require_not_maximally_mixed(s.squaredNorm());
        return std::atan2(r.cross(s).norm(), r.dot(s));
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    Matrix x = rho;
    Matrix y = sigma;
    x.diagonal().array() -= inv_n;
    y.diagonal().array() -= inv_n;
    const double nx = x.norm();
    const double ny = y.norm();
    detail::require_not_maximally_mixed(static_cast<double>(n) * nx * nx);
    detail::require_not_maximally_mixed(static_cast<double>(n) * ny * ny);
    x /= nx;
    y /= ny;
    return 2.0 * std::atan2((x - y).norm(), (x + y).norm());
}

/// The raw (unclamped) cosine of the Bloch angle from traces and purities.
inline double bloch_angle_cosine(const DensityMatrix& rho, const DensityMatrix& sigma) {
    require_same_dim(rho, sigma);
    const double n = static_cast<double>(rho.dim());
    const double fr = n * trace_product(rho.matrix(), rho.matrix()).real() - 1.0;
    const double fs = n * trace_product(sigma.matrix(), sigma.matrix()).real() - 1.0;
    detail::require_not_maximally_mixed(fr);
    detail::require_not_maximally_mixed(fs);
    return (n * trace_product(rho.matrix(), sigma.matrix()).real() - 1.0) / std::sqrt(fr * fs);
}

/// Angle in [0, pi] between the Bloch vectors of two states. Throws
/// Error(maximally_mixed) if either has a vanishing Bloch vector.
inline double bloch_angle(const DensityMatrix& rho, const DensityMatrix& sigma) {
    require_same_dim(rho, sigma);
    return bloch_angle_kernel(rho.matrix(), sigma.matrix());
}

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    require_same_dim(rho, sigma);
    if (rho.dim() == 2) {
        const double det_r = std::max(0.0, rho.matrix().determinant().real());
        const double det_s = std::max(0.0, sigma.matrix().determinant().real());
        return std::clamp(overlap(rho, sigma) + 2.0 * std::sqrt(det_r * det_s), 0.0, 1.0);
    }
    // Eigenvalues at rounding level are zeroed: their square roots would
    // otherwise add ~1e-8 to F for rank-deficient states.
    const double floor = 64.0 * std::numeric_limits<double>::epsilon();
    const auto root_of = [floor](const RealVector& vals) {
        return vals.unaryExpr([floor](double x) { return x > floor ? std::sqrt(x) : 0.0; }).eval();
    };
    Eigen::SelfAdjointEigenSolver<Matrix> er(rho.matrix());
    const RealVector root_vals = root_of(er.eigenvalues());
    const Matrix root = er.eigenvectors() * root_vals.asDiagonal() * er.eigenvectors().adjoint();
    Matrix inner = root * sigma.matrix() * root;
    inner = 0.5 * (inner + inner.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> ei(inner, Eigen::EigenvaluesOnly);
    const double tr = root_of(ei.eigenvalues()).sum();
    return std::clamp(tr * tr, 0.0, 1.0);
}

/// Bures angle arccos sqrt(F) in [0, pi/2].
///
/// For qubits 1 - F is formed from Bloch vectors without cancellation,
/// 1 - F = (|r - s|^2 - |r x s|^2) / (2 (1 - r.s + sqrt((1 - r^2)(1 - s^2)))),
/// which is the closed form F = Tr(rho sigma) + 2 sqrt(det rho det sigma)
/// rearranged; the angle is then atan2(sqrt(1 - F), sqrt(F)).
inline double bures_angle(const DensityMatrix& rho, const DensityMatrix& sigma) {
    require_same_dim(rho, sigma);
    if (rho.dim() == 2) {
        const Vec3 r = qubit_bloch(rho);
        const Vec3 s = qubit_bloch(sigma);
        const double mixed = std::sqrt(std::max(0.0, (1.0 - r.squaredNorm()) * (1.0 - s.squaredNorm())));
        const double denom = 2.0 * (1.0 - r.dot(s) + mixed);
        const double numer = (r - s).squaredNorm() - r.cross(s).squaredNorm();
        const double infidelity = denom > 0.0 ? std::clamp(numer / denom, 0.0, 1.0) : 0.0;
        const double fid = fidelity(rho, sigma);
        return std::atan2(std::sqrt(infidelity), std::sqrt(fid));
    }
    return std::acos(std::sqrt(fidelity(rho, sigma)));
}

/// Polar angle from +z and azimuth in the x-y plane:
/// x = r sin(polar) cos(azimuth), y = r sin(polar) sin(azimuth), z = r cos(polar).
struct SphereDirection {
    double polar = 0.0;
    double azimuth = 0.0;

    Vec3 unit() const {
        return Vec3(std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth), std::cos(polar));
    }
};

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit engine, so the
/// stream is identical across standard libraries.
template <std::uniform_random_bit_generator Engine>
double uniform01(Engine& engine) {
    static_assert(Engine::max() - Engine::min() == std::numeric_limits<std::uint64_t>::max(),
                  "uniform01 needs a full 64-bit engine");
    return static_cast<double>((engine() - Engine::min()) >> 11) * 0x1.0p-53;
}

template <std::uniform_random_bit_generator Engine>
SphereDirection sample_sphere_direction(Engine& engine) {
    const double u = uniform01(engine);
    const double v = uniform01(engine);
    return SphereDirection{std::acos(1.0 - 2.0 * u), 2.0 * pi * v};
}

inline void require_qubit_purity(double purity) {
    if (!(purity > 0.5 && purity <= 1.0)) {
        std::ostringstream os;
        os << "qubit purity " << purity << " outside (0.5, 1]";
        throw Error(ErrorCode::invalid_argument, os.str());
    }
}

/// Qubit with the given Bloch direction and purity; Bloch radius sqrt(2 P - 1).
inline DensityMatrix qubit_state(const SphereDirection& direction, double purity) {
    require_qubit_purity(purity);
    return qubit_from_bloch(std::sqrt(2.0 * purity - 1.0) * direction.unit());
}

template <std::uniform_random_bit_generator Engine>
DensityMatrix random_state_fixed_purity(double purity, Engine& engine) {
    require_qubit_purity(purity);
    return qubit_state(sample_sphere_direction(engine), purity);
}

inline DensityMatrix random_state_fixed_purity(double purity, std::uint64_t seed) {
    std::mt19937_64 engine(seed);
    return random_state_fixed_purity(purity, engine);
}

}  // namespace qsl

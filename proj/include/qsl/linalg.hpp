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

// Small dense linear-algebra kernels: Pauli algebra, Hermitian exponentials,
// trace products and phase-insensitive operator distances.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "qsl/core.hpp"

namespace qsl {

namespace pauli {

inline Matrix2 identity() { return Matrix2::Identity(); }

inline Matrix2 x() {
    Matrix2 m;
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

inline Matrix2 y() {
    Matrix2 m;
    m << 0.0, -I_unit, I_unit, 0.0;
    return m;
}

inline Matrix2 z() {
    Matrix2 m;
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

/// Lowering operator |0><1| (|1> decays to |0>).
inline Matrix2 lowering() {
    Matrix2 m;
    m << 0.0, 1.0, 0.0, 0.0;
    return m;
}

/// n . sigma for a real 3-vector n.
inline Matrix2 dot(const Vec3& n) { return n.x() * x() + n.y() * y() + n.z() * z(); }

}  // namespace pauli

/// Real coefficients of a 2x2 Hermitian H = c0 I + c . sigma.
struct PauliCoefficients {
    double identity = 0.0;
    Vec3 vector = Vec3::Zero();
};

template <class Derived>
PauliCoefficients pauli_coefficients(const Eigen::MatrixBase<Derived>& h) {
    PauliCoefficients c;
    c.identity = 0.5 * (h(0, 0).real() + h(1, 1).real());
    c.vector.x() = 0.5 * (h(0, 1).real() + h(1, 0).real());
    c.vector.y() = 0.5 * (h(1, 0).imag() - h(0, 1).imag());
    c.vector.z() = 0.5 * (h(0, 0).real() - h(1, 1).real());
    return c;
}

/// Bloch vector of a 2x2 density matrix: r = (2 Re rho01, -2 Im rho01, rho00 - rho11).
template <class Derived>
Vec3 qubit_bloch_components(const Eigen::MatrixBase<Derived>& rho) {
    return Vec3(2.0 * rho(0, 1).real(), -2.0 * rho(0, 1).imag(), rho(0, 0).real() - rho(1, 1).real());
}

/// max |M_ij - conj(M_ji)|.
template <class Derived>
double hermitian_defect(const Eigen::MatrixBase<Derived>& m) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = i; j < m.cols(); ++j)
            worst = std::max(worst, std::abs(m(i, j) - std::conj(m(j, i))));
    return worst;
}

template <class Derived>
double max_abs_entry(const Eigen::MatrixBase<Derived>& m) {
    return m.cwiseAbs().maxCoeff();
}

/// Hermiticity within `tol`, scaled by max(1, max|M_ij|) so large Hamiltonians
/// are not rejected for round-off in their last bits.
template <class Derived>
void require_hermitian(const Eigen::MatrixBase<Derived>& m, std::string_view what, double tol = 1e-12) {
    if (m.rows() != m.cols())
        throw Error(ErrorCode::dimension_mismatch, std::string(what) + " is not square");
    const double scale = std::max(1.0, max_abs_entry(m));
    const double defect = hermitian_defect(m);
    if (defect > tol * scale) {
        std::ostringstream os;
        os << what << " is not Hermitian (max |M_ij - conj(M_ji)| = " << defect << ")";
        throw Error(ErrorCode::non_hermitian, os.str());
    }
}

/// Tr(A B) without forming the product.
template <class A, class B>
Complex trace_product(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    Complex sum = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) sum += a(i, j) * b(j, i);
    return sum;
}

/// exp(-i tau H) for a 2x2 Hermitian H, closed form
/// e^{-i c0 tau} (cos(|c| tau) I - i sin(|c| tau) c.sigma / |c|).
template <class Derived>
Matrix2 expm_qubit(const Eigen::MatrixBase<Derived>& h, double tau) {
    const PauliCoefficients c = pauli_coefficients(h);
    const double norm = c.vector.norm();
    const double angle = norm * tau;
    // sin(angle)/norm, continuous at norm = 0
    const double sinc = norm > 0.0 ? std::sin(angle) / norm : tau;
    Matrix2 u = std::cos(angle) * Matrix2::Identity() - I_unit * sinc * pauli::dot(c.vector);
    return std::polar(1.0, -c.identity * tau) * u;
}

/// exp(-i tau H) for Hermitian H of any size, with the eigendecomposition kept so
/// the propagator can be evaluated at many times without re-diagonalising.
class HermitianExponential {
public:
    explicit HermitianExponential(const Matrix& h) : dim_(h.rows()) {
        require_hermitian(h, "Hamiltonian");
        if (dim_ == 2) {
            qubit_ = h;
        } else {
            Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
            vectors_ = solver.eigenvectors();
            values_ = solver.eigenvalues();
        }
    }

    Eigen::Index dim() const { return dim_; }

    Matrix at(double tau) const {
        if (dim_ == 2) return expm_qubit(qubit_, tau);
        Vector phases(dim_);
        for (Eigen::Index k = 0; k < dim_; ++k) phases(k) = std::polar(1.0, -values_(k) * tau);
        return vectors_ * phases.asDiagonal() * vectors_.adjoint();
    }

private:
    Eigen::Index dim_;
    Matrix2 qubit_ = Matrix2::Zero();
    Matrix vectors_;
    RealVector values_;
};

inline Matrix expm_hermitian(const Matrix& h, double tau) { return HermitianExponential(h).at(tau); }

/// Spectral norm of the traceless part of a Hermitian matrix, i.e. half the
/// spectral width. This is the rate that sets how fast states move.
inline double traceless_spectral_norm(const Matrix& h) {
    if (h.rows() == 2) return pauli_coefficients(h).vector.norm();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
    const RealVector& ev = solver.eigenvalues();
    return 0.5 * (ev(ev.size() - 1) - ev(0));
}

inline double spectral_norm(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Partial traces of a (da*db)x(da*db) operator over the second or first factor.
inline Matrix partial_trace_second(const Matrix& joint, Eigen::Index da, Eigen::Index db) {
    Matrix out = Matrix::Zero(da, da);
    for (Eigen::Index i = 0; i < da; ++i)
        for (Eigen::Index j = 0; j < da; ++j)
            for (Eigen::Index k = 0; k < db; ++k) out(i, j) += joint(i * db + k, j * db + k);
    return out;
}

inline Matrix partial_trace_first(const Matrix& joint, Eigen::Index da, Eigen::Index db) {
    Matrix out = Matrix::Zero(db, db);
    for (Eigen::Index i = 0; i < db; ++i)
        for (Eigen::Index j = 0; j < db; ++j)
            for (Eigen::Index k = 0; k < da; ++k) out(i, j) += joint(k * db + i, k * db + j);
    return out;
}

/// min over global phase phi of || U - e^{i phi} V ||_2 (spectral norm). The
/// optimal phase aligns Tr(V^dagger U); the difference is formed explicitly so
/// the result keeps full relative precision near zero.
inline double phase_invariant_distance(const Matrix& u, const Matrix& v) {
    if (u.rows() != v.rows() || u.cols() != v.cols())
        throw Error(ErrorCode::dimension_mismatch, "operator distance between different shapes");
    const Complex overlap = (v.adjoint() * u).trace();
    const Complex phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex(1.0);
    return spectral_norm(u - phase * v);
}

/// max_ij |(U^dagger U - I)_ij|.
inline double unitarity_defect(const Matrix& u) {
    return max_abs_entry(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols()));
}

}  // namespace qsl

// Copyright 2026 The hotgate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Truncated Fock-space linear algebra.
//
// Units are natural throughout: hbar = 1. Composite spaces use the fixed
// factor ordering
//
//     qubit_1 (x) qubit_2 (x) mode_c (x) mode_r
//
// with Kronecker (row-major) indexing, i.e. the first factor is the most
// significant digit of the flat index. Qubit basis index 0 is |0>, 1 is |1>.

#pragma once

#include <complex>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "hotgate/error.hpp"

namespace hotgate {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

namespace tol {
inline constexpr double herm = 1e-9;
inline constexpr double unit = 1e-9;
inline constexpr double trace = 1e-10;
inline constexpr double psd = 1e-8;
inline constexpr double norm = 1e-10;
// Drift up to this multiple of a tolerance is repaired silently.
inline constexpr double repair_factor = 10.0;
}  // namespace tol

/// Number of retained levels of one oscillator mode.
class FockDim {
   public:
    explicit FockDim(int levels);

    int levels() const noexcept {
        return levels_;
    }

    friend bool operator==(FockDim, FockDim) = default;

   private:
    int levels_;
};

class PureState {
   public:
    /// Normalizes when the squared norm is within repair range of 1; throws
    /// InvalidParameter otherwise.
    static PureState from_amplitudes(Vector amplitudes);

    int dim() const noexcept {
        return static_cast<int>(amplitudes_.size());
    }
    const Vector &amplitudes() const noexcept {
        return amplitudes_;
    }

   private:
    explicit PureState(Vector amplitudes) : amplitudes_(std::move(amplitudes)) {
    }
    Vector amplitudes_;
};

class DensityOp {
   public:
    /// Validates Hermiticity, unit trace and positivity (see tol). Small drift
    /// is repaired; larger violations throw InvalidParameter. Positivity is
    /// checked exactly for diagonal inputs and by eigendecomposition up to
    /// dimension 2048.
    static DensityOp from_matrix(Matrix rho);
    static DensityOp from_pure(const PureState &psi);

    int dim() const noexcept {
        return static_cast<int>(matrix_.rows());
    }
    const Matrix &matrix() const noexcept {
        return matrix_;
    }
    double purity() const;
    bool is_diagonal() const;

   private:
    explicit DensityOp(Matrix m) : matrix_(std::move(m)) {
    }
    Matrix matrix_;
};

using SystemState = std::variant<PureState, DensityOp>;

int state_dim(const SystemState &state);
DensityOp to_density(const SystemState &state);

// --- single-mode operators -------------------------------------------------

Matrix identity(int dim);
Matrix annihilation(FockDim d);
Matrix creation(FockDim d);
Matrix number_operator(FockDim d);

/// x = width * (a + a^dag).
Matrix position_operator(FockDim d, double width);

/// p = i (a^dag - a) / (2 width), the conjugate of position_operator(d, width).
Matrix momentum_operator(FockDim d, double width);

/// exp(alpha a^dag - conj(alpha) a), computed from the truncated generator so
/// the result is unitary on the truncated space. Accuracy relative to the
/// untruncated operator needs |alpha|^2 + |alpha| << levels.
Matrix displacement(Complex alpha, FockDim d);

/// Boltzmann populations p_n ~ (n_bar/(n_bar+1))^n renormalized after
/// truncation.
DensityOp thermal_state(double n_bar, FockDim d);

PureState fock_state(int n, FockDim d);

/// D(alpha)|0>.
PureState coherent_state(Complex alpha, FockDim d);

// --- composite spaces ------------------------------------------------------

Matrix kron(const Matrix &a, const Matrix &b);
Vector kron(const Vector &a, const Vector &b);

Matrix tensor(std::span<const Matrix> ops);
PureState tensor(std::span<const PureState> states);
DensityOp tensor(std::span<const DensityOp> states);

using TensorOperand = std::variant<Matrix, PureState, DensityOp>;

/// Kronecker product of same-kind operands; mixing kinds throws KindMismatch.
TensorOperand tensor(const std::vector<TensorOperand> &operands);

/// Reduced operator on the subsystems with keep[i] == true. Works on any
/// square operator (not only states) so channels can be reconstructed from
/// basis-operator inputs.
Matrix partial_trace(const Matrix &op, std::span<const int> dims, const std::vector<bool> &keep);
DensityOp partial_trace(const DensityOp &rho, std::span<const int> dims,
                        const std::vector<bool> &keep);

// --- dynamics --------------------------------------------------------------

PureState unitary_evolve(const PureState &psi, const Matrix &u);
DensityOp unitary_evolve(const DensityOp &rho, const Matrix &u);
SystemState unitary_evolve(const SystemState &state, const Matrix &u);

/// exp(-i H t) by eigendecomposition. Throws InvalidOperator when H is not
/// Hermitian within tol::herm (relative to max(1, max|H_ij|)).
Matrix hermitian_expm(const Matrix &h, double t);

// --- diagnostics -----------------------------------------------------------

/// max |(U^dag U - I)_ij| over the leading `inner` x `inner` block.
double unitarity_defect(const Matrix &u, int inner);
double hermiticity_defect(const Matrix &m);

/// Half the trace norm of (a - b); both Hermitian.
double trace_distance(const Matrix &a, const Matrix &b);

// --- truncation policy -----------------------------------------------------

/// ceil(n_bar + 6 sqrt(n_bar + 1) + 4 (eta_mode + sqrt(n_bar))^2 + 10).
int default_truncation(double n_bar, double eta_mode);

struct Convergence {
    double value = 0.0;
    int dim_c = 0;
    int dim_r = 0;
    double change = 0.0;
    int doublings = 0;
    bool converged = false;
};

/// Evaluates `observable` at (dim_c, dim_r), then doubles both dimensions
/// until consecutive values differ by less than `tolerance` or
/// `max_doublings` is exhausted. The reported value is the last evaluation.
Convergence converge_dims(const std::function<double(int, int)> &observable, int dim_c, int dim_r,
                          double tolerance = 1e-6, int max_doublings = 2);

}  // namespace hotgate

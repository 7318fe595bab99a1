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

#include "hotgate/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace hotgate {

const char *to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidDimension:
            return "invalid dimension";
        case ErrorKind::InvalidParameter:
            return "invalid parameter";
        case ErrorKind::KindMismatch:
            return "kind mismatch";
        case ErrorKind::Shape:
            return "shape error";
        case ErrorKind::InvalidOperator:
            return "invalid operator";
        case ErrorKind::NoEquilibrium:
            return "no equilibrium";
        case ErrorKind::InfeasibleRatio:
            return "infeasible ratio";
        case ErrorKind::Numeric:
            return "numeric error";
        case ErrorKind::NotConverged:
            return "not converged";
        case ErrorKind::Config:
            return "config error";
    }
    return "error";
}

FockDim::FockDim(int levels) : levels_(levels) {
    if (levels < 2) {
        throw Error(ErrorKind::InvalidDimension,
                    "a Fock mode needs at least 2 levels, got " + std::to_string(levels));
    }
}

namespace {

bool all_finite(const Matrix &m) {
    return m.allFinite();
}

}  // namespace

PureState PureState::from_amplitudes(Vector amplitudes) {
    if (amplitudes.size() == 0) {
        throw Error(ErrorKind::InvalidDimension, "empty state vector");
    }
    if (!amplitudes.allFinite()) {
        throw Error(ErrorKind::Numeric, "state vector has non-finite entries");
    }
    const double norm2 = amplitudes.squaredNorm();
    if (std::abs(norm2 - 1.0) > tol::repair_factor * tol::norm) {
        throw Error(ErrorKind::InvalidParameter,
                    "state is not normalized (|psi|^2 = " + std::to_string(norm2) + ")");
    }
    amplitudes /= std::sqrt(norm2);
    return PureState(std::move(amplitudes));
}

DensityOp DensityOp::from_matrix(Matrix rho) {
    if (rho.rows() != rho.cols() || rho.rows() == 0) {
        throw Error(ErrorKind::Shape, "density operator must be square and nonempty");
    }
    if (!all_finite(rho)) {
        throw Error(ErrorKind::Numeric, "density operator has non-finite entries");
    }
    const double herm = hermiticity_defect(rho);
    if (herm > tol::repair_factor * tol::herm) {
        throw Error(ErrorKind::InvalidParameter,
                    "density operator is not Hermitian (defect " + std::to_string(herm) + ")");
    }
    Matrix h = 0.5 * (rho + rho.adjoint());
    const double tr = h.trace().real();
    if (std::abs(tr - 1.0) > tol::repair_factor * tol::trace) {
        throw Error(ErrorKind::InvalidParameter,
                    "density operator trace is " + std::to_string(tr) + ", expected 1");
    }
    h /= tr;

    DensityOp out(std::move(h));
    double min_eig = 0.0;
    if (out.is_diagonal()) {
        min_eig = out.matrix_.diagonal().real().minCoeff();
    } else if (out.dim() <= 2048) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(out.matrix_, Eigen::EigenvaluesOnly);
        min_eig = es.eigenvalues().minCoeff();
    }
    if (min_eig < -tol::psd) {
        throw Error(ErrorKind::InvalidParameter,
                    "density operator has negative eigenvalue " + std::to_string(min_eig));
    }
    return out;
}

DensityOp DensityOp::from_pure(const PureState &psi) {
    const Vector &v = psi.amplitudes();
    return DensityOp(v * v.adjoint());
}

double DensityOp::purity() const {
    // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
    return matrix_.squaredNorm();
}

bool DensityOp::is_diagonal() const {
    const Eigen::Index n = matrix_.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (i != j && matrix_(i, j) != Complex(0.0)) {
                return false;
            }
        }
    }
    return true;
}

int state_dim(const SystemState &state) {
    return std::visit([](const auto &s) { return s.dim(); }, state);
}

DensityOp to_density(const SystemState &state) {
    if (const auto *psi = std::get_if<PureState>(&state)) {
        return DensityOp::from_pure(*psi);
    }
    return std::get<DensityOp>(state);
}

// --- single-mode operators -------------------------------------------------

Matrix identity(int dim) {
    return Matrix::Identity(dim, dim);
}

Matrix annihilation(FockDim d) {
    const int n = d.levels();
    Matrix a = Matrix::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        a(k - 1, k) = std::sqrt(static_cast<double>(k));
    }
    return a;
}

Matrix creation(FockDim d) {
    return annihilation(d).adjoint();
}

Matrix number_operator(FockDim d) {
    Matrix n = Matrix::Zero(d.levels(), d.levels());
    for (int k = 0; k < d.levels(); ++k) {
        n(k, k) = static_cast<double>(k);
    }
    return n;
}

Matrix position_operator(FockDim d, double width) {
    if (!(width > 0.0) || !std::isfinite(width)) {
        throw Error(ErrorKind::InvalidParameter, "ground-state width must be positive");
    }
    const Matrix a = annihilation(d);
    return width * (a + a.adjoint());
}

Matrix momentum_operator(FockDim d, double width) {
    if (!(width > 0.0) || !std::isfinite(width)) {
        throw Error(ErrorKind::InvalidParameter, "ground-state width must be positive");
    }
    const Matrix a = annihilation(d);
    return (kI / (2.0 * width)) * (a.adjoint() - a);
}

Matrix displacement(Complex alpha, FockDim d) {
    if (alpha == Complex(0.0)) {
        return identity(d.levels());
    }
    const Matrix a = annihilation(d);
    // alpha a^dag - conj(alpha) a is anti-Hermitian; i times it is Hermitian and
    // exp(G) = exp(-i (iG) * 1).
    const Matrix generator = alpha * a.adjoint() - std::conj(alpha) * a;
    return hermitian_expm(kI * generator, 1.0);
}

DensityOp thermal_state(double n_bar, FockDim d) {
    if (!(n_bar >= 0.0) || !std::isfinite(n_bar)) {
        throw Error(ErrorKind::InvalidParameter, "mean occupation must be >= 0");
    }
    const int n = d.levels();
    Matrix rho = Matrix::Zero(n, n);
    if (n_bar == 0.0) {
        rho(0, 0) = 1.0;
        return DensityOp::from_matrix(std::move(rho));
    }
    const double ratio = n_bar / (n_bar + 1.0);
    double p = 1.0;
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
        rho(k, k) = p;
        total += p;
        p *= ratio;
    }
    rho /= total;
    return DensityOp::from_matrix(std::move(rho));
}

PureState fock_state(int n, FockDim d) {
    if (n < 0 || n >= d.levels()) {
        throw Error(ErrorKind::InvalidParameter, "Fock index outside truncation");
    }
    Vector v = Vector::Zero(d.levels());
    v(n) = 1.0;
    return PureState::from_amplitudes(std::move(v));
}

PureState coherent_state(Complex alpha, FockDim d) {
    Vector v = displacement(alpha, d).col(0);
    v.normalize();
    return PureState::from_amplitudes(std::move(v));
}

// --- composite spaces ------------------------------------------------------

Matrix kron(const Matrix &a, const Matrix &b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

Vector kron(const Vector &a, const Vector &b) {
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        out.segment(i * b.size(), b.size()) = a(i) * b;
    }
    return out;
}

Matrix tensor(std::span<const Matrix> ops) {
    if (ops.empty()) {
        throw Error(ErrorKind::Shape, "tensor of an empty list");
    }
    Matrix out = ops.front();
    for (std::size_t i = 1; i < ops.size(); ++i) {
        out = kron(out, ops[i]);
    }
    return out;
}

PureState tensor(std::span<const PureState> states) {
    if (states.empty()) {
        throw Error(ErrorKind::Shape, "tensor of an empty list");
    }
    Vector out = states.front().amplitudes();
    for (std::size_t i = 1; i < states.size(); ++i) {
        out = kron(out, states[i].amplitudes());
    }
    return PureState::from_amplitudes(std::move(out));
}

DensityOp tensor(std::span<const DensityOp> states) {
    if (states.empty()) {
        throw Error(ErrorKind::Shape, "tensor of an empty list");
    }
    Matrix out = states.front().matrix();
    for (std::size_t i = 1; i < states.size(); ++i) {
        out = kron(out, states[i].matrix());
    }
    return DensityOp::from_matrix(std::move(out));
}

TensorOperand tensor(const std::vector<TensorOperand> &operands) {
    if (operands.empty()) {
        throw Error(ErrorKind::Shape, "tensor of an empty list");
    }
    const std::size_t kind = operands.front().index();
    for (const auto &op : operands) {
        if (op.index() != kind) {
            throw Error(ErrorKind::KindMismatch, "cannot tensor operators with states");
        }
    }
    return std::visit(
        [&operands](const auto &first) -> TensorOperand {
            using T = std::decay_t<decltype(first)>;
            std::vector<T> items;
            items.reserve(operands.size());
            for (const auto &op : operands) {
                items.push_back(std::get<T>(op));
            }
            return tensor(std::span<const T>(items));
        },
        operands.front());
}

Matrix partial_trace(const Matrix &op, std::span<const int> dims, const std::vector<bool> &keep) {
    if (dims.size() != keep.size()) {
        throw Error(ErrorKind::Shape, "subsystem mask and dimension list differ in length");
    }
    long total = 1;
    long kept = 1;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (dims[i] < 1) {
            throw Error(ErrorKind::Shape, "subsystem dimension must be positive");
        }
        total *= dims[i];
        if (keep[i]) {
            kept *= dims[i];
        }
    }
    if (op.rows() != total || op.cols() != total) {
        throw Error(ErrorKind::Shape, "operator dimension " + std::to_string(op.rows()) +
                                          " does not factor as the declared subsystems (" +
                                          std::to_string(total) + ")");
    }
    const long traced = total / kept;

    // full[k * traced + t] is the flat index of kept digit-tuple k combined
    // with traced digit-tuple t.
    std::vector<long> full(static_cast<std::size_t>(total));
    const int nsub = static_cast<int>(dims.size());
    std::vector<int> digit(dims.size(), 0);
    for (long flat = 0; flat < total; ++flat) {
        long k = 0;
        long t = 0;
        for (int s = 0; s < nsub; ++s) {
            if (keep[s]) {
                k = k * dims[s] + digit[s];
            } else {
                t = t * dims[s] + digit[s];
            }
        }
        full[static_cast<std::size_t>(k * traced + t)] = flat;
        for (int s = nsub - 1; s >= 0; --s) {
            if (++digit[s] < dims[s]) {
                break;
            }
            digit[s] = 0;
        }
    }

    Matrix out = Matrix::Zero(kept, kept);
    for (long kc = 0; kc < kept; ++kc) {
        for (long kr = 0; kr < kept; ++kr) {
            Complex acc = 0.0;
            for (long t = 0; t < traced; ++t) {
                acc += op(full[kr * traced + t], full[kc * traced + t]);
            }
            out(kr, kc) = acc;
        }
    }
    return out;
}

DensityOp partial_trace(const DensityOp &rho, std::span<const int> dims,
                        const std::vector<bool> &keep) {
    return DensityOp::from_matrix(partial_trace(rho.matrix(), dims, keep));
}

// --- dynamics --------------------------------------------------------------

namespace {

void check_conformable(const Matrix &u, int dim) {
    if (u.rows() != dim || u.cols() != dim) {
        throw Error(ErrorKind::Shape, "propagator is " + std::to_string(u.rows()) + "x" +
                                          std::to_string(u.cols()) + ", state dimension is " +
                                          std::to_string(dim));
    }
}

}  // namespace

PureState unitary_evolve(const PureState &psi, const Matrix &u) {
    check_conformable(u, psi.dim());
    Vector out = u * psi.amplitudes();
    const double norm2 = out.squaredNorm();
    if (std::abs(norm2 - 1.0) > 1e-6) {
        throw Error(ErrorKind::Numeric,
                    "evolution lost norm (|psi|^2 = " + std::to_string(norm2) + ")");
    }
    out /= std::sqrt(norm2);
    return PureState::from_amplitudes(std::move(out));
}

DensityOp unitary_evolve(const DensityOp &rho, const Matrix &u) {
    check_conformable(u, rho.dim());
    Matrix out = u * rho.matrix() * u.adjoint();
    out = 0.5 * (out + out.adjoint());
    const double tr = out.trace().real();
    if (std::abs(tr - 1.0) > 1e-6) {
        throw Error(ErrorKind::Numeric, "evolution lost trace (" + std::to_string(tr) + ")");
    }
    out /= tr;
    return DensityOp::from_matrix(std::move(out));
}

SystemState unitary_evolve(const SystemState &state, const Matrix &u) {
    return std::visit([&u](const auto &s) -> SystemState { return unitary_evolve(s, u); }, state);
}

Matrix hermitian_expm(const Matrix &h, double t) {
    if (h.rows() != h.cols()) {
        throw Error(ErrorKind::Shape, "generator must be square");
    }
    if (!h.allFinite()) {
        throw Error(ErrorKind::InvalidOperator, "generator has non-finite entries");
    }
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if (hermiticity_defect(h) > tol::herm * scale) {
        throw Error(ErrorKind::InvalidOperator, "generator is not Hermitian");
    }
    if (t == 0.0) {
        return identity(static_cast<int>(h.rows()));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::Numeric, "eigendecomposition failed");
    }
    const Matrix &v = es.eigenvectors();
    Vector phases(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) {
        phases(i) = std::exp(-kI * (es.eigenvalues()(i) * t));
    }
    return v * phases.asDiagonal() * v.adjoint();
}

// --- diagnostics -----------------------------------------------------------

double unitarity_defect(const Matrix &u, int inner) {
    const Matrix g = u.adjoint() * u;
    const int n = std::min<int>(inner, static_cast<int>(g.rows()));
    return (g.topLeftCorner(n, n) - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

double hermiticity_defect(const Matrix &m) {
    if (m.rows() != m.cols()) {
        throw Error(ErrorKind::Shape, "hermiticity of a non-square matrix");
    }
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double trace_distance(const Matrix &a, const Matrix &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw Error(ErrorKind::Shape, "trace distance of differently shaped operators");
    }
    const Matrix diff = a - b;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

// --- truncation policy -----------------------------------------------------

int default_truncation(double n_bar, double eta_mode) {
    if (n_bar < 0.0 || eta_mode < 0.0) {
        throw Error(ErrorKind::InvalidParameter, "truncation inputs must be nonnegative");
    }
    const double shift = eta_mode + std::sqrt(n_bar);
    return static_cast<int>(
        std::ceil(n_bar + 6.0 * std::sqrt(n_bar + 1.0) + 4.0 * shift * shift + 10.0));
}

Convergence converge_dims(const std::function<double(int, int)> &observable, int dim_c, int dim_r,
                          double tolerance, int max_doublings) {
    Convergence out;
    out.dim_c = dim_c;
    out.dim_r = dim_r;
    out.value = observable(dim_c, dim_r);
    out.change = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= max_doublings; ++k) {
        const int nc = out.dim_c * 2;
        const int nr = out.dim_r * 2;
        const double next = observable(nc, nr);
        out.change = std::abs(next - out.value);
        out.value = next;
        out.dim_c = nc;
        out.dim_r = nr;
        out.doublings = k;
        if (out.change < tolerance) {
            out.converged = true;
            break;
        }
    }
    return out;
}

}  // namespace hotgate

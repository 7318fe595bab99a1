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

#include "hotgate/channel.hpp"

#include <cmath>

namespace hotgate {

InternalChannel InternalChannel::from_choi(Matrix choi) {
    const auto n = choi.rows();
    const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    if (choi.cols() != n || static_cast<Eigen::Index>(d) * d != n || d < 1) {
        throw Error(ErrorKind::Shape, "Choi matrix must be d^2 x d^2");
    }
    if (!choi.allFinite()) {
        throw Error(ErrorKind::Numeric, "Choi matrix has non-finite entries");
    }
    return InternalChannel(std::move(choi), d);
}

InternalChannel InternalChannel::from_unitary(const Matrix &u) {
    if (u.rows() != u.cols()) {
        throw Error(ErrorKind::Shape, "unitary must be square");
    }
    const int d = static_cast<int>(u.rows());
    // |U>> = sum_i |i> (x) U|i>.
    Vector vec = Vector::Zero(d * d);
    for (int i = 0; i < d; ++i) {
        vec.segment(i * d, d) = u.col(i);
    }
    return InternalChannel(vec * vec.adjoint(), d);
}

InternalChannel InternalChannel::fully_depolarizing(int dim) {
    return InternalChannel(Matrix::Identity(dim * dim, dim * dim) / static_cast<double>(dim), dim);
}

InternalChannel InternalChannel::reconstruct(const std::function<Matrix(const Matrix &)> &map,
                                             int dim) {
    Matrix choi = Matrix::Zero(dim * dim, dim * dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            Matrix e = Matrix::Zero(dim, dim);
            e(i, j) = 1.0;
            const Matrix out = map(e);
            if (out.rows() != dim || out.cols() != dim) {
                throw Error(ErrorKind::Shape, "channel output has the wrong dimension");
            }
            choi.block(i * dim, j * dim, dim, dim) = out;
        }
    }
    return InternalChannel(std::move(choi), dim);
}

Matrix InternalChannel::apply(const Matrix &rho) const {
    if (rho.rows() != dim_ || rho.cols() != dim_) {
        throw Error(ErrorKind::Shape, "channel input has the wrong dimension");
    }
    Matrix out = Matrix::Zero(dim_, dim_);
    for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < dim_; ++j) {
            out += rho(i, j) * choi_.block(i * dim_, j * dim_, dim_, dim_);
        }
    }
    return out;
}

InternalChannel InternalChannel::then(const Matrix &u) const {
    if (u.rows() != dim_ || u.cols() != dim_) {
        throw Error(ErrorKind::Shape, "unitary has the wrong dimension");
    }
    const Matrix lifted = kron(Matrix::Identity(dim_, dim_), u);
    return InternalChannel(lifted * choi_ * lifted.adjoint(), dim_);
}

double InternalChannel::min_choi_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (choi_ + choi_.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace hotgate

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

#pragma once

#include <functional>

#include "hotgate/fock.hpp"

namespace hotgate {

/// A linear map on d x d operators stored as its Choi matrix
///
///     J = sum_ij |i><j| (x) L(|i><j|),
///
/// so Tr J = d for trace-preserving maps and L(rho) = Tr_1[(rho^T (x) 1) J].
class InternalChannel {
   public:
    static InternalChannel from_choi(Matrix choi);
    static InternalChannel from_unitary(const Matrix &u);
    static InternalChannel fully_depolarizing(int dim);

    /// Choi matrix of `map`, evaluated on the d^2 basis operators |i><j|.
    static InternalChannel reconstruct(const std::function<Matrix(const Matrix &)> &map, int dim);

    int dim() const noexcept {
        return dim_;
    }
    const Matrix &choi() const noexcept {
        return choi_;
    }

    Matrix apply(const Matrix &rho) const;

    /// Channel rho -> U L(rho) U^dag.
    InternalChannel then(const Matrix &u) const;

    /// Smallest Choi eigenvalue (negative values mean the map is not CP).
    double min_choi_eigenvalue() const;

   private:
    InternalChannel(Matrix choi, int dim) : choi_(std::move(choi)), dim_(dim) {
    }
    Matrix choi_;
    int dim_;
};

}  // namespace hotgate

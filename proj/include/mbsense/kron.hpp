// SPDX-License-Identifier: Apache-2.0
//
// mbsense: multi-band bistatic sensing under dense multipath
// Copyright (C) 2026 The mbsense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef MBSENSE_KRON_HPP
#define MBSENSE_KRON_HPP

#include <Eigen/Dense>

namespace mbs
{
    /// (A ⊗ B ⊗ C) v without forming the Kronecker product. The vector is indexed
    /// i * (nb * nc) + j * nc + k, matching the frequency ⊗ Tx ⊗ Rx stacking.
    Eigen::VectorXcd kron3_apply(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b,
                                 const Eigen::MatrixXcd& c, const Eigen::VectorXcd& v);

    Eigen::VectorXcd kron3(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b, const Eigen::VectorXcd& c);

    Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

    /// Hermitian Toeplitz matrix with first column `col` and first row col^H.
    Eigen::MatrixXcd hermitian_toeplitz(const Eigen::VectorXcd& col);

} // namespace mbs

#endif

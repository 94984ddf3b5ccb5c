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

#include "mbsense/kron.hpp"

#include <stdexcept>

namespace mbs
{
    Eigen::VectorXcd kron3_apply(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b,
                                 const Eigen::MatrixXcd& c, const Eigen::VectorXcd& v)
    {
        const Eigen::Index na = a.cols(), nb = b.cols(), nc = c.cols();
        if (v.size() != na * nb * nc)
            throw std::invalid_argument("kron3_apply: dimension mismatch");
        const Eigen::Index ma = a.rows(), mb = b.rows(), mc = c.rows();

        using RowMat = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        Eigen::Map<const RowMat> x(v.data(), na, nb * nc);
        RowMat y1 = a * x; // ma x (nb*nc)

        Eigen::VectorXcd out(ma * mb * mc);
        Eigen::Map<RowMat> y(out.data(), ma, mb * mc);
        for (Eigen::Index i = 0; i < ma; ++i)
        {
            Eigen::Map<const RowMat> slice(y1.row(i).data(), nb, nc);
            RowMat z = b * slice * c.transpose();
            y.row(i) = Eigen::Map<const Eigen::RowVectorXcd>(z.data(), mb * mc);
        }
        return out;
    }

    Eigen::VectorXcd kron3(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b, const Eigen::VectorXcd& c)
    {
        Eigen::VectorXcd out(a.size() * b.size() * c.size());
        Eigen::Index idx = 0;
        for (Eigen::Index i = 0; i < a.size(); ++i)
            for (Eigen::Index j = 0; j < b.size(); ++j)
            {
                const std::complex<double> ab = a[i] * b[j];
                for (Eigen::Index k = 0; k < c.size(); ++k)
                    out[idx++] = ab * c[k];
            }
        return out;
    }

    Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b)
    {
        Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = 0; j < a.cols(); ++j)
                out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        return out;
    }

    Eigen::MatrixXcd hermitian_toeplitz(const Eigen::VectorXcd& col)
    {
        const Eigen::Index n = col.size();
        Eigen::MatrixXcd t(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                t(i, j) = i >= j ? col[i - j] : std::conj(col[j - i]);
        // The diagonal of a Hermitian matrix is real.
        for (Eigen::Index i = 0; i < n; ++i)
            t(i, i) = col[0].real();
        return t;
    }

} // namespace mbs

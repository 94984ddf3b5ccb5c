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

#include "mbsense/hungarian.hpp"

#include <limits>
#include <stdexcept>

namespace mbs
{
    namespace
    {
        // Shortest augmenting path with potentials; requires rows <= cols. 1-based internally.
        std::vector<int> solve(const Eigen::MatrixXd& a)
        {
            const int n = static_cast<int>(a.rows());
            const int m = static_cast<int>(a.cols());
            const double inf = std::numeric_limits<double>::infinity();
            std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
            std::vector<int> p(m + 1, 0), way(m + 1, 0);
            for (int i = 1; i <= n; ++i)
            {
                p[0] = i;
                int j0 = 0;
                std::vector<double> minv(m + 1, inf);
                std::vector<char> used(m + 1, 0);
                do
                {
                    used[j0] = 1;
                    const int i0 = p[j0];
                    double delta = inf;
                    int j1 = 0;
                    for (int j = 1; j <= m; ++j)
                    {
                        if (used[j])
                            continue;
                        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                        if (cur < minv[j])
                        {
                            minv[j] = cur;
                            way[j] = j0;
                        }
                        if (minv[j] < delta)
                        {
                            delta = minv[j];
                            j1 = j;
                        }
                    }
                    for (int j = 0; j <= m; ++j)
                    {
                        if (used[j])
                        {
                            u[p[j]] += delta;
                            v[j] -= delta;
                        }
                        else
                            minv[j] -= delta;
                    }
                    j0 = j1;
                } while (p[j0] != 0);
                do
                {
                    const int j1 = way[j0];
                    p[j0] = p[j1];
                    j0 = j1;
                } while (j0 != 0);
            }
            std::vector<int> row_to_col(n, -1);
            for (int j = 1; j <= m; ++j)
                if (p[j] != 0)
                    row_to_col[p[j] - 1] = j - 1;
            return row_to_col;
        }
    } // namespace

    std::vector<int> hungarian(const Eigen::MatrixXd& cost)
    {
        if (!cost.allFinite())
            throw std::invalid_argument("hungarian: cost matrix must be finite");
        if (cost.rows() == 0 || cost.cols() == 0)
            return std::vector<int>(cost.rows(), -1);
        if (cost.rows() <= cost.cols())
            return solve(cost);
        const std::vector<int> col_to_row = solve(cost.transpose());
        std::vector<int> row_to_col(cost.rows(), -1);
        for (std::size_t j = 0; j < col_to_row.size(); ++j)
            if (col_to_row[j] >= 0)
                row_to_col[col_to_row[j]] = static_cast<int>(j);
        return row_to_col;
    }

    double assignment_cost(const Eigen::MatrixXd& cost, const std::vector<int>& row_to_col)
    {
        double total = 0.0;
        for (std::size_t i = 0; i < row_to_col.size(); ++i)
            if (row_to_col[i] >= 0)
                total += cost(static_cast<Eigen::Index>(i), row_to_col[i]);
        return total;
    }

} // namespace mbs

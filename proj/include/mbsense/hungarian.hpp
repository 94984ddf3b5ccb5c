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

#ifndef MBSENSE_HUNGARIAN_HPP
#define MBSENSE_HUNGARIAN_HPP

#include <vector>

#include <Eigen/Dense>

namespace mbs
{
    /// Minimum-cost assignment on a rectangular matrix. Returns, for each row, the assigned
    /// column or -1. min(rows, cols) pairs are assigned.
    std::vector<int> hungarian(const Eigen::MatrixXd& cost);

    double assignment_cost(const Eigen::MatrixXd& cost, const std::vector<int>& row_to_col);

} // namespace mbs

#endif

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

// Small scenarios shared by the unit tests.

#ifndef MBSENSE_TEST_HELPERS_HPP
#define MBSENSE_TEST_HELPERS_HPP

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

#include "mbsense/config.hpp"
#include "mbsense/scenario.hpp"

namespace mbs::test
{
    inline constexpr double deg = pi / 180.0;

    inline Scenario reference(double tx_psd_dbm = -40.0, double dmc_ratio_db = -30.0)
    {
        return reference_config(tx_psd_dbm, dmc_ratio_db).scenario;
    }

    inline Scenario reference_no_dmc(double tx_psd_dbm)
    {
        return with_operating_point(reference(tx_psd_dbm), dbm_to_watt(tx_psd_dbm), 0.0);
    }

    /// One band, K paths at the given geometry, unit-ish gammas.
    inline Scenario small_scenario(int n, int lt, int lr, const std::vector<GeometricParams>& x, double dmc_ratio,
                                   double tx_psd = 1e-6, int n_bands = 1)
    {
        Scenario s;
        for (int m = 0; m < n_bands; ++m)
        {
            SubBand b;
            b.carrier_freq = 8.75e9 + 6e9 * m;
            b.subcarrier_spacing = 1e6;
            b.n_subcarriers = n;
            b.decay_rate = 0.5 + m;
            s.sub_bands.push_back(b);
        }
        s.arrays = {lt, lr, 0.015, 0.015};
        for (std::size_t k = 0; k < x.size(); ++k)
        {
            PathTruth p;
            p.geometry = x[k];
            for (int m = 0; m < n_bands; ++m)
                p.coeffs.push_back(std::polar(1.0 / (1.0 + k), 0.3 + 0.7 * k + 0.2 * m));
            if (k > 0)
                p.bistatic_delays = bistatic_delays_from_angles(x[0].delay, x[k].aod, x[k].aoa);
            s.paths.push_back(p);
        }
        s.tx_psd = tx_psd;
        s.dmc_ratio = dmc_ratio;
        s.noise_psd = dbm_to_watt(-174.0);
        s.noise_figure = db_to_linear(7.0);
        return validate(s);
    }

    inline Eigen::VectorXcd random_vector(Eigen::Index n, std::mt19937_64& rng)
    {
        std::normal_distribution<double> nd;
        Eigen::VectorXcd v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v[i] = {nd(rng), nd(rng)};
        return v;
    }

    inline double rel_err(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b)
    {
        return (a - b).norm() / std::max(b.norm(), 1e-300);
    }
} // namespace mbs::test

#endif

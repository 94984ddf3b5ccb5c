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

#ifndef MBSENSE_LIMITS_HPP
#define MBSENSE_LIMITS_HPP

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "mbsense/channel.hpp"
#include "mbsense/scenario.hpp"

namespace mbs
{
    /// Parameter layout [tau_1..K, phi_1..K, theta_1..K, Re g_(k,m), Im g_(k,m)], gains k-major.
    struct ParamLayout
    {
        int n_paths = 0;
        int n_bands = 0;

        int size() const { return 3 * n_paths + 2 * n_paths * n_bands; }
        int delay(int k) const { return k; }
        int aod(int k) const { return n_paths + k; }
        int aoa(int k) const { return 2 * n_paths + k; }
        int re_gain(int k, int m) const { return 3 * n_paths + k * n_bands + m; }
        int im_gain(int k, int m) const { return 3 * n_paths + n_paths * n_bands + k * n_bands + m; }
        /// Indices kept by the single-band FIM of band m: geometry, then Re g, then Im g.
        std::vector<int> band_indices(int m) const;
    };

    /// Derivative of the band-m mean with respect to the full parameter vector. Columns
    /// for the gains of other bands are zero.
    Eigen::MatrixXcd band_jacobian(const SubBand& band, const ArrayConfig& arrays,
                                   const std::vector<GeometricParams>& x, const std::vector<cd>& gains, int n_bands,
                                   int m);

    Eigen::MatrixXcd jacobian(const Scenario& scenario, int m);

    /// 2 Re(D^H M^{-1} D) for one band.
    Eigen::MatrixXd band_fim(const Eigen::MatrixXcd& d, const BandCovariance& cov);

    struct FimResult
    {
        Eigen::MatrixXd total;
        std::vector<Eigen::MatrixXd> per_band;
    };

    FimResult fim(const Scenario& scenario, const CovarianceSet& cov);

    struct CrbResult
    {
        Eigen::MatrixXd inverse;
        Eigen::VectorXd diag;
        double condition = 0.0;    // of the diagonally equilibrated FIM
        bool pseudo_inverse = false; // set when condition > 1e12 or the FIM is singular
    };

    /// Inverse of a FIM. Inversion runs on the equilibrated matrix so that parameter
    /// units do not enter the conditioning test.
    CrbResult crb(const Eigen::MatrixXd& f);

    Eigen::MatrixXd select(const Eigen::MatrixXd& f, const std::vector<int>& idx);

    /// (sum_m 1/c_m)^{-1} over finite positive entries. Infinity when none qualifies.
    double approx_crb(const std::vector<double>& per_band);

    /// |g|^2 / (u^T S u) with S the (Re g, Im g) block of an inverse FIM and u = [Re g, Im g]/|g|.
    double esnr_from_inverse(const Eigen::MatrixXd& inverse, int re_index, int im_index, cd gain);

    struct LimitsReport
    {
        ParamLayout layout;
        FimResult fim;
        CrbResult joint;
        std::vector<CrbResult> band; // reduced single-band inverses, indexed by ParamLayout::band_indices
        Eigen::VectorXd crb_joint;   // 3K geometric CRBs from the joint FIM
        Eigen::MatrixXd crb_band;    // M x 3K geometric CRBs from each single band
        Eigen::VectorXd crb_approx;  // 3K harmonic combinations of crb_band
        Eigen::MatrixXd esnr_joint;  // K x M
        Eigen::MatrixXd esnr_band;   // K x M
        std::vector<std::vector<cd>> gains; // [k][m]
    };

    LimitsReport compute_limits(const Scenario& scenario, const CovarianceSet& cov);
    LimitsReport compute_limits(const Scenario& scenario);

    /// Power at which a CRB-like quantity crosses a target, by bisection
    /// on log power between lo and hi [W/Hz]. f must be monotone on the bracket.
    template <class F> double bisect_log(F&& f, double target, double lo, double hi, int iterations = 80);

    struct BggGrid
    {
        double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0; // [m]
        int nx = 256;
        int ny = 256;
    };

    struct BggCell
    {
        double x = 0.0;
        double y = 0.0;
        int band = 0;
        double gamma_db = 0.0;
        bool masked = false;
    };

    inline constexpr double bgg_floor_db = -250.0;

    /// Bistatic geometric gain per cell and band. Requires tx/rx poses in the scenario.
    std::vector<BggCell> bgg_map(const Scenario& scenario, const BggGrid& grid);

    /// Gamma_m at one point (linear). Throws for points coincident with tx or rx.
    double bgg_value(const Scenario& scenario, int m, Vec2 p);

    template <class F> double bisect_log(F&& f, double target, double lo, double hi, int iterations)
    {
        double a = std::log(lo), b = std::log(hi);
        const double fa = f(lo) - target;
        for (int i = 0; i < iterations; ++i)
        {
            const double mid = 0.5 * (a + b);
            const double fm = f(std::exp(mid)) - target;
            if ((fm > 0.0) == (fa > 0.0))
                a = mid;
            else
                b = mid;
        }
        return std::exp(0.5 * (a + b));
    }

} // namespace mbs

#endif

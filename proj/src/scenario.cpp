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

#include "mbsense/scenario.hpp"

#include <cmath>
#include <sstream>

namespace mbs
{
    namespace
    {
        [[noreturn]] void fail(const std::string& field, const std::string& what)
        {
            throw ScenarioError(field + ": " + what);
        }

        std::string indexed(const std::string& base, std::size_t i, const std::string& field)
        {
            std::ostringstream os;
            os << base << '[' << i << "]." << field;
            return os.str();
        }

        double fold_angle(double a)
        {
            a = std::remainder(a, 2.0 * pi);
            return a == -pi ? pi : a;
        }

        bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

        Vec2 unit(Vec2 v, const std::string& field)
        {
            double n = norm(v);
            if (!(n > 0.0) || !std::isfinite(n))
                fail(field, "must be a nonzero finite vector");
            return (1.0 / n) * v;
        }
    } // namespace

    double norm(Vec2 a) { return std::hypot(a.x, a.y); }

    Scenario validate(const Scenario& in)
    {
        Scenario s = in;
        if (s.sub_bands.empty())
            fail("sub_bands", "at least one sub-band required");
        const int n_sc = s.sub_bands.front().n_subcarriers;
        for (std::size_t m = 0; m < s.sub_bands.size(); ++m)
        {
            const SubBand& b = s.sub_bands[m];
            if (!finite_positive(b.carrier_freq))
                fail(indexed("sub_bands", m, "carrier_freq"), "must be > 0");
            if (!finite_positive(b.subcarrier_spacing))
                fail(indexed("sub_bands", m, "subcarrier_spacing"), "must be > 0");
            if (b.n_subcarriers < 2)
                fail(indexed("sub_bands", m, "n_subcarriers"), "must be >= 2");
            if (b.n_subcarriers != n_sc)
                fail(indexed("sub_bands", m, "n_subcarriers"), "all sub-bands must share the subcarrier count");
            if (!finite_positive(b.decay_rate))
                fail(indexed("sub_bands", m, "decay_rate"), "must be > 0");
            if (b.vmd_kappa_tx && !(std::isfinite(*b.vmd_kappa_tx) && *b.vmd_kappa_tx >= 0.0))
                fail(indexed("sub_bands", m, "vmd_kappa_tx"), "must be >= 0");
            if (b.vmd_kappa_rx && !(std::isfinite(*b.vmd_kappa_rx) && *b.vmd_kappa_rx >= 0.0))
                fail(indexed("sub_bands", m, "vmd_kappa_rx"), "must be >= 0");
        }

        if (s.arrays.n_tx < 1)
            fail("arrays.n_tx", "must be >= 1");
        if (s.arrays.n_rx < 1)
            fail("arrays.n_rx", "must be >= 1");
        if (!finite_positive(s.arrays.spacing_tx))
            fail("arrays.spacing_tx", "must be > 0");
        if (!finite_positive(s.arrays.spacing_rx))
            fail("arrays.spacing_rx", "must be > 0");

        if (s.paths.empty())
            fail("paths", "at least the LoS path is required");
        const std::size_t n_bands = s.sub_bands.size();
        for (std::size_t k = 0; k < s.paths.size(); ++k)
        {
            PathTruth& p = s.paths[k];
            if (!(std::isfinite(p.geometry.delay) && p.geometry.delay > 0.0))
                fail(indexed("paths", k, "delay"), "must be > 0");
            p.geometry.aod = fold_angle(p.geometry.aod);
            p.geometry.aoa = fold_angle(p.geometry.aoa);
            if (!(std::abs(p.geometry.aod) < pi / 2))
                fail(indexed("paths", k, "aod"), "aod out of range (-90, 90) deg");
            if (!(std::abs(p.geometry.aoa) < pi / 2))
                fail(indexed("paths", k, "aoa"), "aoa out of range (-90, 90) deg");
            if (p.coeffs.size() != n_bands)
                fail(indexed("paths", k, "coeffs"), "exactly one coefficient per sub-band required");
            for (const cd& c : p.coeffs)
                if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
                    fail(indexed("paths", k, "coeffs"), "must be finite");
            if (k > 0)
            {
                if (p.geometry.delay < s.paths.front().geometry.delay)
                    fail(indexed("paths", k, "delay"), "must not precede the LoS delay");
                if (!p.bistatic_delays)
                    fail(indexed("paths", k, "bistatic_delays"), "required for scatterer paths");
                const auto& bd = *p.bistatic_delays;
                if (!finite_positive(bd[0]) || !finite_positive(bd[1]))
                    fail(indexed("paths", k, "bistatic_delays"), "must be > 0");
            }
        }

        if (!(std::isfinite(s.tx_psd) && s.tx_psd >= 0.0))
            fail("tx_psd", "must be >= 0");
        if (!(std::isfinite(s.dmc_ratio) && s.dmc_ratio >= 0.0))
            fail("dmc_ratio", "must be >= 0");
        if (!finite_positive(s.noise_psd))
            fail("noise_psd", "must be > 0");
        if (!finite_positive(s.noise_figure))
            fail("noise_figure", "must be > 0");

        if (s.tx_pose.has_value() != s.rx_pose.has_value())
            fail("tx_pos", "tx and rx positions must be given together");
        if (s.tx_pose)
        {
            s.tx_pose->broadside = unit(s.tx_pose->broadside, "tx_broadside");
            s.tx_pose->axis = unit(s.tx_pose->axis, "tx_axis");
            s.rx_pose->broadside = unit(s.rx_pose->broadside, "rx_broadside");
            s.rx_pose->axis = unit(s.rx_pose->axis, "rx_axis");
            if (norm(s.tx_pose->position - s.rx_pose->position) == 0.0)
                fail("rx_pos", "coincides with tx_pos");
        }
        return s;
    }

    std::pair<ArrayPose, ArrayPose> facing_poses(Vec2 tx, Vec2 rx)
    {
        Vec2 d = rx - tx;
        double n = norm(d);
        if (!(n > 0.0))
            throw ScenarioError("rx_pos: coincides with tx_pos");
        Vec2 u = (1.0 / n) * d;
        Vec2 left{-u.y, u.x};
        return {ArrayPose{tx, u, left}, ArrayPose{rx, -1.0 * u, left}};
    }

    BistaticParams cartesian_to_bistatic(Vec2 p, const ArrayPose& tx, const ArrayPose& rx)
    {
        Vec2 to_p_tx = p - tx.position;
        Vec2 to_p_rx = p - rx.position;
        double d_tx = norm(to_p_tx);
        double d_rx = norm(to_p_rx);
        if (d_tx == 0.0)
            throw ScenarioError("point: coincides with the transmitter");
        if (d_rx == 0.0)
            throw ScenarioError("point: coincides with the receiver");
        if (norm(tx.position - rx.position) == 0.0)
            throw ScenarioError("rx_pos: coincides with tx_pos");

        BistaticParams out;
        out.delay_tx = d_tx / speed_of_light;
        out.delay_rx = d_rx / speed_of_light;
        out.delay = out.delay_tx + out.delay_rx;
        out.aod = std::atan2(dot(to_p_tx, tx.axis), dot(to_p_tx, tx.broadside));
        out.aoa = std::atan2(dot(to_p_rx, rx.axis), dot(to_p_rx, rx.broadside));
        return out;
    }

    std::array<double, 2> bistatic_delays_from_angles(double los_delay, double aod, double aoa)
    {
        // Facing arrays: interior angles of the triangle are |aod| at Tx and |aoa| at Rx,
        // and the point lies on one side of the baseline only if both signs agree.
        if (aod * aoa < 0.0)
            throw ScenarioError("paths: aod and aoa on opposite sides of the baseline");
        double a = std::abs(aod);
        double b = std::abs(aoa);
        double s = std::sin(a + b);
        if (!(s > 1e-12) || a + b >= pi)
            throw ScenarioError("paths: degenerate bistatic triangle");
        double base = los_delay;
        return {base * std::sin(b) / s, base * std::sin(a) / s};
    }

    Scenario with_operating_point(const Scenario& scenario, double tx_psd, double dmc_ratio)
    {
        Scenario s = scenario;
        s.tx_psd = tx_psd;
        s.dmc_ratio = dmc_ratio;
        return s;
    }

    Scenario single_band(const Scenario& scenario, int m)
    {
        if (m < 0 || m >= scenario.n_bands())
            throw ScenarioError("sub_bands: band index out of range");
        Scenario s = scenario;
        s.sub_bands = {scenario.sub_bands[m]};
        for (PathTruth& p : s.paths)
            p.coeffs = {p.coeffs[m]};
        return s;
    }

} // namespace mbs

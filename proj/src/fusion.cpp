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

#include "mbsense/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mbsense/hungarian.hpp"

namespace mbs
{
    NormRef norm_ref(const Scenario& scenario)
    {
        if (scenario.sub_bands.empty())
            throw std::invalid_argument("norm_ref: scenario has no sub-bands");
        return {scenario.n_subcarriers(), scenario.sub_bands.front().subcarrier_spacing, scenario.arrays.n_tx,
                scenario.arrays.n_rx};
    }

    Eigen::Vector3d normalize(const GeometricParams& x, const NormRef& ref)
    {
        return {ref.n_subcarriers * ref.subcarrier_spacing * x.delay, 2.0 * std::sin(x.aod) / ref.n_tx,
                2.0 * std::sin(x.aoa) / ref.n_rx};
    }

    GeometricParams denormalize(const Eigen::Vector3d& t, const NormRef& ref)
    {
        const double su = t[1] * ref.n_tx / 2.0;
        const double sv = t[2] * ref.n_rx / 2.0;
        if (std::abs(su) > 1.0 || std::abs(sv) > 1.0)
            throw std::domain_error("denormalize: angle coordinate outside the valid range");
        return {t[0] / (ref.n_subcarriers * ref.subcarrier_spacing), std::asin(su), std::asin(sv)};
    }

    std::vector<Alias> enumerate_aliases(double angle, double wavelength, double spacing)
    {
        if (!(wavelength > 0.0) || !(spacing > 0.0))
            throw std::invalid_argument("enumerate_aliases: wavelength and spacing must be > 0");
        const double s = std::sin(angle);
        const double step = wavelength / spacing;
        std::vector<Alias> out;
        const int lo = static_cast<int>(std::ceil((-1.0 - s) / step));
        const int hi = static_cast<int>(std::floor((1.0 - s) / step));
        for (int r = lo; r <= hi; ++r)
        {
            if (r == 0)
            {
                out.push_back({0, angle});
                continue;
            }
            const double v = s + r * step;
            if (std::abs(v) <= 1.0)
                out.push_back({r, std::asin(v)});
        }
        return out;
    }

    PathGroup make_group(const PathEstimate& path, const SubBand& band, const ArrayConfig& arrays, int band_pos)
    {
        PathGroup g;
        g.band = band_pos;
        g.delay = path.x.delay;
        g.aod = enumerate_aliases(path.x.aod, band.wavelength(), arrays.spacing_tx);
        g.aoa = enumerate_aliases(path.x.aoa, band.wavelength(), arrays.spacing_rx);
        g.ambiguous = g.aod.size() > 1 || g.aoa.size() > 1;
        g.estimate = path;
        return g;
    }

    MatchCost match_cost(const PathGroup& p, const PathGroup& i, const NormRef& ref)
    {
        if (p.aod.empty() || p.aoa.empty() || i.aod.empty() || i.aoa.empty())
            throw std::invalid_argument("match_cost: empty alias set");
        const double inf = std::numeric_limits<double>::infinity();
        MatchCost best;
        best.cost = inf;
        double second = inf;
        for (int a = 0; a < static_cast<int>(p.aod.size()); ++a)
            for (int b = 0; b < static_cast<int>(p.aoa.size()); ++b)
            {
                const Eigen::Vector3d tp = normalize({p.delay, p.aod[a].angle, p.aoa[b].angle}, ref);
                for (int c = 0; c < static_cast<int>(i.aod.size()); ++c)
                    for (int d = 0; d < static_cast<int>(i.aoa.size()); ++d)
                    {
                        const Eigen::Vector3d ti = normalize({i.delay, i.aod[c].angle, i.aoa[d].angle}, ref);
                        const double cost = (tp - ti).norm();
                        if (cost < best.cost)
                        {
                            second = best.cost;
                            best.cost = cost;
                            best.p_aod = a;
                            best.p_aoa = b;
                            best.i_aod = c;
                            best.i_aoa = d;
                        }
                        else if (cost < second)
                            second = cost;
                    }
            }
        best.prominence = second - best.cost;
        return best;
    }

    bool gate_band(const SingleBandEstimate& est, double esnr_threshold)
    {
        return std::any_of(est.paths.begin(), est.paths.end(),
                           [&](const PathEstimate& p) { return p.esnr >= esnr_threshold; });
    }

    std::vector<PathGroup> FusionState::current_groups() const
    {
        std::vector<PathGroup> out;
        out.reserve(unambiguous.size() + ambiguous.size());
        for (const UnambiguousRecord& r : unambiguous)
        {
            PathGroup g;
            g.id = r.id;
            g.delay = r.combined.delay;
            g.aod = {{0, r.combined.aod}};
            g.aoa = {{0, r.combined.aoa}};
            out.push_back(std::move(g));
        }
        out.insert(out.end(), ambiguous.begin(), ambiguous.end());
        return out;
    }

    Association associate(const FusionState& state, const std::vector<PathGroup>& new_groups,
                          const FusionConfig& config, const NormRef& ref)
    {
        Association out;
        const std::vector<PathGroup> rows = state.current_groups();
        const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
        const Eigen::Index m = static_cast<Eigen::Index>(new_groups.size());
        std::vector<char> taken(m, 0);
        if (n > 0 && m > 0)
        {
            std::vector<MatchCost> costs(n * m);
            Eigen::MatrixXd c(n, m);
            // Forbidden pairs get a cost above any sum of admissible ones.
            const double forbidden = 1.0 + config.cost_max * static_cast<double>(std::min(n, m) + 1);
            for (Eigen::Index p = 0; p < n; ++p)
                for (Eigen::Index i = 0; i < m; ++i)
                {
                    costs[p * m + i] = match_cost(rows[p], new_groups[i], ref);
                    const double v = costs[p * m + i].cost;
                    // Snapped to 1e-9 so near ties resolve to the lower index like exact ones.
                    c(p, i) = v > config.cost_max ? forbidden : std::round(v * 1e9) * 1e-9;
                }
            const std::vector<int> assign = hungarian(c);
            for (Eigen::Index p = 0; p < n; ++p)
            {
                const int i = assign[p];
                if (i < 0 || costs[p * m + i].cost > config.cost_max)
                    continue;
                out.matches.push_back({static_cast<int>(p), i, costs[p * m + i]});
                taken[i] = 1;
            }
        }
        for (Eigen::Index i = 0; i < m; ++i)
            if (!taken[i])
                out.unmatched.push_back(static_cast<int>(i));
        return out;
    }

    BandRecord record_from_group(const PathGroup& g, int aod_pos, int aoa_pos)
    {
        BandRecord r;
        r.detected = true;
        const PathEstimate& e = g.estimate;
        r.x = {g.delay, g.aod.at(aod_pos).angle, g.aoa.at(aoa_pos).angle};
        // d(alias)/d(principal) = cos(principal) / cos(alias).
        auto carried = [](double crb, double principal, double alias) {
            const double ca = std::cos(alias);
            if (ca == 0.0)
                return std::numeric_limits<double>::infinity();
            const double ratio = std::cos(principal) / ca;
            return crb * ratio * ratio;
        };
        const double crb_t = e.crb[0];
        const double crb_u = carried(e.crb[1], e.x.aod, r.x.aod);
        const double crb_v = carried(e.crb[2], e.x.aoa, r.x.aoa);
        auto inv = [](double c) { return c > 0.0 && std::isfinite(c) ? 1.0 / c : 0.0; };
        r.weight = {inv(crb_t), inv(crb_u), inv(crb_v)};
        r.gain = e.gain;
        r.esnr = e.esnr;
        return r;
    }

    std::optional<GeometricParams> combine(const std::vector<BandRecord>& history)
    {
        std::array<double, 3> num{0.0, 0.0, 0.0}, den{0.0, 0.0, 0.0};
        for (const BandRecord& r : history)
        {
            const std::array<double, 3> v{r.x.delay, r.x.aod, r.x.aoa};
            for (int j = 0; j < 3; ++j)
            {
                num[j] += r.weight[j] * v[j];
                den[j] += r.weight[j];
            }
        }
        if (den[0] <= 0.0 || den[1] <= 0.0 || den[2] <= 0.0)
            return std::nullopt;
        return GeometricParams{num[0] / den[0], num[1] / den[1], num[2] / den[2]};
    }

    void update_records(FusionState& state, const Association& assoc, const std::vector<PathGroup>& new_groups,
                        const FusionConfig& config, int band_pos)
    {
        const int n_u = static_cast<int>(state.unambiguous.size());
        const std::size_t len = static_cast<std::size_t>(band_pos) + 1;
        for (UnambiguousRecord& r : state.unambiguous)
            r.history.resize(len);

        std::vector<char> leave_ambiguous(state.ambiguous.size(), 0);
        std::vector<UnambiguousRecord> converted;
        for (const Match& mt : assoc.matches)
        {
            const PathGroup& i = new_groups.at(mt.col);
            if (mt.row < n_u)
            {
                state.unambiguous[mt.row].history[band_pos] = record_from_group(i, mt.cost.i_aod, mt.cost.i_aoa);
                continue;
            }
            const int a = mt.row - n_u;
            const PathGroup& p = state.ambiguous[a];
            if (!(mt.cost.prominence > config.prominence))
                continue; // stays ambiguous; the new group is consumed
            UnambiguousRecord r;
            r.id = p.id;
            r.history.resize(len);
            r.history[p.band] = record_from_group(p, mt.cost.p_aod, mt.cost.p_aoa);
            r.history[band_pos] = record_from_group(i, mt.cost.i_aod, mt.cost.i_aoa);
            converted.push_back(std::move(r));
            leave_ambiguous[a] = 1;
        }

        std::vector<PathGroup> still;
        for (std::size_t a = 0; a < state.ambiguous.size(); ++a)
            if (!leave_ambiguous[a])
                still.push_back(std::move(state.ambiguous[a]));
        state.ambiguous = std::move(still);
        for (UnambiguousRecord& r : converted)
            state.unambiguous.push_back(std::move(r));

        for (int idx : assoc.unmatched)
        {
            PathGroup g = new_groups.at(idx);
            g.id = state.next_id++;
            if (g.ambiguous)
            {
                state.ambiguous.push_back(std::move(g));
                continue;
            }
            UnambiguousRecord r;
            r.id = g.id;
            r.history.resize(len);
            r.history[band_pos] = record_from_group(g, 0, 0);
            state.unambiguous.push_back(std::move(r));
        }

        std::vector<UnambiguousRecord> kept;
        for (UnambiguousRecord& r : state.unambiguous)
        {
            if (const std::optional<GeometricParams> c = combine(r.history))
            {
                r.combined = *c;
                kept.push_back(std::move(r));
            }
        }
        state.unambiguous = std::move(kept);
        state.bands_processed = band_pos + 1;
    }

    FinalEstimate run_fusion(const std::vector<SingleBandEstimate>& estimates, const Scenario& scenario,
                             const FusionConfig& config)
    {
        const NormRef ref = norm_ref(scenario);
        FusionState state;
        for (std::size_t pos = 0; pos < estimates.size(); ++pos)
        {
            const SingleBandEstimate& est = estimates[pos];
            const int band_pos = static_cast<int>(pos);
            if (!gate_band(est, config.esnr_threshold))
            {
                for (UnambiguousRecord& r : state.unambiguous)
                    r.history.resize(pos + 1);
                state.bands_processed = band_pos + 1;
                continue;
            }
            std::vector<PathGroup> groups;
            for (const PathEstimate& p : est.paths)
                groups.push_back(make_group(p, scenario.sub_bands.at(est.band), scenario.arrays, band_pos));
            const Association assoc = associate(state, groups, config, ref);
            update_records(state, assoc, groups, config, band_pos);
        }

        FinalEstimate out;
        for (const UnambiguousRecord& r : state.unambiguous)
        {
            FusedPath f;
            f.id = r.id;
            f.x = r.combined;
            std::array<double, 3> w{0.0, 0.0, 0.0};
            f.gains.assign(scenario.n_bands(), std::nullopt);
            for (std::size_t pos = 0; pos < r.history.size(); ++pos)
            {
                const BandRecord& b = r.history[pos];
                for (int j = 0; j < 3; ++j)
                    w[j] += b.weight[j];
                if (b.detected)
                    f.gains[estimates[pos].band] = b.gain;
            }
            for (int j = 0; j < 3; ++j)
                f.crb[j] = w[j] > 0.0 ? 1.0 / w[j] : std::numeric_limits<double>::infinity();
            out.paths.push_back(std::move(f));
        }
        out.k_hat = static_cast<int>(out.paths.size());
        return out;
    }

} // namespace mbs

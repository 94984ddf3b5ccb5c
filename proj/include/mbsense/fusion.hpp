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

#ifndef MBSENSE_FUSION_HPP
#define MBSENSE_FUSION_HPP

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mbsense/estimator.hpp"
#include "mbsense/scenario.hpp"

namespace mbs
{
    struct FusionConfig
    {
        double esnr_threshold = 3.9810717055349722; // linear, 6 dB
        double prominence = 0.2;
        double cost_max = 0.75;
    };

    /// Reference quantities of the resolution-aware mapping T.
    struct NormRef
    {
        int n_subcarriers = 0;
        double subcarrier_spacing = 0.0; // of the first sub-band
        int n_tx = 1;
        int n_rx = 1;
    };

    NormRef norm_ref(const Scenario& scenario);

    /// [N f_delta0 tau, 2 sin(aod) / L^T, 2 sin(aoa) / L^R].
    Eigen::Vector3d normalize(const GeometricParams& x, const NormRef& ref);
    GeometricParams denormalize(const Eigen::Vector3d& t, const NormRef& ref);

    struct Alias
    {
        int order = 0; // r
        double angle = 0.0;
    };

    /// asin(sin(angle) + r lambda / d) for every integer r keeping the argument in [-1, 1],
    /// ordered by r. Always contains r = 0.
    std::vector<Alias> enumerate_aliases(double angle, double wavelength, double spacing);

    struct PathGroup
    {
        int id = -1;
        int band = 0; // position of the originating sub-band in processing order
        double delay = 0.0;
        std::vector<Alias> aod;
        std::vector<Alias> aoa;
        bool ambiguous = false;
        PathEstimate estimate; // single-band estimate the group was built from
    };

    PathGroup make_group(const PathEstimate& path, const SubBand& band, const ArrayConfig& arrays, int band_pos);

    struct MatchCost
    {
        double cost = 0.0;
        double prominence = 0.0; // infinity when only one alias combination exists
        // Positions in the alias lists realizing the minimum (r*_1..4).
        int p_aod = 0, p_aoa = 0, i_aod = 0, i_aoa = 0;
    };

    MatchCost match_cost(const PathGroup& p, const PathGroup& i, const NormRef& ref);

    /// Keep a sub-band iff at least one path reaches the ESNR threshold.
    bool gate_band(const SingleBandEstimate& est, double esnr_threshold);

    /// One sub-band's contribution to an unambiguous group's record.
    struct BandRecord
    {
        bool detected = false;
        GeometricParams x;
        std::array<double, 3> weight{0.0, 0.0, 0.0}; // inverse CRBs of tau, aod, aoa
        std::optional<cd> gain;
        double esnr = 0.0;
    };

    struct UnambiguousRecord
    {
        int id = -1;
        GeometricParams combined;
        std::vector<BandRecord> history;
    };

    struct FusionState
    {
        std::vector<UnambiguousRecord> unambiguous; // E_U with its R_U history
        std::vector<PathGroup> ambiguous;           // E_A
        int next_id = 0;
        int bands_processed = 0;

        int k_hat() const { return static_cast<int>(unambiguous.size()); }
        /// Latest estimates of every tracked group as matchable groups: E_U first, then E_A.
        std::vector<PathGroup> current_groups() const;
    };

    struct Match
    {
        int row = -1; // index into current_groups()
        int col = -1; // index into the new groups
        MatchCost cost;
    };

    struct Association
    {
        std::vector<Match> matches;
        std::vector<int> unmatched; // new-group indices
    };

    Association associate(const FusionState& state, const std::vector<PathGroup>& new_groups,
                          const FusionConfig& config, const NormRef& ref);

    /// Record at alias positions (aod_pos, aoa_pos) of a group, with CRBs carried over to the alias.
    BandRecord record_from_group(const PathGroup& g, int aod_pos, int aoa_pos);

    /// Applies matches and new groups for the band at position band_pos, then recombines.
    void update_records(FusionState& state, const Association& assoc, const std::vector<PathGroup>& new_groups,
                        const FusionConfig& config, int band_pos);

    /// Inverse-CRB weighted mean of a history. Empty when every weight is zero.
    std::optional<GeometricParams> combine(const std::vector<BandRecord>& history);

    struct FusedPath
    {
        int id = -1;
        GeometricParams x;
        std::array<double, 3> crb{0.0, 0.0, 0.0}; // 1 / sum of weights
        std::vector<std::optional<cd>> gains;    // per sub-band, absent where not detected
    };

    struct FinalEstimate
    {
        std::vector<FusedPath> paths;
        int k_hat = 0;
    };

    /// Band estimates in processing order; est[i].band indexes scenario.sub_bands.
    FinalEstimate run_fusion(const std::vector<SingleBandEstimate>& estimates, const Scenario& scenario,
                             const FusionConfig& config);

} // namespace mbs

#endif

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

#ifndef MBSENSE_EVALUATE_HPP
#define MBSENSE_EVALUATE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mbsense/channel.hpp"
#include "mbsense/estimator.hpp"
#include "mbsense/fusion.hpp"
#include "mbsense/scenario.hpp"

namespace mbs
{
    struct EvalConfig
    {
        EstimatorConfig estimator;
        FusionConfig fusion;
        double detection_radius = 0.5;
        int target_path = 1; // path whose errors the RMSE tables report
        std::uint64_t seed = 1;
        int jobs = 0; // 0: hardware concurrency
    };

    /// Points an estimate contributes to the scored set: one entry per reported path,
    /// each listing the parameter triples it stands for.
    using PointSet = std::vector<std::vector<GeometricParams>>;

    /// Single-band estimates stand for every alias combination of their angles.
    PointSet points_single(const SingleBandEstimate& est, const Scenario& scenario);
    PointSet points_fused(const FinalEstimate& est);

    struct TruthAssociation
    {
        std::vector<bool> detected;             // per true path
        std::vector<GeometricParams> nearest;   // nearest point inside D_k (valid when detected)
        int false_alarms = 0;                   // points outside every D_k

        bool all_detected() const;
    };

    /// D_k = { x : |T(x) - T(x_k)| <= radius }.
    TruthAssociation associate_truth(const PointSet& points, const Scenario& truth, double radius);

    /// Outcomes of one trial: index 0 is the multi-band estimator, 1 + m the single band m.
    struct TrialOutcome
    {
        std::uint64_t seed = 0;
        std::vector<TruthAssociation> estimators;
    };

    std::vector<std::string> estimator_names(const Scenario& scenario);

    /// Per operating point state shared by all trials.
    class TrialRunner
    {
    public:
        TrialRunner(const Scenario& scenario, const EvalConfig& config);

        const Scenario& scenario() const { return scenario_; }
        const CovarianceSet& covariances() const { return cov_; }

        /// One trial evaluated at each reporting floor in the ladder.
        std::vector<TrialOutcome> run(std::uint64_t trial, const std::vector<double>& floors) const;
        TrialOutcome run(std::uint64_t trial) const;

    private:
        Scenario scenario_;
        EvalConfig config_;
        CovarianceSet cov_;
        std::vector<BandModel> models_;
    };

    /// Runs fn(i) for i in [0, n) on a pool of workers.
    void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

    struct RmseRow
    {
        double tx_psd = 0.0; // [W/Hz]
        std::string estimator;
        int path = 0;
        int n_trials = 0;
        int n_detected = 0;
        std::optional<double> delay_rmse; // [s]
        std::optional<double> aod_rmse;   // [rad]
        double crb_delay = 0.0;           // exact [s^2]
        double crb_aod = 0.0;             // exact [rad^2]
        double crb_delay_approx = 0.0;    // multi-band only
        double crb_aod_approx = 0.0;
    };

    using Progress = std::function<void(const std::string&)>;

    /// RMSE conditioned on detection of the target path, per estimator and power.
    std::vector<RmseRow> rmse_sweep(const Scenario& base, const std::vector<double>& powers, double dmc_ratio,
                                     int n_trials, const EvalConfig& config, const Progress& progress = {});

    struct Interval
    {
        double lo = 0.0;
        double hi = 1.0;
    };

    /// Wilson score interval at 95%.
    Interval wilson(int successes, int n);

    struct RocPoint
    {
        double floor = 0.0; // linear reporting floor
        std::string estimator;
        int n_trials = 0;
        int n_detect = 0;
        int n_false = 0;
        double pd = 0.0;
        double pfa = 0.0;
        Interval pd_ci;
        Interval pfa_ci;
    };

    /// PD/PFA per estimator along a ladder of reporting floors, one trial run per seed.
    std::vector<RocPoint> roc_sweep(const Scenario& scenario, const std::vector<double>& floors, int n_trials,
                                    const EvalConfig& config, const Progress& progress = {});

    /// Orders a curve by PFA and makes PD non-decreasing in PFA (pool adjacent violators).
    std::vector<RocPoint> isotonic_cleanup(std::vector<RocPoint> curve);

    /// Rows of one estimator.
    std::vector<RocPoint> curve_of(const std::vector<RocPoint>& points, const std::string& estimator);

} // namespace mbs

#endif

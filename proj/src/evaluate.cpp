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

#include "mbsense/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "mbsense/limits.hpp"

namespace mbs
{
    PointSet points_single(const SingleBandEstimate& est, const Scenario& scenario)
    {
        const SubBand& band = scenario.sub_bands.at(est.band);
        PointSet out;
        for (const PathEstimate& p : est.paths)
        {
            std::vector<GeometricParams> pts;
            for (const Alias& a : enumerate_aliases(p.x.aod, band.wavelength(), scenario.arrays.spacing_tx))
                for (const Alias& b : enumerate_aliases(p.x.aoa, band.wavelength(), scenario.arrays.spacing_rx))
                    pts.push_back({p.x.delay, a.angle, b.angle});
            out.push_back(std::move(pts));
        }
        return out;
    }

    PointSet points_fused(const FinalEstimate& est)
    {
        PointSet out;
        for (const FusedPath& p : est.paths)
            out.push_back({p.x});
        return out;
    }

    bool TruthAssociation::all_detected() const
    {
        return std::all_of(detected.begin(), detected.end(), [](bool d) { return d; });
    }

    TruthAssociation associate_truth(const PointSet& points, const Scenario& truth, double radius)
    {
        const NormRef ref = norm_ref(truth);
        const int k_true = truth.n_paths();
        std::vector<Eigen::Vector3d> t_true;
        for (const PathTruth& p : truth.paths)
            t_true.push_back(normalize(p.geometry, ref));

        TruthAssociation out;
        out.detected.assign(k_true, false);
        out.nearest.assign(k_true, GeometricParams{});
        std::vector<double> best(k_true, std::numeric_limits<double>::infinity());
        for (const std::vector<GeometricParams>& est : points)
            for (const GeometricParams& x : est)
            {
                const Eigen::Vector3d t = normalize(x, ref);
                bool inside_any = false;
                for (int k = 0; k < k_true; ++k)
                {
                    const double d = (t - t_true[k]).norm();
                    if (d > radius)
                        continue;
                    inside_any = true;
                    out.detected[k] = true;
                    if (d < best[k])
                    {
                        best[k] = d;
                        out.nearest[k] = x;
                    }
                }
                if (!inside_any)
                    ++out.false_alarms;
            }
        return out;
    }

    std::vector<std::string> estimator_names(const Scenario& scenario)
    {
        std::vector<std::string> names{"multi"};
        for (int m = 0; m < scenario.n_bands(); ++m)
            names.push_back("band" + std::to_string(m + 1));
        return names;
    }

    TrialRunner::TrialRunner(const Scenario& scenario, const EvalConfig& config)
        : scenario_(validate(scenario)), config_(config), cov_(assemble_covariances(scenario_))
    {
        for (int m = 0; m < scenario_.n_bands(); ++m)
            models_.emplace_back(scenario_.sub_bands[m], scenario_.arrays, cov_.bands[m], config_.estimator);
    }

    std::vector<TrialOutcome> TrialRunner::run(std::uint64_t trial, const std::vector<double>& floors) const
    {
        const std::uint64_t seed = derive_seed(config_.seed, trial);
        const ChannelRealization h = sample_realization(scenario_, cov_, seed);
        const double stop = *std::min_element(floors.begin(), floors.end());

        std::vector<EstimationTrace> traces;
        for (int m = 0; m < scenario_.n_bands(); ++m)
            traces.push_back(estimate_band_trace(models_[m], band_slice(h.h, scenario_, m), m, stop));

        std::vector<TrialOutcome> out;
        for (double floor : floors)
        {
            std::vector<SingleBandEstimate> singles;
            for (const EstimationTrace& t : traces)
                singles.push_back(t.materialize(floor));
            const FinalEstimate fused = run_fusion(singles, scenario_, config_.fusion);

            TrialOutcome o;
            o.seed = seed;
            o.estimators.push_back(associate_truth(points_fused(fused), scenario_, config_.detection_radius));
            for (const SingleBandEstimate& s : singles)
                o.estimators.push_back(
                    associate_truth(points_single(s, scenario_), scenario_, config_.detection_radius));
            out.push_back(std::move(o));
        }
        return out;
    }

    TrialOutcome TrialRunner::run(std::uint64_t trial) const
    {
        return run(trial, std::vector<double>{config_.estimator.detection_floor}).front();
    }

    void parallel_for(int n, int jobs, const std::function<void(int)>& fn)
    {
        if (jobs <= 0)
            jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        jobs = std::min(jobs, std::max(n, 1));
        std::atomic<int> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&]() {
            for (;;)
            {
                const int i = next.fetch_add(1);
                if (i >= n)
                    return;
                try
                {
                    fn(i);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    next = n;
                    return;
                }
            }
        };
        if (jobs == 1)
            worker();
        else
        {
            std::vector<std::thread> pool;
            for (int j = 0; j < jobs; ++j)
                pool.emplace_back(worker);
            for (std::thread& t : pool)
                t.join();
        }
        if (error)
            std::rethrow_exception(error);
    }

    std::vector<RmseRow> rmse_sweep(const Scenario& base, const std::vector<double>& powers, double dmc_ratio,
                                    int n_trials, const EvalConfig& config, const Progress& progress)
    {
        if (n_trials <= 0)
            throw std::invalid_argument("n_trials: must be > 0");
        if (powers.empty())
            throw std::invalid_argument("sweep: no sweep points");
        const int k = config.target_path;
        if (k < 0 || k >= base.n_paths())
            throw std::invalid_argument("target_path: out of range");
        const std::vector<std::string> names = estimator_names(base);

        std::vector<RmseRow> rows;
        for (double power : powers)
        {
            const Scenario s = validate(with_operating_point(base, power, dmc_ratio));
            const TrialRunner runner(s, config);
            const LimitsReport lim = compute_limits(s, runner.covariances());
            std::vector<TrialOutcome> outcomes(n_trials);
            parallel_for(n_trials, config.jobs, [&](int i) { outcomes[i] = runner.run(static_cast<std::uint64_t>(i)); });

            const GeometricParams& truth = s.paths[k].geometry;
            for (std::size_t e = 0; e < names.size(); ++e)
            {
                RmseRow r;
                r.tx_psd = power;
                r.estimator = names[e];
                r.path = k;
                r.n_trials = n_trials;
                double se_t = 0.0, se_a = 0.0;
                for (const TrialOutcome& o : outcomes)
                {
                    const TruthAssociation& a = o.estimators[e];
                    if (!a.detected[k])
                        continue;
                    ++r.n_detected;
                    se_t += std::pow(a.nearest[k].delay - truth.delay, 2);
                    se_a += std::pow(a.nearest[k].aod - truth.aod, 2);
                }
                if (r.n_detected > 0)
                {
                    r.delay_rmse = std::sqrt(se_t / r.n_detected);
                    r.aod_rmse = std::sqrt(se_a / r.n_detected);
                }
                const ParamLayout& lay = lim.layout;
                if (e == 0)
                {
                    r.crb_delay = lim.crb_joint[lay.delay(k)];
                    r.crb_aod = lim.crb_joint[lay.aod(k)];
                    r.crb_delay_approx = lim.crb_approx[lay.delay(k)];
                    r.crb_aod_approx = lim.crb_approx[lay.aod(k)];
                }
                else
                {
                    r.crb_delay = r.crb_delay_approx = lim.crb_band(static_cast<Eigen::Index>(e) - 1, lay.delay(k));
                    r.crb_aod = r.crb_aod_approx = lim.crb_band(static_cast<Eigen::Index>(e) - 1, lay.aod(k));
                }
                rows.push_back(std::move(r));
            }
            if (progress)
                progress("rmse: power point " + std::to_string(rows.size() / names.size()) + "/" +
                         std::to_string(powers.size()) + " done");
        }
        return rows;
    }

    Interval wilson(int successes, int n)
    {
        if (n <= 0)
            return {0.0, 1.0};
        const double z = 1.959963984540054;
        const double p = static_cast<double>(successes) / n;
        const double z2n = z * z / n;
        const double centre = (p + z2n / 2.0) / (1.0 + z2n);
        const double half = z * std::sqrt(p * (1.0 - p) / n + z2n / (4.0 * n)) / (1.0 + z2n);
        // The endpoints are exact at 0 and n; the subtraction above leaves rounding residue there.
        return {successes == 0 ? 0.0 : std::max(0.0, centre - half),
                successes == n ? 1.0 : std::min(1.0, centre + half)};
    }

    std::vector<RocPoint> roc_sweep(const Scenario& scenario, const std::vector<double>& floors, int n_trials,
                                    const EvalConfig& config, const Progress& progress)
    {
        if (n_trials <= 0)
            throw std::invalid_argument("n_trials: must be > 0");
        if (floors.empty())
            throw std::invalid_argument("sweep: no sweep points");
        const TrialRunner runner(scenario, config);
        std::vector<std::vector<TrialOutcome>> outcomes(n_trials);
        std::atomic<int> done{0};
        parallel_for(n_trials, config.jobs, [&](int i) {
            outcomes[i] = runner.run(static_cast<std::uint64_t>(i), floors);
            const int d = ++done;
            if (progress && d % 64 == 0)
                progress("roc: " + std::to_string(d) + "/" + std::to_string(n_trials) + " trials");
        });

        const std::vector<std::string> names = estimator_names(scenario);
        std::vector<RocPoint> out;
        for (std::size_t e = 0; e < names.size(); ++e)
            for (std::size_t f = 0; f < floors.size(); ++f)
            {
                RocPoint p;
                p.floor = floors[f];
                p.estimator = names[e];
                p.n_trials = n_trials;
                for (const std::vector<TrialOutcome>& o : outcomes)
                {
                    const TruthAssociation& a = o[f].estimators[e];
                    p.n_detect += a.all_detected() ? 1 : 0;
                    p.n_false += a.false_alarms > 0 ? 1 : 0;
                }
                p.pd = static_cast<double>(p.n_detect) / n_trials;
                p.pfa = static_cast<double>(p.n_false) / n_trials;
                p.pd_ci = wilson(p.n_detect, n_trials);
                p.pfa_ci = wilson(p.n_false, n_trials);
                out.push_back(p);
            }
        return out;
    }

    std::vector<RocPoint> isotonic_cleanup(std::vector<RocPoint> curve)
    {
        std::stable_sort(curve.begin(), curve.end(), [](const RocPoint& a, const RocPoint& b) {
            return a.pfa < b.pfa || (a.pfa == b.pfa && a.pd < b.pd);
        });
        // Pool adjacent violators on PD.
        struct Block
        {
            double sum;
            int count;
        };
        std::vector<Block> blocks;
        for (const RocPoint& p : curve)
        {
            blocks.push_back({p.pd, 1});
            while (blocks.size() > 1 &&
                   blocks[blocks.size() - 2].sum / blocks[blocks.size() - 2].count >
                       blocks.back().sum / blocks.back().count)
            {
                blocks[blocks.size() - 2].sum += blocks.back().sum;
                blocks[blocks.size() - 2].count += blocks.back().count;
                blocks.pop_back();
            }
        }
        std::size_t i = 0;
        for (const Block& b : blocks)
            for (int j = 0; j < b.count; ++j)
                curve[i++].pd = b.sum / b.count;
        return curve;
    }

    std::vector<RocPoint> curve_of(const std::vector<RocPoint>& points, const std::string& estimator)
    {
        std::vector<RocPoint> out;
        for (const RocPoint& p : points)
            if (p.estimator == estimator)
                out.push_back(p);
        return out;
    }

} // namespace mbs

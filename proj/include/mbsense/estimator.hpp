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

#ifndef MBSENSE_ESTIMATOR_HPP
#define MBSENSE_ESTIMATOR_HPP

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mbsense/channel.hpp"
#include "mbsense/scenario.hpp"

namespace mbs
{
    struct EstimatorConfig
    {
        double detection_floor = 19.952623149688797; // linear ESNR, 13 dB
        int max_paths = 6;
        int delay_oversampling = 4;
        int angle_oversampling = 4;
        int max_iterations = 100;
        double tolerance = 1e-10; // relative cost change
        double damping_init = 1e-3;
    };

    struct PathEstimate
    {
        GeometricParams x; // angles are principal values
        cd gain;
        double esnr = 0.0;                    // linear
        std::array<double, 3> crb{0.0, 0.0, 0.0}; // tau [s^2], aod [rad^2], aoa [rad^2]
    };

    struct SingleBandEstimate
    {
        int band = 0;
        std::vector<PathEstimate> paths; // descending |gain|
    };

    /// Precomputed per-band quantities: covariance factors and the detection grid.
    class BandModel
    {
    public:
        BandModel(const SubBand& band, const ArrayConfig& arrays, BandCovariance cov, EstimatorConfig config = {});

        const SubBand& band() const { return band_; }
        const ArrayConfig& arrays() const { return arrays_; }
        const BandCovariance& cov() const { return cov_; }
        const EstimatorConfig& config() const { return config_; }

        /// Period of the steering vectors in direction-sine space (lambda / d).
        double sine_period_tx() const;
        double sine_period_rx() const;

        /// Whitened steering vector in eigen coordinates, internal parameters
        /// t = tau N f_delta, u = sin(aod), v = sin(aoa).
        Eigen::VectorXcd whitened_steering(double t, double u, double v) const;

        // Detection grid.
        int n_delay() const { return static_cast<int>(grid_t_.size()); }
        int n_angle() const { return static_cast<int>(grid_uv_.size()); }
        const Eigen::MatrixXcd& delay_kernel() const { return delay_kernel_; }   // Q x N
        const Eigen::MatrixXcd& angle_kernel() const { return angle_kernel_; }   // LT LR x G
        const Eigen::MatrixXd& delay_power() const { return delay_power_; }      // Q x N
        const Eigen::MatrixXd& angle_weight() const { return angle_weight_; }    // N x G
        double grid_delay(int q) const { return grid_t_[q]; }
        std::pair<double, double> grid_angle(int g) const { return grid_uv_[g]; }

    private:
        SubBand band_;
        ArrayConfig arrays_;
        BandCovariance cov_;
        EstimatorConfig config_;
        std::vector<double> grid_t_;
        std::vector<std::pair<double, double>> grid_uv_;
        Eigen::MatrixXcd delay_kernel_;
        Eigen::MatrixXcd angle_kernel_;
        Eigen::MatrixXd delay_power_;
        Eigen::MatrixXd angle_weight_;
    };

    /// Lambda^{-1/2} U^H v; the squared norm equals v^H M^{-1} v.
    Eigen::VectorXcd whiten(const BandModel& model, const Eigen::VectorXcd& v);

    struct Candidate
    {
        GeometricParams x;
        double statistic = 0.0; // 2 |a^H M^{-1} r|^2 / (a^H M^{-1} a), the single-path ESNR at the peak
    };

    /// Grid argmax of the whitened matched filter on a whitened residual. Empty when the
    /// peak statistic is below the floor.
    std::optional<Candidate> detect_next_path(const BandModel& model, const Eigen::VectorXcd& residual_w,
                                              double floor);

    enum class LmStatus
    {
        converged,
        max_iterations,
        non_finite
    };

    struct LmResult
    {
        std::vector<GeometricParams> x;
        std::vector<cd> gains;
        double cost = 0.0;
        int iterations = 0;
        int dropped = 0; // paths removed for rank deficiency
        LmStatus status = LmStatus::converged;
    };

    /// Concentrated ML fit of the geometric parameters by Levenberg-Marquardt with
    /// closed-form GLS gains at every iterate.
    LmResult refine_lm(const BandModel& model, const Eigen::VectorXcd& h_w, std::vector<GeometricParams> init);

    /// Plug-in CRBs and ESNRs of a set of paths.
    std::vector<PathEstimate> plug_in(const BandModel& model, const std::vector<GeometricParams>& x,
                                      const std::vector<cd>& gains);

    struct TraceStep
    {
        double score = 0.0; // min(detection statistic, ESNR of the added path)
        std::vector<PathEstimate> paths;
    };

    /// Successive detection record, independent of the reporting threshold.
    struct EstimationTrace
    {
        int band = 0;
        std::vector<TraceStep> steps;

        /// Estimate under a given floor: the longest prefix of steps scoring at least
        /// the floor, restricted to paths whose ESNR reaches it.
        SingleBandEstimate materialize(double floor) const;
    };

    /// Detect, refine, validate until the detection statistic drops below stop_floor or
    /// max_paths is reached.
    EstimationTrace estimate_band_trace(const BandModel& model, const Eigen::VectorXcd& h_m, int m,
                                        double stop_floor);

    SingleBandEstimate estimate_band(const BandModel& model, const Eigen::VectorXcd& h_m, int m);

    /// Wraps a direction sine into the principal interval of a steering period.
    double wrap_sine(double s, double period);

} // namespace mbs

#endif

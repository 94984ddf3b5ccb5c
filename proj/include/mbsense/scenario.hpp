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

#ifndef MBSENSE_SCENARIO_HPP
#define MBSENSE_SCENARIO_HPP

#include <array>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mbs
{
    using cd = std::complex<double>;

    inline constexpr double speed_of_light = 299792458.0;
    inline constexpr double pi = 3.14159265358979323846;

    /// Raised for any violated scenario invariant. The message starts with the field path.
    class ScenarioError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    struct Vec2
    {
        double x = 0.0;
        double y = 0.0;
    };

    inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
    double norm(Vec2 a);

    struct SubBand
    {
        double carrier_freq = 0.0;      // [Hz]
        double subcarrier_spacing = 0.0; // [Hz]
        int n_subcarriers = 0;
        double decay_rate = 0.0; // normalized to the measurement bandwidth
        std::optional<double> vmd_kappa_tx;
        std::optional<double> vmd_kappa_rx;

        double wavelength() const { return speed_of_light / carrier_freq; }
    };

    struct ArrayConfig
    {
        int n_tx = 1;
        int n_rx = 1;
        double spacing_tx = 0.0; // [m]
        double spacing_rx = 0.0; // [m]
    };

    struct GeometricParams
    {
        double delay = 0.0; // [s]
        double aod = 0.0;   // [rad]
        double aoa = 0.0;   // [rad]
    };

    struct PathTruth
    {
        GeometricParams geometry;
        std::vector<cd> coeffs; // gamma per sub-band
        // Tx->scatterer and scatterer->Rx delays [s]; required for k > 1.
        std::optional<std::array<double, 2>> bistatic_delays;
    };

    /// Array orientation in the 2D plane. Angles are atan2(v.axis, v.broadside),
    /// so positive angles lie on the side the element axis points to.
    struct ArrayPose
    {
        Vec2 position;
        Vec2 broadside{1.0, 0.0};
        Vec2 axis{0.0, 1.0};
    };

    struct Scenario
    {
        std::vector<SubBand> sub_bands;
        ArrayConfig arrays;
        std::vector<PathTruth> paths; // paths[0] is the LoS
        double tx_psd = 0.0;          // [W/Hz]
        double dmc_ratio = 0.0;       // linear power fraction
        double noise_psd = 0.0;       // [W/Hz]
        double noise_figure = 1.0;    // linear
        std::optional<ArrayPose> tx_pose;
        std::optional<ArrayPose> rx_pose;

        int n_bands() const { return static_cast<int>(sub_bands.size()); }
        int n_paths() const { return static_cast<int>(paths.size()); }
        int n_subcarriers() const { return sub_bands.empty() ? 0 : sub_bands.front().n_subcarriers; }
        int band_length() const { return n_subcarriers() * arrays.n_tx * arrays.n_rx; }
    };

    struct BistaticParams
    {
        double delay_tx = 0.0; // tau^D [s]
        double delay_rx = 0.0; // tau^A [s]
        double delay = 0.0;    // tau^D + tau^A [s]
        double aod = 0.0;      // [rad]
        double aoa = 0.0;      // [rad]
    };

    /// Checks every invariant and returns a copy with angles folded into (-pi, pi].
    /// Angles outside (-pi/2, pi/2) after folding are rejected.
    Scenario validate(const Scenario& scenario);

    /// Default poses: arrays face each other along the Tx->Rx baseline, with both element
    /// axes pointing to the left of the Tx->Rx direction.
    std::pair<ArrayPose, ArrayPose> facing_poses(Vec2 tx, Vec2 rx);

    BistaticParams cartesian_to_bistatic(Vec2 p, const ArrayPose& tx, const ArrayPose& rx);

    /// Tx->scatterer / scatterer->Rx delays of a point seen under (aod, aoa) from facing
    /// arrays separated by c * los_delay (law of sines on the bistatic triangle).
    std::array<double, 2> bistatic_delays_from_angles(double los_delay, double aod, double aoa);

    /// Copy of the scenario with transmit PSD and DMC ratio replaced.
    Scenario with_operating_point(const Scenario& scenario, double tx_psd, double dmc_ratio);

    /// Copy restricted to a single sub-band.
    Scenario single_band(const Scenario& scenario, int m);

} // namespace mbs

#endif

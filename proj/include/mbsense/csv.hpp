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

#ifndef MBSENSE_CSV_HPP
#define MBSENSE_CSV_HPP

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "mbsense/evaluate.hpp"
#include "mbsense/fusion.hpp"
#include "mbsense/limits.hpp"

namespace mbs
{
    /// Shortest round-trip decimal, locale independent. Non-finite values print as nan/inf.
    std::string format_number(double v);

    /// Tracks whether every numeric field written so far was finite.
    class CsvSink
    {
    public:
        explicit CsvSink(std::ostream& out) : out_(out) {}

        void header(const std::vector<std::string>& names);
        CsvSink& field(double v);
        CsvSink& field(long long v);
        CsvSink& field(int v) { return field(static_cast<long long>(v)); }
        CsvSink& field(const std::string& s);
        CsvSink& empty();
        void end_row();

        bool all_finite() const { return finite_; }

    private:
        void sep();

        std::ostream& out_;
        bool first_ = true;
        bool finite_ = true;
    };

    // fig4_crb.csv
    // alpha_db (empty without DMC), tx_psd_dbm_per_hz, path, sqrt_crb_delay_band<m>_ns..., sqrt_crb_delay_joint_ns,
    // sqrt_crb_delay_approx_ns, sqrt_crb_aod_band<m>_deg..., sqrt_crb_aod_joint_deg, sqrt_crb_aod_approx_deg
    void crb_header(CsvSink& csv, int n_bands);
    void crb_rows(CsvSink& csv, double dmc_ratio, double tx_psd, const LimitsReport& report);

    // fig5_esnr.csv
    // alpha_db, tx_psd_dbm_per_hz, path, band, esnr_band_db, esnr_joint_db, gain_db
    void esnr_header(CsvSink& csv);
    void esnr_rows(CsvSink& csv, double dmc_ratio, double tx_psd, const LimitsReport& report);

    // fig6_delay_rmse.csv
    // tx_psd_dbm_per_hz, estimator, path, n_trials, n_detected, delay_rmse_ns, sqrt_crb_delay_ns,
    // sqrt_crb_delay_approx_ns. The RMSE field is empty when the path was never detected.
    void delay_rmse_header(CsvSink& csv);
    void delay_rmse_rows(CsvSink& csv, const std::vector<RmseRow>& rows);

    // fig7_aod_rmse.csv, same layout in degrees.
    void aod_rmse_header(CsvSink& csv);
    void aod_rmse_rows(CsvSink& csv, const std::vector<RmseRow>& rows);

    // fig8_roc.csv
    // floor_db, estimator, n_trials, n_detect, n_false, pd, pd_lo, pd_hi, pfa, pfa_lo, pfa_hi, pd_isotonic
    void roc_header(CsvSink& csv);
    void roc_rows(CsvSink& csv, const std::vector<RocPoint>& points);

    // bgg_map.csv: x_m, y_m, band, gamma_db (band is 1-based; masked cells carry the floor value)
    void bgg_header(CsvSink& csv);
    void bgg_rows(CsvSink& csv, const std::vector<BggCell>& cells);

    // pdp.csv: delay_ns, power_dbm, band_index (1-based)
    void pdp_header(CsvSink& csv);
    void pdp_rows(CsvSink& csv, const Eigen::VectorXd& pdp, double subcarrier_spacing, int band);

    // estimates.csv: trial, k, tau_ns, aod_deg, aoa_deg, gain_mag_band<m>, gain_phase_deg_band<m>...
    void estimates_header(CsvSink& csv, int n_bands);
    void estimates_rows(CsvSink& csv, std::uint64_t trial, const FinalEstimate& est, int n_bands);

} // namespace mbs

#endif

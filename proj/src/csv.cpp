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

#include "mbsense/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "mbsense/config.hpp"

namespace mbs
{
    namespace
    {
        constexpr double rad_to_deg = 180.0 / pi;

        std::string band_name(int m) { return "band" + std::to_string(m + 1); }

        double sqrt_ns(double var) { return std::sqrt(var) * 1e9; }
        double sqrt_deg(double var) { return std::sqrt(var) * rad_to_deg; }

        // No DMC has no dB value; the field is left empty.
        CsvSink& alpha_field(CsvSink& csv, double dmc_ratio)
        {
            return dmc_ratio > 0.0 ? csv.field(linear_to_db(dmc_ratio)) : csv.empty();
        }
    } // namespace

    std::string format_number(double v)
    {
        if (std::isnan(v))
            return "nan";
        if (std::isinf(v))
            return v > 0 ? "inf" : "-inf";
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, res.ptr);
    }

    void CsvSink::sep()
    {
        if (!first_)
            out_ << ',';
        first_ = false;
    }

    void CsvSink::header(const std::vector<std::string>& names)
    {
        for (const std::string& n : names)
            field(n);
        end_row();
    }

    CsvSink& CsvSink::field(double v)
    {
        sep();
        if (!std::isfinite(v))
            finite_ = false;
        out_ << format_number(v);
        return *this;
    }

    CsvSink& CsvSink::field(long long v)
    {
        sep();
        out_ << v;
        return *this;
    }

    CsvSink& CsvSink::field(const std::string& s)
    {
        sep();
        out_ << s;
        return *this;
    }

    CsvSink& CsvSink::empty()
    {
        sep();
        return *this;
    }

    void CsvSink::end_row()
    {
        out_ << '\n';
        first_ = true;
    }

    void crb_header(CsvSink& csv, int n_bands)
    {
        std::vector<std::string> h{"alpha_db", "tx_psd_dbm_per_hz", "path"};
        for (int m = 0; m < n_bands; ++m)
            h.push_back("sqrt_crb_delay_" + band_name(m) + "_ns");
        h.push_back("sqrt_crb_delay_joint_ns");
        h.push_back("sqrt_crb_delay_approx_ns");
        for (int m = 0; m < n_bands; ++m)
            h.push_back("sqrt_crb_aod_" + band_name(m) + "_deg");
        h.push_back("sqrt_crb_aod_joint_deg");
        h.push_back("sqrt_crb_aod_approx_deg");
        csv.header(h);
    }

    void crb_rows(CsvSink& csv, double dmc_ratio, double tx_psd, const LimitsReport& r)
    {
        const int K = r.layout.n_paths, M = r.layout.n_bands;
        for (int k = 0; k < K; ++k)
        {
            alpha_field(csv, dmc_ratio).field(watt_to_dbm(tx_psd)).field(k);
            for (int m = 0; m < M; ++m)
                csv.field(sqrt_ns(r.crb_band(m, r.layout.delay(k))));
            csv.field(sqrt_ns(r.crb_joint[r.layout.delay(k)])).field(sqrt_ns(r.crb_approx[r.layout.delay(k)]));
            for (int m = 0; m < M; ++m)
                csv.field(sqrt_deg(r.crb_band(m, r.layout.aod(k))));
            csv.field(sqrt_deg(r.crb_joint[r.layout.aod(k)])).field(sqrt_deg(r.crb_approx[r.layout.aod(k)]));
            csv.end_row();
        }
    }

    void esnr_header(CsvSink& csv)
    {
        csv.header({"alpha_db", "tx_psd_dbm_per_hz", "path", "band", "esnr_band_db", "esnr_joint_db", "gain_db"});
    }

    void esnr_rows(CsvSink& csv, double dmc_ratio, double tx_psd, const LimitsReport& r)
    {
        for (int k = 0; k < r.layout.n_paths; ++k)
            for (int m = 0; m < r.layout.n_bands; ++m)
            {
                const double band = linear_to_db(r.esnr_band(k, m)), joint = linear_to_db(r.esnr_joint(k, m));
                alpha_field(csv, dmc_ratio).field(watt_to_dbm(tx_psd)).field(k).field(m + 1);
                csv.field(band).field(joint).field(joint - band);
                csv.end_row();
            }
    }

    void delay_rmse_header(CsvSink& csv)
    {
        csv.header({"tx_psd_dbm_per_hz", "estimator", "path", "n_trials", "n_detected", "delay_rmse_ns",
                    "sqrt_crb_delay_ns", "sqrt_crb_delay_approx_ns"});
    }

    void delay_rmse_rows(CsvSink& csv, const std::vector<RmseRow>& rows)
    {
        for (const RmseRow& r : rows)
        {
            csv.field(watt_to_dbm(r.tx_psd)).field(r.estimator).field(r.path).field(r.n_trials).field(r.n_detected);
            if (r.delay_rmse)
                csv.field(*r.delay_rmse * 1e9);
            else
                csv.empty();
            csv.field(sqrt_ns(r.crb_delay));
            if (r.estimator == "multi")
                csv.field(sqrt_ns(r.crb_delay_approx));
            else
                csv.empty();
            csv.end_row();
        }
    }

    void aod_rmse_header(CsvSink& csv)
    {
        csv.header({"tx_psd_dbm_per_hz", "estimator", "path", "n_trials", "n_detected", "aod_rmse_deg",
                    "sqrt_crb_aod_deg", "sqrt_crb_aod_approx_deg"});
    }

    void aod_rmse_rows(CsvSink& csv, const std::vector<RmseRow>& rows)
    {
        for (const RmseRow& r : rows)
        {
            csv.field(watt_to_dbm(r.tx_psd)).field(r.estimator).field(r.path).field(r.n_trials).field(r.n_detected);
            if (r.aod_rmse)
                csv.field(*r.aod_rmse * rad_to_deg);
            else
                csv.empty();
            csv.field(sqrt_deg(r.crb_aod));
            if (r.estimator == "multi")
                csv.field(sqrt_deg(r.crb_aod_approx));
            else
                csv.empty();
            csv.end_row();
        }
    }

    void roc_header(CsvSink& csv)
    {
        csv.header({"floor_db", "estimator", "n_trials", "n_detect", "n_false", "pd", "pd_lo", "pd_hi", "pfa",
                    "pfa_lo", "pfa_hi", "pd_isotonic"});
    }

    void roc_rows(CsvSink& csv, const std::vector<RocPoint>& points)
    {
        std::map<std::pair<std::string, double>, double> iso;
        std::vector<std::string> names;
        for (const RocPoint& p : points)
            if (std::find(names.begin(), names.end(), p.estimator) == names.end())
                names.push_back(p.estimator);
        for (const std::string& n : names)
            for (const RocPoint& p : isotonic_cleanup(curve_of(points, n)))
                iso[{n, p.floor}] = p.pd;

        for (const RocPoint& p : points)
        {
            csv.field(linear_to_db(p.floor)).field(p.estimator).field(p.n_trials).field(p.n_detect).field(p.n_false);
            csv.field(p.pd).field(p.pd_ci.lo).field(p.pd_ci.hi);
            csv.field(p.pfa).field(p.pfa_ci.lo).field(p.pfa_ci.hi);
            csv.field(iso.at({p.estimator, p.floor}));
            csv.end_row();
        }
    }

    void bgg_header(CsvSink& csv) { csv.header({"x_m", "y_m", "band", "gamma_db"}); }

    void bgg_rows(CsvSink& csv, const std::vector<BggCell>& cells)
    {
        for (const BggCell& c : cells)
        {
            csv.field(c.x).field(c.y).field(c.band + 1).field(c.gamma_db);
            csv.end_row();
        }
    }

    void pdp_header(CsvSink& csv) { csv.header({"delay_ns", "power_dbm", "band_index"}); }

    void pdp_rows(CsvSink& csv, const Eigen::VectorXd& pdp, double subcarrier_spacing, int band)
    {
        const Eigen::Index n = pdp.size();
        for (Eigen::Index b = 0; b < n; ++b)
        {
            csv.field(static_cast<double>(b) / (static_cast<double>(n) * subcarrier_spacing) * 1e9);
            csv.field(watt_to_dbm(pdp[b])).field(band + 1);
            csv.end_row();
        }
    }

    void estimates_header(CsvSink& csv, int n_bands)
    {
        std::vector<std::string> h{"trial", "k", "tau_ns", "aod_deg", "aoa_deg"};
        for (int m = 0; m < n_bands; ++m)
        {
            h.push_back("gain_mag_" + band_name(m));
            h.push_back("gain_phase_deg_" + band_name(m));
        }
        csv.header(h);
    }

    void estimates_rows(CsvSink& csv, std::uint64_t trial, const FinalEstimate& est, int n_bands)
    {
        for (const FusedPath& p : est.paths)
        {
            csv.field(static_cast<long long>(trial)).field(p.id);
            csv.field(p.x.delay * 1e9).field(p.x.aod * rad_to_deg).field(p.x.aoa * rad_to_deg);
            for (int m = 0; m < n_bands; ++m)
            {
                const std::optional<cd>& g =
                    m < static_cast<int>(p.gains.size()) ? p.gains[m] : std::optional<cd>{};
                if (g)
                    csv.field(std::abs(*g)).field(std::arg(*g) * rad_to_deg);
                else
                    csv.empty().empty();
            }
            csv.end_row();
        }
    }

} // namespace mbs

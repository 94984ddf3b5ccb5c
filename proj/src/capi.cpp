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

#include "mbsense/mbsense.h"

#include <cmath>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mbsense/config.hpp"
#include "mbsense/csv.hpp"

struct mbs_scenario
{
    mbs::RunConfig config;
    std::string source; // file path, empty when parsed from text
};

namespace
{
    namespace fs = std::filesystem;
    using nlohmann::json;

    constexpr const char* version_string = "0.1.0";

    thread_local std::string last_error;

    mbs_status fail(mbs_status s, const std::string& msg)
    {
        last_error = msg;
        return s;
    }

    template <class F> mbs_status guarded(F&& f)
    {
        last_error.clear();
        try
        {
            return f();
        }
        catch (const mbs::ConfigError& e)
        {
            return fail(MBS_E_CONFIG, e.what());
        }
        catch (const mbs::ScenarioError& e)
        {
            return fail(MBS_E_CONFIG, e.what());
        }
        catch (const fs::filesystem_error& e)
        {
            return fail(MBS_E_IO, e.what());
        }
        catch (const std::invalid_argument& e)
        {
            return fail(MBS_E_INVALID_ARGUMENT, e.what());
        }
        catch (const std::domain_error& e)
        {
            return fail(MBS_E_INVALID_ARGUMENT, e.what());
        }
        catch (const std::exception& e)
        {
            return fail(MBS_E_INTERNAL, e.what());
        }
        catch (...)
        {
            return fail(MBS_E_INTERNAL, "unknown error");
        }
    }

    class IoError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    std::ofstream open_output(const fs::path& p)
    {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError(p.string() + ": cannot open for writing");
        return out;
    }

    void close_output(std::ofstream& out, const fs::path& p)
    {
        out.close();
        if (!out)
            throw IoError(p.string() + ": write failed");
    }

    fs::path prepare_dir(const mbs_run_info* info)
    {
        if (!info || !info->out_dir || !*info->out_dir)
            throw std::invalid_argument("out: output directory required");
        fs::path dir(info->out_dir);
        fs::create_directories(dir);
        return dir;
    }

    std::string hex64(std::uint64_t v)
    {
        std::ostringstream os;
        os << std::hex;
        os.width(16);
        os.fill('0');
        os << v;
        return os.str();
    }

    void write_manifest(const fs::path& dir, const mbs_scenario* s, const mbs_run_info* info,
                        std::optional<std::uint64_t> seed, const std::vector<std::string>& outputs)
    {
        json m;
        m["scenario_path"] = s->source;
        m["command"] = info->command ? info->command : "";
        m["seed"] = seed ? json(*seed) : json(nullptr);
        m["out_dir"] = info->out_dir;
        m["version"] = version_string;
        m["config_hash"] = hex64(mbs::config_hash(s->config));
        m["resolved_config"] = json::parse(mbs::resolved_json(s->config));
        m["outputs"] = outputs;
        const fs::path p = dir / "manifest.json";
        std::ofstream out = open_output(p);
        out << m.dump(2) << '\n';
        close_output(out, p);
    }

    mbs_status finish(bool finite, const fs::path& dir, const mbs_scenario* s, const mbs_run_info* info,
                      std::optional<std::uint64_t> seed, const std::vector<std::string>& outputs)
    {
        if (!finite)
            return fail(MBS_E_NONFINITE, "non-finite values in outputs");
        write_manifest(dir, s, info, seed, outputs);
        return MBS_OK;
    }

    std::vector<double> sweep_or_default(const double* values, std::size_t n, double fallback, const char* what)
    {
        if (!values)
            return {fallback};
        if (n == 0)
            throw std::invalid_argument(std::string(what) + ": no sweep points");
        return {values, values + n};
    }

    mbs_status run_rmse(const mbs_scenario* s, const mbs_montecarlo_options& o, const mbs_run_info* info,
                        const fs::path& dir, const mbs::EvalConfig& eval)
    {
        const mbs::Scenario& sc = s->config.scenario;
        const std::vector<double> powers = sweep_or_default(o.sweep, o.n_sweep, sc.tx_psd, "sweep");
        const fs::path p6 = dir / "fig6_delay_rmse.csv", p7 = dir / "fig7_aod_rmse.csv";
        std::ofstream o6 = open_output(p6), o7 = open_output(p7);
        mbs::CsvSink c6(o6), c7(o7);
        mbs::delay_rmse_header(c6);
        mbs::aod_rmse_header(c7);
        mbs::Progress progress;
        if (o.progress)
            progress = [&](const std::string& msg) { o.progress(msg.c_str(), o.progress_user); };
        for (double power : powers)
        {
            const auto rows = mbs::rmse_sweep(sc, {power}, sc.dmc_ratio, o.n_trials, eval, progress);
            mbs::delay_rmse_rows(c6, rows);
            mbs::aod_rmse_rows(c7, rows);
            o6.flush();
            o7.flush();
        }
        close_output(o6, p6);
        close_output(o7, p7);
        return finish(c6.all_finite() && c7.all_finite(), dir, s, info, o.seed,
                      {p6.filename().string(), p7.filename().string()});
    }

    mbs_status run_roc(const mbs_scenario* s, const mbs_montecarlo_options& o, const mbs_run_info* info,
                       const fs::path& dir, const mbs::EvalConfig& eval)
    {
        std::vector<double> floors;
        if (o.sweep)
            floors = sweep_or_default(o.sweep, o.n_sweep, 0.0, "sweep");
        else
            for (int db = 0; db <= 20; ++db)
                floors.push_back(mbs::db_to_linear(db));
        mbs::Progress progress;
        if (o.progress)
            progress = [&](const std::string& msg) { o.progress(msg.c_str(), o.progress_user); };
        const auto points = mbs::roc_sweep(s->config.scenario, floors, o.n_trials, eval, progress);
        const fs::path p8 = dir / "fig8_roc.csv";
        std::ofstream out = open_output(p8);
        mbs::CsvSink csv(out);
        mbs::roc_header(csv);
        mbs::roc_rows(csv, points);
        close_output(out, p8);
        return finish(csv.all_finite(), dir, s, info, o.seed, {p8.filename().string()});
    }

    mbs_status run_pdp(const mbs_scenario* s, const mbs_montecarlo_options& o, const mbs_run_info* info,
                       const fs::path& dir, const mbs::EvalConfig& eval)
    {
        const mbs::Scenario& sc = s->config.scenario;
        const mbs::CovarianceSet cov = mbs::assemble_covariances(sc);
        const mbs::ChannelRealization h = mbs::sample_realization(sc, cov, mbs::derive_seed(o.seed, 0));
        const int pairs = sc.arrays.n_tx * sc.arrays.n_rx;

        const fs::path pp = dir / "pdp.csv", pe = dir / "estimates.csv";
        std::ofstream op = open_output(pp);
        mbs::CsvSink cp(op);
        mbs::pdp_header(cp);
        std::vector<mbs::SingleBandEstimate> singles;
        for (int m = 0; m < sc.n_bands(); ++m)
        {
            const mbs::SubBand& b = sc.sub_bands[m];
            const Eigen::VectorXcd hm = mbs::band_slice(h.h, sc, m);
            mbs::pdp_rows(cp, mbs::delay_domain_pdp(hm, b.n_subcarriers, pairs), b.subcarrier_spacing, m);
            const mbs::BandModel model(b, sc.arrays, cov.bands[m], eval.estimator);
            singles.push_back(mbs::estimate_band(model, hm, m));
        }
        close_output(op, pp);

        std::ofstream oe = open_output(pe);
        mbs::CsvSink ce(oe);
        mbs::estimates_header(ce, sc.n_bands());
        mbs::estimates_rows(ce, 0, mbs::run_fusion(singles, sc, eval.fusion), sc.n_bands());
        close_output(oe, pe);
        return finish(cp.all_finite() && ce.all_finite(), dir, s, info, o.seed,
                      {pp.filename().string(), pe.filename().string()});
    }

    mbs_status io_guarded(const std::function<mbs_status()>& f)
    {
        return guarded([&]() -> mbs_status {
            try
            {
                return f();
            }
            catch (const IoError& e)
            {
                return fail(MBS_E_IO, e.what());
            }
        });
    }
} // namespace

extern "C" {

const char* mbs_version(void) { return version_string; }

const char* mbs_last_error(void) { return last_error.c_str(); }

mbs_status mbs_scenario_load(const char* path, mbs_scenario** out)
{
    return guarded([&] {
        if (!path || !out)
            return fail(MBS_E_INVALID_ARGUMENT, "scenario_load: null argument");
        *out = nullptr;
        auto s = std::make_unique<mbs_scenario>();
        s->config = mbs::load_config(path);
        s->source = path;
        *out = s.release();
        return MBS_OK;
    });
}

mbs_status mbs_scenario_parse(const char* json_text, mbs_scenario** out)
{
    return guarded([&] {
        if (!json_text || !out)
            return fail(MBS_E_INVALID_ARGUMENT, "scenario_parse: null argument");
        *out = nullptr;
        auto s = std::make_unique<mbs_scenario>();
        s->config = mbs::parse_config(json_text);
        *out = s.release();
        return MBS_OK;
    });
}

void mbs_scenario_free(mbs_scenario* scenario) { delete scenario; }

mbs_status mbs_scenario_config_hash(const mbs_scenario* scenario, uint64_t* out)
{
    return guarded([&] {
        if (!scenario || !out)
            return fail(MBS_E_INVALID_ARGUMENT, "config_hash: null argument");
        *out = mbs::config_hash(scenario->config);
        return MBS_OK;
    });
}

mbs_status mbs_scenario_operating_point(const mbs_scenario* scenario, double* tx_psd, double* dmc_ratio)
{
    return guarded([&] {
        if (!scenario || !tx_psd || !dmc_ratio)
            return fail(MBS_E_INVALID_ARGUMENT, "operating_point: null argument");
        *tx_psd = scenario->config.scenario.tx_psd;
        *dmc_ratio = scenario->config.scenario.dmc_ratio;
        return MBS_OK;
    });
}

mbs_status mbs_run_limits(const mbs_scenario* scenario, const double* dmc_ratios, size_t n_dmc_ratios,
                          const double* tx_psds, size_t n_tx_psds, const mbs_run_info* info)
{
    return io_guarded([&] {
        if (!scenario)
            return fail(MBS_E_INVALID_ARGUMENT, "limits: null scenario");
        const mbs::Scenario& sc = scenario->config.scenario;
        const std::vector<double> alphas = sweep_or_default(dmc_ratios, n_dmc_ratios, sc.dmc_ratio, "alphas");
        const std::vector<double> powers = sweep_or_default(tx_psds, n_tx_psds, sc.tx_psd, "sweep");
        const fs::path dir = prepare_dir(info);
        const fs::path p4 = dir / "fig4_crb.csv", p5 = dir / "fig5_esnr.csv";
        std::ofstream o4 = open_output(p4), o5 = open_output(p5);
        mbs::CsvSink c4(o4), c5(o5);
        mbs::crb_header(c4, sc.n_bands());
        mbs::esnr_header(c5);
        for (double a : alphas)
            for (double p : powers)
            {
                const mbs::Scenario op = mbs::with_operating_point(sc, p, a);
                const mbs::LimitsReport r = mbs::compute_limits(op);
                mbs::crb_rows(c4, a, p, r);
                mbs::esnr_rows(c5, a, p, r);
            }
        close_output(o4, p4);
        close_output(o5, p5);
        return finish(c4.all_finite() && c5.all_finite(), dir, scenario, info, std::nullopt,
                      {p4.filename().string(), p5.filename().string()});
    });
}

mbs_status mbs_run_bgg(const mbs_scenario* scenario, double x_min, double x_max, double y_min, double y_max, int nx,
                       int ny, const mbs_run_info* info)
{
    return io_guarded([&] {
        if (!scenario)
            return fail(MBS_E_INVALID_ARGUMENT, "bgg: null scenario");
        mbs::BggGrid grid;
        grid.x_min = x_min;
        grid.x_max = x_max;
        grid.y_min = y_min;
        grid.y_max = y_max;
        grid.nx = nx;
        grid.ny = ny;
        const std::vector<mbs::BggCell> cells = mbs::bgg_map(scenario->config.scenario, grid);
        const fs::path dir = prepare_dir(info);
        const fs::path p = dir / "bgg_map.csv";
        std::ofstream out = open_output(p);
        mbs::CsvSink csv(out);
        mbs::bgg_header(csv);
        mbs::bgg_rows(csv, cells);
        close_output(out, p);
        return finish(csv.all_finite(), dir, scenario, info, std::nullopt, {p.filename().string()});
    });
}

mbs_status mbs_run_montecarlo(const mbs_scenario* scenario, const mbs_montecarlo_options* options,
                              const mbs_run_info* info)
{
    return io_guarded([&] {
        if (!scenario || !options)
            return fail(MBS_E_INVALID_ARGUMENT, "montecarlo: null argument");
        const mbs_montecarlo_options& o = *options;
        if (o.mode != MBS_MODE_PDP && o.n_trials <= 0)
            return fail(MBS_E_INVALID_ARGUMENT, "n_trials: must be > 0");
        if (o.jobs < 0)
            return fail(MBS_E_INVALID_ARGUMENT, "jobs: must be >= 0");
        mbs::EvalConfig eval = scenario->config.eval;
        eval.seed = o.seed;
        eval.jobs = o.jobs;
        const fs::path dir = prepare_dir(info);
        switch (o.mode)
        {
        case MBS_MODE_RMSE:
            return run_rmse(scenario, o, info, dir, eval);
        case MBS_MODE_ROC:
            return run_roc(scenario, o, info, dir, eval);
        case MBS_MODE_PDP:
            return run_pdp(scenario, o, info, dir, eval);
        }
        return fail(MBS_E_INVALID_ARGUMENT, "mode: unknown");
    });
}

} // extern "C"

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

// mbsense command-line front end. Talks to the library through the C API only.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "mbsense/mbsense.h"

namespace
{
    double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
    double dbm_to_watt(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }

    double parse_double(const std::string& s, const std::string& what)
    {
        std::size_t used = 0;
        double v = 0.0;
        try
        {
            v = std::stod(s, &used);
        }
        catch (const std::exception&)
        {
            used = 0;
        }
        if (used == 0 || used != s.size() || !std::isfinite(v))
            throw std::invalid_argument(what + ": not a number: '" + s + "'");
        return v;
    }

    std::vector<std::string> split(const std::string& s, char sep)
    {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, sep))
            out.push_back(item);
        if (!s.empty() && s.back() == sep)
            out.emplace_back();
        return out;
    }

    // "start:step:stop" (stop inclusive) or a single value.
    std::vector<double> parse_range(const std::string& text)
    {
        if (text.empty())
            throw std::invalid_argument("sweep: no sweep points");
        const std::vector<std::string> parts = split(text, ':');
        if (parts.size() == 1)
            return {parse_double(parts[0], "sweep")};
        if (parts.size() != 3)
            throw std::invalid_argument("sweep: expected start:step:stop, got '" + text + "'");
        const double start = parse_double(parts[0], "sweep"), step = parse_double(parts[1], "sweep"),
                     stop = parse_double(parts[2], "sweep");
        if (step == 0.0)
            throw std::invalid_argument("sweep: step must be non-zero");
        std::vector<double> out;
        const double slack = 1e-9 * std::abs(step);
        for (long i = 0;; ++i)
        {
            const double v = start + static_cast<double>(i) * step;
            if ((step > 0.0 && v > stop + slack) || (step < 0.0 && v < stop - slack))
                break;
            out.push_back(v);
        }
        if (out.empty())
            throw std::invalid_argument("sweep: no sweep points");
        return out;
    }

    // Comma-separated dB values; "off" means no DMC at all.
    std::vector<double> parse_alphas(const std::string& text)
    {
        std::vector<double> out;
        for (const std::string& item : split(text, ','))
            out.push_back(item == "off" ? 0.0 : db_to_linear(parse_double(item, "alphas")));
        if (out.empty())
            throw std::invalid_argument("alphas: no sweep points");
        return out;
    }

    std::string joined_args(int argc, char** argv)
    {
        std::string cmd;
        for (int i = 0; i < argc; ++i)
        {
            if (i)
                cmd += ' ';
            cmd += argv[i];
        }
        return cmd;
    }

    void print_progress(const char* message, void*) { std::cerr << message << std::endl; }

    int report(mbs_status st)
    {
        if (st != MBS_OK)
            std::cerr << "error: " << mbs_last_error() << '\n';
        return static_cast<int>(st);
    }

    struct Scenario
    {
        mbs_scenario* handle = nullptr;
        ~Scenario() { mbs_scenario_free(handle); }
    };
} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-band bistatic sensing: bounds, maps and Monte Carlo studies"};
    app.set_version_flag("--version", std::string(mbs_version()));
    app.require_subcommand(1);

    std::string scenario_path, out_dir = "out", sweep, alphas, alpha_sweep, bbox, grid = "256", mode = "rmse";
    std::uint64_t seed = 1;
    int trials = 1024;
    int jobs = static_cast<int>(std::thread::hardware_concurrency());

    auto common = [&](CLI::App* sub) {
        sub->add_option("--scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    };

    CLI::App* limits = app.add_subcommand("limits", "CRB and ESNR curves (fig4_crb.csv, fig5_esnr.csv)");
    common(limits);
    limits->add_option("--sweep", sweep, "Transmit PSD range in dBm/Hz, start:step:stop");
    limits->add_option("--alphas", alphas, "DMC ratios in dB, comma separated ('off' for none)");
    limits->add_option("--alpha-sweep", alpha_sweep, "DMC ratio range in dB, start:step:stop")->excludes("--alphas");
    limits->add_option("--seed", seed, "Recorded only; the bounds are deterministic");

    CLI::App* bgg = app.add_subcommand("bgg", "Bistatic geometric gain map (bgg_map.csv)");
    common(bgg);
    bgg->add_option("--bbox", bbox, "x_min,x_max,y_min,y_max in metres")->required();
    bgg->add_option("--grid", grid, "nx or nx,ny")->capture_default_str();

    CLI::App* mc = app.add_subcommand("montecarlo", "RMSE, ROC or PDP Monte Carlo runs");
    common(mc);
    mc->add_option("--mode", mode, "rmse | roc | pdp")
        ->check(CLI::IsMember({"rmse", "roc", "pdp"}))
        ->capture_default_str();
    mc->add_option("--trials", trials, "Monte Carlo trials per sweep point")->capture_default_str();
    mc->add_option("--seed", seed, "Master seed")->capture_default_str();
    mc->add_option("--jobs", jobs, "Worker threads (0: all cores)")->capture_default_str();
    mc->add_option("--sweep", sweep, "rmse: transmit PSD in dBm/Hz; roc: reporting floors in dB; start:step:stop");

    CLI11_PARSE(app, argc, argv);

    const std::string command = joined_args(argc, argv);
    try
    {
        Scenario s;
        if (mbs_status st = mbs_scenario_load(scenario_path.c_str(), &s.handle); st != MBS_OK)
            return report(st);
        const mbs_run_info info{out_dir.c_str(), command.c_str()};

        if (limits->parsed())
        {
            std::optional<std::vector<double>> powers, ratios;
            if (limits->count("--sweep"))
            {
                powers = parse_range(sweep);
                for (double& p : *powers)
                    p = dbm_to_watt(p);
            }
            if (limits->count("--alphas"))
                ratios = parse_alphas(alphas);
            if (limits->count("--alpha-sweep"))
            {
                ratios = parse_range(alpha_sweep);
                for (double& a : *ratios)
                    a = db_to_linear(a);
            }
            return report(mbs_run_limits(s.handle, ratios ? ratios->data() : nullptr, ratios ? ratios->size() : 0,
                                         powers ? powers->data() : nullptr, powers ? powers->size() : 0, &info));
        }
        if (bgg->parsed())
        {
            const std::vector<std::string> b = split(bbox, ',');
            if (b.size() != 4)
                throw std::invalid_argument("bbox: expected x_min,x_max,y_min,y_max");
            const std::vector<std::string> g = split(grid, ',');
            if (g.empty() || g.size() > 2)
                throw std::invalid_argument("grid: expected nx or nx,ny");
            const int nx = static_cast<int>(parse_double(g[0], "grid"));
            const int ny = g.size() == 2 ? static_cast<int>(parse_double(g[1], "grid")) : nx;
            return report(mbs_run_bgg(s.handle, parse_double(b[0], "bbox"), parse_double(b[1], "bbox"),
                                      parse_double(b[2], "bbox"), parse_double(b[3], "bbox"), nx, ny, &info));
        }

        mbs_montecarlo_options o{};
        o.mode = mode == "roc" ? MBS_MODE_ROC : mode == "pdp" ? MBS_MODE_PDP : MBS_MODE_RMSE;
        o.n_trials = trials;
        o.seed = seed;
        o.jobs = jobs;
        o.progress = print_progress;
        std::vector<double> values;
        if (mc->count("--sweep"))
        {
            values = parse_range(sweep);
            for (double& v : values)
                v = o.mode == MBS_MODE_ROC ? db_to_linear(v) : dbm_to_watt(v);
            o.sweep = values.data();
            o.n_sweep = values.size();
        }
        return report(mbs_run_montecarlo(s.handle, &o, &info));
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(MBS_E_INVALID_ARGUMENT);
    }
}

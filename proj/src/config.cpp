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

#include "mbsense/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mbs
{
    using nlohmann::json;

    double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
    double linear_to_db(double x) { return 10.0 * std::log10(x); }
    double dbm_to_watt(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }
    double watt_to_dbm(double w) { return 10.0 * std::log10(w * 1e3); }

    namespace
    {
        constexpr double deg = pi / 180.0;

        [[noreturn]] void fail(const std::string& path, const std::string& what)
        {
            throw ConfigError(path + ": " + what);
        }

        void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed)
        {
            if (!obj.is_object())
                fail(path.empty() ? "<root>" : path, "expected an object");
            for (auto it = obj.begin(); it != obj.end(); ++it)
                if (!allowed.count(it.key()))
                    fail(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
        }

        std::string join(const std::string& path, const std::string& key)
        {
            return path.empty() ? key : path + "." + key;
        }

        double number(const json& obj, const std::string& path, const std::string& key)
        {
            if (!obj.contains(key))
                fail(join(path, key), "missing");
            const json& v = obj.at(key);
            if (!v.is_number())
                fail(join(path, key), "expected a number");
            return v.get<double>();
        }

        std::optional<double> optional_number(const json& obj, const std::string& path, const std::string& key)
        {
            if (!obj.contains(key) || obj.at(key).is_null())
                return std::nullopt;
            return number(obj, path, key);
        }

        int integer(const json& obj, const std::string& path, const std::string& key)
        {
            if (!obj.contains(key))
                fail(join(path, key), "missing");
            const json& v = obj.at(key);
            if (!v.is_number_integer())
                fail(join(path, key), "expected an integer");
            return v.get<int>();
        }

        Vec2 point(const json& obj, const std::string& path, const std::string& key)
        {
            const json& v = obj.at(key);
            if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
                fail(join(path, key), "expected [x, y]");
            return {v[0].get<double>(), v[1].get<double>()};
        }

        SubBand parse_band(const json& b, const std::string& path)
        {
            check_keys(b, path,
                       {"carrier_freq_ghz", "subcarrier_spacing_khz", "n_subcarriers", "decay_rate", "vmd_kappa_tx",
                        "vmd_kappa_rx"});
            SubBand s;
            s.carrier_freq = number(b, path, "carrier_freq_ghz") * 1e9;
            s.subcarrier_spacing = number(b, path, "subcarrier_spacing_khz") * 1e3;
            s.n_subcarriers = integer(b, path, "n_subcarriers");
            s.decay_rate = number(b, path, "decay_rate");
            s.vmd_kappa_tx = optional_number(b, path, "vmd_kappa_tx");
            s.vmd_kappa_rx = optional_number(b, path, "vmd_kappa_rx");
            return s;
        }

        PathTruth parse_path(const json& p, const std::string& path, std::size_t n_bands)
        {
            check_keys(p, path, {"delay_ns", "aod_deg", "aoa_deg", "coeffs", "tau_d_ns", "tau_a_ns"});
            PathTruth t;
            t.geometry.delay = number(p, path, "delay_ns") / 1e9;
            t.geometry.aod = number(p, path, "aod_deg") * deg;
            t.geometry.aoa = number(p, path, "aoa_deg") * deg;
            if (!p.contains("coeffs") || !p.at("coeffs").is_array())
                fail(join(path, "coeffs"), "expected [[re, im], ...]");
            const json& cs = p.at("coeffs");
            if (cs.size() != n_bands)
                fail(join(path, "coeffs"), "exactly one coefficient per sub-band required");
            for (std::size_t m = 0; m < cs.size(); ++m)
            {
                const json& c = cs[m];
                if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
                    fail(join(path, "coeffs[" + std::to_string(m) + "]"), "expected [re, im]");
                t.coeffs.emplace_back(c[0].get<double>(), c[1].get<double>());
            }
            const std::optional<double> td = optional_number(p, path, "tau_d_ns");
            const std::optional<double> ta = optional_number(p, path, "tau_a_ns");
            if (td.has_value() != ta.has_value())
                fail(join(path, "tau_d_ns"), "tau_d_ns and tau_a_ns must be given together");
            if (td)
                t.bistatic_delays = std::array<double, 2>{*td / 1e9, *ta / 1e9};
            return t;
        }

        void parse_algorithm(const json& a, EvalConfig& e)
        {
            const std::string path = "algorithm";
            check_keys(a, path,
                       {"esnr_threshold_db", "prominence_threshold", "max_cost", "detection_floor_db",
                        "detection_radius", "max_paths", "target_path", "delay_oversampling", "angle_oversampling",
                        "lm_max_iterations", "lm_tolerance", "lm_damping_init"});
            if (auto v = optional_number(a, path, "esnr_threshold_db"))
                e.fusion.esnr_threshold = db_to_linear(*v);
            if (auto v = optional_number(a, path, "prominence_threshold"))
                e.fusion.prominence = *v;
            if (auto v = optional_number(a, path, "max_cost"))
                e.fusion.cost_max = *v;
            if (auto v = optional_number(a, path, "detection_floor_db"))
                e.estimator.detection_floor = db_to_linear(*v);
            if (auto v = optional_number(a, path, "detection_radius"))
                e.detection_radius = *v;
            if (auto v = optional_number(a, path, "lm_tolerance"))
                e.estimator.tolerance = *v;
            if (auto v = optional_number(a, path, "lm_damping_init"))
                e.estimator.damping_init = *v;
            if (a.contains("max_paths"))
                e.estimator.max_paths = integer(a, path, "max_paths");
            if (a.contains("target_path"))
            {
                e.target_path = integer(a, path, "target_path");
                if (e.target_path < 0)
                    fail(join(path, "target_path"), "must be >= 0");
            }
            if (a.contains("delay_oversampling"))
                e.estimator.delay_oversampling = integer(a, path, "delay_oversampling");
            if (a.contains("angle_oversampling"))
                e.estimator.angle_oversampling = integer(a, path, "angle_oversampling");
            if (a.contains("lm_max_iterations"))
                e.estimator.max_iterations = integer(a, path, "lm_max_iterations");

            if (!(e.fusion.prominence >= 0.0))
                fail("algorithm.prominence_threshold", "must be >= 0");
            if (!(e.fusion.cost_max > 0.0))
                fail("algorithm.max_cost", "must be > 0");
            if (!(e.detection_radius > 0.0))
                fail("algorithm.detection_radius", "must be > 0");
            if (e.estimator.max_paths < 1)
                fail("algorithm.max_paths", "must be >= 1");
            if (e.estimator.delay_oversampling < 1 || e.estimator.angle_oversampling < 1)
                fail("algorithm", "oversampling factors must be >= 1");
            if (e.estimator.max_iterations < 1)
                fail("algorithm.lm_max_iterations", "must be >= 1");
        }
    } // namespace

    RunConfig parse_config(const std::string& text)
    {
        json doc;
        try
        {
            doc = json::parse(text);
        }
        catch (const json::parse_error& e)
        {
            throw ConfigError(std::string("malformed JSON: ") + e.what());
        }
        check_keys(doc, "",
                   {"sub_bands", "arrays", "paths", "tx_psd_dbm_per_hz", "dmc_ratio_db", "dmc_ratio_linear",
                    "noise_psd_dbm_per_hz", "noise_figure_db", "tx_pos_m", "rx_pos_m", "tx_broadside", "tx_axis",
                    "rx_broadside", "rx_axis", "algorithm"});

        RunConfig cfg;
        Scenario& s = cfg.scenario;
        if (!doc.contains("sub_bands") || !doc.at("sub_bands").is_array())
            fail("sub_bands", "expected an array");
        for (std::size_t m = 0; m < doc.at("sub_bands").size(); ++m)
            s.sub_bands.push_back(parse_band(doc.at("sub_bands")[m], "sub_bands[" + std::to_string(m) + "]"));

        if (!doc.contains("arrays"))
            fail("arrays", "missing");
        const json& ar = doc.at("arrays");
        check_keys(ar, "arrays", {"n_tx", "n_rx", "spacing_tx_m", "spacing_rx_m"});
        s.arrays.n_tx = integer(ar, "arrays", "n_tx");
        s.arrays.n_rx = integer(ar, "arrays", "n_rx");
        s.arrays.spacing_tx = number(ar, "arrays", "spacing_tx_m");
        s.arrays.spacing_rx = number(ar, "arrays", "spacing_rx_m");

        if (!doc.contains("paths") || !doc.at("paths").is_array())
            fail("paths", "expected an array");
        for (std::size_t k = 0; k < doc.at("paths").size(); ++k)
            s.paths.push_back(parse_path(doc.at("paths")[k], "paths[" + std::to_string(k) + "]", s.sub_bands.size()));

        s.tx_psd = dbm_to_watt(number(doc, "", "tx_psd_dbm_per_hz"));
        const bool has_db = doc.contains("dmc_ratio_db"), has_lin = doc.contains("dmc_ratio_linear");
        if (has_db == has_lin)
            fail("dmc_ratio_db", "exactly one of dmc_ratio_db and dmc_ratio_linear required");
        s.dmc_ratio = has_db ? db_to_linear(number(doc, "", "dmc_ratio_db")) : number(doc, "", "dmc_ratio_linear");
        s.noise_psd = dbm_to_watt(number(doc, "", "noise_psd_dbm_per_hz"));
        s.noise_figure = db_to_linear(number(doc, "", "noise_figure_db"));

        if (doc.contains("tx_pos_m") != doc.contains("rx_pos_m"))
            fail("tx_pos_m", "tx_pos_m and rx_pos_m must be given together");
        if (doc.contains("tx_pos_m"))
        {
            auto [tx, rx] = facing_poses(point(doc, "", "tx_pos_m"), point(doc, "", "rx_pos_m"));
            if (doc.contains("tx_broadside"))
                tx.broadside = point(doc, "", "tx_broadside");
            if (doc.contains("tx_axis"))
                tx.axis = point(doc, "", "tx_axis");
            if (doc.contains("rx_broadside"))
                rx.broadside = point(doc, "", "rx_broadside");
            if (doc.contains("rx_axis"))
                rx.axis = point(doc, "", "rx_axis");
            s.tx_pose = tx;
            s.rx_pose = rx;
        }

        // Scatterers without explicit leg delays: law of sines on the bistatic triangle.
        for (std::size_t k = 1; k < s.paths.size(); ++k)
        {
            PathTruth& p = s.paths[k];
            if (p.bistatic_delays)
                continue;
            try
            {
                p.bistatic_delays =
                    bistatic_delays_from_angles(s.paths.front().geometry.delay, p.geometry.aod, p.geometry.aoa);
            }
            catch (const ScenarioError& e)
            {
                fail("paths[" + std::to_string(k) + "]", std::string("cannot derive tau_d_ns/tau_a_ns: ") + e.what());
            }
        }

        cfg.eval.target_path = -1;
        if (doc.contains("algorithm"))
            parse_algorithm(doc.at("algorithm"), cfg.eval);
        // Unset: the first scatterer, or the only path.
        if (cfg.eval.target_path == -1)
            cfg.eval.target_path = std::min(1, static_cast<int>(s.paths.size()) - 1);
        if (cfg.eval.target_path < 0 || cfg.eval.target_path >= static_cast<int>(s.paths.size()))
            fail("algorithm.target_path", "out of range");

        try
        {
            s = validate(s);
        }
        catch (const ScenarioError& e)
        {
            throw ConfigError(e.what());
        }
        return cfg;
    }

    RunConfig load_config(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError(path + ": cannot open");
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_config(ss.str());
    }

    std::string resolved_json(const RunConfig& cfg)
    {
        const Scenario& s = cfg.scenario;
        json doc;
        for (const SubBand& b : s.sub_bands)
        {
            json jb{{"carrier_freq_hz", b.carrier_freq},
                    {"subcarrier_spacing_hz", b.subcarrier_spacing},
                    {"n_subcarriers", b.n_subcarriers},
                    {"decay_rate", b.decay_rate}};
            jb["vmd_kappa_tx"] = b.vmd_kappa_tx ? json(*b.vmd_kappa_tx) : json(nullptr);
            jb["vmd_kappa_rx"] = b.vmd_kappa_rx ? json(*b.vmd_kappa_rx) : json(nullptr);
            doc["sub_bands"].push_back(jb);
        }
        doc["arrays"] = {{"n_tx", s.arrays.n_tx},
                         {"n_rx", s.arrays.n_rx},
                         {"spacing_tx_m", s.arrays.spacing_tx},
                         {"spacing_rx_m", s.arrays.spacing_rx}};
        for (const PathTruth& p : s.paths)
        {
            json jp{{"delay_s", p.geometry.delay}, {"aod_rad", p.geometry.aod}, {"aoa_rad", p.geometry.aoa}};
            for (const cd& c : p.coeffs)
                jp["coeffs"].push_back({c.real(), c.imag()});
            if (p.bistatic_delays)
                jp["bistatic_delays_s"] = {(*p.bistatic_delays)[0], (*p.bistatic_delays)[1]};
            doc["paths"].push_back(jp);
        }
        doc["tx_psd_w_per_hz"] = s.tx_psd;
        doc["dmc_ratio"] = s.dmc_ratio;
        doc["noise_psd_w_per_hz"] = s.noise_psd;
        doc["noise_figure"] = s.noise_figure;
        if (s.tx_pose)
        {
            auto pose = [](const ArrayPose& p) {
                return json{{"position", {p.position.x, p.position.y}},
                            {"broadside", {p.broadside.x, p.broadside.y}},
                            {"axis", {p.axis.x, p.axis.y}}};
            };
            doc["tx_pose"] = pose(*s.tx_pose);
            doc["rx_pose"] = pose(*s.rx_pose);
        }
        const EvalConfig& e = cfg.eval;
        doc["algorithm"] = {{"esnr_threshold", e.fusion.esnr_threshold},
                            {"prominence_threshold", e.fusion.prominence},
                            {"max_cost", e.fusion.cost_max},
                            {"detection_floor", e.estimator.detection_floor},
                            {"detection_radius", e.detection_radius},
                            {"max_paths", e.estimator.max_paths},
                            {"target_path", e.target_path},
                            {"delay_oversampling", e.estimator.delay_oversampling},
                            {"angle_oversampling", e.estimator.angle_oversampling},
                            {"lm_max_iterations", e.estimator.max_iterations},
                            {"lm_tolerance", e.estimator.tolerance},
                            {"lm_damping_init", e.estimator.damping_init}};
        return doc.dump(2);
    }

    std::uint64_t config_hash(const RunConfig& cfg)
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : resolved_json(cfg))
        {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    RunConfig reference_config(double tx_psd_dbm_per_hz, double dmc_ratio_db)
    {
        RunConfig cfg;
        Scenario& s = cfg.scenario;
        const double f[2] = {8.75e9, 21.7e9};
        const double beta[2] = {0.5, 1.5};
        for (int m = 0; m < 2; ++m)
        {
            SubBand b;
            b.carrier_freq = f[m];
            b.subcarrier_spacing = 1e6;
            b.n_subcarriers = 128;
            b.decay_rate = beta[m];
            s.sub_bands.push_back(b);
        }
        s.arrays = {2, 2, 0.02, 0.02};

        PathTruth los;
        los.geometry = {30e-9, 0.0, 0.0};
        los.coeffs = {cd(0.0071, 0.0), cd(0.0029, 0.0)};
        PathTruth sc;
        sc.geometry = {32.55e-9, 16.72 * deg, 30.96 * deg};
        sc.coeffs = {cd(0.0013, -0.0095), cd(0.0005, -0.0038)};
        sc.bistatic_delays = bistatic_delays_from_angles(los.geometry.delay, sc.geometry.aod, sc.geometry.aoa);
        s.paths = {los, sc};

        s.tx_psd = dbm_to_watt(tx_psd_dbm_per_hz);
        s.dmc_ratio = db_to_linear(dmc_ratio_db);
        s.noise_psd = dbm_to_watt(-174.0);
        s.noise_figure = db_to_linear(7.0);
        const auto [tx, rx] = facing_poses({0.0, 0.0}, {speed_of_light * los.geometry.delay, 0.0});
        s.tx_pose = tx;
        s.rx_pose = rx;
        s = validate(s);
        return cfg;
    }

} // namespace mbs

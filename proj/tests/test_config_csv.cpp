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

#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "mbsense/config.hpp"
#include "mbsense/csv.hpp"

using namespace mbs;

namespace
{
    const std::string base = R"({
      "sub_bands": [{"carrier_freq_ghz": 8.75, "subcarrier_spacing_khz": 1000, "n_subcarriers": 16, "decay_rate": 0.5}],
      "arrays": {"n_tx": 2, "n_rx": 2, "spacing_tx_m": 0.02, "spacing_rx_m": 0.02},
      "paths": [{"delay_ns": 30.0, "aod_deg": 0.0, "aoa_deg": 0.0, "coeffs": [[0.007, 0.0]]}],
      "tx_psd_dbm_per_hz": -40.0,
      "dmc_ratio_db": -30.0,
      "noise_psd_dbm_per_hz": -174.0,
      "noise_figure_db": 7.0
    })";

    std::string replace(std::string s, const std::string& from, const std::string& to)
    {
        const auto pos = s.find(from);
        REQUIRE(pos != std::string::npos);
        return s.replace(pos, from.size(), to);
    }

    std::string error_of(const std::string& text)
    {
        try
        {
            parse_config(text);
        }
        catch (const ConfigError& e)
        {
            return e.what();
        }
        return "";
    }
} // namespace

TEST_CASE("parse_config: minimal document and unit conversion")
{
    const RunConfig c = parse_config(base);
    const Scenario& s = c.scenario;
    CHECK(s.sub_bands[0].carrier_freq == doctest::Approx(8.75e9));
    CHECK(s.sub_bands[0].subcarrier_spacing == doctest::Approx(1e6));
    CHECK(s.paths[0].geometry.delay == doctest::Approx(30e-9));
    CHECK(s.tx_psd == doctest::Approx(1e-7));
    CHECK(s.dmc_ratio == doctest::Approx(1e-3));
    CHECK(c.eval.estimator.detection_floor == doctest::Approx(db_to_linear(13.0)));

    const RunConfig lin = parse_config(replace(base, R"("dmc_ratio_db": -30.0)", R"("dmc_ratio_linear": 0)"));
    CHECK(lin.scenario.dmc_ratio == 0.0);
}

TEST_CASE("parse_config: errors name the offending key")
{
    CHECK(error_of(replace(base, R"("n_subcarriers": 16, )", "")) == "sub_bands[0].n_subcarriers: missing");
    CHECK(error_of(replace(base, R"("n_subcarriers": 16)", R"("n_subcarriers": "16")")) ==
          "sub_bands[0].n_subcarriers: expected an integer");
    CHECK(error_of(replace(base, R"("noise_figure_db": 7.0)", R"("noise_figure_db": 7.0, "colour": 1)")) ==
          "colour: unknown key");
    CHECK(error_of(replace(base, R"("dmc_ratio_db": -30.0)", R"("dmc_ratio_db": -30.0, "dmc_ratio_linear": 0)")) ==
          "dmc_ratio_db: exactly one of dmc_ratio_db and dmc_ratio_linear required");
    CHECK(error_of(replace(base, "[[0.007, 0.0]]", "[[0.007, 0.0], [1, 1]]")) ==
          "paths[0].coeffs: exactly one coefficient per sub-band required");
    CHECK(error_of(replace(base, R"("noise_figure_db": 7.0)", R"("noise_figure_db": 7.0, "tx_pos_m": [0, 0])")) ==
          "tx_pos_m: tx_pos_m and rx_pos_m must be given together");
    CHECK(error_of("{").rfind("malformed JSON", 0) == 0);
    CHECK(error_of(replace(base, R"("n_subcarriers": 16)", R"("n_subcarriers": 0)")).find("n_subcarriers") !=
          std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/x.json"), ConfigError);
}

TEST_CASE("shipped reference document equals the built-in reference")
{
    const RunConfig file = load_config(MBS_DATA_DIR "/reference.json");
    const RunConfig ref = reference_config();
    CHECK(config_hash(file) == config_hash(ref));
    CHECK(resolved_json(file) == resolved_json(ref));
}

TEST_CASE("config_hash: stable under formatting, sensitive to values")
{
    const RunConfig a = parse_config(base);
    std::string compact;
    for (char ch : base)
        if (ch != ' ' && ch != '\n')
            compact += ch;
    CHECK(config_hash(parse_config(compact)) == config_hash(a));
    CHECK(resolved_json(parse_config(compact)) == resolved_json(a));
    // Same quantity in another unit.
    CHECK(config_hash(parse_config(replace(base, R"("dmc_ratio_db": -30.0)", R"("dmc_ratio_linear": 0.001)"))) ==
          config_hash(a));
    CHECK(config_hash(parse_config(replace(base, "\"delay_ns\": 30.0", "\"delay_ns\": 30.5"))) != config_hash(a));
    CHECK(config_hash(a) == config_hash(parse_config(base)));
}

TEST_CASE("format_number: shortest round trip")
{
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(2.5) == "2.5");
    CHECK(format_number(-3.0) == "-3");
    CHECK(format_number(1e-22) == "1e-22");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_number(-INFINITY) == "-inf");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> e(-30.0, 30.0);
    for (int i = 0; i < 10000; ++i)
    {
        const double v = std::pow(10.0, e(rng)) * (i % 2 ? -1.0 : 1.0);
        const std::string s = format_number(v);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        CHECK(back == v);
    }
}

TEST_CASE("CsvSink rows and the finiteness flag")
{
    std::ostringstream out;
    CsvSink csv(out);
    csv.header({"a", "b", "c"});
    csv.field(1.5).empty().field(std::string("x"));
    csv.end_row();
    CHECK(csv.all_finite());
    csv.field(3).field(std::nan("")).field(0.0);
    csv.end_row();
    CHECK_FALSE(csv.all_finite());
    CHECK(out.str() == "a,b,c\n1.5,,x\n3,nan,0\n");
}

TEST_CASE("crb and roc layouts")
{
    std::ostringstream out;
    CsvSink csv(out);
    crb_header(csv, 2);
    CHECK(out.str() ==
          "alpha_db,tx_psd_dbm_per_hz,path,sqrt_crb_delay_band1_ns,sqrt_crb_delay_band2_ns,sqrt_crb_delay_joint_ns,"
          "sqrt_crb_delay_approx_ns,sqrt_crb_aod_band1_deg,sqrt_crb_aod_band2_deg,sqrt_crb_aod_joint_deg,"
          "sqrt_crb_aod_approx_deg\n");

    const Scenario s = test::reference_no_dmc(-40.0);
    const LimitsReport r = compute_limits(s);
    std::ostringstream rows;
    CsvSink rc(rows);
    crb_rows(rc, 0.0, s.tx_psd, r);
    std::string line;
    std::istringstream in(rows.str());
    int n = 0;
    while (std::getline(in, line))
    {
        CHECK(line.rfind(",-40,", 0) == 0);
        ++n;
    }
    CHECK(n == 2);
}

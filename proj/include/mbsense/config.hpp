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

#ifndef MBSENSE_CONFIG_HPP
#define MBSENSE_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

#include "mbsense/evaluate.hpp"
#include "mbsense/scenario.hpp"

namespace mbs
{
    /// Raised for unreadable files, malformed JSON, and missing or mistyped keys.
    class ConfigError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    struct RunConfig
    {
        Scenario scenario;
        EvalConfig eval;
    };

    double db_to_linear(double db);
    double linear_to_db(double x);
    double dbm_to_watt(double dbm);
    double watt_to_dbm(double w);

    /// Parses a scenario document. Keys carry their units (carrier_freq_ghz,
    /// tx_psd_dbm_per_hz, ...); everything is converted to SI and linear scale here.
    RunConfig parse_config(const std::string& json_text);
    RunConfig load_config(const std::string& path);

    /// Fully resolved configuration in SI units, keys sorted.
    std::string resolved_json(const RunConfig& config);

    /// FNV-1a 64 of resolved_json().
    std::uint64_t config_hash(const RunConfig& config);

    /// Two-band, two-path reference scenario (8.75 / 21.7 GHz, 2 x 2 arrays at 2 cm) at
    /// the given operating point.
    RunConfig reference_config(double tx_psd_dbm_per_hz = -40.0, double dmc_ratio_db = -30.0);

} // namespace mbs

#endif

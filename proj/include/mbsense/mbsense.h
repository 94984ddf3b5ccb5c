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

// C interface of the mbsense library. All quantities are SI and linear scale
// (W/Hz, linear power ratios); dB conversion is left to callers.

#ifndef MBSENSE_H
#define MBSENSE_H

#include <stddef.h>
#include <stdint.h>

#if defined(MBS_BUILDING_LIBRARY)
#define MBS_API __attribute__((visibility("default")))
#else
#define MBS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mbs_status
{
    MBS_OK = 0,
    MBS_E_INVALID_ARGUMENT = 1,
    MBS_E_CONFIG = 2,
    MBS_E_IO = 3,
    MBS_E_NONFINITE = 4, /* outputs written but some value is nan/inf; no manifest */
    MBS_E_INTERNAL = 5
} mbs_status;

typedef enum mbs_mode
{
    MBS_MODE_RMSE = 0,
    MBS_MODE_ROC = 1,
    MBS_MODE_PDP = 2
} mbs_mode;

typedef struct mbs_scenario mbs_scenario;

typedef void (*mbs_progress_fn)(const char* message, void* user);

MBS_API const char* mbs_version(void);

/* Message of the last failed call on this thread; empty after success. */
MBS_API const char* mbs_last_error(void);

MBS_API mbs_status mbs_scenario_load(const char* path, mbs_scenario** out);
MBS_API mbs_status mbs_scenario_parse(const char* json_text, mbs_scenario** out);
MBS_API void mbs_scenario_free(mbs_scenario* scenario);

MBS_API mbs_status mbs_scenario_config_hash(const mbs_scenario* scenario, uint64_t* out);
MBS_API mbs_status mbs_scenario_operating_point(const mbs_scenario* scenario, double* tx_psd, double* dmc_ratio);

/* Common to every run: outputs land in out_dir (created if missing) next to manifest.json.
 * command is recorded in the manifest verbatim. */
typedef struct mbs_run_info
{
    const char* out_dir;
    const char* command;
} mbs_run_info;

/* fig4_crb.csv and fig5_esnr.csv over the grid dmc_ratios x tx_psds.
 * A NULL list selects the scenario's own value; a non-NULL list must be non-empty. */
MBS_API mbs_status mbs_run_limits(const mbs_scenario* scenario, const double* dmc_ratios, size_t n_dmc_ratios,
                                  const double* tx_psds, size_t n_tx_psds, const mbs_run_info* info);

/* bgg_map.csv on an nx x ny grid over [x_min, x_max] x [y_min, y_max] metres. */
MBS_API mbs_status mbs_run_bgg(const mbs_scenario* scenario, double x_min, double x_max, double y_min, double y_max,
                               int nx, int ny, const mbs_run_info* info);

typedef struct mbs_montecarlo_options
{
    mbs_mode mode;
    int n_trials;          /* > 0; ignored for MBS_MODE_PDP */
    uint64_t seed;
    int jobs;              /* 0: hardware concurrency */
    const double* sweep;   /* rmse: tx_psd [W/Hz]; roc: reporting floors (linear). NULL: default */
    size_t n_sweep;
    mbs_progress_fn progress;
    void* progress_user;
} mbs_montecarlo_options;

/* rmse: fig6_delay_rmse.csv, fig7_aod_rmse.csv (flushed per power point)
 * roc:  fig8_roc.csv (default ladder 0..20 dB in 1 dB steps)
 * pdp:  pdp.csv and estimates.csv of one realization */
MBS_API mbs_status mbs_run_montecarlo(const mbs_scenario* scenario, const mbs_montecarlo_options* options,
                                      const mbs_run_info* info);

#ifdef __cplusplus
}
#endif

#endif

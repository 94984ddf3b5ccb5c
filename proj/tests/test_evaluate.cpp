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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "mbsense/evaluate.hpp"
#include "mbsense/limits.hpp"

using namespace mbs;
using mbs::test::deg;

namespace
{
    // One path at about the requested single-band ESNR, no DMC.
    Scenario one_path_at(double esnr_db, int n = 16, int l = 2)
    {
        Scenario s = test::small_scenario(n, l, l, {{30e-9, 0.2, -0.1}}, 0.0, 1e-6);
        const double e = compute_limits(s).esnr_band(0, 0);
        return validate(with_operating_point(s, s.tx_psd * db_to_linear(esnr_db) / e, 0.0));
    }

    // Isotonic regression by the max-min formula.
    std::vector<double> isotonic_oracle(const std::vector<double>& y)
    {
        const int n = static_cast<int>(y.size());
        std::vector<double> out(n);
        for (int i = 0; i < n; ++i)
        {
            double best = -1e300;
            for (int j = 0; j <= i; ++j)
            {
                double inner = 1e300;
                for (int k = i; k < n; ++k)
                {
                    double s = 0.0;
                    for (int t = j; t <= k; ++t)
                        s += y[t];
                    inner = std::min(inner, s / (k - j + 1));
                }
                best = std::max(best, inner);
            }
            out[i] = best;
        }
        return out;
    }
} // namespace

TEST_CASE("associate_truth: hits, misses, false alarms")
{
    const Scenario s = test::reference();
    const GeometricParams los = s.paths[0].geometry;
    const GeometricParams sc = s.paths[1].geometry;
    const double cell = 1.0 / (128 * 1e6);

    const TruthAssociation hit = associate_truth({{los}, {sc}}, s, 0.5);
    CHECK(hit.all_detected());
    CHECK(hit.false_alarms == 0);
    CHECK(hit.nearest[1].aod == sc.aod);

    GeometricParams off = los;
    off.delay += 0.6 * cell;
    const TruthAssociation miss = associate_truth({{off}}, s, 0.5);
    CHECK_FALSE(miss.detected[0]);
    CHECK(miss.false_alarms == 1);

    off.delay = los.delay + 0.4 * cell;
    const TruthAssociation near = associate_truth({{off}, {los}}, s, 0.5);
    CHECK(near.detected[0]);
    CHECK(near.false_alarms == 0);
    CHECK(near.nearest[0].delay == los.delay);

    CHECK(associate_truth({}, s, 0.5).false_alarms == 0);
}

TEST_CASE("points_single expands every alias combination")
{
    const Scenario s = test::reference();
    SingleBandEstimate e;
    e.band = 1;
    PathEstimate p;
    p.x = {30e-9, 0.0, 0.0};
    e.paths.push_back(p);
    const PointSet pts = points_single(e, s);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].size() == 9);
    e.band = 0;
    CHECK(points_single(e, s)[0].size() == 1);
}

TEST_CASE("wilson matches reference intervals")
{
    struct Case
    {
        int k, n;
        double lo, hi;
    };
    for (const Case& c : {Case{0, 10, 0.0, 0.277532799863}, Case{10, 10, 0.722467200137, 1.0},
                          Case{5, 10, 0.236593090513, 0.763406909487}, Case{37, 1024, 0.026326583698, 0.049406359503},
                          Case{1, 3, 0.061491944720, 0.792340399198}})
    {
        const Interval w = wilson(c.k, c.n);
        CHECK(w.lo == doctest::Approx(c.lo).epsilon(1e-9));
        CHECK(w.hi == doctest::Approx(c.hi).epsilon(1e-9));
    }
}

TEST_CASE("isotonic_cleanup")
{
    std::vector<RocPoint> c(4);
    const double pd[] = {0.5, 0.3, 0.4, 0.8};
    for (int i = 0; i < 4; ++i)
    {
        c[i].pfa = 0.1 * (3 - i);
        c[i].pd = pd[3 - i];
    }
    const std::vector<RocPoint> out = isotonic_cleanup(c);
    CHECK(out[0].pfa == 0.0);
    CHECK(out[0].pd == doctest::Approx(0.4));
    CHECK(out[1].pd == doctest::Approx(0.4));
    CHECK(out[2].pd == doctest::Approx(0.4));
    CHECK(out[3].pd == doctest::Approx(0.8));

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 200; ++t)
    {
        std::vector<RocPoint> r(1 + t % 12);
        std::vector<double> y;
        for (std::size_t i = 0; i < r.size(); ++i)
        {
            r[i].pfa = static_cast<double>(i) / r.size();
            r[i].pd = u(rng);
            y.push_back(r[i].pd);
        }
        const std::vector<double> want = isotonic_oracle(y);
        const std::vector<RocPoint> got = isotonic_cleanup(r);
        for (std::size_t i = 0; i < r.size(); ++i)
            CHECK(got[i].pd == doctest::Approx(want[i]).epsilon(1e-12));
    }
}

TEST_CASE("parallel_for visits every index once and propagates errors")
{
    for (int jobs : {0, 1, 3, 64})
        for (int n : {0, 1, 7, 500})
        {
            std::vector<std::atomic<int>> hits(n);
            parallel_for(n, jobs, [&](int i) { ++hits[i]; });
            for (auto& h : hits)
                CHECK(h.load() == 1);
        }
    CHECK_THROWS_AS(parallel_for(10, 2, [](int i) {
                        if (i == 5)
                            throw std::runtime_error("x");
                    }),
                    std::runtime_error);
}

TEST_CASE("derive_seed and trial determinism")
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t m : {0ull, 1ull, 2ull})
        for (std::uint64_t t = 0; t < 1000; ++t)
            CHECK(seen.insert(derive_seed(m, t)).second);
    CHECK(derive_seed(7, 3) == derive_seed(7, 3));

    const Scenario s = test::small_scenario(16, 2, 2, {{30e-9, 0.2, -0.1}, {45e-9, 0.3, 0.4}}, 1e-3, 1e-6);
    EvalConfig cfg;
    const TrialRunner a(s, cfg), b(s, cfg);
    for (std::uint64_t t = 0; t < 5; ++t)
    {
        const TrialOutcome x = a.run(t), y = b.run(t);
        CHECK(x.seed == y.seed);
        REQUIRE(x.estimators.size() == 2);
        for (std::size_t e = 0; e < 2; ++e)
        {
            CHECK(x.estimators[e].detected == y.estimators[e].detected);
            CHECK(x.estimators[e].false_alarms == y.estimators[e].false_alarms);
            for (std::size_t k = 0; k < 2; ++k)
                CHECK(x.estimators[e].nearest[k].delay == y.estimators[e].nearest[k].delay);
        }
    }
}

TEST_CASE("roc_sweep: worker count does not change results; extreme floors")
{
    const Scenario s = one_path_at(30.0);
    EvalConfig cfg;
    const std::vector<double> floors{db_to_linear(0.0), db_to_linear(13.0), db_to_linear(200.0)};
    cfg.jobs = 1;
    const std::vector<RocPoint> one = roc_sweep(s, floors, 24, cfg);
    cfg.jobs = 3;
    const std::vector<RocPoint> three = roc_sweep(s, floors, 24, cfg);
    REQUIRE(one.size() == three.size());
    for (std::size_t i = 0; i < one.size(); ++i)
    {
        CHECK(one[i].n_detect == three[i].n_detect);
        CHECK(one[i].n_false == three[i].n_false);
    }
    for (const RocPoint& p : curve_of(one, "band1"))
    {
        if (p.floor == db_to_linear(200.0))
        {
            CHECK(p.pd == 0.0);
            CHECK(p.pfa == 0.0);
        }
        if (p.floor == db_to_linear(13.0))
            CHECK(p.pd == 1.0);
        CHECK(p.pd_ci.lo <= p.pd);
        CHECK(p.pd <= p.pd_ci.hi);
    }
    CHECK_THROWS_AS(roc_sweep(s, {}, 4, cfg), std::invalid_argument);
    CHECK_THROWS_AS(roc_sweep(s, floors, 0, cfg), std::invalid_argument);
}

TEST_CASE("rmse_sweep: errors of a strong single path sit at the bound")
{
    const Scenario s = one_path_at(30.0);
    EvalConfig cfg;
    cfg.target_path = 0;
    const std::vector<RmseRow> rows = rmse_sweep(s, {s.tx_psd}, 0.0, 200, cfg);
    REQUIRE(rows.size() == 2);
    for (const RmseRow& r : rows)
    {
        CHECK(r.n_trials == 200);
        CHECK(r.n_detected == 200);
        REQUIRE(r.delay_rmse.has_value());
        const double q_t = *r.delay_rmse / std::sqrt(r.crb_delay);
        const double q_a = *r.aod_rmse / std::sqrt(r.crb_aod);
        INFO(r.estimator, " delay ratio ", q_t, " aod ratio ", q_a);
        CHECK(q_t > 0.8);
        CHECK(q_t < 1.25);
        CHECK(q_a > 0.8);
        CHECK(q_a < 1.25);
    }
    cfg.target_path = 3;
    CHECK_THROWS_AS(rmse_sweep(s, {s.tx_psd}, 0.0, 4, cfg), std::invalid_argument);
}

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

#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "mbsense/channel.hpp"
#include "mbsense/kron.hpp"

using namespace mbs;
using mbs::test::deg;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace
{
    const cd j{0.0, 1.0};

    SubBand band(double f, int n, double beta = 0.5)
    {
        SubBand b;
        b.carrier_freq = f;
        b.subcarrier_spacing = 1e6;
        b.n_subcarriers = n;
        b.decay_rate = beta;
        return b;
    }

    MatrixXcd dense_kron3(const MatrixXcd& a, const MatrixXcd& b, const MatrixXcd& c) { return kron(kron(a, b), c); }

    MatrixXcd random_matrix(int r, int c, std::mt19937_64& rng)
    {
        MatrixXcd m(r, c);
        for (int k = 0; k < c; ++k)
            m.col(k) = test::random_vector(r, rng);
        return m;
    }
} // namespace

TEST_CASE("steering_freq: zero delay, hand values, periodicity")
{
    const SubBand b = band(8.75e9, 4);
    CHECK((steering_freq(b, 0.0) - VectorXcd::Ones(4)).norm() < 1e-15);

    VectorXcd expect(4);
    expect << 1.0, -j, -1.0, j;
    CHECK((steering_freq(b, 250e-9) - expect).norm() < 1e-12);

    const SubBand b128 = band(8.75e9, 128);
    CHECK((steering_freq(b128, 1.0 / b128.subcarrier_spacing) - VectorXcd::Ones(128)).norm() < 1e-9);
}

TEST_CASE("steering_tx: broadside and element phase")
{
    const SubBand b = band(21.7e9, 8);
    const ArrayConfig arrays{2, 2, 0.02, 0.02};
    CHECK((steering_tx(b, arrays, 0.0) - VectorXcd::Ones(2)).norm() < 1e-15);

    const VectorXcd a = steering_tx(b, arrays, 30.0 * deg);
    const double lambda = 299792458.0 / 21.7e9;
    const double phase = -2.0 * pi * (0.02 / lambda) * 0.5;
    CHECK(std::abs(a[0] - 1.0) < 1e-15);
    CHECK(std::abs(a[1] - std::polar(1.0, phase)) < 1e-12);
    CHECK((steering_rx(b, arrays, 30.0 * deg) - a).norm() < 1e-15);
}

TEST_CASE("steering vectors of aliased angles coincide")
{
    const ArrayConfig arrays{4, 4, 0.02, 0.02};
    const SubBand b = band(21.7e9, 8);
    const double ratio = b.wavelength() / arrays.spacing_tx;
    for (double phi : {0.0, 10.0 * deg, -25.0 * deg, 40.0 * deg})
        for (int r : {-2, -1, 1, 2})
        {
            const double s = std::sin(phi) + r * ratio;
            if (std::abs(s) > 1.0)
                continue;
            const double alias = std::asin(s);
            CHECK((steering_tx(b, arrays, phi) - steering_tx(b, arrays, alias)).norm() < 1e-12);
        }
}

TEST_CASE("total_steering: Kronecker order and hand expansion")
{
    const SubBand b = band(8.75e9, 2);
    const ArrayConfig arrays{2, 2, 0.02, 0.02};
    CHECK((total_steering(b, arrays, {0.0, 0.0, 0.0}) - VectorXcd::Ones(8)).norm() < 1e-15);

    VectorXcd expect(8);
    expect << 1.0, 1.0, 1.0, 1.0, -j, -j, -j, -j;
    CHECK((total_steering(b, arrays, {250e-9, 0.0, 0.0}) - expect).norm() < 1e-12);

    // Entry (n, lt, lr) carries the sum of the factor phases.
    const SubBand b4 = band(21.7e9, 4);
    const ArrayConfig a3{3, 2, 0.02, 0.015};
    const GeometricParams x{37e-9, 0.3, -0.2};
    const VectorXcd t = total_steering(b4, a3, x);
    const VectorXcd f = steering_freq(b4, x.delay), at = steering_tx(b4, a3, x.aod), ar = steering_rx(b4, a3, x.aoa);
    for (int n = 0; n < 4; ++n)
        for (int lt = 0; lt < 3; ++lt)
            for (int lr = 0; lr < 2; ++lr)
                CHECK(std::abs(t[n * 6 + lt * 2 + lr] - f[n] * at[lt] * ar[lr]) < 1e-14);
}

TEST_CASE("path_gain: scalar oracle for the reference scenario")
{
    const Scenario s = test::reference(-40.0);
    const double c = 299792458.0;
    const double a = 16.72 * deg, bb = 30.96 * deg, t1 = 30e-9;
    const double tau_d = t1 * std::sin(bb) / std::sin(a + bb), tau_a = t1 * std::sin(a) / std::sin(a + bb);
    const double p = 1e-7, fd = 1e6;
    const double g21 = std::abs(cd(0.0013, -0.0095)) *
                       std::sqrt(p * fd / (std::pow(4.0 * pi, 2) * std::pow(c * tau_d, 2) * std::pow(c * tau_a, 2)));
    CHECK(std::abs(path_gain(s, 1, 0)) == doctest::Approx(g21).epsilon(1e-12));
    CHECK(std::abs(path_gain(s, 1, 0)) == doctest::Approx(1.1019106818e-05).epsilon(1e-8));
    CHECK(std::abs(path_gain(s, 0, 0)) == doctest::Approx(7.042250333887e-05).epsilon(1e-9));
    CHECK(std::arg(path_gain(s, 1, 0)) == doctest::Approx(std::arg(cd(0.0013, -0.0095))));
}

TEST_CASE("path_gain: inverse distance law, zero coefficient, singular geometry")
{
    Scenario s = test::reference();
    const cd g = path_gain(s, 0, 1);
    s.paths[0].geometry.delay *= 2.0;
    s.paths[1].geometry.delay *= 2.0;
    CHECK(std::abs(path_gain(s, 0, 1)) == doctest::Approx(0.5 * std::abs(g)).epsilon(1e-12));

    s = test::reference();
    s.paths[1].coeffs[0] = 0.0;
    CHECK(path_gain(s, 1, 0) == cd(0.0));

    s = test::reference();
    s.paths[0].geometry.delay = 0.0;
    CHECK_THROWS(path_gain(s, 0, 0));
}

TEST_CASE("synth_sc: superposition and energy")
{
    const Scenario s2 = test::small_scenario(8, 2, 2, {{40e-9, 0.0, 0.0}, {55e-9, 0.3, 0.5}}, 0.0);
    Scenario a = s2, b = s2;
    a.paths[1].coeffs = {0.0};
    b.paths[0].coeffs = {0.0};
    CHECK(test::rel_err(synth_sc(s2), synth_sc(a) + synth_sc(b)) < 1e-13);

    const double e = synth_sc(a).squaredNorm();
    CHECK(e == doctest::Approx(std::norm(path_gain(a, 0, 0)) * 8 * 2 * 2).epsilon(1e-12));

    const Scenario two = test::small_scenario(4, 1, 2, {{40e-9, 0.0, 0.0}}, 0.0, 1e-6, 2);
    CHECK(synth_sc(two).size() == 2 * 4 * 2);
    CHECK(test::rel_err(synth_sc(two).tail(8), synth_sc_band(two, 1)) < 1e-15);
}

TEST_CASE("dmc_fcf: elementwise formula")
{
    const SubBand b = band(8.75e9, 16, 0.7);
    const double alpha = 0.05, g2 = 3e-9, t1 = 30e-9;
    const VectorXcd r = dmc_fcf(b, alpha, g2, t1);
    CHECK(std::abs(r[0] - alpha * g2 / (16 * 0.7)) < 1e-25);
    for (int n = 0; n < 16; ++n)
    {
        const cd expect = alpha * g2 / 16.0 * std::polar(1.0, -2.0 * pi * n * 1e6 * t1) / cd(0.7, 2.0 * pi * n / 16.0);
        CHECK(std::abs(r[n] - expect) < 1e-12 * std::abs(expect));
    }
    CHECK(dmc_fcf(b, 0.0, g2, t1).norm() == 0.0);
    SubBand bad = b;
    bad.decay_rate = 0.0;
    CHECK_THROWS(dmc_fcf(bad, alpha, g2, t1));
}

TEST_CASE("dmc_fcf: decay-rate ratio matches a brute-force sum")
{
    const int n = 128;
    const VectorXcd r1 = dmc_fcf(band(8.75e9, n, 0.5), 1.0, 1.0, 0.0);
    const VectorXcd r2 = dmc_fcf(band(8.75e9, n, 1.5), 1.0, 1.0, 0.0);
    double s1 = 0.0, s2 = 0.0;
    for (int k = 0; k < n; ++k)
    {
        s1 += 1.0 / std::abs(cd(0.5, 2.0 * pi * k / n));
        s2 += 1.0 / std::abs(cd(1.5, 2.0 * pi * k / n));
    }
    CHECK(r1.cwiseAbs().sum() / r2.cwiseAbs().sum() == doctest::Approx(s1 / s2).epsilon(1e-12));
    const MatrixXcd t1 = hermitian_toeplitz(r1), t2 = hermitian_toeplitz(r2);
    CHECK(t1.trace().real() / t2.trace().real() == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("dmc_angular_cov: identity without concentration, Bessel limit, PSD")
{
    SubBand b = band(8.75e9, 4);
    const ArrayConfig arrays{2, 3, 0.02, 0.02};
    CHECK((dmc_angular_cov(b, arrays, ArraySide::tx, 0.0) - MatrixXcd::Identity(2, 2)).norm() == 0.0);
    CHECK((dmc_angular_cov(b, arrays, ArraySide::rx, 0.0) - MatrixXcd::Identity(3, 3)).norm() == 0.0);

    // Uniform profile: r_1 = (1/2pi) int exp(-j k d sin phi) dphi = J0(k d).
    b.vmd_kappa_tx = 1e-9;
    const MatrixXcd r = dmc_angular_cov(b, arrays, ArraySide::tx, 0.0);
    const double kd = 2.0 * pi * 0.02 / b.wavelength();
    CHECK(r(0, 0).real() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(r(1, 0) - std::cyl_bessel_j(0.0, kd)) < 1e-8);

    for (double kappa : {1.0, 10.0})
    {
        b.vmd_kappa_rx = kappa;
        const MatrixXcd m = dmc_angular_cov(b, arrays, ArraySide::rx, 0.4);
        CHECK((m - m.adjoint()).norm() < 1e-12);
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m);
        CHECK(es.eigenvalues().minCoeff() > -1e-12);
        CHECK(m(0, 0).real() == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("vmd_density integrates to one")
{
    for (double kappa : {0.5, 5.0, 50.0, 800.0})
    {
        const int n = 20000;
        double sum = 0.0;
        for (int i = 0; i < n; ++i)
            sum += vmd_density(-pi + 2.0 * pi * i / n, 0.3, kappa);
        CHECK(sum * 2.0 * pi / n == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("noise variance of the reference scenario is -107 dBm")
{
    const Scenario s = test::reference();
    CHECK(watt_to_dbm(noise_variance(s, 0)) == doctest::Approx(-107.0).epsilon(1e-12));
    CHECK(noise_variance(s, 1) == doctest::Approx(1.9952623149688828e-14).epsilon(1e-12));
}

TEST_CASE("Kronecker mode products equal the dense product")
{
    std::mt19937_64 rng(7);
    for (int na : {1, 2, 4})
        for (int nb : {1, 3})
            for (int nc : {2, 4})
            {
                const MatrixXcd a = random_matrix(na, na, rng), b = random_matrix(nb, nb, rng),
                                c = random_matrix(nc, nc, rng);
                const VectorXcd v = test::random_vector(na * nb * nc, rng);
                CHECK(test::rel_err(kron3_apply(a, b, c, v), dense_kron3(a, b, c) * v) < 1e-12);
            }
    const VectorXcd x = test::random_vector(3, rng), y = test::random_vector(2, rng), z = test::random_vector(2, rng);
    CHECK(test::rel_err(kron3(x, y, z), dense_kron3(x, y, z)) < 1e-15);
}

TEST_CASE("covariance: alpha = 0 gives white noise")
{
    const Scenario s = test::small_scenario(8, 2, 2, {{40e-9, 0.0, 0.0}}, 0.0);
    const BandCovariance cov = assemble_band_covariance(s, 0);
    const double s2 = noise_variance(s, 0);
    CHECK((cov.dense() - s2 * MatrixXcd::Identity(32, 32)).norm() < 1e-12 * s2);
}

TEST_CASE("covariance: factored solve against the dense oracle")
{
    Scenario s = test::small_scenario(16, 2, 2, {{40e-9, 0.0, 0.0}, {47e-9, 0.3, 0.4}}, 0.5, 1e-5);
    s.sub_bands[0].vmd_kappa_tx = 4.0;
    s.sub_bands[0].vmd_kappa_rx = 12.0;
    const BandCovariance cov = assemble_band_covariance(s, 0);
    const MatrixXcd dense = cov.dense();
    CHECK((dense - dense.adjoint()).norm() < 1e-12 * dense.norm());
    CHECK((cov.freq_factor() - cov.freq_factor().adjoint()).norm() < 1e-12 * cov.freq_factor().norm());
    CHECK(cov.eigenvalues().minCoeff() >= noise_variance(s, 0) * (1.0 - 1e-9));

    // Dense oracle built independently from the three factors.
    const MatrixXcd oracle = dense_kron3(cov.freq_factor(), cov.tx_factor(), cov.rx_factor()) +
                             noise_variance(s, 0) * MatrixXcd::Identity(64, 64);
    CHECK((oracle - dense).norm() < 1e-10 * oracle.norm());

    std::mt19937_64 rng(11);
    for (int t = 0; t < 5; ++t)
    {
        const VectorXcd v = test::random_vector(64, rng);
        CHECK(test::rel_err(cov.apply_inverse(cov.apply(v)), v) < 1e-10);
        CHECK(test::rel_err(cov.apply(v), oracle * v) < 1e-10);
        CHECK(test::rel_err(cov.apply_inverse(v), oracle.fullPivLu().solve(v)) < 1e-9);
        const VectorXcd w = cov.whiten(v);
        CHECK(w.squaredNorm() ==
              doctest::Approx(v.dot(oracle.fullPivLu().solve(v)).real()).epsilon(1e-9));
    }
}

TEST_CASE("sample_realization: determinism and white-noise covariance")
{
    const Scenario s = test::small_scenario(4, 2, 1, {{40e-9, 0.0, 0.0}}, 0.0, 1e-30);
    const CovarianceSet cov = assemble_covariances(s);
    const VectorXcd a = sample_realization(s, cov, 123).h, b = sample_realization(s, cov, 123).h;
    CHECK((a - b).norm() == 0.0);
    CHECK((a - sample_realization(s, cov, 124).h).norm() > 0.0);

    const int draws = 10000;
    MatrixXcd acc = MatrixXcd::Zero(8, 8);
    for (int t = 0; t < draws; ++t)
    {
        const VectorXcd h = sample_realization(s, cov, derive_seed(5, t)).h;
        acc += h * h.adjoint();
    }
    acc /= draws;
    const MatrixXcd target = noise_variance(s, 0) * MatrixXcd::Identity(8, 8);
    CHECK((acc - target).norm() / target.norm() < 0.05);
}

TEST_CASE("sample_realization: mean is the specular part, covariance is R + S")
{
    Scenario s = test::small_scenario(4, 2, 1, {{40e-9, 0.0, 0.0}}, 0.3, 1e-9);
    s.sub_bands[0].vmd_kappa_tx = 3.0;
    const CovarianceSet cov = assemble_covariances(s);
    const VectorXcd mean_true = synth_sc(s);
    const MatrixXcd cov_true = cov.bands[0].dense();
    const int draws = 10000;
    VectorXcd mean = VectorXcd::Zero(8);
    MatrixXcd acc = MatrixXcd::Zero(8, 8);
    for (int t = 0; t < draws; ++t)
    {
        const VectorXcd h = sample_realization(s, cov, derive_seed(9, t)).h;
        mean += h;
        const VectorXcd e = h - mean_true;
        acc += e * e.adjoint();
    }
    mean /= draws;
    acc /= draws;
    CHECK((mean - mean_true).norm() < 4.0 * std::sqrt(cov_true.trace().real() / draws));
    CHECK((acc - cov_true).norm() / cov_true.norm() < 0.05);
}

TEST_CASE("delay-domain PDP of the DMC decays with slope -beta per bin")
{
    // LoS exactly on bin 8; noise negligible against the DMC.
    const int n = 64;
    Scenario s = test::small_scenario(n, 1, 1, {{8.0 / (n * 1e6), 0.0, 0.0}}, 1.0, 1e-3);
    s.sub_bands[0].decay_rate = 0.5;
    const CovarianceSet cov = assemble_covariances(s);
    Eigen::VectorXd pdp = Eigen::VectorXd::Zero(n);
    for (int t = 0; t < 512; ++t)
        pdp += delay_domain_pdp(sample_interference_band(cov.bands[0], derive_seed(3, t)), n, 1);
    // Least-squares slope of log power over bins 9..16.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int lo = 9, hi = 16, cnt = hi - lo + 1;
    for (int b = lo; b <= hi; ++b)
    {
        const double y = std::log(pdp[b]);
        sx += b;
        sy += y;
        sxx += double(b) * b;
        sxy += b * y;
    }
    const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    CHECK(-slope == doctest::Approx(0.5).epsilon(0.10));
}

TEST_CASE("derive_seed separates streams")
{
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(42, 17) == derive_seed(42, 17));
}

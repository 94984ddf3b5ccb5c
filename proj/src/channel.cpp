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

#include "mbsense/channel.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "mbsense/kron.hpp"

namespace mbs
{
    using Eigen::MatrixXcd;
    using Eigen::VectorXcd;
    using Eigen::VectorXd;

    VectorXcd steering_freq(const SubBand& band, double delay)
    {
        VectorXcd a(band.n_subcarriers);
        const double w = 2.0 * pi * band.subcarrier_spacing * delay;
        for (int n = 0; n < band.n_subcarriers; ++n)
            a[n] = std::polar(1.0, -w * n);
        return a;
    }

    VectorXcd ula_steering(int n_elements, double carrier_freq, double spacing, double sine)
    {
        VectorXcd a(n_elements);
        const double w = 2.0 * pi * carrier_freq * spacing / speed_of_light * sine;
        for (int l = 0; l < n_elements; ++l)
            a[l] = std::polar(1.0, -w * l);
        return a;
    }

    VectorXcd steering_tx(const SubBand& band, const ArrayConfig& arrays, double aod)
    {
        return ula_steering(arrays.n_tx, band.carrier_freq, arrays.spacing_tx, std::sin(aod));
    }

    VectorXcd steering_rx(const SubBand& band, const ArrayConfig& arrays, double aoa)
    {
        return ula_steering(arrays.n_rx, band.carrier_freq, arrays.spacing_rx, std::sin(aoa));
    }

    VectorXcd total_steering(const SubBand& band, const ArrayConfig& arrays, const GeometricParams& x)
    {
        return kron3(steering_freq(band, x.delay), steering_tx(band, arrays, x.aod), steering_rx(band, arrays, x.aoa));
    }

    cd path_gain(const Scenario& scenario, int k, int m)
    {
        const PathTruth& path = scenario.paths.at(k);
        const SubBand& band = scenario.sub_bands.at(m);
        const cd gamma = path.coeffs.at(m);
        const double ptx = scenario.tx_psd * band.subcarrier_spacing;
        if (k == 0)
        {
            const double dist = speed_of_light * path.geometry.delay;
            if (!(dist > 0.0))
                throw std::domain_error("path_gain: zero LoS delay");
            return gamma * std::sqrt(ptx / (4.0 * pi * dist * dist));
        }
        if (!path.bistatic_delays)
            throw std::domain_error("path_gain: scatterer without bistatic delays");
        const double d_tx = speed_of_light * (*path.bistatic_delays)[0];
        const double d_rx = speed_of_light * (*path.bistatic_delays)[1];
        if (!(d_tx > 0.0) || !(d_rx > 0.0))
            throw std::domain_error("path_gain: zero bistatic delay");
        return gamma * std::sqrt(ptx / (16.0 * pi * pi * d_tx * d_tx * d_rx * d_rx));
    }

    VectorXcd synth_sc_band(const Scenario& scenario, int m)
    {
        const SubBand& band = scenario.sub_bands.at(m);
        VectorXcd s = VectorXcd::Zero(scenario.band_length());
        for (int k = 0; k < scenario.n_paths(); ++k)
            s += path_gain(scenario, k, m) * total_steering(band, scenario.arrays, scenario.paths[k].geometry);
        return s;
    }

    VectorXcd synth_sc(const Scenario& scenario)
    {
        const Eigen::Index len = scenario.band_length();
        VectorXcd s(len * scenario.n_bands());
        for (int m = 0; m < scenario.n_bands(); ++m)
            s.segment(m * len, len) = synth_sc_band(scenario, m);
        return s;
    }

    VectorXcd dmc_fcf(const SubBand& band, double dmc_ratio, double los_gain_power, double los_delay)
    {
        if (!(band.decay_rate > 0.0))
            throw std::domain_error("dmc_fcf: decay rate must be > 0");
        const int n_sc = band.n_subcarriers;
        VectorXcd r(n_sc);
        const double scale = dmc_ratio * los_gain_power / n_sc;
        const double w = 2.0 * pi * band.subcarrier_spacing * los_delay;
        for (int n = 0; n < n_sc; ++n)
            r[n] = scale * std::polar(1.0, -w * n) / cd(band.decay_rate, 2.0 * pi * n / n_sc);
        return r;
    }

    namespace
    {
        // e^{-kappa} I_0(kappa), stable for large kappa.
        double bessel_i0_scaled(double kappa)
        {
            if (kappa < 500.0)
                return std::cyl_bessel_i(0.0, kappa) * std::exp(-kappa);
            const double t = 1.0 / (8.0 * kappa);
            return (1.0 + t + 9.0 * t * t / 2.0 + 75.0 * t * t * t / 2.0) / std::sqrt(2.0 * pi * kappa);
        }

        VectorXcd angular_correlation(int n_elements, double carrier_freq, double spacing, double reference, double kappa,
                                      int n_nodes)
        {
            VectorXcd r = VectorXcd::Zero(n_elements);
            const double h = 2.0 * pi / n_nodes;
            const double w = 2.0 * pi * carrier_freq * spacing / speed_of_light;
            for (int i = 0; i < n_nodes; ++i)
            {
                const double phi = -pi + i * h;
                const double p = vmd_density(phi, reference, kappa);
                const double s = std::sin(phi);
                for (int l = 0; l < n_elements; ++l)
                    r[l] += p * std::polar(1.0, -w * l * s);
            }
            return h * r;
        }
    } // namespace

    double vmd_density(double angle, double reference, double kappa)
    {
        return std::exp(kappa * (std::cos(angle - reference) - 1.0)) / (2.0 * pi * bessel_i0_scaled(kappa));
    }

    MatrixXcd dmc_angular_cov(const SubBand& band, const ArrayConfig& arrays, ArraySide side, double reference_angle)
    {
        const bool is_tx = side == ArraySide::tx;
        const int n_el = is_tx ? arrays.n_tx : arrays.n_rx;
        const std::optional<double>& kappa = is_tx ? band.vmd_kappa_tx : band.vmd_kappa_rx;
        if (!kappa)
            return MatrixXcd::Identity(n_el, n_el);
        const double spacing = is_tx ? arrays.spacing_tx : arrays.spacing_rx;

        // Periodic integrand: the trapezoid rule converges geometrically; refine until stable.
        int nodes = 4096;
        VectorXcd r = angular_correlation(n_el, band.carrier_freq, spacing, reference_angle, *kappa, nodes);
        while (nodes < (1 << 22))
        {
            nodes *= 2;
            VectorXcd finer = angular_correlation(n_el, band.carrier_freq, spacing, reference_angle, *kappa, nodes);
            const double change = (finer - r).cwiseAbs().maxCoeff();
            r = finer;
            if (change < 1e-10)
                break;
        }
        return hermitian_toeplitz(r);
    }

    double noise_variance(const Scenario& scenario, int m)
    {
        return scenario.noise_figure * scenario.noise_psd * scenario.sub_bands.at(m).subcarrier_spacing;
    }

    namespace
    {
        bool is_identity(const MatrixXcd& m)
        {
            return m.rows() == m.cols() && m.isApprox(MatrixXcd::Identity(m.rows(), m.cols()), 0.0);
        }

        void hermitian_eig(const MatrixXcd& a, MatrixXcd& u, VectorXd& lam)
        {
            Eigen::SelfAdjointEigenSolver<MatrixXcd> es(a);
            if (es.info() != Eigen::Success)
                throw std::runtime_error("covariance eigendecomposition failed");
            u = es.eigenvectors();
            lam = es.eigenvalues().cwiseMax(0.0);
        }
    } // namespace

    BandCovariance::BandCovariance(const MatrixXcd& freq, const MatrixXcd& tx, const MatrixXcd& rx, double noise_var)
        : r_f_(freq), r_t_(tx), r_r_(rx), noise_var_(noise_var)
    {
        if (!(noise_var > 0.0))
            throw std::domain_error("BandCovariance: noise variance must be > 0");
        hermitian_eig(r_f_, u_f_, lam_f_);
        t_identity_ = is_identity(r_t_);
        r_identity_ = is_identity(r_r_);
        if (t_identity_)
        {
            u_t_ = MatrixXcd::Identity(r_t_.rows(), r_t_.cols());
            lam_t_ = VectorXd::Ones(r_t_.rows());
        }
        else
            hermitian_eig(r_t_, u_t_, lam_t_);
        if (r_identity_)
        {
            u_r_ = MatrixXcd::Identity(r_r_.rows(), r_r_.cols());
            lam_r_ = VectorXd::Ones(r_r_.rows());
        }
        else
            hermitian_eig(r_r_, u_r_, lam_r_);

        const Eigen::Index nf = lam_f_.size(), nt = lam_t_.size(), nr = lam_r_.size();
        eig_dmc_.resize(nf * nt * nr);
        Eigen::Index idx = 0;
        for (Eigen::Index i = 0; i < nf; ++i)
            for (Eigen::Index j = 0; j < nt; ++j)
                for (Eigen::Index k = 0; k < nr; ++k)
                    eig_dmc_[idx++] = lam_f_[i] * lam_t_[j] * lam_r_[k];
        eig_total_ = eig_dmc_.array() + noise_var_;
    }

    VectorXcd BandCovariance::to_eigenbasis(const VectorXcd& v) const
    {
        if (t_identity_ && r_identity_)
        {
            const MatrixXcd id_t = MatrixXcd::Identity(n_tx(), n_tx());
            const MatrixXcd id_r = MatrixXcd::Identity(n_rx(), n_rx());
            return kron3_apply(u_f_.adjoint(), id_t, id_r, v);
        }
        return kron3_apply(u_f_.adjoint(), u_t_.adjoint(), u_r_.adjoint(), v);
    }

    VectorXcd BandCovariance::from_eigenbasis(const VectorXcd& c) const
    {
        return kron3_apply(u_f_, u_t_, u_r_, c);
    }

    VectorXcd BandCovariance::apply_inverse(const VectorXcd& v) const
    {
        VectorXcd c = to_eigenbasis(v);
        c.array() /= eig_total_.array();
        return from_eigenbasis(c);
    }

    VectorXcd BandCovariance::apply(const VectorXcd& v) const
    {
        VectorXcd c = to_eigenbasis(v);
        c.array() *= eig_total_.array();
        return from_eigenbasis(c);
    }

    VectorXcd BandCovariance::whiten(const VectorXcd& v) const
    {
        return from_eigenbasis(whiten_coords(v));
    }

    VectorXcd BandCovariance::whiten_coords(const VectorXcd& v) const
    {
        VectorXcd c = to_eigenbasis(v);
        c.array() /= eig_total_.array().sqrt();
        return c;
    }

    VectorXcd BandCovariance::basis_h(const MatrixXcd& u, bool identity, const VectorXcd& v) const
    {
        return identity ? v : VectorXcd(u.adjoint() * v);
    }

    VectorXcd BandCovariance::whiten_coords_kron(const VectorXcd& f, const VectorXcd& t, const VectorXcd& r) const
    {
        VectorXcd c = kron3(u_f_.adjoint() * f, basis_h(u_t_, t_identity_, t), basis_h(u_r_, r_identity_, r));
        c.array() /= eig_total_.array().sqrt();
        return c;
    }

    VectorXcd BandCovariance::color_dmc(const VectorXcd& z) const
    {
        VectorXcd c = z;
        c.array() *= eig_dmc_.array().sqrt();
        return from_eigenbasis(c);
    }

    MatrixXcd BandCovariance::dense() const
    {
        MatrixXcd m = kron(kron(r_f_, r_t_), r_r_);
        m.diagonal().array() += noise_var_;
        return m;
    }

    BandCovariance assemble_band_covariance(const Scenario& scenario, int m)
    {
        const SubBand& band = scenario.sub_bands.at(m);
        const PathTruth& los = scenario.paths.front();
        const double los_power = std::norm(path_gain(scenario, 0, m));
        const MatrixXcd rf = hermitian_toeplitz(dmc_fcf(band, scenario.dmc_ratio, los_power, los.geometry.delay));
        const MatrixXcd rt = dmc_angular_cov(band, scenario.arrays, ArraySide::tx, los.geometry.aod);
        const MatrixXcd rr = dmc_angular_cov(band, scenario.arrays, ArraySide::rx, los.geometry.aoa);
        return BandCovariance(rf, rt, rr, noise_variance(scenario, m));
    }

    CovarianceSet assemble_covariances(const Scenario& scenario)
    {
        CovarianceSet set;
        set.bands.reserve(scenario.n_bands());
        for (int m = 0; m < scenario.n_bands(); ++m)
            set.bands.push_back(assemble_band_covariance(scenario, m));
        return set;
    }

    std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream)
    {
        auto mix = [](std::uint64_t z) {
            z += 0x9E3779B97F4A7C15ULL;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            return z ^ (z >> 31);
        };
        return mix(mix(master) ^ (stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
    }

    namespace
    {
        VectorXcd complex_normal(std::mt19937_64& rng, Eigen::Index n)
        {
            std::normal_distribution<double> dist(0.0, std::sqrt(0.5));
            VectorXcd z(n);
            for (Eigen::Index i = 0; i < n; ++i)
            {
                const double re = dist(rng);
                const double im = dist(rng);
                z[i] = cd(re, im);
            }
            return z;
        }
    } // namespace

    ChannelRealization sample_realization(const Scenario& scenario, const CovarianceSet& cov, std::uint64_t seed)
    {
        if (static_cast<int>(cov.bands.size()) != scenario.n_bands())
            throw std::invalid_argument("sample_realization: covariance set does not match scenario");
        ChannelRealization out;
        out.seed = seed;
        out.h = synth_sc(scenario);
        const Eigen::Index len = scenario.band_length();
        for (int m = 0; m < scenario.n_bands(); ++m)
            out.h.segment(m * len, len) += sample_interference_band(cov.bands[m], derive_seed(seed, m));
        return out;
    }

    VectorXcd sample_interference_band(const BandCovariance& cov, std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        const VectorXcd z_dmc = complex_normal(rng, cov.size());
        const VectorXcd z_noise = complex_normal(rng, cov.size());
        return cov.color_dmc(z_dmc) + std::sqrt(cov.noise_var()) * z_noise;
    }

    VectorXd delay_domain_pdp(const VectorXcd& h_band, int n_subcarriers, int n_pairs)
    {
        if (h_band.size() != static_cast<Eigen::Index>(n_subcarriers) * n_pairs)
            throw std::invalid_argument("delay_domain_pdp: dimension mismatch");
        VectorXd pdp = VectorXd::Zero(n_subcarriers);
        for (int b = 0; b < n_subcarriers; ++b)
        {
            for (int p = 0; p < n_pairs; ++p)
            {
                cd acc = 0.0;
                for (int n = 0; n < n_subcarriers; ++n)
                    acc += h_band[static_cast<Eigen::Index>(n) * n_pairs + p] *
                           std::polar(1.0, 2.0 * pi * n * b / n_subcarriers);
                pdp[b] += std::norm(acc / static_cast<double>(n_subcarriers));
            }
            pdp[b] /= n_pairs;
        }
        return pdp;
    }

    VectorXcd band_slice(const VectorXcd& h, const Scenario& scenario, int m)
    {
        const Eigen::Index len = scenario.band_length();
        return h.segment(m * len, len);
    }

} // namespace mbs

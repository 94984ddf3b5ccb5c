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

#ifndef MBSENSE_CHANNEL_HPP
#define MBSENSE_CHANNEL_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mbsense/scenario.hpp"

namespace mbs
{
    // Steering vectors. Frequency entries run over n = 0..N-1, array entries over l = 0..L-1.
    Eigen::VectorXcd steering_freq(const SubBand& band, double delay);
    Eigen::VectorXcd steering_tx(const SubBand& band, const ArrayConfig& arrays, double aod);
    Eigen::VectorXcd steering_rx(const SubBand& band, const ArrayConfig& arrays, double aoa);

    /// ULA response in terms of the direction sine: exp(-j 2 pi f (d/c) l sine).
    Eigen::VectorXcd ula_steering(int n_elements, double carrier_freq, double spacing, double sine);

    /// a^F ⊗ a^T ⊗ a^R.
    Eigen::VectorXcd total_steering(const SubBand& band, const ArrayConfig& arrays, const GeometricParams& x);

    /// Friis gain for the LoS (k = 0), bistatic radar equation for scatterers.
    cd path_gain(const Scenario& scenario, int k, int m);

    Eigen::VectorXcd synth_sc_band(const Scenario& scenario, int m);
    /// Specular component of all bands, stacked sub-band major.
    Eigen::VectorXcd synth_sc(const Scenario& scenario);

    /// Sampled frequency correlation function of the exponential-decay PDP.
    Eigen::VectorXcd dmc_fcf(const SubBand& band, double dmc_ratio, double los_gain_power, double los_delay);

    enum class ArraySide
    {
        tx,
        rx
    };

    /// Von Mises power angular profile, normalized over [-pi, pi).
    double vmd_density(double angle, double reference, double kappa);

    /// Toeplitz angular covariance of the DMC on one array. Identity when the sub-band
    /// carries no concentration parameter for that side.
    Eigen::MatrixXcd dmc_angular_cov(const SubBand& band, const ArrayConfig& arrays, ArraySide side,
                                     double reference_angle);

    double noise_variance(const Scenario& scenario, int m);

    /// M = R^F ⊗ R^T ⊗ R^R + sigma^2 I held in the joint eigenbasis of the three factors.
    class BandCovariance
    {
    public:
        BandCovariance(const Eigen::MatrixXcd& freq, const Eigen::MatrixXcd& tx, const Eigen::MatrixXcd& rx,
                       double noise_var);

        Eigen::Index size() const { return eig_total_.size(); }
        int n_freq() const { return static_cast<int>(lam_f_.size()); }
        int n_tx() const { return static_cast<int>(lam_t_.size()); }
        int n_rx() const { return static_cast<int>(lam_r_.size()); }
        double noise_var() const { return noise_var_; }

        /// Eigenvalues of M in Kronecker order.
        const Eigen::VectorXd& eigenvalues() const { return eig_total_; }
        /// Eigenvalues of the DMC part R in Kronecker order.
        const Eigen::VectorXd& dmc_eigenvalues() const { return eig_dmc_; }

        const Eigen::MatrixXcd& freq_factor() const { return r_f_; }
        const Eigen::MatrixXcd& tx_factor() const { return r_t_; }
        const Eigen::MatrixXcd& rx_factor() const { return r_r_; }
        const Eigen::MatrixXcd& freq_basis() const { return u_f_; }
        const Eigen::MatrixXcd& tx_basis() const { return u_t_; }
        const Eigen::MatrixXcd& rx_basis() const { return u_r_; }
        const Eigen::VectorXd& freq_eigenvalues() const { return lam_f_; }
        const Eigen::VectorXd& tx_eigenvalues() const { return lam_t_; }
        const Eigen::VectorXd& rx_eigenvalues() const { return lam_r_; }

        Eigen::VectorXcd to_eigenbasis(const Eigen::VectorXcd& v) const;
        Eigen::VectorXcd from_eigenbasis(const Eigen::VectorXcd& c) const;

        /// M^{-1} v.
        Eigen::VectorXcd apply_inverse(const Eigen::VectorXcd& v) const;
        /// M v.
        Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;
        /// Hermitian square-root whitening M^{-1/2} v.
        Eigen::VectorXcd whiten(const Eigen::VectorXcd& v) const;
        /// Lambda^{-1/2} U^H v. Same inner products as whiten(), one basis change cheaper.
        Eigen::VectorXcd whiten_coords(const Eigen::VectorXcd& v) const;
        /// whiten_coords() of a Kronecker-structured vector f ⊗ t ⊗ r.
        Eigen::VectorXcd whiten_coords_kron(const Eigen::VectorXcd& f, const Eigen::VectorXcd& t,
                                            const Eigen::VectorXcd& r) const;
        /// U diag(sqrt(lambda_R)) z: maps white z to a CN(0, R) draw.
        Eigen::VectorXcd color_dmc(const Eigen::VectorXcd& z) const;

        /// Dense R + sigma^2 I (test oracle and small-problem use only).
        Eigen::MatrixXcd dense() const;

    private:
        Eigen::VectorXcd basis_h(const Eigen::MatrixXcd& u, bool identity, const Eigen::VectorXcd& v) const;

        Eigen::MatrixXcd r_f_, r_t_, r_r_;
        Eigen::MatrixXcd u_f_, u_t_, u_r_;
        Eigen::VectorXd lam_f_, lam_t_, lam_r_;
        bool t_identity_ = false;
        bool r_identity_ = false;
        double noise_var_ = 0.0;
        Eigen::VectorXd eig_dmc_;
        Eigen::VectorXd eig_total_;
    };

    struct CovarianceSet
    {
        std::vector<BandCovariance> bands;
    };

    CovarianceSet assemble_covariances(const Scenario& scenario);
    BandCovariance assemble_band_covariance(const Scenario& scenario, int m);

    struct ChannelRealization
    {
        Eigen::VectorXcd h;
        std::uint64_t seed = 0;
    };

    /// Per-trial seed from a master seed (splitmix64 finalizer over both words).
    std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

    /// h = s + d + w, deterministic given the seed.
    ChannelRealization sample_realization(const Scenario& scenario, const CovarianceSet& cov, std::uint64_t seed);

    /// DMC plus noise only (no specular part) for one band.
    Eigen::VectorXcd sample_interference_band(const BandCovariance& cov, std::uint64_t seed);

    /// Delay-domain power profile of one band: N-point inverse DFT per antenna pair,
    /// averaged over pairs. Bin b sits at delay b / (N * subcarrier_spacing).
    Eigen::VectorXd delay_domain_pdp(const Eigen::VectorXcd& h_band, int n_subcarriers, int n_pairs);

    /// Slice of a stacked multi-band vector.
    Eigen::VectorXcd band_slice(const Eigen::VectorXcd& h, const Scenario& scenario, int m);

} // namespace mbs

#endif

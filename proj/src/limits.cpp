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

#include "mbsense/limits.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mbsense/kron.hpp"

namespace mbs
{
    using Eigen::MatrixXcd;
    using Eigen::MatrixXd;
    using Eigen::VectorXcd;
    using Eigen::VectorXd;

    std::vector<int> ParamLayout::band_indices(int m) const
    {
        std::vector<int> idx;
        idx.reserve(3 * n_paths + 2 * n_paths);
        for (int i = 0; i < 3 * n_paths; ++i)
            idx.push_back(i);
        for (int k = 0; k < n_paths; ++k)
            idx.push_back(re_gain(k, m));
        for (int k = 0; k < n_paths; ++k)
            idx.push_back(im_gain(k, m));
        return idx;
    }

    MatrixXcd band_jacobian(const SubBand& band, const ArrayConfig& arrays, const std::vector<GeometricParams>& x,
                            const std::vector<cd>& gains, int n_bands, int m)
    {
        if (x.size() != gains.size())
            throw std::invalid_argument("band_jacobian: one gain per path required");
        const int n_paths = static_cast<int>(x.size());
        const ParamLayout layout{n_paths, n_bands};
        const int n_sc = band.n_subcarriers;
        const Eigen::Index len = static_cast<Eigen::Index>(n_sc) * arrays.n_tx * arrays.n_rx;
        MatrixXcd d = MatrixXcd::Zero(len, layout.size());

        const double w_delta = 2.0 * pi * band.subcarrier_spacing;
        const double w_tx = 2.0 * pi * band.carrier_freq * arrays.spacing_tx / speed_of_light;
        const double w_rx = 2.0 * pi * band.carrier_freq * arrays.spacing_rx / speed_of_light;
        const cd j(0.0, 1.0);

        for (int k = 0; k < n_paths; ++k)
        {
            const VectorXcd a_f = steering_freq(band, x[k].delay);
            const VectorXcd a_t = steering_tx(band, arrays, x[k].aod);
            const VectorXcd a_r = steering_rx(band, arrays, x[k].aoa);

            VectorXcd da_f = a_f, da_t = a_t, da_r = a_r;
            for (int n = 0; n < n_sc; ++n)
                da_f[n] *= -j * (n * w_delta);
            for (int l = 0; l < arrays.n_tx; ++l)
                da_t[l] *= -j * (w_tx * l * std::cos(x[k].aod));
            for (int l = 0; l < arrays.n_rx; ++l)
                da_r[l] *= -j * (w_rx * l * std::cos(x[k].aoa));

            const cd g = gains[k];
            const VectorXcd a = kron3(a_f, a_t, a_r);
            d.col(layout.delay(k)) = g * kron3(da_f, a_t, a_r);
            d.col(layout.aod(k)) = g * kron3(a_f, da_t, a_r);
            d.col(layout.aoa(k)) = g * kron3(a_f, a_t, da_r);
            d.col(layout.re_gain(k, m)) = a;
            d.col(layout.im_gain(k, m)) = j * a;
        }
        return d;
    }

    MatrixXcd jacobian(const Scenario& scenario, int m)
    {
        std::vector<GeometricParams> x;
        std::vector<cd> g;
        for (int k = 0; k < scenario.n_paths(); ++k)
        {
            x.push_back(scenario.paths[k].geometry);
            g.push_back(path_gain(scenario, k, m));
        }
        return band_jacobian(scenario.sub_bands.at(m), scenario.arrays, x, g, scenario.n_bands(), m);
    }

    MatrixXd band_fim(const MatrixXcd& d, const BandCovariance& cov)
    {
        MatrixXcd w(d.rows(), d.cols());
        for (Eigen::Index c = 0; c < d.cols(); ++c)
        {
            if (d.col(c).isZero(0.0))
                w.col(c).setZero();
            else
                w.col(c) = cov.whiten_coords(d.col(c));
        }
        MatrixXd f = 2.0 * (w.adjoint() * w).real();
        return 0.5 * (f + f.transpose());
    }

    FimResult fim(const Scenario& scenario, const CovarianceSet& cov)
    {
        const ParamLayout layout{scenario.n_paths(), scenario.n_bands()};
        FimResult out;
        out.total = MatrixXd::Zero(layout.size(), layout.size());
        for (int m = 0; m < scenario.n_bands(); ++m)
        {
            out.per_band.push_back(band_fim(jacobian(scenario, m), cov.bands.at(m)));
            out.total += out.per_band.back();
        }
        return out;
    }

    CrbResult crb(const MatrixXd& f)
    {
        const Eigen::Index n = f.rows();
        CrbResult out;
        VectorXd scale(n);
        bool zero_diag = false;
        for (Eigen::Index i = 0; i < n; ++i)
        {
            const double v = f(i, i);
            if (v > 0.0 && std::isfinite(v))
                scale[i] = 1.0 / std::sqrt(v);
            else
            {
                scale[i] = 0.0;
                zero_diag = true;
            }
        }
        const MatrixXd fe = scale.asDiagonal() * f * scale.asDiagonal();
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (fe + fe.transpose()));
        const VectorXd lam = es.eigenvalues();
        const double lmax = lam.maxCoeff();
        const double lmin = lam.minCoeff();
        out.condition = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
        out.pseudo_inverse = zero_diag || !(out.condition <= 1e12);

        VectorXd inv_lam(lam.size());
        const double cutoff = out.pseudo_inverse ? lmax * 1e-12 : 0.0;
        for (Eigen::Index i = 0; i < lam.size(); ++i)
            inv_lam[i] = lam[i] > cutoff ? 1.0 / lam[i] : 0.0;
        const MatrixXd inv_e = es.eigenvectors() * inv_lam.asDiagonal() * es.eigenvectors().transpose();
        out.inverse = scale.asDiagonal() * inv_e * scale.asDiagonal();
        // A zero-information parameter has unbounded variance.
        for (Eigen::Index i = 0; i < n; ++i)
            if (scale[i] == 0.0)
                out.inverse(i, i) = std::numeric_limits<double>::infinity();
        out.diag = out.inverse.diagonal();
        return out;
    }

    MatrixXd select(const MatrixXd& f, const std::vector<int>& idx)
    {
        const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
        MatrixXd out(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                out(i, j) = f(idx[i], idx[j]);
        return out;
    }

    double approx_crb(const std::vector<double>& per_band)
    {
        double info = 0.0;
        for (double c : per_band)
            if (c > 0.0 && std::isfinite(c))
                info += 1.0 / c;
        return info > 0.0 ? 1.0 / info : std::numeric_limits<double>::infinity();
    }

    double esnr_from_inverse(const MatrixXd& inverse, int re_index, int im_index, cd gain)
    {
        const double mag = std::abs(gain);
        if (mag == 0.0)
            return 0.0;
        const double ur = gain.real() / mag, ui = gain.imag() / mag;
        const double var = ur * ur * inverse(re_index, re_index) + 2.0 * ur * ui * inverse(re_index, im_index) +
                           ui * ui * inverse(im_index, im_index);
        if (!(var > 0.0))
            return 0.0;
        return mag * mag / var;
    }

    LimitsReport compute_limits(const Scenario& scenario, const CovarianceSet& cov)
    {
        const int n_paths = scenario.n_paths();
        const int n_bands = scenario.n_bands();
        LimitsReport r;
        r.layout = ParamLayout{n_paths, n_bands};
        r.gains.assign(n_paths, std::vector<cd>(n_bands));
        for (int k = 0; k < n_paths; ++k)
            for (int m = 0; m < n_bands; ++m)
                r.gains[k][m] = path_gain(scenario, k, m);

        r.fim = fim(scenario, cov);
        r.joint = crb(r.fim.total);
        r.crb_joint = r.joint.diag.head(3 * n_paths);
        r.crb_band.resize(n_bands, 3 * n_paths);
        r.esnr_joint.resize(n_paths, n_bands);
        r.esnr_band.resize(n_paths, n_bands);
        for (int m = 0; m < n_bands; ++m)
        {
            r.band.push_back(crb(select(r.fim.per_band[m], r.layout.band_indices(m))));
            const CrbResult& b = r.band.back();
            r.crb_band.row(m) = b.diag.head(3 * n_paths).transpose();
            for (int k = 0; k < n_paths; ++k)
            {
                r.esnr_joint(k, m) = esnr_from_inverse(r.joint.inverse, r.layout.re_gain(k, m),
                                                       r.layout.im_gain(k, m), r.gains[k][m]);
                r.esnr_band(k, m) = esnr_from_inverse(b.inverse, 3 * n_paths + k, 4 * n_paths + k, r.gains[k][m]);
            }
        }
        r.crb_approx.resize(3 * n_paths);
        for (int i = 0; i < 3 * n_paths; ++i)
        {
            std::vector<double> v(n_bands);
            for (int m = 0; m < n_bands; ++m)
                v[m] = r.crb_band(m, i);
            r.crb_approx[i] = approx_crb(v);
        }
        return r;
    }

    LimitsReport compute_limits(const Scenario& scenario)
    {
        return compute_limits(scenario, assemble_covariances(scenario));
    }

    namespace
    {
        double delay_profile(const Scenario& s, int m, double delay, double los_delay)
        {
            const SubBand& band = s.sub_bands[m];
            // alpha |g_1|^2 / |gamma_1|^2, i.e. the free-space LoS power scaled by alpha.
            const double dist = speed_of_light * los_delay;
            const double peak = s.dmc_ratio * s.tx_psd * band.subcarrier_spacing / (4.0 * pi * dist * dist);
            const double beta = band.decay_rate * (band.n_subcarriers - 1) * 2.0 * pi * band.subcarrier_spacing;
            if (delay < los_delay)
                return 0.0;
            if (delay == los_delay)
                return 0.5 * peak;
            return peak * std::exp(-beta * (delay - los_delay));
        }

        double angular_profile(const std::optional<double>& kappa, double angle, double ref)
        {
            return kappa ? vmd_density(angle, ref, *kappa) : 1.0 / (2.0 * pi);
        }
    } // namespace

    double bgg_value(const Scenario& s, int m, Vec2 p)
    {
        if (!s.tx_pose || !s.rx_pose)
            throw ScenarioError("tx_pos: BGG map requires tx and rx positions");
        const ArrayPose& tx = *s.tx_pose;
        const ArrayPose& rx = *s.rx_pose;
        const BistaticParams b = cartesian_to_bistatic(p, tx, rx);

        const Vec2 los = rx.position - tx.position;
        const double los_delay = norm(los) / speed_of_light;
        const double los_aod = std::atan2(dot(los, tx.axis), dot(los, tx.broadside));
        const Vec2 back = tx.position - rx.position;
        const double los_aoa = std::atan2(dot(back, rx.axis), dot(back, rx.broadside));

        const SubBand& band = s.sub_bands.at(m);
        const double dt = speed_of_light * b.delay_tx, dr = speed_of_light * b.delay_rx;
        const double g_sc = s.tx_psd * band.subcarrier_spacing / (16.0 * pi * pi * dt * dt * dr * dr);
        const double g_dmc = delay_profile(s, m, b.delay, los_delay) *
                             angular_profile(band.vmd_kappa_tx, b.aod, los_aod) *
                             angular_profile(band.vmd_kappa_rx, b.aoa, los_aoa);
        return g_sc / (g_dmc + noise_variance(s, m));
    }

    std::vector<BggCell> bgg_map(const Scenario& s, const BggGrid& grid)
    {
        if (grid.nx < 2 || grid.ny < 2 || !(grid.x_max > grid.x_min) || !(grid.y_max > grid.y_min))
            throw std::invalid_argument("bbox: degenerate grid");
        std::vector<BggCell> cells;
        cells.reserve(static_cast<std::size_t>(grid.nx) * grid.ny * s.n_bands());
        for (int m = 0; m < s.n_bands(); ++m)
            for (int iy = 0; iy < grid.ny; ++iy)
                for (int ix = 0; ix < grid.nx; ++ix)
                {
                    BggCell c;
                    c.band = m;
                    c.x = grid.x_min + (grid.x_max - grid.x_min) * ix / (grid.nx - 1);
                    c.y = grid.y_min + (grid.y_max - grid.y_min) * iy / (grid.ny - 1);
                    try
                    {
                        const double v = bgg_value(s, m, {c.x, c.y});
                        c.gamma_db = v > 0.0 ? std::max(10.0 * std::log10(v), bgg_floor_db) : bgg_floor_db;
                    }
                    catch (const ScenarioError& e)
                    {
                        if (!s.tx_pose || !s.rx_pose)
                            throw;
                        c.masked = true;
                        c.gamma_db = bgg_floor_db;
                    }
                    cells.push_back(c);
                }
        return cells;
    }

} // namespace mbs

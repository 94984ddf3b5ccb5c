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

#include "mbsense/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mbsense/limits.hpp"

namespace mbs
{
    using Eigen::MatrixXcd;
    using Eigen::MatrixXd;
    using Eigen::VectorXcd;
    using Eigen::VectorXd;

    namespace
    {
        VectorXcd freq_steering_t(int n_sc, double t)
        {
            VectorXcd a(n_sc);
            for (int n = 0; n < n_sc; ++n)
                a[n] = std::polar(1.0, -2.0 * pi * n * t / n_sc);
            return a;
        }

        std::vector<double> sine_grid(double period, int n_elements, int oversampling)
        {
            const double half = std::min(1.0, 0.5 * period);
            const int count = oversampling * n_elements;
            std::vector<double> g(count);
            for (int i = 0; i < count; ++i)
                g[i] = -half + 2.0 * half * i / count;
            return g;
        }

        VectorXd abs2(const VectorXcd& v) { return v.cwiseAbs2(); }
    } // namespace

    double wrap_sine(double s, double period)
    {
        if (period >= 2.0)
            return std::clamp(s, -1.0, 1.0);
        double w = std::remainder(s, period);
        if (w >= 0.5 * period)
            w -= period;
        return w;
    }

    BandModel::BandModel(const SubBand& band, const ArrayConfig& arrays, BandCovariance cov, EstimatorConfig config)
        : band_(band), arrays_(arrays), cov_(std::move(cov)), config_(config)
    {
        const int n_sc = band_.n_subcarriers;
        const int lt = arrays_.n_tx, lr = arrays_.n_rx;

        const int n_t = n_sc * config_.delay_oversampling;
        grid_t_.resize(n_t);
        for (int q = 0; q < n_t; ++q)
            grid_t_[q] = static_cast<double>(q) / config_.delay_oversampling;
        const std::vector<double> gu = sine_grid(sine_period_tx(), lt, config_.angle_oversampling);
        const std::vector<double> gv = sine_grid(sine_period_rx(), lr, config_.angle_oversampling);
        for (double u : gu)
            for (double v : gv)
                grid_uv_.emplace_back(u, v);
        const int n_g = n_angle();

        delay_kernel_.resize(n_t, n_sc);
        delay_power_.resize(n_t, n_sc);
        const MatrixXcd uf_h = cov_.freq_basis().adjoint();
        for (int q = 0; q < n_t; ++q)
        {
            const VectorXcd a = freq_steering_t(n_sc, grid_t_[q]);
            delay_kernel_.row(q) = a.conjugate().transpose();
            delay_power_.row(q) = abs2(uf_h * a).transpose();
        }

        angle_kernel_.resize(lt * lr, n_g);
        angle_weight_.resize(n_sc, n_g);
        const MatrixXcd ut_h = cov_.tx_basis().adjoint();
        const MatrixXcd ur_h = cov_.rx_basis().adjoint();
        const VectorXd& lam = cov_.eigenvalues();
        for (int g = 0; g < n_g; ++g)
        {
            const VectorXcd at = ula_steering(lt, band_.carrier_freq, arrays_.spacing_tx, grid_uv_[g].first);
            const VectorXcd ar = ula_steering(lr, band_.carrier_freq, arrays_.spacing_rx, grid_uv_[g].second);
            for (int i = 0; i < lt; ++i)
                for (int j = 0; j < lr; ++j)
                    angle_kernel_(i * lr + j, g) = std::conj(at[i] * ar[j]);
            const VectorXd pt = abs2(ut_h * at);
            const VectorXd pr = abs2(ur_h * ar);
            for (int n = 0; n < n_sc; ++n)
            {
                double acc = 0.0;
                for (int i = 0; i < lt; ++i)
                    for (int j = 0; j < lr; ++j)
                        acc += pt[i] * pr[j] / lam[(static_cast<Eigen::Index>(n) * lt + i) * lr + j];
                angle_weight_(n, g) = acc;
            }
        }
    }

    double BandModel::sine_period_tx() const { return band_.wavelength() / arrays_.spacing_tx; }
    double BandModel::sine_period_rx() const { return band_.wavelength() / arrays_.spacing_rx; }

    VectorXcd BandModel::whitened_steering(double t, double u, double v) const
    {
        return cov_.whiten_coords_kron(freq_steering_t(band_.n_subcarriers, t),
                                       ula_steering(arrays_.n_tx, band_.carrier_freq, arrays_.spacing_tx, u),
                                       ula_steering(arrays_.n_rx, band_.carrier_freq, arrays_.spacing_rx, v));
    }

    VectorXcd whiten(const BandModel& model, const VectorXcd& v) { return model.cov().whiten_coords(v); }

    std::optional<Candidate> detect_next_path(const BandModel& model, const VectorXcd& residual_w, double floor)
    {
        const BandCovariance& cov = model.cov();
        const int n_sc = model.band().n_subcarriers;
        const int pairs = model.arrays().n_tx * model.arrays().n_rx;

        // M^{-1} r from the whitened residual.
        VectorXcd c = residual_w;
        c.array() /= cov.eigenvalues().array().sqrt();
        const VectorXcd y = cov.from_eigenbasis(c);
        const Eigen::Map<const MatrixXcd> y_pn(y.data(), pairs, n_sc);

        const MatrixXcd z = y_pn.transpose() * model.angle_kernel();           // N x G
        const MatrixXd num = (model.delay_kernel() * z).cwiseAbs2();           // Q x G
        const MatrixXd den = model.delay_power() * model.angle_weight();       // Q x G
        const MatrixXd stat = num.cwiseQuotient(den);

        Eigen::Index q = 0, g = 0;
        const double peak = 2.0 * stat.maxCoeff(&q, &g);
        if (!(peak >= floor))
            return std::nullopt;

        const auto [u, v] = model.grid_angle(static_cast<int>(g));
        Candidate out;
        out.x.delay = model.grid_delay(static_cast<int>(q)) / (n_sc * model.band().subcarrier_spacing);
        out.x.aod = std::asin(u);
        out.x.aoa = std::asin(v);
        out.statistic = peak;
        return out;
    }

    namespace
    {
        struct Internal
        {
            double t, u, v;
        };

        struct Fit
        {
            MatrixXcd a;   // whitened steering columns
            VectorXcd g;   // GLS gains
            VectorXcd e;   // whitened residual
            MatrixXcd gram_inv;
            double cost = 0.0;
            bool rank_ok = true;
        };

        class Problem
        {
        public:
            Problem(const BandModel& model, const VectorXcd& h_w) : model_(model), h_w_(h_w)
            {
                const SubBand& b = model.band();
                w_tx_ = 2.0 * pi * model.arrays().spacing_tx / b.wavelength();
                w_rx_ = 2.0 * pi * model.arrays().spacing_rx / b.wavelength();
            }

            Internal to_internal(const GeometricParams& x) const
            {
                const SubBand& b = model_.band();
                return {x.delay * b.n_subcarriers * b.subcarrier_spacing, std::sin(x.aod), std::sin(x.aoa)};
            }

            GeometricParams to_physical(const Internal& p) const
            {
                const SubBand& b = model_.band();
                return {p.t / (b.n_subcarriers * b.subcarrier_spacing), std::asin(std::clamp(p.u, -1.0, 1.0)),
                        std::asin(std::clamp(p.v, -1.0, 1.0))};
            }

            Internal wrap(Internal p) const
            {
                const double n = model_.band().n_subcarriers;
                p.t = std::fmod(p.t, n);
                if (p.t < 0.0)
                    p.t += n;
                p.u = wrap_sine(p.u, model_.sine_period_tx());
                p.v = wrap_sine(p.v, model_.sine_period_rx());
                return p;
            }

            Fit evaluate(const std::vector<Internal>& ps) const
            {
                Fit f;
                const Eigen::Index k = static_cast<Eigen::Index>(ps.size());
                f.a.resize(h_w_.size(), k);
                for (Eigen::Index i = 0; i < k; ++i)
                    f.a.col(i) = model_.whitened_steering(ps[i].t, ps[i].u, ps[i].v);
                const MatrixXcd gram = f.a.adjoint() * f.a;
                // Conditioning on the unit-diagonal Gram matrix.
                VectorXd s = gram.diagonal().real().cwiseSqrt().cwiseInverse();
                const MatrixXcd gn = s.asDiagonal() * gram * s.asDiagonal();
                Eigen::SelfAdjointEigenSolver<MatrixXcd> es(gn, Eigen::EigenvaluesOnly);
                if (k > 0 && es.eigenvalues().minCoeff() < 1e-10)
                {
                    f.rank_ok = false;
                    return f;
                }
                f.gram_inv = gram.inverse();
                f.g = f.gram_inv * (f.a.adjoint() * h_w_);
                f.e = h_w_ - f.a * f.g;
                f.cost = f.e.squaredNorm();
                return f;
            }

            /// Columns d r / d(t_k, u_k, v_k) of the residual under variable projection.
            MatrixXcd jacobian(const std::vector<Internal>& ps, const Fit& f) const
            {
                const int n_sc = model_.band().n_subcarriers;
                const int lt = model_.arrays().n_tx, lr = model_.arrays().n_rx;
                const Eigen::Index k = static_cast<Eigen::Index>(ps.size());
                const BandCovariance& cov = model_.cov();
                const cd j(0.0, 1.0);
                MatrixXcd b(h_w_.size(), 3 * k);
                for (Eigen::Index i = 0; i < k; ++i)
                {
                    const VectorXcd af = freq_steering_t(n_sc, ps[i].t);
                    const VectorXcd at = ula_steering(lt, model_.band().carrier_freq, model_.arrays().spacing_tx, ps[i].u);
                    const VectorXcd ar = ula_steering(lr, model_.band().carrier_freq, model_.arrays().spacing_rx, ps[i].v);
                    VectorXcd daf = af, dat = at, dar = ar;
                    for (int n = 0; n < n_sc; ++n)
                        daf[n] *= -j * (2.0 * pi * n / n_sc);
                    for (int l = 0; l < lt; ++l)
                        dat[l] *= -j * (w_tx_ * l);
                    for (int l = 0; l < lr; ++l)
                        dar[l] *= -j * (w_rx_ * l);
                    b.col(3 * i) = f.g[i] * cov.whiten_coords_kron(daf, at, ar);
                    b.col(3 * i + 1) = f.g[i] * cov.whiten_coords_kron(af, dat, ar);
                    b.col(3 * i + 2) = f.g[i] * cov.whiten_coords_kron(af, at, dar);
                }
                // r = P_perp h; dr = -P_perp dA g (Kaufman's simplification).
                return -(b - f.a * (f.gram_inv * (f.a.adjoint() * b)));
            }

        private:
            const BandModel& model_;
            const VectorXcd& h_w_;
            double w_tx_ = 0.0;
            double w_rx_ = 0.0;
        };

        std::vector<Internal> step(const Problem& prob, const std::vector<Internal>& ps, const VectorXd& delta)
        {
            std::vector<Internal> out = ps;
            for (std::size_t i = 0; i < ps.size(); ++i)
            {
                out[i].t += delta[3 * i];
                out[i].u += delta[3 * i + 1];
                out[i].v += delta[3 * i + 2];
                out[i] = prob.wrap(out[i]);
            }
            return out;
        }
    } // namespace

    LmResult refine_lm(const BandModel& model, const VectorXcd& h_w, std::vector<GeometricParams> init)
    {
        if (init.empty())
            throw std::invalid_argument("refine_lm: at least one path required");
        const EstimatorConfig& cfg = model.config();
        const Problem prob(model, h_w);
        const double scale = h_w.squaredNorm();

        std::vector<Internal> ps;
        for (const GeometricParams& x : init)
            ps.push_back(prob.wrap(prob.to_internal(x)));

        LmResult res;
        Fit fit = prob.evaluate(ps);
        while (!fit.rank_ok && ps.size() > 1)
        {
            // Drop the path whose single-column fit explains the least.
            std::size_t weakest = 0;
            double least = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < ps.size(); ++i)
            {
                const VectorXcd a = model.whitened_steering(ps[i].t, ps[i].u, ps[i].v);
                const double p = std::norm(a.dot(h_w)) / a.squaredNorm();
                if (p < least)
                {
                    least = p;
                    weakest = i;
                }
            }
            ps.erase(ps.begin() + static_cast<std::ptrdiff_t>(weakest));
            ++res.dropped;
            fit = prob.evaluate(ps);
        }
        if (!fit.rank_ok || !std::isfinite(fit.cost))
        {
            res.status = LmStatus::non_finite;
            return res;
        }

        double lambda = cfg.damping_init;
        res.status = LmStatus::max_iterations;
        for (int it = 0; it < cfg.max_iterations; ++it)
        {
            res.iterations = it + 1;
            if (fit.cost <= 1e-28 * scale)
            {
                res.status = LmStatus::converged;
                break;
            }
            const MatrixXcd jac = prob.jacobian(ps, fit);
            const MatrixXd h = (jac.adjoint() * jac).real();
            const VectorXd grad = (jac.adjoint() * fit.e).real();

            bool accepted = false;
            bool done = false;
            while (lambda < 1e16)
            {
                MatrixXd damped = h;
                for (Eigen::Index i = 0; i < h.rows(); ++i)
                    damped(i, i) += lambda * (h(i, i) > 0.0 ? h(i, i) : 1.0);
                const VectorXd delta = damped.ldlt().solve(-grad);
                if (!delta.allFinite())
                {
                    lambda *= 10.0;
                    continue;
                }
                const std::vector<Internal> trial = step(prob, ps, delta);
                Fit tf = prob.evaluate(trial);
                if (tf.rank_ok && std::isfinite(tf.cost) && tf.cost < fit.cost)
                {
                    const double rel = (fit.cost - tf.cost) / fit.cost;
                    ps = trial;
                    fit = std::move(tf);
                    lambda = std::max(lambda / 10.0, 1e-12);
                    accepted = true;
                    done = rel < cfg.tolerance;
                    break;
                }
                lambda *= 10.0;
            }
            if (!accepted || done)
            {
                res.status = LmStatus::converged;
                break;
            }
        }

        for (std::size_t i = 0; i < ps.size(); ++i)
        {
            res.x.push_back(prob.to_physical(ps[i]));
            res.gains.push_back(fit.g[static_cast<Eigen::Index>(i)]);
        }
        res.cost = fit.cost;
        return res;
    }

    std::vector<PathEstimate> plug_in(const BandModel& model, const std::vector<GeometricParams>& x,
                                      const std::vector<cd>& gains)
    {
        const int k = static_cast<int>(x.size());
        std::vector<PathEstimate> out(k);
        if (k == 0)
            return out;
        const MatrixXcd d = band_jacobian(model.band(), model.arrays(), x, gains, 1, 0);
        const CrbResult c = crb(band_fim(d, model.cov()));
        const ParamLayout layout{k, 1};
        for (int i = 0; i < k; ++i)
        {
            out[i].x = x[i];
            out[i].gain = gains[i];
            out[i].crb = {c.diag[layout.delay(i)], c.diag[layout.aod(i)], c.diag[layout.aoa(i)]};
            out[i].esnr = esnr_from_inverse(c.inverse, layout.re_gain(i, 0), layout.im_gain(i, 0), gains[i]);
        }
        return out;
    }

    SingleBandEstimate EstimationTrace::materialize(double floor) const
    {
        SingleBandEstimate est;
        est.band = band;
        const TraceStep* last = nullptr;
        for (const TraceStep& s : steps)
        {
            if (!(s.score >= floor))
                break;
            last = &s;
        }
        if (last)
            for (const PathEstimate& p : last->paths)
                if (p.esnr >= floor)
                    est.paths.push_back(p);
        return est;
    }

    EstimationTrace estimate_band_trace(const BandModel& model, const VectorXcd& h_m, int m, double stop_floor)
    {
        EstimationTrace trace;
        trace.band = m;
        const VectorXcd h_w = whiten(model, h_m);
        VectorXcd residual = h_w;
        std::vector<GeometricParams> current;

        for (int added = 0; added < model.config().max_paths; ++added)
        {
            const std::optional<Candidate> cand = detect_next_path(model, residual, stop_floor);
            if (!cand)
                break;
            std::vector<GeometricParams> init = current;
            init.push_back(cand->x);
            const LmResult fit = refine_lm(model, h_w, init);
            if (fit.status == LmStatus::non_finite || fit.x.empty())
                break;

            std::vector<PathEstimate> paths = plug_in(model, fit.x, fit.gains);
            // The added path is last unless a rank drop removed it.
            double added_esnr = 0.0;
            if (fit.dropped == 0)
                added_esnr = paths.back().esnr;

            TraceStep st;
            st.score = std::min(cand->statistic, added_esnr);
            std::stable_sort(paths.begin(), paths.end(),
                             [](const PathEstimate& a, const PathEstimate& b) { return std::abs(a.gain) > std::abs(b.gain); });
            st.paths = paths;
            trace.steps.push_back(std::move(st));
            if (fit.dropped > 0)
                break;

            current = fit.x;
            residual = h_w;
            for (std::size_t i = 0; i < fit.x.size(); ++i)
                residual -= fit.gains[i] *
                            model.whitened_steering(fit.x[i].delay * model.band().n_subcarriers *
                                                        model.band().subcarrier_spacing,
                                                    std::sin(fit.x[i].aod), std::sin(fit.x[i].aoa));
        }
        return trace;
    }

    SingleBandEstimate estimate_band(const BandModel& model, const VectorXcd& h_m, int m)
    {
        const double floor = model.config().detection_floor;
        return estimate_band_trace(model, h_m, m, floor).materialize(floor);
    }

} // namespace mbs

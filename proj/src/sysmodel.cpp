// SPDX-License-Identifier: Apache-2.0
//
// simcf: SIM-aided cell-free massive MIMO downlink simulator and trainer
// Copyright (C) 2026 The simcf authors
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

#include "simcf/sysmodel.hpp"

#include <cmath>
#include <stdexcept>

namespace simcf
{
    double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

    double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }

    PowerAllocation::PowerAllocation(std::size_t aps, std::size_t ues, std::size_t antennas, double fill)
        : aps_(aps), ues_(ues), antennas_(antennas), p_(aps * ues * antennas, fill)
    {
    }

    double PowerAllocation::ap_power(std::size_t l) const
    {
        double s = 0.0;
        for (std::size_t k = 0; k < ues_; ++k)
            for (std::size_t a = 0; a < antennas_; ++a)
            {
                const double v = p_[index(l, k, a)];
                s += v * v;
            }
        return s;
    }

    EffectiveGains effective_gains(const ChannelRealization &h, std::span<const CMatrix> beamformers,
                                   std::span<const CMatrix> w_first)
    {
        if (beamformers.size() != h.aps || w_first.size() != h.aps)
            throw std::invalid_argument("effective_gains: need one beamformer and one W_first per AP");

        EffectiveGains out;
        out.aps = h.aps;
        out.ues = h.ues;
        out.antennas = h.aps > 0 ? static_cast<std::size_t>(w_first[0].cols()) : 0;
        out.g.reserve(h.aps * h.ues);
        const auto n = static_cast<Eigen::Index>(h.atoms);
        for (std::size_t l = 0; l < h.aps; ++l)
        {
            const CMatrix &gl = beamformers[l];
            const CMatrix &w1 = w_first[l];
            if (gl.rows() != n || gl.cols() != n || w1.rows() != n ||
                static_cast<std::size_t>(w1.cols()) != out.antennas)
                throw std::invalid_argument("effective_gains: shape mismatch for AP " + std::to_string(l));
            const CMatrix gw = gl * w1;
            for (std::size_t k = 0; k < h.ues; ++k)
            {
                const CVector &hk = h.at(l, k);
                if (hk.size() != n)
                    throw std::invalid_argument("effective_gains: channel vector length mismatch");
                out.g.emplace_back((hk.adjoint() * gw).transpose());
            }
        }
        return out;
    }

    std::vector<double> sinr(const EffectiveGains &g, const PowerAllocation &pa, const NoiseModel &noise)
    {
        if (pa.aps() != g.aps || pa.ues() != g.ues || pa.antennas() != g.antennas)
            throw std::invalid_argument("sinr: power allocation shape does not match effective gains");
        if (!(noise.sigma2_w > 0.0))
            throw std::invalid_argument("sinr: noise power must be positive");

        // received[k][j] = sum_l g_{l,k} . p_{l,j}
        const std::size_t K = g.ues;
        std::vector<cplx> received(K * K, cplx{});
        for (std::size_t l = 0; l < g.aps; ++l)
            for (std::size_t k = 0; k < K; ++k)
            {
                const CVector &gk = g.at(l, k);
                for (std::size_t j = 0; j < K; ++j)
                {
                    cplx s{};
                    for (std::size_t a = 0; a < g.antennas; ++a)
                        s += gk(static_cast<Eigen::Index>(a)) * pa.at(l, j, a);
                    received[k * K + j] += s;
                }
            }

        std::vector<double> gamma(K);
        for (std::size_t k = 0; k < K; ++k)
        {
            double interference = 0.0;
            for (std::size_t j = 0; j < K; ++j)
                if (j != k)
                    interference += std::norm(received[k * K + j]);
            gamma[k] = std::norm(received[k * K + k]) / (interference + noise.sigma2_w);
        }
        return gamma;
    }

    std::vector<double> spectral_efficiency(std::span<const double> sinr_values)
    {
        std::vector<double> r;
        r.reserve(sinr_values.size());
        for (double s : sinr_values)
        {
            if (!(s >= 0.0))
                throw std::invalid_argument("spectral_efficiency: negative or NaN SINR");
            r.push_back(std::log2(1.0 + s));
        }
        return r;
    }

    double sum_se(std::span<const double> rates)
    {
        double s = 0.0;
        for (double r : rates)
            s += r;
        return s;
    }

    PowerAllocation project_power(const PowerAllocation &raw, std::span<const double> p_max_w)
    {
        if (p_max_w.size() != raw.aps())
            throw std::invalid_argument("project_power: need one power budget per AP");
        PowerAllocation out = raw;
        for (double &v : out.data())
            if (!(v > 0.0))
                v = 0.0;
        for (std::size_t l = 0; l < out.aps(); ++l)
        {
            const double total = out.ap_power(l);
            if (total > p_max_w[l])
            {
                const double scale = std::sqrt(p_max_w[l] / total);
                for (std::size_t k = 0; k < out.ues(); ++k)
                    for (std::size_t a = 0; a < out.antennas(); ++a)
                        out.at(l, k, a) *= scale;
                // Shave off rounding excess above the budget.
                for (int guard = 0; guard < 4 && out.ap_power(l) > p_max_w[l]; ++guard)
                    for (std::size_t k = 0; k < out.ues(); ++k)
                        for (std::size_t a = 0; a < out.antennas(); ++a)
                            out.at(l, k, a) = std::nextafter(out.at(l, k, a), 0.0);
            }
        }
        return out;
    }

    double evaluate_sum_se(const ChannelRealization &h, const PhaseConfig &phases, std::span<const PropagationSet> ps,
                           const PowerAllocation &pa, const NoiseModel &noise)
    {
        if (ps.size() != 1 && ps.size() != h.aps)
            throw std::invalid_argument("evaluate_sum_se: need one shared or one per-AP propagation set");
        std::vector<CMatrix> beams, firsts;
        for (std::size_t l = 0; l < h.aps; ++l)
        {
            const PropagationSet &p = ps.size() == 1 ? ps[0] : ps[l];
            beams.push_back(beamforming_matrix(phases, p, l));
            firsts.push_back(p.w_first);
        }
        const auto gains = effective_gains(h, beams, firsts);
        const auto gamma = sinr(gains, pa, noise);
        return sum_se(spectral_efficiency(gamma));
    }

} // namespace simcf

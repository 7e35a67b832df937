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

#include "simcf/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace simcf
{
    WaterFillingResult water_filling(std::span<const double> gains, double p_max, double sigma2)
    {
        if (gains.empty())
            throw std::invalid_argument("water_filling: no users");
        if (!(p_max > 0.0) || !(sigma2 > 0.0))
            throw std::invalid_argument("water_filling: power budget and noise must be positive");

        const std::size_t K = gains.size();
        std::vector<double> floor(K);
        bool any_positive = false;
        for (std::size_t k = 0; k < K; ++k)
        {
            if (!(gains[k] >= 0.0) || !std::isfinite(gains[k]))
                throw std::invalid_argument("water_filling: gains must be finite and nonnegative");
            floor[k] = gains[k] > 0.0 ? sigma2 / gains[k] : std::numeric_limits<double>::infinity();
            any_positive = any_positive || gains[k] > 0.0;
        }

        WaterFillingResult out;
        if (!any_positive)
        {
            out.power.assign(K, p_max / static_cast<double>(K));
            out.uniform_fallback = true;
            return out;
        }

        auto filled = [&](double mu) {
            double s = 0.0;
            for (double f : floor)
                s += std::max(0.0, mu - f);
            return s;
        };

        const double lowest = *std::min_element(floor.begin(), floor.end());
        double lo = lowest, hi = lowest + p_max;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it)
        {
            const double mid = 0.5 * (lo + hi);
            (filled(mid) < p_max ? lo : hi) = mid;
        }

        // Polish: solve mu exactly on the active set, repeating until the set is stable.
        double mu = 0.5 * (lo + hi);
        for (int it = 0; it < static_cast<int>(K) + 2; ++it)
        {
            double floor_sum = 0.0;
            std::size_t active = 0;
            for (double f : floor)
                if (f < mu)
                {
                    floor_sum += f;
                    ++active;
                }
            if (active == 0)
                break;
            const double next = (p_max + floor_sum) / static_cast<double>(active);
            if (next == mu)
                break;
            mu = next;
        }

        out.water_level = mu;
        out.power.resize(K);
        for (std::size_t k = 0; k < K; ++k)
            out.power[k] = std::max(0.0, mu - floor[k]);
        return out;
    }

    PowerAllocation uniform_allocation(std::size_t aps, std::size_t ues, std::size_t antennas, double p_max)
    {
        return PowerAllocation(aps, ues, antennas, std::sqrt(p_max / static_cast<double>(ues * antennas)));
    }

    PowerAllocation water_filling_allocation(const EffectiveGains &gains, double p_max, double sigma2)
    {
        PowerAllocation pa(gains.aps, gains.ues, gains.antennas);
        std::vector<double> g(gains.ues);
        for (std::size_t l = 0; l < gains.aps; ++l)
        {
            for (std::size_t k = 0; k < gains.ues; ++k)
                g[k] = gains.at(l, k).squaredNorm();
            const auto wf = water_filling(g, p_max, sigma2);
            for (std::size_t k = 0; k < gains.ues; ++k)
            {
                const double amp = std::sqrt(wf.power[k] / static_cast<double>(gains.antennas));
                for (std::size_t a = 0; a < gains.antennas; ++a)
                    pa.at(l, k, a) = amp;
            }
        }
        return pa;
    }

    Codebook::Codebook(std::size_t size, std::size_t agents, std::size_t layers, std::size_t atoms, std::uint64_t seed)
        : seed_(seed)
    {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> uni(0.0, 2.0 * std::numbers::pi);
        entries_.reserve(size);
        for (std::size_t c = 0; c < size; ++c)
        {
            PhaseConfig pc(agents, layers, atoms);
            for (std::size_t l = 0; l < agents; ++l)
                for (std::size_t m = 0; m < layers; ++m)
                    for (std::size_t n = 0; n < atoms; ++n)
                        pc.set(l, m, n, uni(rng));
            entries_.push_back(std::move(pc));
        }
    }

    Codebook Codebook::from_entries(std::vector<PhaseConfig> entries)
    {
        Codebook cb;
        cb.entries_ = std::move(entries);
        return cb;
    }

    CodebookResult codebook_search(const ChannelRealization &channel, const Codebook &cb,
                                   std::span<const PropagationSet> ps, double sigma2, double p_max)
    {
        if (cb.size() == 0)
            throw std::invalid_argument("codebook_search: empty codebook");
        if (ps.size() != 1 && ps.size() != channel.aps)
            throw std::invalid_argument("codebook_search: need one shared or one per-AP propagation set");

        const NoiseModel noise{sigma2};
        std::vector<CMatrix> firsts;
        for (std::size_t l = 0; l < channel.aps; ++l)
            firsts.push_back((ps.size() == 1 ? ps[0] : ps[l]).w_first);

        CodebookResult res;
        res.entry_sum_se.reserve(cb.size());
        for (std::size_t c = 0; c < cb.size(); ++c)
        {
            const PhaseConfig &pc = cb.entry(c);
            std::vector<CMatrix> beams;
            for (std::size_t l = 0; l < channel.aps; ++l)
                beams.push_back(beamforming_matrix(pc, ps.size() == 1 ? ps[0] : ps[l], l));
            const auto gains = effective_gains(channel, beams, firsts);
            PowerAllocation pa = water_filling_allocation(gains, p_max, sigma2);
            const double se = sum_se(spectral_efficiency(sinr(gains, pa, noise)));
            res.entry_sum_se.push_back(se);
            if (c == 0 || se > res.best_sum_se)
            {
                res.best_index = c;
                res.best_sum_se = se;
                res.best_power = std::move(pa);
            }
        }
        res.best_phases = cb.entry(res.best_index);
        return res;
    }

} // namespace simcf

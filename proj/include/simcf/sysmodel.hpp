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

#pragma once

#include "simcf/channel.hpp"
#include "simcf/emwave.hpp"

#include <span>
#include <vector>

namespace simcf
{
    double dbm_to_watt(double dbm);
    double watt_to_dbm(double watt);

    // Nonnegative per-antenna amplitudes p[l][k][a].
    class PowerAllocation
    {
      public:
        PowerAllocation() = default;
        PowerAllocation(std::size_t aps, std::size_t ues, std::size_t antennas, double fill = 0.0);

        std::size_t aps() const { return aps_; }
        std::size_t ues() const { return ues_; }
        std::size_t antennas() const { return antennas_; }

        double &at(std::size_t l, std::size_t k, std::size_t a) { return p_[index(l, k, a)]; }
        double at(std::size_t l, std::size_t k, std::size_t a) const { return p_[index(l, k, a)]; }

        // sum_k ||p_{l,k}||^2
        double ap_power(std::size_t l) const;

        std::vector<double> &data() { return p_; }
        const std::vector<double> &data() const { return p_; }

      private:
        std::size_t index(std::size_t l, std::size_t k, std::size_t a) const
        {
            return (l * ues_ + k) * antennas_ + a;
        }

        std::size_t aps_ = 0, ues_ = 0, antennas_ = 0;
        std::vector<double> p_;
    };

    struct NoiseModel
    {
        double sigma2_w = 0.0;
    };

    // g[l][k] = h_hat_{l,k}^H G_l W_{l,1}, a 1 x M_AP row stored as a vector.
    struct EffectiveGains
    {
        std::size_t aps = 0, ues = 0, antennas = 0;
        std::vector<CVector> g;

        const CVector &at(std::size_t l, std::size_t k) const { return g[l * ues + k]; }
    };

    EffectiveGains effective_gains(const ChannelRealization &h, std::span<const CMatrix> beamformers,
                                   std::span<const CMatrix> w_first);

    // SINR with UE k's effective channel applied to every UE j's power vector in the interference sum.
    std::vector<double> sinr(const EffectiveGains &g, const PowerAllocation &pa, const NoiseModel &noise);

    std::vector<double> spectral_efficiency(std::span<const double> sinr_values);

    double sum_se(std::span<const double> rates);

    // Clips negatives to zero, then scales each AP that exceeds its budget back onto the sphere.
    PowerAllocation project_power(const PowerAllocation &raw, std::span<const double> p_max_w);

    // Convenience: full objective for one configuration.
    double evaluate_sum_se(const ChannelRealization &h, const PhaseConfig &phases, std::span<const PropagationSet> ps,
                           const PowerAllocation &pa, const NoiseModel &noise);

} // namespace simcf

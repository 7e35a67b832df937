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
#include "simcf/sysmodel.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace simcf
{
    struct WaterFillingResult
    {
        std::vector<double> power; // per UE, watts
        double water_level = 0.0;
        bool uniform_fallback = false; // set when every gain is zero
    };

    // p_k = max(0, mu - sigma2 / g_k) with sum_k p_k = p_max. Zero gains never receive power.
    WaterFillingResult water_filling(std::span<const double> gains, double p_max, double sigma2);

    // Per-AP water-filling on interference-free gains ||g_{l,k}||^2; each UE's power is split evenly across
    // the AP antennas.
    PowerAllocation water_filling_allocation(const EffectiveGains &gains, double p_max, double sigma2);

    // Every UE gets p_max / K, split evenly across antennas.
    PowerAllocation uniform_allocation(std::size_t aps, std::size_t ues, std::size_t antennas, double p_max);

    class Codebook
    {
      public:
        // Entries are drawn sequentially from one stream, so a smaller codebook with the same seed is a prefix.
        Codebook(std::size_t size, std::size_t agents, std::size_t layers, std::size_t atoms, std::uint64_t seed);

        std::size_t size() const { return entries_.size(); }
        const PhaseConfig &entry(std::size_t i) const { return entries_.at(i); }
        std::uint64_t seed() const { return seed_; }

        static Codebook from_entries(std::vector<PhaseConfig> entries);

      private:
        Codebook() = default;
        std::vector<PhaseConfig> entries_;
        std::uint64_t seed_ = 0;
    };

    struct CodebookResult
    {
        std::size_t best_index = 0;
        PhaseConfig best_phases;
        PowerAllocation best_power;
        double best_sum_se = 0.0;
        std::vector<double> entry_sum_se;
    };

    // Evaluates water-filling sum SE for every entry; ties go to the lowest index.
    CodebookResult codebook_search(const ChannelRealization &channel, const Codebook &cb,
                                   std::span<const PropagationSet> ps, double sigma2, double p_max);

} // namespace simcf

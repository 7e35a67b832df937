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
#include <optional>
#include <vector>

namespace simcf
{
    struct EnvConfig
    {
        GeometryParams geometry;
        PlacementParams placement;
        PathlossModel pathloss;
        ChannelMode channel_mode = ChannelMode::Rayleigh;
        double p_max_dbm = 3.0;
        double noise_dbm = -96.0;
        std::size_t steps = 20;
        // When true the layout is drawn once from layout_seed; otherwise every reset draws a new one.
        bool fixed_layout = true;
        std::uint64_t layout_seed = 1;
        // Append the fixed transmission matrices to the critic state.
        bool critic_transmission_context = false;
    };

    struct GlobalState
    {
        Eigen::VectorXd positions;  // (UE - AP) xy offsets / area, [l][k][2]
        Eigen::VectorXd last_sinr;  // log2(1 + gamma_k) from the previous configuration
        std::size_t step_index = 0;
        Eigen::VectorXd transmission; // empty unless critic_transmission_context
    };

    struct AgentAction
    {
        PowerAllocation power; // 1 x K x M_AP
        std::vector<double> phases; // [m][n]
    };

    using JointAction = std::vector<Eigen::VectorXd>;

    struct StepResult
    {
        std::vector<Eigen::VectorXd> next_obs;
        double shared_reward = 0.0;
        std::vector<double> sinr;
        bool done = false;
        GlobalState next_state;
    };

    class Env
    {
      public:
        explicit Env(const EnvConfig &cfg);

        std::size_t agents() const { return cfg_.placement.aps; }
        std::size_t ues() const { return cfg_.placement.ues; }
        std::size_t layers() const { return geometry_.layer_count; }
        std::size_t atoms() const { return geometry_.atoms_per_layer; }
        std::size_t antennas() const { return geometry_.ap_antenna_count; }
        std::size_t steps() const { return cfg_.steps; }

        // 2KN + K M_AP + 2MN
        std::size_t observation_dim() const;
        // K M_AP + M N
        std::size_t action_dim() const;
        std::size_t state_dim() const;

        // Draws the channel (and the layout unless fixed) and a random initial configuration.
        std::vector<Eigen::VectorXd> reset(std::uint64_t seed);

        // Applies a known channel instead of sampling one; phases and powers start as in reset().
        std::vector<Eigen::VectorXd> reset_with_channel(const ChannelRealization &channel, std::uint64_t seed);

        AgentAction decode_action(const Eigen::VectorXd &raw) const;

        StepResult step(const JointAction &actions);

        Eigen::VectorXd observation(std::size_t agent) const;
        const GlobalState &state() const { return state_; }
        // Flattened GlobalState, identical for every agent.
        Eigen::VectorXd state_features() const;

        const EnvConfig &config() const { return cfg_; }
        const SimGeometry &geometry() const { return geometry_; }
        const PropagationSet &propagation() const { return propagation_; }
        const Layout &layout() const { return layout_; }
        const LargeScale &beta() const { return beta_; }
        const ChannelRealization &channel() const { return channel_; }
        const PhaseConfig &phases() const { return phases_; }
        const PowerAllocation &power() const { return power_; }
        const NoiseModel &noise() const { return noise_; }
        double p_max_w() const { return p_max_w_; }
        bool done() const { return state_.step_index >= cfg_.steps; }

        // Sum SE of the current configuration.
        double current_sum_se() const;

      private:
        void set_layout(const Layout &layout);
        void random_start(std::uint64_t seed);
        void refresh_sinr();

        EnvConfig cfg_;
        SimGeometry geometry_;
        PropagationSet propagation_;
        Layout layout_;
        LargeScale beta_;
        ChannelRealization channel_;
        PhaseConfig phases_;
        PowerAllocation power_;
        NoiseModel noise_;
        double p_max_w_ = 0.0;
        std::vector<double> sinr_;
        GlobalState state_;
        bool started_ = false;
    };

    // Disjoint seed streams for training, evaluation and baselines.
    std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

    inline constexpr std::uint64_t kTrainStream = 1;
    inline constexpr std::uint64_t kHeldOutStream = 2;
    inline constexpr std::uint64_t kCodebookStream = 3;
    inline constexpr std::uint64_t kInitStream = 4;

} // namespace simcf

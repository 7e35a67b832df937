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

#include "simcf/env.hpp"
#include "simcf/neural.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace simcf
{
    struct Hyperparams
    {
        double clip = 0.2;
        double entropy_weight = 0.01;
        double noise_weight = 0.5; // alpha; 0 disables noisy values
        std::size_t noise_dim = 8;
        double discount = 0.99;
        double gae_lambda = 0.95;
        std::size_t batch_episodes = 1; // episodes collected per update round
        std::size_t chunk_length = 10;
        std::size_t epochs = 5;
        std::size_t minibatches = 1;
        std::size_t shuffle_interval = 1; // update rounds between noise shuffles; 0 never shuffles
        std::size_t episodes = 200;
        double actor_lr = 3e-4;
        double critic_lr = 1e-3;
        double max_grad_norm = 10.0;
        bool recurrent = true;
        bool normalize_advantages = true;
        bool refresh_hidden = true; // recompute chunk-start hidden states after every epoch
        std::size_t actor_hidden = 64;
        std::size_t critic_hidden = 128;
        double init_log_std = -0.5;
        std::size_t eval_channels = 8;
        std::size_t eval_interval = 1;

        void validate() const;
    };

    // Per-agent real Gaussian noise rows x_l; agent l reads row l.
    class NoiseBank
    {
      public:
        NoiseBank(std::size_t agents, std::size_t dim, std::uint64_t seed);

        std::size_t agents() const { return static_cast<std::size_t>(x_.rows()); }
        std::size_t dim() const { return static_cast<std::size_t>(x_.cols()); }
        const Eigen::MatrixXd &rows() const { return x_; }
        Eigen::VectorXd row(std::size_t agent) const { return x_.row(static_cast<Eigen::Index>(agent)).transpose(); }
        std::uint64_t generation() const { return generation_; }
        const std::vector<std::vector<std::size_t>> &history() const { return history_; }

        // Permutes rows uniformly at random. Returns the permutation applied (new row i = old row perm[i]).
        std::vector<std::size_t> shuffle(std::uint64_t seed);

        // Number of NoiseBank objects ever constructed in this process.
        static std::uint64_t instances() { return instances_.load(); }

      private:
        Eigen::MatrixXd x_;
        std::uint64_t generation_ = 0;
        std::vector<std::vector<std::size_t>> history_;
        static std::atomic<std::uint64_t> instances_;
    };

    // concat(state, alpha * noise)
    Eigen::VectorXd noisy_value_input(const Eigen::VectorXd &state, const Eigen::VectorXd &noise, double alpha);

    struct GaeResult
    {
        std::vector<double> advantages;
        std::vector<double> returns;
    };

    // dones[t] marks that the episode ended after step t; bootstrap is v(s_T) for a cut-off trajectory.
    GaeResult gae(const std::vector<double> &rewards, const std::vector<double> &values,
                  const std::vector<bool> &dones, double bootstrap, double discount, double lambda);

    double ppo_ratio(double logp_new, double logp_old);

    // mean(-min(r A, clip(r, 1 - eps, 1 + eps) A)) - eta * H; ratios and advantages are column vectors.
    nn::Var actor_loss(nn::Var ratios, const Eigen::VectorXd &advantages, double clip, nn::Var entropy, double eta);

    // mean((v - R)^2)
    nn::Var critic_loss(nn::Var values, const Eigen::VectorXd &returns);

    // One recorded (episode, step, agent) sample.
    struct Transition
    {
        Eigen::VectorXd obs;
        Eigen::VectorXd critic_state; // critic features without the noise block
        Eigen::VectorXd action;
        double log_prob = 0.0;
        double reward = 0.0;
        double value = 0.0;
        Eigen::VectorXd hidden; // actor hidden state before this step
        bool done = false;
        std::size_t noise_row = 0;
        std::uint64_t noise_generation = 0;
        double advantage = 0.0;
        double ret = 0.0;
    };

    class RolloutBuffer
    {
      public:
        RolloutBuffer(std::size_t agents, std::size_t steps) : agents_(agents), steps_(steps) {}

        // Adds an empty episode and returns its index.
        std::size_t begin_episode();
        Transition &at(std::size_t episode, std::size_t step, std::size_t agent);
        const Transition &at(std::size_t episode, std::size_t step, std::size_t agent) const;

        std::size_t episodes() const { return data_.size() / (agents_ * steps_); }
        std::size_t agents() const { return agents_; }
        std::size_t steps() const { return steps_; }
        void clear() { data_.clear(); }

        // Fills advantage and return fields from GAE per (episode, agent).
        void compute_advantages(double discount, double lambda);

      private:
        std::size_t agents_, steps_;
        std::vector<Transition> data_;
    };

    struct MetricsRow
    {
        std::size_t episode = 0;
        double mean_reward = 0.0;
        double sum_se_eval = 0.0;
        double actor_loss = 0.0;
        double critic_loss = 0.0;
        double entropy = 0.0;
        double ratio_clip_fraction = 0.0;
        std::size_t dropped_ratios = 0;
    };

    struct UpdateStats
    {
        double actor_loss = 0.0;
        double critic_loss = 0.0;
        double entropy = 0.0;
        double clip_fraction = 0.0;
        double first_epoch_max_ratio_error = 0.0; // max |r - 1| seen in the first epoch
        std::size_t dropped = 0;
    };

    class TrainingDiverged : public std::runtime_error
    {
      public:
        TrainingDiverged(const std::string &what, std::string dump) : std::runtime_error(what), dump_(std::move(dump))
        {
        }
        const std::string &dump() const { return dump_; }

      private:
        std::string dump_;
    };

    // Actor input = local observation; critic input = state features, every agent's observation, agent one-hot.
    std::size_t critic_state_dim(const Env &env);
    Eigen::VectorXd critic_state(const Env &env, const std::vector<Eigen::VectorXd> &obs, std::size_t agent);

    nn::ActorSpec actor_spec_for(const Env &env, const Hyperparams &hp);

    // Deterministic execution: mean actions, actors only. Returns the per-step average sum SE of each episode.
    std::vector<double> evaluate_policy(nn::Actor &actor, Env &env, const std::vector<std::uint64_t> &seeds);

    std::vector<std::uint64_t> held_out_seeds(std::uint64_t base, std::size_t count);

    class Trainer
    {
      public:
        Trainer(const EnvConfig &env_cfg, const Hyperparams &hp, std::uint64_t seed);

        // Runs every configured episode. The callback, if set, sees each metrics row as it is produced.
        std::vector<MetricsRow> train(const std::function<void(const MetricsRow &)> &on_row = {});

        // One collection episode appended to the buffer; returns the mean reward.
        double collect_episode(std::size_t episode_index);
        UpdateStats update();

        nn::Checkpoint checkpoint() const;

        Env &env() { return *env_; }
        nn::Actor &actor() { return *actor_; }
        nn::Critic &critic() { return *critic_; }
        NoiseBank &noise() { return noise_; }
        RolloutBuffer &buffer() { return buffer_; }
        const Hyperparams &hyperparams() const { return hp_; }

      private:
        Eigen::MatrixXd critic_inputs(const std::vector<const Transition *> &samples) const;

        EnvConfig env_cfg_;
        Hyperparams hp_;
        std::uint64_t seed_;
        std::unique_ptr<Env> env_;
        std::unique_ptr<Env> eval_env_;
        std::unique_ptr<nn::Actor> actor_;
        std::unique_ptr<nn::Critic> critic_;
        nn::AdamState actor_opt_, critic_opt_;
        NoiseBank noise_;
        RolloutBuffer buffer_;
        std::mt19937_64 rng_;
        std::size_t update_rounds_ = 0;
    };

} // namespace simcf

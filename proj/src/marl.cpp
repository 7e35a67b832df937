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

#include "simcf/marl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace simcf
{
    void Hyperparams::validate() const
    {
        auto fail = [](const std::string &m) { throw std::invalid_argument("hyperparameters: " + m); };
        if (!(clip > 0.0 && clip < 1.0))
            fail("clip must lie in (0, 1)");
        if (!(entropy_weight >= 0.0))
            fail("entropy_weight must be >= 0");
        if (!(noise_weight >= 0.0))
            fail("noise_weight must be >= 0");
        if (!(discount > 0.0 && discount <= 1.0))
            fail("discount must lie in (0, 1]");
        if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
            fail("gae_lambda must lie in [0, 1]");
        if (batch_episodes < 1)
            fail("batch_episodes must be >= 1");
        if (chunk_length < 1)
            fail("chunk_length must be >= 1");
        if (epochs < 1)
            fail("epochs must be >= 1");
        if (minibatches < 1)
            fail("minibatches must be >= 1");
        if (!(actor_lr > 0.0) || !(critic_lr > 0.0))
            fail("learning rates must be positive");
        if (actor_hidden < 1 || critic_hidden < 1)
            fail("hidden sizes must be positive");
        if (eval_interval < 1)
            fail("eval_interval must be >= 1");
        if (!std::isfinite(init_log_std))
            fail("init_log_std must be finite");
    }

    std::atomic<std::uint64_t> NoiseBank::instances_{0};

    NoiseBank::NoiseBank(std::size_t agents, std::size_t dim, std::uint64_t seed)
        : x_(static_cast<Eigen::Index>(agents), static_cast<Eigen::Index>(dim))
    {
        ++instances_;
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (Eigen::Index l = 0; l < x_.rows(); ++l)
            for (Eigen::Index d = 0; d < x_.cols(); ++d)
                x_(l, d) = gauss(rng);
    }

    std::vector<std::size_t> NoiseBank::shuffle(std::uint64_t seed)
    {
        std::vector<std::size_t> perm(agents());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::mt19937_64 rng(seed);
        // Explicit Fisher-Yates.
        for (std::size_t i = perm.size(); i > 1; --i)
        {
            std::uniform_int_distribution<std::size_t> pick(0, i - 1);
            std::swap(perm[i - 1], perm[pick(rng)]);
        }
        Eigen::MatrixXd shuffled(x_.rows(), x_.cols());
        for (std::size_t i = 0; i < perm.size(); ++i)
            shuffled.row(static_cast<Eigen::Index>(i)) = x_.row(static_cast<Eigen::Index>(perm[i]));
        x_ = std::move(shuffled);
        ++generation_;
        history_.push_back(perm);
        return perm;
    }

    Eigen::VectorXd noisy_value_input(const Eigen::VectorXd &state, const Eigen::VectorXd &noise, double alpha)
    {
        Eigen::VectorXd out(state.size() + noise.size());
        out << state, alpha * noise;
        return out;
    }

    GaeResult gae(const std::vector<double> &rewards, const std::vector<double> &values,
                  const std::vector<bool> &dones, double bootstrap, double discount, double lambda)
    {
        const std::size_t n = rewards.size();
        if (values.size() != n || dones.size() != n)
            throw std::invalid_argument("gae: rewards, values and dones must have equal length");
        GaeResult out;
        out.advantages.assign(n, 0.0);
        out.returns.assign(n, 0.0);
        double next_adv = 0.0;
        for (std::size_t i = n; i-- > 0;)
        {
            const double mask = dones[i] ? 0.0 : 1.0;
            const double next_value = i + 1 < n ? values[i + 1] : bootstrap;
            const double delta = rewards[i] + discount * next_value * mask - values[i];
            next_adv = delta + discount * lambda * mask * next_adv;
            out.advantages[i] = next_adv;
            out.returns[i] = next_adv + values[i];
        }
        return out;
    }

    double ppo_ratio(double logp_new, double logp_old)
    {
        return std::exp(logp_new - logp_old);
    }

    nn::Var actor_loss(nn::Var ratios, const Eigen::VectorXd &advantages, double clip, nn::Var entropy, double eta)
    {
        nn::Tape &t = *ratios.tape;
        if (ratios.cols() != 1 || ratios.rows() != advantages.size())
            throw std::invalid_argument("actor_loss: ratios must be a column matching the advantages");
        nn::Var adv = t.constant(advantages);
        nn::Var unclipped = nn::mul(ratios, adv);
        nn::Var clipped = nn::mul(nn::clamp(ratios, 1.0 - clip, 1.0 + clip), adv);
        nn::Var surrogate = nn::mean(nn::minimum(unclipped, clipped));
        return nn::sub(nn::neg(surrogate), nn::scale(entropy, eta));
    }

    nn::Var critic_loss(nn::Var values, const Eigen::VectorXd &returns)
    {
        if (values.cols() != 1 || values.rows() != returns.size())
            throw std::invalid_argument("critic_loss: values must be a column matching the returns");
        return nn::mean(nn::square(nn::sub(values, values.tape->constant(returns))));
    }

    std::size_t RolloutBuffer::begin_episode()
    {
        data_.resize(data_.size() + agents_ * steps_);
        return episodes() - 1;
    }

    Transition &RolloutBuffer::at(std::size_t episode, std::size_t step, std::size_t agent)
    {
        return data_.at((episode * steps_ + step) * agents_ + agent);
    }

    const Transition &RolloutBuffer::at(std::size_t episode, std::size_t step, std::size_t agent) const
    {
        return data_.at((episode * steps_ + step) * agents_ + agent);
    }

    void RolloutBuffer::compute_advantages(double discount, double lambda)
    {
        for (std::size_t e = 0; e < episodes(); ++e)
            for (std::size_t l = 0; l < agents_; ++l)
            {
                std::vector<double> r(steps_), v(steps_);
                std::vector<bool> d(steps_);
                for (std::size_t t = 0; t < steps_; ++t)
                {
                    const Transition &tr = at(e, t, l);
                    r[t] = tr.reward;
                    v[t] = tr.value;
                    d[t] = tr.done;
                }
                const GaeResult g = gae(r, v, d, 0.0, discount, lambda);
                for (std::size_t t = 0; t < steps_; ++t)
                {
                    at(e, t, l).advantage = g.advantages[t];
                    at(e, t, l).ret = g.returns[t];
                }
            }
    }

    std::size_t critic_state_dim(const Env &env)
    {
        return env.state_dim() + env.agents() * env.observation_dim() + env.agents();
    }

    Eigen::VectorXd critic_state(const Env &env, const std::vector<Eigen::VectorXd> &obs, std::size_t agent)
    {
        Eigen::VectorXd s(static_cast<Eigen::Index>(critic_state_dim(env)));
        const Eigen::VectorXd global = env.state_features();
        Eigen::Index i = 0;
        s.segment(i, global.size()) = global;
        i += global.size();
        for (const auto &o : obs)
        {
            s.segment(i, o.size()) = o;
            i += o.size();
        }
        for (std::size_t l = 0; l < env.agents(); ++l)
            s(i++) = l == agent ? 1.0 : 0.0;
        return s;
    }

    nn::ActorSpec actor_spec_for(const Env &env, const Hyperparams &hp)
    {
        nn::ActorSpec spec;
        spec.obs_dim = static_cast<Eigen::Index>(env.observation_dim());
        spec.action_dim = static_cast<Eigen::Index>(env.action_dim());
        spec.hidden = static_cast<Eigen::Index>(hp.actor_hidden);
        spec.recurrent = hp.recurrent;
        spec.init_log_std = hp.init_log_std;
        return spec;
    }

    std::vector<std::uint64_t> held_out_seeds(std::uint64_t base, std::size_t count)
    {
        std::vector<std::uint64_t> seeds;
        for (std::size_t i = 0; i < count; ++i)
            seeds.push_back(derive_seed(base, kHeldOutStream, i));
        return seeds;
    }

    namespace
    {
        Eigen::MatrixXd stack_rows(const std::vector<Eigen::VectorXd> &rows)
        {
            Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : rows.front().size());
            for (std::size_t i = 0; i < rows.size(); ++i)
                m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
            return m;
        }

        JointAction rows_to_actions(const Eigen::MatrixXd &m)
        {
            JointAction a;
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                a.push_back(m.row(i).transpose());
            return a;
        }
    } // namespace

    std::vector<double> evaluate_policy(nn::Actor &actor, Env &env, const std::vector<std::uint64_t> &seeds)
    {
        std::vector<double> out;
        out.reserve(seeds.size());
        for (std::uint64_t s : seeds)
        {
            std::vector<Eigen::VectorXd> obs = env.reset(s);
            Eigen::MatrixXd hidden = actor.initial_hidden(static_cast<Eigen::Index>(env.agents()));
            double total = 0.0;
            while (!env.done())
            {
                Eigen::MatrixXd mean;
                actor.step(stack_rows(obs), hidden, mean);
                StepResult r = env.step(rows_to_actions(mean));
                total += r.shared_reward;
                obs = std::move(r.next_obs);
            }
            out.push_back(total / static_cast<double>(env.steps()));
        }
        return out;
    }

    Trainer::Trainer(const EnvConfig &env_cfg, const Hyperparams &hp, std::uint64_t seed)
        : env_cfg_(env_cfg), hp_(hp), seed_(seed), env_(std::make_unique<Env>(env_cfg)),
          eval_env_(std::make_unique<Env>(env_cfg)), noise_(env_cfg.placement.aps, hp.noise_dim, derive_seed(seed, 11, 0)),
          buffer_(env_cfg.placement.aps, env_cfg.steps), rng_(derive_seed(seed, 12, 0))
    {
        hp_.validate();
        actor_ = std::make_unique<nn::Actor>(actor_spec_for(*env_, hp_), derive_seed(seed, 13, 0));
        nn::CriticSpec cs;
        cs.input_dim = static_cast<Eigen::Index>(critic_state_dim(*env_) + hp_.noise_dim);
        cs.hidden = static_cast<Eigen::Index>(hp_.critic_hidden);
        critic_ = std::make_unique<nn::Critic>(cs, derive_seed(seed, 14, 0));
        actor_opt_.lr = hp_.actor_lr;
        critic_opt_.lr = hp_.critic_lr;
    }

    Eigen::MatrixXd Trainer::critic_inputs(const std::vector<const Transition *> &samples) const
    {
        const Eigen::Index dim = static_cast<Eigen::Index>(critic_state_dim(*env_) + hp_.noise_dim);
        Eigen::MatrixXd m(static_cast<Eigen::Index>(samples.size()), dim);
        for (std::size_t i = 0; i < samples.size(); ++i)
        {
            const Transition &tr = *samples[i];
            if (tr.noise_generation != noise_.generation())
                throw std::logic_error("critic input: sample was collected under a different noise assignment");
            m.row(static_cast<Eigen::Index>(i)) =
                noisy_value_input(tr.critic_state, noise_.row(tr.noise_row), hp_.noise_weight).transpose();
        }
        return m;
    }

    double Trainer::collect_episode(std::size_t episode_index)
    {
        Env &env = *env_;
        const std::size_t L = env.agents();
        std::vector<Eigen::VectorXd> obs = env.reset(derive_seed(seed_, kTrainStream, episode_index));
        Eigen::MatrixXd hidden = actor_->initial_hidden(static_cast<Eigen::Index>(L));
        const std::size_t e = buffer_.begin_episode();
        std::normal_distribution<double> gauss(0.0, 1.0);
        static const double half_log_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);

        double total = 0.0;
        for (std::size_t t = 0; !env.done(); ++t)
        {
            std::vector<const Transition *> rows;
            for (std::size_t l = 0; l < L; ++l)
            {
                Transition &tr = buffer_.at(e, t, l);
                tr.obs = obs[l];
                tr.critic_state = critic_state(env, obs, l);
                tr.hidden = hidden.row(static_cast<Eigen::Index>(l)).transpose();
                tr.noise_row = l;
                tr.noise_generation = noise_.generation();
                rows.push_back(&tr);
            }
            const Eigen::MatrixXd values = critic_->evaluate(critic_inputs(rows));

            nn::Tape tape;
            nn::PolicyOutput po = actor_->forward_sequence(tape, {stack_rows(obs)}, hidden);
            const Eigen::MatrixXd &mean = po.means.front().value();
            const Eigen::RowVectorXd log_std = po.log_std.value();
            hidden = po.hidden.value();

            Eigen::MatrixXd actions(mean.rows(), mean.cols());
            for (Eigen::Index l = 0; l < mean.rows(); ++l)
            {
                double logp = -half_log_two_pi * static_cast<double>(mean.cols());
                for (Eigen::Index d = 0; d < mean.cols(); ++d)
                {
                    const double z = gauss(rng_);
                    actions(l, d) = mean(l, d) + std::exp(log_std(d)) * z;
                    logp += -0.5 * z * z - log_std(d);
                }
                Transition &tr = buffer_.at(e, t, static_cast<std::size_t>(l));
                tr.action = actions.row(l).transpose();
                tr.log_prob = logp;
                tr.value = values(l, 0);
            }

            StepResult r = env.step(rows_to_actions(actions));
            for (std::size_t l = 0; l < L; ++l)
            {
                Transition &tr = buffer_.at(e, t, l);
                tr.reward = r.shared_reward;
                tr.done = r.done;
            }
            total += r.shared_reward;
            obs = std::move(r.next_obs);
        }
        return total / static_cast<double>(env.steps());
    }

    namespace
    {
        struct Chunk
        {
            std::size_t episode, agent, start, length;
        };
    } // namespace

    UpdateStats Trainer::update()
    {
        const std::size_t L = buffer_.agents(), T = buffer_.steps(), E = buffer_.episodes();
        if (E == 0)
            throw std::logic_error("Trainer::update: empty buffer");
        buffer_.compute_advantages(hp_.discount, hp_.gae_lambda);

        std::vector<Transition *> all;
        for (std::size_t e = 0; e < E; ++e)
            for (std::size_t t = 0; t < T; ++t)
                for (std::size_t l = 0; l < L; ++l)
                    all.push_back(&buffer_.at(e, t, l));
        if (hp_.normalize_advantages && all.size() > 1)
        {
            double mu = 0.0, var = 0.0;
            for (auto *tr : all)
                mu += tr->advantage;
            mu /= static_cast<double>(all.size());
            for (auto *tr : all)
                var += (tr->advantage - mu) * (tr->advantage - mu);
            const double sd = std::sqrt(var / static_cast<double>(all.size()));
            for (auto *tr : all)
                tr->advantage = (tr->advantage - mu) / (sd + 1e-8);
        }

        std::vector<Chunk> chunks;
        for (std::size_t e = 0; e < E; ++e)
            for (std::size_t l = 0; l < L; ++l)
                for (std::size_t s = 0; s < T; s += hp_.chunk_length)
                    chunks.push_back({e, l, s, std::min(hp_.chunk_length, T - s)});

        const Eigen::Index obs_dim = static_cast<Eigen::Index>(env_->observation_dim());
        const Eigen::Index act_dim = static_cast<Eigen::Index>(env_->action_dim());
        const Eigen::Index hid = static_cast<Eigen::Index>(hp_.actor_hidden);

        UpdateStats stats;
        std::size_t n_minibatch_updates = 0, clipped = 0, counted = 0;
        for (std::size_t epoch = 0; epoch < hp_.epochs; ++epoch)
        {
            std::shuffle(chunks.begin(), chunks.end(), rng_);
            const std::size_t per = (chunks.size() + hp_.minibatches - 1) / hp_.minibatches;
            for (std::size_t mb = 0; mb * per < chunks.size(); ++mb)
            {
                const std::size_t lo = mb * per, hi = std::min(chunks.size(), lo + per);
                const auto B = static_cast<Eigen::Index>(hi - lo);
                std::size_t max_len = 0;
                for (std::size_t c = lo; c < hi; ++c)
                    max_len = std::max(max_len, chunks[c].length);

                // Actor pass over the chunks of this minibatch, rows = chunks, time = chunk offset.
                std::vector<Eigen::MatrixXd> obs_seq(max_len, Eigen::MatrixXd::Zero(B, obs_dim));
                Eigen::MatrixXd h0(B, hid);
                for (Eigen::Index b = 0; b < B; ++b)
                {
                    const Chunk &ch = chunks[lo + static_cast<std::size_t>(b)];
                    h0.row(b) = buffer_.at(ch.episode, ch.start, ch.agent).hidden.transpose();
                    for (std::size_t k = 0; k < ch.length; ++k)
                        obs_seq[k].row(b) = buffer_.at(ch.episode, ch.start + k, ch.agent).obs.transpose();
                }

                nn::Tape tape;
                nn::PolicyOutput po = actor_->forward_sequence(tape, obs_seq, h0);
                std::vector<nn::Var> ratio_parts;
                std::vector<double> adv_values;
                std::vector<const Transition *> samples;
                for (std::size_t k = 0; k < max_len; ++k)
                {
                    std::vector<Eigen::Index> active;
                    for (Eigen::Index b = 0; b < B; ++b)
                        if (chunks[lo + static_cast<std::size_t>(b)].length > k)
                            active.push_back(b);
                    Eigen::MatrixXd act(static_cast<Eigen::Index>(active.size()), act_dim);
                    Eigen::VectorXd old_logp(static_cast<Eigen::Index>(active.size()));
                    std::vector<const Transition *> step_samples;
                    for (std::size_t i = 0; i < active.size(); ++i)
                    {
                        const Chunk &ch = chunks[lo + static_cast<std::size_t>(active[i])];
                        const Transition &tr = buffer_.at(ch.episode, ch.start + k, ch.agent);
                        act.row(static_cast<Eigen::Index>(i)) = tr.action.transpose();
                        old_logp(static_cast<Eigen::Index>(i)) = tr.log_prob;
                        step_samples.push_back(&tr);
                    }
                    nn::Var mean_k = active.size() == static_cast<std::size_t>(B) ? po.means[k]
                                                                                   : nn::gather_rows(po.means[k], active);
                    nn::Var logp = nn::gaussian_log_prob(tape.constant(act), mean_k, po.log_std);
                    nn::Var ratio = nn::exp(nn::sub(logp, tape.constant(old_logp)));

                    std::vector<Eigen::Index> finite;
                    for (Eigen::Index i = 0; i < ratio.rows(); ++i)
                    {
                        const double r = ratio.value()(i, 0);
                        if (std::isfinite(r))
                            finite.push_back(i);
                        else
                            ++stats.dropped;
                    }
                    if (finite.empty())
                        continue;
                    if (finite.size() != static_cast<std::size_t>(ratio.rows()))
                        ratio = nn::gather_rows(ratio, finite);
                    for (Eigen::Index i : finite)
                    {
                        const Transition *tr = step_samples[static_cast<std::size_t>(i)];
                        adv_values.push_back(tr->advantage);
                        samples.push_back(tr);
                    }
                    for (Eigen::Index i = 0; i < ratio.rows(); ++i)
                    {
                        const double r = ratio.value()(i, 0);
                        if (epoch == 0)
                            stats.first_epoch_max_ratio_error =
                                std::max(stats.first_epoch_max_ratio_error, std::abs(r - 1.0));
                        clipped += std::abs(r - 1.0) > hp_.clip ? 1 : 0;
                        ++counted;
                    }
                    ratio_parts.push_back(ratio);
                }
                if (ratio_parts.empty())
                    continue;

                nn::Var ratios = nn::concat_rows(ratio_parts);
                nn::Var entropy = nn::gaussian_entropy(po.log_std);
                nn::Var aloss = actor_loss(ratios, Eigen::Map<Eigen::VectorXd>(adv_values.data(),
                                                                                static_cast<Eigen::Index>(adv_values.size())),
                                           hp_.clip, entropy, hp_.entropy_weight);
                const double aloss_value = aloss.value()(0, 0);

                // Critic on the same samples, with the noise rows recorded at collection time.
                nn::Tape ctape;
                Eigen::VectorXd returns(static_cast<Eigen::Index>(samples.size()));
                for (std::size_t i = 0; i < samples.size(); ++i)
                    returns(static_cast<Eigen::Index>(i)) = samples[i]->ret;
                nn::Var values = critic_->forward(ctape, ctape.constant(critic_inputs(samples)));
                nn::Var closs = critic_loss(values, returns);
                const double closs_value = closs.value()(0, 0);

                if (!std::isfinite(aloss_value) || !std::isfinite(closs_value))
                {
                    std::ostringstream dump;
                    dump << "{\"update_round\": " << update_rounds_ << ", \"epoch\": " << epoch
                         << ", \"minibatch\": " << mb << ", \"actor_loss\": \"" << aloss_value
                         << "\", \"critic_loss\": \"" << closs_value
                         << "\", \"actor_params_finite\": " << (actor_->params().all_finite() ? "true" : "false")
                         << ", \"critic_params_finite\": " << (critic_->params().all_finite() ? "true" : "false")
                         << ", \"dropped_ratios\": " << stats.dropped << "}";
                    throw TrainingDiverged("training diverged: non-finite loss", dump.str());
                }

                actor_->params().zero_grad();
                tape.backward(aloss);
                nn::clip_grad_norm(actor_->params(), hp_.max_grad_norm);
                nn::adam_step(actor_->params(), actor_opt_);

                critic_->params().zero_grad();
                ctape.backward(closs);
                nn::clip_grad_norm(critic_->params(), hp_.max_grad_norm);
                nn::adam_step(critic_->params(), critic_opt_);

                stats.actor_loss += aloss_value;
                stats.critic_loss += closs_value;
                stats.entropy += entropy.value()(0, 0);
                ++n_minibatch_updates;
            }

            if (hp_.refresh_hidden && hp_.recurrent && epoch + 1 < hp_.epochs)
            {
                // Re-run every (episode, agent) sequence with the updated policy to refresh chunk-start states.
                const auto rows = static_cast<Eigen::Index>(E * L);
                Eigen::MatrixXd h = actor_->initial_hidden(rows);
                for (std::size_t t = 0; t < T; ++t)
                {
                    Eigen::MatrixXd o(rows, obs_dim);
                    for (std::size_t e = 0; e < E; ++e)
                        for (std::size_t l = 0; l < L; ++l)
                        {
                            Transition &tr = buffer_.at(e, t, l);
                            tr.hidden = h.row(static_cast<Eigen::Index>(e * L + l)).transpose();
                            o.row(static_cast<Eigen::Index>(e * L + l)) = tr.obs.transpose();
                        }
                    Eigen::MatrixXd mean;
                    actor_->step(o, h, mean);
                }
            }
        }

        if (n_minibatch_updates > 0)
        {
            const auto n = static_cast<double>(n_minibatch_updates);
            stats.actor_loss /= n;
            stats.critic_loss /= n;
            stats.entropy /= n;
        }
        stats.clip_fraction = counted > 0 ? static_cast<double>(clipped) / static_cast<double>(counted) : 0.0;

        buffer_.clear();
        ++update_rounds_;
        if (hp_.shuffle_interval > 0 && update_rounds_ % hp_.shuffle_interval == 0)
            noise_.shuffle(derive_seed(seed_, 15, update_rounds_));
        return stats;
    }

    std::vector<MetricsRow> Trainer::train(const std::function<void(const MetricsRow &)> &on_row)
    {
        std::vector<MetricsRow> rows;
        const auto eval_seeds = held_out_seeds(seed_, hp_.eval_channels);
        UpdateStats last;
        double last_eval = 0.0;
        for (std::size_t ep = 0; ep < hp_.episodes; ++ep)
        {
            MetricsRow row;
            row.episode = ep;
            row.mean_reward = collect_episode(ep);
            if (buffer_.episodes() >= hp_.batch_episodes)
                last = update();
            row.actor_loss = last.actor_loss;
            row.critic_loss = last.critic_loss;
            row.entropy = last.entropy;
            row.ratio_clip_fraction = last.clip_fraction;
            row.dropped_ratios = last.dropped;
            if (!eval_seeds.empty() && (ep % hp_.eval_interval == 0 || ep + 1 == hp_.episodes))
            {
                const auto se = evaluate_policy(*actor_, *eval_env_, eval_seeds);
                last_eval = std::accumulate(se.begin(), se.end(), 0.0) / static_cast<double>(se.size());
            }
            row.sum_se_eval = last_eval;
            rows.push_back(row);
            if (on_row)
                on_row(row);
        }
        return rows;
    }

    nn::Checkpoint Trainer::checkpoint() const
    {
        nn::Checkpoint ck;
        const auto &spec = actor_->spec();
        ck.meta["obs_dim"] = std::to_string(spec.obs_dim);
        ck.meta["action_dim"] = std::to_string(spec.action_dim);
        ck.meta["actor_hidden"] = std::to_string(spec.hidden);
        ck.meta["recurrent"] = spec.recurrent ? "1" : "0";
        ck.meta["critic_input_dim"] = std::to_string(critic_->spec().input_dim);
        ck.meta["critic_hidden"] = std::to_string(critic_->spec().hidden);
        ck.meta["agents"] = std::to_string(env_->agents());
        nn::export_params(actor_->params(), "", ck);
        nn::export_params(critic_->params(), "", ck);
        return ck;
    }

} // namespace simcf

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

#include "simcf/env.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace simcf
{
    namespace
    {
        std::uint64_t splitmix64(std::uint64_t x)
        {
            x += 0x9e3779b97f4a7c15ULL;
            x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
            x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
            return x ^ (x >> 31);
        }

        double softplus(double x)
        {
            return x > 30.0 ? x : std::log1p(std::exp(x));
        }
    } // namespace

    std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index)
    {
        return splitmix64(splitmix64(splitmix64(base) ^ stream) + index);
    }

    Env::Env(const EnvConfig &cfg) : cfg_(cfg)
    {
        if (cfg.steps < 1)
            throw std::invalid_argument("Env: steps per episode must be at least 1");
        geometry_ = build_geometry(cfg.geometry);
        propagation_ = build_transmission_matrices(geometry_);
        p_max_w_ = dbm_to_watt(cfg.p_max_dbm);
        noise_.sigma2_w = dbm_to_watt(cfg.noise_dbm);
        if (cfg.fixed_layout)
            set_layout(place_network(cfg.layout_seed, cfg.placement));
    }

    std::size_t Env::observation_dim() const
    {
        return 2 * ues() * atoms() + ues() * antennas() + 2 * layers() * atoms();
    }

    std::size_t Env::action_dim() const
    {
        return ues() * antennas() + layers() * atoms();
    }

    std::size_t Env::state_dim() const
    {
        std::size_t d = 2 * agents() * ues() + ues() + 1;
        if (cfg_.critic_transmission_context)
        {
            d += 2 * atoms() * antennas();
            d += 2 * atoms() * atoms() * (layers() - 1);
        }
        return d;
    }

    void Env::set_layout(const Layout &layout)
    {
        layout_ = layout;
        beta_ = large_scale(layout_, cfg_.pathloss);
        state_.positions.resize(static_cast<Eigen::Index>(2 * agents() * ues()));
        Eigen::Index i = 0;
        for (std::size_t l = 0; l < agents(); ++l)
            for (std::size_t k = 0; k < ues(); ++k)
            {
                const Vec3 d = layout_.ue_positions[k] - layout_.ap_positions[l];
                state_.positions(i++) = d.x() / layout_.area_m;
                state_.positions(i++) = d.y() / layout_.area_m;
            }
        if (cfg_.critic_transmission_context)
        {
            const auto &w1 = propagation_.w_first;
            double scale = w1.cwiseAbs().maxCoeff();
            for (const auto &w : propagation_.w_inter)
                scale = std::max(scale, w.cwiseAbs().maxCoeff());
            std::vector<double> feats;
            auto push = [&](const CMatrix &w) {
                for (Eigen::Index c = 0; c < w.cols(); ++c)
                    for (Eigen::Index r = 0; r < w.rows(); ++r)
                    {
                        feats.push_back(w(r, c).real() / scale);
                        feats.push_back(w(r, c).imag() / scale);
                    }
            };
            push(w1);
            for (const auto &w : propagation_.w_inter)
                push(w);
            state_.transmission = Eigen::Map<Eigen::VectorXd>(feats.data(), static_cast<Eigen::Index>(feats.size()));
        }
    }

    void Env::random_start(std::uint64_t seed)
    {
        std::mt19937_64 rng(derive_seed(seed, kInitStream, 0));
        std::uniform_real_distribution<double> uni(0.0, 2.0 * std::numbers::pi);
        phases_ = PhaseConfig(agents(), layers(), atoms());
        for (std::size_t l = 0; l < agents(); ++l)
            for (std::size_t m = 0; m < layers(); ++m)
                for (std::size_t n = 0; n < atoms(); ++n)
                    phases_.set(l, m, n, uni(rng));
        const double amp = std::sqrt(p_max_w_ / static_cast<double>(ues() * antennas()));
        power_ = PowerAllocation(agents(), ues(), antennas(), amp);
        state_.step_index = 0;
        started_ = true;
        refresh_sinr();
    }

    std::vector<Eigen::VectorXd> Env::reset(std::uint64_t seed)
    {
        if (!cfg_.fixed_layout)
            set_layout(place_network(derive_seed(seed, kTrainStream, 1), cfg_.placement));
        channel_ = sample_channel(beta_, atoms(), derive_seed(seed, kTrainStream, 2), cfg_.channel_mode);
        random_start(seed);
        std::vector<Eigen::VectorXd> obs;
        for (std::size_t l = 0; l < agents(); ++l)
            obs.push_back(observation(l));
        return obs;
    }

    std::vector<Eigen::VectorXd> Env::reset_with_channel(const ChannelRealization &channel, std::uint64_t seed)
    {
        if (channel.aps != agents() || channel.ues != ues() || channel.atoms != atoms())
            throw std::invalid_argument("Env::reset_with_channel: channel shape does not match the environment");
        channel_ = channel;
        random_start(seed);
        std::vector<Eigen::VectorXd> obs;
        for (std::size_t l = 0; l < agents(); ++l)
            obs.push_back(observation(l));
        return obs;
    }

    AgentAction Env::decode_action(const Eigen::VectorXd &raw) const
    {
        if (static_cast<std::size_t>(raw.size()) != action_dim())
            throw std::invalid_argument("decode_action: expected " + std::to_string(action_dim()) + " values, got " +
                                        std::to_string(raw.size()));
        if (!raw.allFinite())
            throw std::runtime_error("decode_action: non-finite action (diverged policy)");

        AgentAction act;
        const std::size_t np = ues() * antennas();
        // softplus(0) * unit = ln 2 of the uniform per-antenna amplitude
        const double unit = std::sqrt(p_max_w_ / static_cast<double>(np));
        act.power = PowerAllocation(1, ues(), antennas());
        for (std::size_t i = 0; i < np; ++i)
            act.power.data()[i] = unit * softplus(raw(static_cast<Eigen::Index>(i)));
        const double budget[1] = {p_max_w_};
        act.power = project_power(act.power, budget);

        constexpr double two_pi = 2.0 * std::numbers::pi;
        const double top = std::nextafter(two_pi, 0.0);
        act.phases.resize(layers() * atoms());
        for (std::size_t i = 0; i < act.phases.size(); ++i)
        {
            const double x = raw(static_cast<Eigen::Index>(np + i));
            act.phases[i] = std::min(std::numbers::pi * (std::tanh(x) + 1.0), top);
        }
        return act;
    }

    StepResult Env::step(const JointAction &actions)
    {
        if (!started_)
            throw std::logic_error("Env::step: call reset first");
        if (done())
            throw std::logic_error("Env::step: episode already finished");
        if (actions.size() != agents())
            throw std::invalid_argument("Env::step: need one action per agent");

        std::vector<AgentAction> decoded;
        decoded.reserve(agents());
        for (const auto &a : actions)
            decoded.push_back(decode_action(a));
        for (std::size_t l = 0; l < agents(); ++l)
        {
            const AgentAction &a = decoded[l];
            for (std::size_t k = 0; k < ues(); ++k)
                for (std::size_t t = 0; t < antennas(); ++t)
                    power_.at(l, k, t) = a.power.at(0, k, t);
            for (std::size_t m = 0; m < layers(); ++m)
                for (std::size_t n = 0; n < atoms(); ++n)
                    phases_.set(l, m, n, a.phases[m * atoms() + n]);
        }

        refresh_sinr();
        ++state_.step_index;

        StepResult r;
        r.sinr = sinr_;
        r.shared_reward = sum_se(spectral_efficiency(sinr_));
        r.done = done();
        for (std::size_t l = 0; l < agents(); ++l)
            r.next_obs.push_back(observation(l));
        r.next_state = state_;
        return r;
    }

    void Env::refresh_sinr()
    {
        std::vector<CMatrix> beams, firsts;
        for (std::size_t l = 0; l < agents(); ++l)
        {
            beams.push_back(beamforming_matrix(phases_, propagation_, l));
            firsts.push_back(propagation_.w_first);
        }
        sinr_ = sinr(effective_gains(channel_, beams, firsts), power_, noise_);
        state_.last_sinr.resize(static_cast<Eigen::Index>(ues()));
        for (std::size_t k = 0; k < ues(); ++k)
            state_.last_sinr(static_cast<Eigen::Index>(k)) = std::log2(1.0 + sinr_[k]);
    }

    double Env::current_sum_se() const
    {
        return sum_se(spectral_efficiency(sinr_));
    }

    Eigen::VectorXd Env::observation(std::size_t agent) const
    {
        if (agent >= agents())
            throw std::out_of_range("Env::observation: agent index out of range");
        Eigen::VectorXd o(static_cast<Eigen::Index>(observation_dim()));
        Eigen::Index i = 0;

        // Local CSI, normalised by its own RMS.
        double energy = 0.0;
        for (std::size_t k = 0; k < ues(); ++k)
            energy += channel_.at(agent, k).squaredNorm();
        const double rms = std::sqrt(energy / static_cast<double>(ues() * atoms()));
        const double inv = rms > 0.0 ? 1.0 / rms : 0.0;
        for (std::size_t k = 0; k < ues(); ++k)
        {
            const CVector &h = channel_.at(agent, k);
            for (Eigen::Index n = 0; n < h.size(); ++n)
            {
                o(i++) = h(n).real() * inv;
                o(i++) = h(n).imag() * inv;
            }
        }

        const double amp_scale = 1.0 / std::sqrt(p_max_w_);
        for (std::size_t k = 0; k < ues(); ++k)
            for (std::size_t a = 0; a < antennas(); ++a)
                o(i++) = power_.at(agent, k, a) * amp_scale;

        for (std::size_t m = 0; m < layers(); ++m)
            for (std::size_t n = 0; n < atoms(); ++n)
            {
                const double phi = phases_.get(agent, m, n);
                o(i++) = std::cos(phi);
                o(i++) = std::sin(phi);
            }
        return o;
    }

    Eigen::VectorXd Env::state_features() const
    {
        Eigen::VectorXd s(static_cast<Eigen::Index>(state_dim()));
        Eigen::Index i = 0;
        s.segment(i, state_.positions.size()) = state_.positions;
        i += state_.positions.size();
        s.segment(i, state_.last_sinr.size()) = state_.last_sinr;
        i += state_.last_sinr.size();
        s(i++) = static_cast<double>(state_.step_index) / static_cast<double>(cfg_.steps);
        if (cfg_.critic_transmission_context)
            s.segment(i, state_.transmission.size()) = state_.transmission;
        return s;
    }

} // namespace simcf

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

#include "oracles.hpp"
#include "simcf/marl.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace simcf;

namespace
{
    EnvConfig small_env()
    {
        EnvConfig c;
        c.geometry.layer_count = 2;
        c.geometry.atoms_per_layer = 4;
        c.geometry.ap_antenna_count = 2;
        c.placement = {2, 2, 100.0, 10.0, 1.7};
        c.steps = 6;
        return c;
    }

    Hyperparams small_hp()
    {
        Hyperparams hp;
        hp.actor_hidden = 8;
        hp.critic_hidden = 16;
        hp.chunk_length = 4;
        hp.epochs = 2;
        hp.episodes = 4;
        hp.eval_channels = 2;
        return hp;
    }

    double sorted_checksum(const Eigen::MatrixXd &m)
    {
        std::vector<double> rows;
        for (Eigen::Index i = 0; i < m.rows(); ++i)
        {
            double s = 0.0;
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                s += (j + 1.0) * m(i, j);
            rows.push_back(s);
        }
        std::sort(rows.begin(), rows.end());
        double out = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i)
            out += (static_cast<double>(i) + 1.0) * rows[i];
        return out;
    }
} // namespace

TEST_CASE("noise bank shuffle")
{
    SUBCASE("single agent is unchanged")
    {
        NoiseBank b(1, 5, 3);
        const Eigen::MatrixXd before = b.rows();
        const auto perm = b.shuffle(99);
        CHECK(perm == std::vector<std::size_t>{0});
        CHECK(b.rows() == before);
        CHECK(b.generation() == 1);
    }
    SUBCASE("rows are permuted, never altered")
    {
        NoiseBank b(6, 4, 8);
        const Eigen::MatrixXd before = b.rows();
        const double sum_before = b.rows().sum();
        const double check_before = sorted_checksum(b.rows());
        for (std::uint64_t s = 0; s < 20; ++s)
        {
            const auto perm = b.shuffle(s);
            std::vector<std::size_t> sorted = perm;
            std::sort(sorted.begin(), sorted.end());
            std::vector<std::size_t> iota(6);
            std::iota(iota.begin(), iota.end(), std::size_t{0});
            CHECK(sorted == iota);
            CHECK(b.rows().sum() == doctest::Approx(sum_before).epsilon(1e-12));
            CHECK(sorted_checksum(b.rows()) == doctest::Approx(check_before).epsilon(1e-12));
        }
        CHECK(b.history().size() == 20);
        CHECK(b.generation() == 20);

        NoiseBank c(6, 4, 8);
        const auto perm = c.shuffle(5);
        for (std::size_t i = 0; i < 6; ++i)
            CHECK(c.row(i) == before.row(static_cast<Eigen::Index>(perm[i])).transpose());
    }
    SUBCASE("fixed seed reproduces the permutation")
    {
        NoiseBank a(5, 3, 1), b(5, 3, 1);
        CHECK(a.rows() == b.rows());
        CHECK(a.shuffle(42) == b.shuffle(42));
        CHECK(a.rows() == b.rows());
    }
    SUBCASE("instance counter")
    {
        const auto before = NoiseBank::instances();
        NoiseBank b(2, 2, 0);
        CHECK(NoiseBank::instances() == before + 1);
    }
}

TEST_CASE("noisy value input")
{
    Eigen::VectorXd s(3), x(2);
    s << 1, 2, 3;
    x << 0.5, -4;
    const Eigen::VectorXd zero = noisy_value_input(s, x, 0.0);
    REQUIRE(zero.size() == 5);
    CHECK(zero.head(3) == s);
    CHECK(zero.tail(2).isZero(0.0));
    const Eigen::VectorXd one = noisy_value_input(s, x, 1.0);
    CHECK(one.tail(2) == x);
    CHECK(noisy_value_input(s, x, 0.25)(4) == doctest::Approx(-1.0));
}

TEST_CASE("GAE")
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    auto draw = [&](std::size_t len) {
        std::vector<double> v(len);
        for (auto &x : v)
            x = n(rng);
        return v;
    };

    SUBCASE("lambda = 0 gives one-step TD errors")
    {
        const auto r = draw(7), v = draw(7);
        std::vector<bool> d(7, false);
        d[6] = true;
        const auto g = gae(r, v, d, 0.0, 0.9, 0.0);
        for (std::size_t t = 0; t < 7; ++t)
        {
            const double next = t + 1 < 7 ? v[t + 1] : 0.0;
            CHECK(g.advantages[t] == doctest::Approx(r[t] + 0.9 * next - v[t]));
        }
    }
    SUBCASE("lambda = 1 with zero values gives discounted returns")
    {
        const auto r = draw(9);
        const std::vector<double> v(9, 0.0);
        std::vector<bool> d(9, false);
        d[8] = true;
        const auto g = gae(r, v, d, 0.0, 0.8, 1.0);
        for (std::size_t t = 0; t < 9; ++t)
        {
            double ret = 0.0, w = 1.0;
            for (std::size_t u = t; u < 9; ++u, w *= 0.8)
                ret += w * r[u];
            CHECK(g.advantages[t] == doctest::Approx(ret).epsilon(1e-12));
            CHECK(g.returns[t] == doctest::Approx(ret).epsilon(1e-12));
        }
    }
    SUBCASE("random rollouts against the double loop")
    {
        std::uniform_int_distribution<int> len(1, 30);
        std::bernoulli_distribution done(0.1);
        for (int trial = 0; trial < 200; ++trial)
        {
            const std::size_t T = static_cast<std::size_t>(len(rng));
            const auto r = draw(T), v = draw(T);
            std::vector<bool> d(T);
            for (std::size_t t = 0; t < T; ++t)
                d[t] = done(rng);
            const double boot = n(rng);
            const auto g = gae(r, v, d, boot, 0.97, 0.9);
            const auto ref = oracle::gae_double_loop(r, v, d, boot, 0.97, 0.9);
            for (std::size_t t = 0; t < T; ++t)
            {
                CHECK(std::abs(g.advantages[t] - ref[t]) <= 1e-10);
                CHECK(g.returns[t] == doctest::Approx(ref[t] + v[t]));
            }
        }
    }
    CHECK_THROWS_AS(gae({1.0}, {1.0, 2.0}, {false}, 0.0, 0.9, 0.9), std::invalid_argument);
}

TEST_CASE("PPO ratio and losses")
{
    CHECK(ppo_ratio(-1.3, -1.3) == 1.0);
    CHECK(ppo_ratio(std::log(2.0), 0.0) == doctest::Approx(2.0));

    nn::Tape tape;
    Eigen::MatrixXd r(4, 1);
    r << 1.5, 0.5, 1.1, 0.7;
    Eigen::VectorXd adv(4);
    adv << 1.0, -1.0, 2.0, 3.0;
    // min(r A, clip(r) A): 1.2, -0.8, 2.2, 2.1
    const nn::Var zero_entropy = tape.constant(Eigen::MatrixXd::Zero(1, 1));
    CHECK(actor_loss(tape.constant(r), adv, 0.2, zero_entropy, 0.0).value()(0, 0) ==
          doctest::Approx(-(1.2 - 0.8 + 2.2 + 2.1) / 4.0));
    const nn::Var entropy = tape.constant(Eigen::MatrixXd::Constant(1, 1, 3.0));
    CHECK(actor_loss(tape.constant(r), adv, 0.2, entropy, 0.1).value()(0, 0) ==
          doctest::Approx(-(1.2 - 0.8 + 2.2 + 2.1) / 4.0 - 0.3));

    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(4, 1);
    CHECK(actor_loss(tape.constant(ones), adv, 0.2, zero_entropy, 0.0).value()(0, 0) ==
          doctest::Approx(-adv.mean()));

    Eigen::MatrixXd v(2, 1);
    v << 1.0, 2.0;
    CHECK(critic_loss(tape.constant(v), Eigen::VectorXd::Zero(2)).value()(0, 0) == doctest::Approx(2.5));
    CHECK_THROWS_AS(critic_loss(tape.constant(v), Eigen::VectorXd::Zero(3)), std::invalid_argument);
    CHECK_THROWS_AS(actor_loss(tape.constant(v), adv, 0.2, zero_entropy, 0.0), std::invalid_argument);
}

TEST_CASE("actor loss gradient stops outside the clip range")
{
    nn::ParameterSet ps;
    Eigen::MatrixXd init(3, 1);
    init << 1.5, 0.9, 0.5;
    auto &r = ps.add("r", init);
    Eigen::VectorXd adv(3);
    adv << 1.0, 1.0, -1.0;
    nn::Tape tape;
    const nn::Var loss = actor_loss(tape.parameter(r), adv, 0.2, tape.constant(Eigen::MatrixXd::Zero(1, 1)), 0.0);
    tape.backward(loss);
    CHECK(r.grad(0, 0) == 0.0);
    CHECK(r.grad(1, 0) == doctest::Approx(-1.0 / 3.0));
    CHECK(r.grad(2, 0) == 0.0);
}

TEST_CASE("hyperparameter validation")
{
    Hyperparams hp;
    CHECK_NOTHROW(hp.validate());
    hp.clip = 1.5;
    CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
    hp = Hyperparams{};
    hp.discount = 0.0;
    CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
    hp = Hyperparams{};
    hp.epochs = 0;
    CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
}

TEST_CASE("trainer bookkeeping")
{
    Trainer tr(small_env(), small_hp(), 7);
    const std::size_t L = 2, T = 6;

    tr.collect_episode(0);
    REQUIRE(tr.buffer().episodes() == 1);
    for (std::size_t t = 0; t < T; ++t)
    {
        const double r0 = tr.buffer().at(0, t, 0).reward;
        for (std::size_t l = 0; l < L; ++l)
        {
            const Transition &x = tr.buffer().at(0, t, l);
            CHECK(x.reward == r0);
            CHECK(x.noise_row == l);
            CHECK(x.noise_generation == 0);
            CHECK(x.done == (t + 1 == T));
            CHECK(std::isfinite(x.log_prob));
        }
    }

    const auto stats = tr.update();
    CHECK(stats.first_epoch_max_ratio_error < 1e-9);
    CHECK(stats.dropped == 0);
    CHECK(tr.buffer().episodes() == 0);
    CHECK(tr.noise().generation() == 1);
    CHECK(tr.noise().history().size() == 1);

    tr.collect_episode(1);
    CHECK(tr.buffer().at(0, 0, 0).noise_generation == 1);
}

TEST_CASE("feed-forward trainer also starts each round at ratio one")
{
    auto hp = small_hp();
    hp.recurrent = false;
    hp.noise_weight = 0.0;
    Trainer tr(small_env(), hp, 3);
    tr.collect_episode(0);
    CHECK(tr.update().first_epoch_max_ratio_error < 1e-9);
}

TEST_CASE("training is deterministic for a fixed seed")
{
    auto run = [] {
        Trainer tr(small_env(), small_hp(), 11);
        return tr.train();
    };
    const auto a = run(), b = run();
    REQUIRE(a.size() == 4);
    REQUIRE(b.size() == 4);
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        CHECK(a[i].mean_reward == b[i].mean_reward);
        CHECK(a[i].actor_loss == b[i].actor_loss);
        CHECK(a[i].critic_loss == b[i].critic_loss);
        CHECK(a[i].sum_se_eval == b[i].sum_se_eval);
        CHECK(std::isfinite(a[i].mean_reward));
    }
}

TEST_CASE("checkpoint carries dimensions")
{
    Trainer tr(small_env(), small_hp(), 2);
    const auto ck = tr.checkpoint();
    CHECK(ck.meta.at("obs_dim") == std::to_string(tr.env().observation_dim()));
    CHECK(ck.meta.at("action_dim") == std::to_string(tr.env().action_dim()));
    CHECK(ck.meta.at("recurrent") == "1");
    CHECK(ck.tensors.count("actor.log_std") == 1);
    CHECK(ck.tensors.count("critic.out.weight") == 1);
}

TEST_CASE("held-out seeds are disjoint from training seeds")
{
    const auto h = held_out_seeds(4, 50);
    for (std::size_t i = 0; i < 200; ++i)
        CHECK(std::find(h.begin(), h.end(), derive_seed(4, kTrainStream, i)) == h.end());
}

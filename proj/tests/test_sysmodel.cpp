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
#include "simcf/sysmodel.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace simcf;

namespace
{
    struct Instance
    {
        PropagationSet ps;
        ChannelRealization h;
        PhaseConfig pc;
        PowerAllocation pa;
        NoiseModel noise{1e-12};
    };

    Instance random_instance(std::size_t L, std::size_t K, std::size_t M, std::size_t N, std::size_t A,
                             std::mt19937_64 &rng)
    {
        GeometryParams gp;
        gp.layer_count = M;
        gp.atoms_per_layer = N;
        gp.ap_antenna_count = A;
        Instance in;
        in.ps = build_transmission_matrices(build_geometry(gp));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        LargeScale beta(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(K));
        for (Eigen::Index i = 0; i < beta.size(); ++i)
            beta(i) = std::pow(10.0, -7.0 - 2.0 * u(rng));
        in.h = sample_channel(beta, N, rng());
        in.pc = PhaseConfig(L, M, N);
        for (std::size_t l = 0; l < L; ++l)
            for (std::size_t m = 0; m < M; ++m)
                for (std::size_t n = 0; n < N; ++n)
                    in.pc.set(l, m, n, 2 * std::numbers::pi * u(rng));
        in.pa = PowerAllocation(L, K, A);
        for (double &v : in.pa.data())
            v = 0.03 * u(rng);
        return in;
    }

    double oracle_objective(const Instance &in)
    {
        const std::size_t L = in.h.aps, K = in.h.ues, N = in.h.atoms, A = in.pa.antennas(), M = in.pc.layers();
        std::vector<std::vector<std::vector<oracle::cd>>> h(L, std::vector<std::vector<oracle::cd>>(K));
        std::vector<std::vector<std::vector<double>>> ph(L, std::vector<std::vector<double>>(M));
        std::vector<std::vector<std::vector<double>>> p(L, std::vector<std::vector<double>>(K, std::vector<double>(A)));
        for (std::size_t l = 0; l < L; ++l)
        {
            for (std::size_t k = 0; k < K; ++k)
            {
                for (std::size_t n = 0; n < N; ++n)
                    h[l][k].push_back(in.h.at(l, k)(static_cast<Eigen::Index>(n)));
                for (std::size_t a = 0; a < A; ++a)
                    p[l][k][a] = in.pa.at(l, k, a);
            }
            for (std::size_t m = 0; m < M; ++m)
                for (std::size_t n = 0; n < N; ++n)
                    ph[l][m].push_back(in.pc.get(l, m, n));
        }
        std::vector<oracle::Grid> winter;
        for (const auto &w : in.ps.w_inter)
            winter.push_back(oracle::from_eigen(w));
        return oracle::brute_sum_se(h, ph, oracle::from_eigen(in.ps.w_first), winter, p, in.noise.sigma2_w);
    }

    EffectiveGains gains_of(const Instance &in)
    {
        std::vector<CMatrix> beams, firsts;
        for (std::size_t l = 0; l < in.h.aps; ++l)
        {
            beams.push_back(beamforming_matrix(in.pc, in.ps, l));
            firsts.push_back(in.ps.w_first);
        }
        return effective_gains(in.h, beams, firsts);
    }
} // namespace

TEST_CASE("dBm conversion")
{
    CHECK(dbm_to_watt(3.0) == doctest::Approx(std::pow(10.0, -2.7)).epsilon(1e-14));
    CHECK(dbm_to_watt(3.0) == doctest::Approx(1.995e-3).epsilon(1e-3));
    CHECK(dbm_to_watt(-96.0) == doctest::Approx(std::pow(10.0, -12.6)).epsilon(1e-14));
    CHECK(watt_to_dbm(dbm_to_watt(-17.5)) == doctest::Approx(-17.5));
}

TEST_CASE("effective gains")
{
    SUBCASE("identity chain")
    {
        ChannelRealization h;
        h.aps = h.ues = h.atoms = 1;
        h.h_hat = {CVector::Ones(1)};
        const CMatrix one = CMatrix::Ones(1, 1);
        const CMatrix beams[1] = {one}, firsts[1] = {one};
        auto g = effective_gains(h, beams, firsts);
        CHECK(g.at(0, 0)(0) == cplx(1.0, 0.0));
    }
    SUBCASE("linear in the channel and equal to a naive sum")
    {
        std::mt19937_64 rng(2);
        auto in = random_instance(2, 2, 2, 4, 2, rng);
        auto g = gains_of(in);
        for (std::size_t l = 0; l < 2; ++l)
        {
            const CMatrix chain = beamforming_matrix(in.pc, in.ps, l) * in.ps.w_first;
            for (std::size_t k = 0; k < 2; ++k)
                for (Eigen::Index a = 0; a < 2; ++a)
                {
                    cplx acc{};
                    for (Eigen::Index n = 0; n < 4; ++n)
                        acc += std::conj(in.h.at(l, k)(n)) * chain(n, a);
                    CHECK(std::abs(g.at(l, k)(a) - acc) <= 1e-12 * std::abs(acc));
                }
        }
        Instance scaled = in;
        for (auto &v : scaled.h.h_hat)
            v *= 3.0;
        auto g3 = gains_of(scaled);
        for (std::size_t i = 0; i < g.g.size(); ++i)
            CHECK((g3.g[i] - 3.0 * g.g[i]).norm() <= 1e-12 * g3.g[i].norm());
    }
}

TEST_CASE("SINR")
{
    SUBCASE("single UE has no interference")
    {
        EffectiveGains g;
        g.aps = 2;
        g.ues = 1;
        g.antennas = 1;
        g.g = {CVector::Constant(1, cplx(1.0, 2.0)), CVector::Constant(1, cplx(-0.5, 0.5))};
        PowerAllocation pa(2, 1, 1);
        pa.at(0, 0, 0) = 0.3;
        pa.at(1, 0, 0) = 0.7;
        const auto gamma = sinr(g, pa, {0.1});
        CHECK(gamma[0] == doctest::Approx(std::norm(cplx(1.0, 2.0) * 0.3 + cplx(-0.5, 0.5) * 0.7) / 0.1));
    }
    SUBCASE("zero power gives zero SINR")
    {
        std::mt19937_64 rng(4);
        auto in = random_instance(2, 3, 2, 4, 2, rng);
        PowerAllocation zero(2, 3, 2);
        for (double gk : sinr(gains_of(in), zero, in.noise))
            CHECK(gk == 0.0);
    }
    SUBCASE("two APs, two UEs, scalar gains by hand")
    {
        EffectiveGains g;
        g.aps = 2;
        g.ues = 2;
        g.antennas = 1;
        const cplx g00(1, 1), g01(0.5, -1), g10(-2, 0.5), g11(0.25, 0.75);
        g.g = {CVector::Constant(1, g00), CVector::Constant(1, g01), CVector::Constant(1, g10),
               CVector::Constant(1, g11)};
        PowerAllocation pa(2, 2, 1);
        pa.at(0, 0, 0) = 0.2;
        pa.at(0, 1, 0) = 0.4;
        pa.at(1, 0, 0) = 0.6;
        pa.at(1, 1, 0) = 0.8;
        const double s2 = 0.05;
        const double gamma0 = std::norm(g00 * 0.2 + g10 * 0.6) / (std::norm(g00 * 0.4 + g10 * 0.8) + s2);
        const double gamma1 = std::norm(g01 * 0.4 + g11 * 0.8) / (std::norm(g01 * 0.2 + g11 * 0.6) + s2);
        const auto gamma = sinr(g, pa, {s2});
        CHECK(gamma[0] == doctest::Approx(gamma0).epsilon(1e-14));
        CHECK(gamma[1] == doctest::Approx(gamma1).epsilon(1e-14));
    }
    SUBCASE("bad input")
    {
        EffectiveGains g;
        g.aps = g.ues = g.antennas = 1;
        g.g = {CVector::Ones(1)};
        CHECK_THROWS_AS(sinr(g, PowerAllocation(1, 1, 1), {0.0}), std::invalid_argument);
        CHECK_THROWS_AS(sinr(g, PowerAllocation(1, 2, 1), {1.0}), std::invalid_argument);
    }
}

TEST_CASE("rates")
{
    const double g[3] = {0.0, 1.0, 3.0};
    auto r = spectral_efficiency(g);
    CHECK(r[0] == 0.0);
    CHECK(r[1] == doctest::Approx(1.0));
    CHECK(r[2] == doctest::Approx(2.0));
    const double z[2] = {0.0, 0.0};
    CHECK(sum_se(z) == 0.0);
    const double a[3] = {1.0, 2.0, 3.0};
    CHECK(sum_se(a) == 6.0);
    const double bad[1] = {-1.0};
    CHECK_THROWS_AS(spectral_efficiency(bad), std::invalid_argument);
}

TEST_CASE("power projection")
{
    SUBCASE("within budget unchanged")
    {
        PowerAllocation p(1, 2, 2, 0.1);
        const double budget[1] = {1.0};
        CHECK(project_power(p, budget).data() == p.data());
    }
    SUBCASE("single entry")
    {
        PowerAllocation p(1, 1, 1, 2.0);
        const double budget[1] = {1.0};
        CHECK(project_power(p, budget).at(0, 0, 0) == doctest::Approx(1.0));
    }
    SUBCASE("random violations land on the budget, projection is idempotent")
    {
        std::mt19937_64 rng(8);
        std::normal_distribution<double> n(0.0, 1.0);
        for (int t = 0; t < 200; ++t)
        {
            PowerAllocation p(3, 4, 2);
            for (double &v : p.data())
                v = n(rng);
            const double budget[3] = {0.002, 0.5, 3.0};
            auto once = project_power(p, budget);
            auto twice = project_power(once, budget);
            CHECK(once.data() == twice.data());
            for (std::size_t l = 0; l < 3; ++l)
            {
                CHECK(once.ap_power(l) <= budget[l]);
                double raw = 0.0;
                for (std::size_t k = 0; k < 4; ++k)
                    for (std::size_t a = 0; a < 2; ++a)
                        raw += std::pow(std::max(0.0, p.at(l, k, a)), 2);
                if (raw > budget[l])
                    CHECK(std::abs(once.ap_power(l) - budget[l]) <= 1e-12 * std::max(1.0, budget[l]));
            }
            for (double v : once.data())
                CHECK(v >= 0.0);
        }
    }
}

TEST_CASE("sum SE matches the brute-force pipeline")
{
    std::mt19937_64 rng(21);
    for (int t = 0; t < 20; ++t)
    {
        auto in = random_instance(2, 2, 2, 4, 2, rng);
        const PropagationSet ps[1] = {in.ps};
        const double got = evaluate_sum_se(in.h, in.pc, ps, in.pa, in.noise);
        const double ref = oracle_objective(in);
        CHECK(std::abs(got - ref) <= 1e-10 * std::max(1.0, ref));
    }
}

TEST_CASE("single UE sum SE grows with power scale")
{
    std::mt19937_64 rng(5);
    for (int t = 0; t < 100; ++t)
    {
        auto in = random_instance(2, 1, 2, 4, 2, rng);
        const PropagationSet ps[1] = {in.ps};
        double prev = -1.0;
        for (int s = 0; s < 10; ++s)
        {
            PowerAllocation scaled = in.pa;
            for (double &v : scaled.data())
                v *= 0.2 * (s + 1);
            const double se = evaluate_sum_se(in.h, in.pc, ps, scaled, in.noise);
            CHECK(se >= prev);
            prev = se;
        }
    }
}

TEST_CASE("common phase offset on one layer of every SIM leaves SINR unchanged")
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 2 * std::numbers::pi);
    for (int t = 0; t < 20; ++t)
    {
        auto in = random_instance(2, 2, 3, 4, 2, rng);
        const auto before = sinr(gains_of(in), in.pa, in.noise);
        const std::size_t m = rng() % 3;
        const double delta = u(rng);
        for (std::size_t l = 0; l < 2; ++l)
            for (std::size_t n = 0; n < 4; ++n)
                in.pc.set(l, m, n, in.pc.get(l, m, n) + delta);
        const auto after = sinr(gains_of(in), in.pa, in.noise);
        for (std::size_t k = 0; k < 2; ++k)
            CHECK(std::abs(after[k] - before[k]) <= 1e-10 * std::max(1.0, before[k]));
    }
}

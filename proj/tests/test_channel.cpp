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

#include "simcf/channel.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace simcf;

TEST_CASE("AP placement on a square tiling")
{
    SUBCASE("L=4 quadrant centres")
    {
        auto lay = place_network(1, {4, 2, 100.0, 10.0, 1.7});
        const double expect[4][2] = {{25, 25}, {25, 75}, {75, 25}, {75, 75}};
        for (int i = 0; i < 4; ++i)
        {
            CHECK(lay.ap_positions[static_cast<std::size_t>(i)].x() == doctest::Approx(expect[i][0]));
            CHECK(lay.ap_positions[static_cast<std::size_t>(i)].y() == doctest::Approx(expect[i][1]));
            CHECK(lay.ap_positions[static_cast<std::size_t>(i)].z() == 10.0);
        }
    }
    SUBCASE("L=8 takes the first 8 centroids of a 3x3 tiling")
    {
        auto lay = place_network(5, {8, 6, 100.0, 10.0, 1.7});
        REQUIRE(lay.aps() == 8);
        REQUIRE(lay.ues() == 6);
        std::size_t i = 0;
        for (int r = 0; r < 3 && i < 8; ++r)
            for (int c = 0; c < 3 && i < 8; ++c, ++i)
            {
                CHECK(lay.ap_positions[i].x() == doctest::Approx((r + 0.5) * 100.0 / 3));
                CHECK(lay.ap_positions[i].y() == doctest::Approx((c + 0.5) * 100.0 / 3));
            }
    }
    SUBCASE("UEs inside the area, deterministic per seed")
    {
        auto a = place_network(9, {2, 50, 100.0, 10.0, 1.7});
        auto b = place_network(9, {2, 50, 100.0, 10.0, 1.7});
        auto c = place_network(10, {2, 50, 100.0, 10.0, 1.7});
        for (std::size_t k = 0; k < 50; ++k)
        {
            CHECK(a.ue_positions[k] == b.ue_positions[k]);
            CHECK(a.ue_positions[k].x() >= 0.0);
            CHECK(a.ue_positions[k].x() <= 100.0);
            CHECK(a.ue_positions[k].z() == 1.7);
        }
        CHECK(a.ue_positions[0] != c.ue_positions[0]);
    }
    CHECK_THROWS_AS(place_network(1, {0, 1, 100.0, 10.0, 1.7}), std::invalid_argument);
    CHECK_THROWS_AS(place_network(1, {1, 1, -1.0, 10.0, 1.7}), std::invalid_argument);
}

TEST_CASE("log-distance pathloss")
{
    CHECK(pathloss_db(1.0) == doctest::Approx(-30.5));
    CHECK(pathloss_db(10.0) == doctest::Approx(-67.2));
    CHECK(pathloss_db(54.23) == doctest::Approx(-30.5 - 36.7 * std::log10(54.23)).epsilon(1e-14));
    CHECK_THROWS_AS(pathloss_db(0.0), std::invalid_argument);

    double prev = 1.0;
    for (int i = 1; i <= 100; ++i)
    {
        Layout lay;
        lay.ap_positions.emplace_back(50.0, 50.0, 10.0);
        const double r = 0.5 * i;
        lay.ue_positions.emplace_back(50.0 + 0.6 * r, 50.0 + 0.8 * r, 1.7);
        const double b = large_scale(lay)(0, 0);
        CHECK(b < prev);
        prev = b;
    }
}

TEST_CASE("equivalent channel entries")
{
    CHECK(equivalent_entry(1.0, {1.0, 0.0}, ChannelMode::AsWritten) == cplx(1.0, 0.0));
    const cplx r = equivalent_entry(0.25, {0.0, 2.0}, ChannelMode::Rayleigh);
    CHECK(r.real() == doctest::Approx(0.0));
    CHECK(r.imag() == doctest::Approx(1.0));
    CHECK(parse_channel_mode("rayleigh") == ChannelMode::Rayleigh);
    CHECK(parse_channel_mode("as-written") == ChannelMode::AsWritten);
    CHECK(to_string(ChannelMode::AsWritten) == "as-written");
    CHECK_THROWS_AS(parse_channel_mode("ricean"), std::invalid_argument);
}

TEST_CASE("channel sampler")
{
    LargeScale beta(2, 3);
    beta << 1e-6, 2e-7, 3e-8, 4e-6, 5e-7, 6e-8;

    SUBCASE("deterministic per seed")
    {
        auto a = sample_channel(beta, 9, 42);
        auto b = sample_channel(beta, 9, 42);
        auto c = sample_channel(beta, 9, 43);
        for (std::size_t i = 0; i < a.h_hat.size(); ++i)
            CHECK(a.h_hat[i] == b.h_hat[i]);
        CHECK(a.at(0, 0) != c.at(0, 0));
    }
    SUBCASE("as-written output is real and nonnegative")
    {
        auto a = sample_channel(beta, 16, 7, ChannelMode::AsWritten);
        for (const auto &v : a.h_hat)
            for (Eigen::Index n = 0; n < v.size(); ++n)
            {
                CHECK(v(n).imag() == 0.0);
                CHECK(v(n).real() >= 0.0);
            }
    }
    SUBCASE("Rayleigh normalisation over 1e5 draws")
    {
        const int draws = 100000;
        const std::size_t atoms = 4;
        std::vector<double> sum(atoms, 0.0), sumsq(atoms, 0.0);
        for (int s = 0; s < draws / 10; ++s)
        {
            auto ch = sample_channel(LargeScale::Constant(1, 10, 0.5), atoms, static_cast<std::uint64_t>(s));
            for (std::size_t k = 0; k < 10; ++k)
                for (std::size_t n = 0; n < atoms; ++n)
                {
                    const double x = std::norm(ch.at(0, k)(static_cast<Eigen::Index>(n))) / 0.5;
                    sum[n] += x;
                    sumsq[n] += x * x;
                }
        }
        for (std::size_t n = 0; n < atoms; ++n)
        {
            const double mean = sum[n] / draws;
            const double var = sumsq[n] / draws - mean * mean;
            CHECK(std::abs(mean - 1.0) < 0.02);
            CHECK(std::abs(mean - 1.0) < 3.0 * std::sqrt(var / draws));
        }
    }
}

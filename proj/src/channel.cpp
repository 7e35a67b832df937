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

#include <cmath>
#include <random>
#include <stdexcept>

namespace simcf
{
    Layout place_network(std::uint64_t seed, const PlacementParams &params)
    {
        if (!(params.area_m > 0.0) || !std::isfinite(params.area_m))
            throw std::invalid_argument("place_network: area must be positive");
        if (params.aps < 1 || params.ues < 1)
            throw std::invalid_argument("place_network: need at least one AP and one UE");

        Layout layout;
        layout.area_m = params.area_m;
        layout.seed = seed;

        auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(params.aps))));
        while (side * side < params.aps)
            ++side;
        const double cell = params.area_m / static_cast<double>(side);
        for (std::size_t i = 0; i < params.aps; ++i)
        {
            const std::size_t row = i / side, col = i % side;
            layout.ap_positions.emplace_back((static_cast<double>(row) + 0.5) * cell,
                                             (static_cast<double>(col) + 0.5) * cell, params.ap_height_m);
        }

        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> uni(0.0, params.area_m);
        for (std::size_t k = 0; k < params.ues; ++k)
        {
            const double x = uni(rng);
            const double y = uni(rng);
            layout.ue_positions.emplace_back(x, y, params.ue_height_m);
        }
        return layout;
    }

    double pathloss_db(double distance_m, const PathlossModel &model)
    {
        if (!(distance_m > 0.0))
            throw std::invalid_argument("pathloss_db: distance must be positive");
        return model.intercept_db - model.slope_db * std::log10(distance_m);
    }

    LargeScale large_scale(const Layout &layout, const PathlossModel &model)
    {
        LargeScale beta(static_cast<Eigen::Index>(layout.aps()), static_cast<Eigen::Index>(layout.ues()));
        for (std::size_t l = 0; l < layout.aps(); ++l)
            for (std::size_t k = 0; k < layout.ues(); ++k)
            {
                const double d = (layout.ap_positions[l] - layout.ue_positions[k]).norm();
                if (!(d > 0.0))
                    throw std::invalid_argument("large_scale: AP and UE positions coincide");
                beta(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) =
                    std::pow(10.0, pathloss_db(d, model) / 10.0);
            }
        return beta;
    }

    ChannelMode parse_channel_mode(const std::string &name)
    {
        if (name == "rayleigh")
            return ChannelMode::Rayleigh;
        if (name == "as-written" || name == "as_written")
            return ChannelMode::AsWritten;
        throw std::invalid_argument("unknown channel mode '" + name + "' (expected rayleigh or as-written)");
    }

    std::string to_string(ChannelMode mode)
    {
        return mode == ChannelMode::Rayleigh ? "rayleigh" : "as-written";
    }

    cplx equivalent_entry(double beta, cplx h, ChannelMode mode)
    {
        switch (mode)
        {
        case ChannelMode::AsWritten:
            return {beta * std::norm(h), 0.0};
        case ChannelMode::Rayleigh:
            return std::sqrt(beta) * h;
        }
        throw std::invalid_argument("equivalent_entry: unknown channel mode");
    }

    ChannelRealization sample_channel(const LargeScale &beta, std::size_t atoms, std::uint64_t seed, ChannelMode mode)
    {
        if (mode != ChannelMode::AsWritten && mode != ChannelMode::Rayleigh)
            throw std::invalid_argument("sample_channel: unknown channel mode");
        if (atoms < 1)
            throw std::invalid_argument("sample_channel: need at least one meta-atom");

        ChannelRealization ch;
        ch.aps = static_cast<std::size_t>(beta.rows());
        ch.ues = static_cast<std::size_t>(beta.cols());
        ch.atoms = atoms;
        ch.mode = mode;
        ch.h_hat.resize(ch.aps * ch.ues);

        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, std::sqrt(0.5)); // unit variance per complex entry
        for (std::size_t l = 0; l < ch.aps; ++l)
            for (std::size_t k = 0; k < ch.ues; ++k)
            {
                const double b = beta(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k));
                CVector v(static_cast<Eigen::Index>(atoms));
                for (std::size_t n = 0; n < atoms; ++n)
                {
                    const double re = gauss(rng);
                    const double im = gauss(rng);
                    v(static_cast<Eigen::Index>(n)) = equivalent_entry(b, {re, im}, mode);
                }
                ch.at(l, k) = std::move(v);
            }
        return ch;
    }

} // namespace simcf

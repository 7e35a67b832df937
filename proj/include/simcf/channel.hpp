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

#include "simcf/emwave.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace simcf
{
    struct Layout
    {
        double area_m = 100.0;
        std::vector<Vec3> ap_positions;
        std::vector<Vec3> ue_positions;
        std::uint64_t seed = 0;

        std::size_t aps() const { return ap_positions.size(); }
        std::size_t ues() const { return ue_positions.size(); }
    };

    struct PlacementParams
    {
        std::size_t aps = 2;
        std::size_t ues = 2;
        double area_m = 100.0;
        double ap_height_m = 10.0;
        double ue_height_m = 1.7;
    };

    // APs at the first L row-major centroids of a ceil(sqrt(L))^2 tiling, UEs uniform over the area.
    Layout place_network(std::uint64_t seed, const PlacementParams &params);

    // Log-distance pathloss: beta_dB = intercept_db - slope_db * log10(d_3D / 1 m).
    struct PathlossModel
    {
        double intercept_db = -30.5;
        double slope_db = 36.7;
    };

    // beta[l][k], linear scale.
    using LargeScale = Eigen::MatrixXd;

    double pathloss_db(double distance_m, const PathlossModel &model = {});

    LargeScale large_scale(const Layout &layout, const PathlossModel &model = {});

    enum class ChannelMode
    {
        AsWritten, // h_hat = beta * |h|^2, elementwise
        Rayleigh,  // h_hat = sqrt(beta) * h
    };

    ChannelMode parse_channel_mode(const std::string &name);
    std::string to_string(ChannelMode mode);

    struct ChannelRealization
    {
        std::size_t aps = 0, ues = 0, atoms = 0;
        ChannelMode mode = ChannelMode::Rayleigh;
        std::vector<CVector> h_hat; // [l * ues + k], length N each

        const CVector &at(std::size_t l, std::size_t k) const { return h_hat[l * ues + k]; }
        CVector &at(std::size_t l, std::size_t k) { return h_hat[l * ues + k]; }
    };

    // Maps one small-scale draw to the equivalent channel entry.
    cplx equivalent_entry(double beta, cplx h, ChannelMode mode);

    // Draws h_{l,k} with i.i.d. CN(0, 1) entries, reproducible from seed.
    ChannelRealization sample_channel(const LargeScale &beta, std::size_t atoms, std::uint64_t seed,
                                      ChannelMode mode = ChannelMode::Rayleigh);

} // namespace simcf

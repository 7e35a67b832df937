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

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <vector>

namespace simcf
{
    using cplx = std::complex<double>;
    using CMatrix = Eigen::MatrixXcd;
    using CVector = Eigen::VectorXcd;
    using Vec3 = Eigen::Vector3d;

    struct GeometryParams
    {
        double wavelength_m = 0.0108;
        double sim_thickness_m = 5.0 * 0.0108; // T_SIM = 5 wavelengths
        std::size_t layer_count = 2;           // M
        std::size_t atoms_per_layer = 9;       // N, must be a perfect square
        std::size_t ap_antenna_count = 2;      // M_AP
        double atom_size_x_m = 0.0;            // <= 0 selects lambda/2
        double atom_size_y_m = 0.0;
    };

    // Propagation runs along +z. The AP antenna array sits in the plane z = 0 and layer m (1-based)
    // in the plane z = m * layer_spacing, so the last layer lies at z = T_SIM.
    struct SimGeometry
    {
        double wavelength_m = 0.0;
        double atom_size_x_m = 0.0;
        double atom_size_y_m = 0.0;
        std::size_t layer_count = 0;
        std::size_t atoms_per_layer = 0;
        std::size_t grid_side = 0;
        double layer_spacing_m = 0.0;
        std::size_t ap_antenna_count = 0;
        std::vector<std::vector<Vec3>> atom_positions; // [layer][atom], layer index 0-based
        std::vector<Vec3> ap_antenna_positions;
        Vec3 layer_normal = Vec3::UnitZ();
    };

    SimGeometry build_geometry(const GeometryParams &params);

    // Rayleigh-Sommerfeld coefficient between two points of adjacent planes:
    //   (dx dy cos(chi) / d) * (1 / (2 pi d) - j / lambda) * exp(j 2 pi d / lambda)
    // with cos(chi) the axial separation over d. Throws std::domain_error when d == 0.
    cplx propagation_coefficient(const Vec3 &src, const Vec3 &dst, const SimGeometry &geom);

    struct PropagationSet
    {
        CMatrix w_first;              // N x M_AP, AP antennas -> layer 1
        std::vector<CMatrix> w_inter; // M-1 matrices N x N; w_inter[i] maps layer i+1 -> layer i+2 (1-based)
    };

    PropagationSet build_transmission_matrices(const SimGeometry &geom);

    // Phases phi[l][m][n] in [0, 2 pi).
    class PhaseConfig
    {
      public:
        PhaseConfig() = default;
        PhaseConfig(std::size_t agents, std::size_t layers, std::size_t atoms, double fill = 0.0);

        std::size_t agents() const { return agents_; }
        std::size_t layers() const { return layers_; }
        std::size_t atoms() const { return atoms_; }

        double get(std::size_t l, std::size_t m, std::size_t n) const { return phases_[index(l, m, n)]; }

        // Wraps the value into [0, 2 pi).
        void set(std::size_t l, std::size_t m, std::size_t n, double phase);

        const std::vector<double> &data() const { return phases_; }

      private:
        std::size_t index(std::size_t l, std::size_t m, std::size_t n) const;

        std::size_t agents_ = 0, layers_ = 0, atoms_ = 0;
        std::vector<double> phases_;
    };

    double wrap_phase(double phase);

    CMatrix phase_matrix(const PhaseConfig &pc, std::size_t agent, std::size_t layer);

    // G_l = Phi_M W_M ... Phi_2 W_2 Phi_1, accumulated right to left.
    CMatrix beamforming_matrix(const PhaseConfig &pc, const PropagationSet &ps, std::size_t agent);

} // namespace simcf

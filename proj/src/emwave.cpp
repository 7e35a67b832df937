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

#include "simcf/emwave.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace simcf
{
    namespace
    {
        std::size_t integer_sqrt(std::size_t n)
        {
            auto s = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
            while (s * s > n)
                --s;
            while ((s + 1) * (s + 1) <= n)
                ++s;
            return s;
        }
    } // namespace

    SimGeometry build_geometry(const GeometryParams &params)
    {
        if (!(params.wavelength_m > 0.0) || !std::isfinite(params.wavelength_m))
            throw std::invalid_argument("build_geometry: wavelength must be positive");
        if (!(params.sim_thickness_m > 0.0) || !std::isfinite(params.sim_thickness_m))
            throw std::invalid_argument("build_geometry: SIM thickness must be positive");
        if (params.layer_count < 1)
            throw std::invalid_argument("build_geometry: need at least one metasurface layer");
        if (params.ap_antenna_count < 1)
            throw std::invalid_argument("build_geometry: need at least one AP antenna");
        if (params.atoms_per_layer < 1)
            throw std::invalid_argument("build_geometry: need at least one meta-atom per layer");
        const std::size_t side = integer_sqrt(params.atoms_per_layer);
        if (side * side != params.atoms_per_layer)
            throw std::invalid_argument("build_geometry: atoms per layer must be a perfect square, got " +
                                        std::to_string(params.atoms_per_layer));
        if (params.atom_size_x_m < 0.0 || params.atom_size_y_m < 0.0)
            throw std::invalid_argument("build_geometry: atom size must be nonnegative (0 selects lambda/2)");

        const double lambda = params.wavelength_m;
        const double pitch = 0.5 * lambda;

        SimGeometry g;
        g.wavelength_m = lambda;
        g.atom_size_x_m = params.atom_size_x_m > 0.0 ? params.atom_size_x_m : pitch;
        g.atom_size_y_m = params.atom_size_y_m > 0.0 ? params.atom_size_y_m : pitch;
        g.layer_count = params.layer_count;
        g.atoms_per_layer = params.atoms_per_layer;
        g.grid_side = side;
        g.layer_spacing_m = params.sim_thickness_m / static_cast<double>(params.layer_count);
        g.ap_antenna_count = params.ap_antenna_count;

        const double centre = 0.5 * static_cast<double>(side - 1);
        g.atom_positions.resize(params.layer_count);
        for (std::size_t m = 0; m < params.layer_count; ++m)
        {
            const double z = static_cast<double>(m + 1) * g.layer_spacing_m;
            auto &layer = g.atom_positions[m];
            layer.reserve(params.atoms_per_layer);
            for (std::size_t r = 0; r < side; ++r)
                for (std::size_t c = 0; c < side; ++c)
                    layer.emplace_back((static_cast<double>(r) - centre) * pitch,
                                       (static_cast<double>(c) - centre) * pitch, z);
        }

        // Uniform linear array along x in the z = 0 plane.
        const double ap_centre = 0.5 * static_cast<double>(params.ap_antenna_count - 1);
        for (std::size_t a = 0; a < params.ap_antenna_count; ++a)
            g.ap_antenna_positions.emplace_back((static_cast<double>(a) - ap_centre) * pitch, 0.0, 0.0);

        return g;
    }

    cplx propagation_coefficient(const Vec3 &src, const Vec3 &dst, const SimGeometry &geom)
    {
        const Vec3 delta = dst - src;
        const double d = delta.norm();
        if (!(d > 0.0))
            throw std::domain_error("propagation_coefficient: coincident source and destination");
        const double lambda = geom.wavelength_m;
        const double cos_chi = std::abs(delta.dot(geom.layer_normal)) / d;
        const double area = geom.atom_size_x_m * geom.atom_size_y_m;
        const cplx factor(1.0 / (2.0 * std::numbers::pi * d), -1.0 / lambda);
        const cplx phase = std::polar(1.0, 2.0 * std::numbers::pi * d / lambda);
        return (area * cos_chi / d) * factor * phase;
    }

    PropagationSet build_transmission_matrices(const SimGeometry &geom)
    {
        const std::size_t n_atoms = geom.atoms_per_layer;
        const std::size_t n_ant = geom.ap_antenna_count;
        if (geom.atom_positions.size() != geom.layer_count || geom.ap_antenna_positions.size() != n_ant)
            throw std::invalid_argument("build_transmission_matrices: inconsistent geometry");

        PropagationSet ps;
        ps.w_first.resize(static_cast<Eigen::Index>(n_atoms), static_cast<Eigen::Index>(n_ant));
        for (std::size_t n = 0; n < n_atoms; ++n)
            for (std::size_t a = 0; a < n_ant; ++a)
                ps.w_first(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(a)) =
                    propagation_coefficient(geom.ap_antenna_positions[a], geom.atom_positions[0][n], geom);

        for (std::size_t m = 1; m < geom.layer_count; ++m)
        {
            CMatrix w(static_cast<Eigen::Index>(n_atoms), static_cast<Eigen::Index>(n_atoms));
            for (std::size_t n = 0; n < n_atoms; ++n)
                for (std::size_t np = 0; np < n_atoms; ++np)
                    w(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(np)) =
                        propagation_coefficient(geom.atom_positions[m - 1][np], geom.atom_positions[m][n], geom);
            ps.w_inter.push_back(std::move(w));
        }
        return ps;
    }

    double wrap_phase(double phase)
    {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        double w = std::fmod(phase, two_pi);
        if (w < 0.0)
            w += two_pi;
        if (w >= two_pi) // fmod of a tiny negative can round up to 2 pi
            w = 0.0;
        return w;
    }

    PhaseConfig::PhaseConfig(std::size_t agents, std::size_t layers, std::size_t atoms, double fill)
        : agents_(agents), layers_(layers), atoms_(atoms), phases_(agents * layers * atoms, wrap_phase(fill))
    {
    }

    std::size_t PhaseConfig::index(std::size_t l, std::size_t m, std::size_t n) const
    {
        if (l >= agents_ || m >= layers_ || n >= atoms_)
            throw std::out_of_range("PhaseConfig: index out of range");
        return (l * layers_ + m) * atoms_ + n;
    }

    void PhaseConfig::set(std::size_t l, std::size_t m, std::size_t n, double phase)
    {
        phases_[index(l, m, n)] = wrap_phase(phase);
    }

    CMatrix phase_matrix(const PhaseConfig &pc, std::size_t agent, std::size_t layer)
    {
        const auto n = static_cast<Eigen::Index>(pc.atoms());
        CMatrix phi = CMatrix::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            phi(i, i) = std::polar(1.0, pc.get(agent, layer, static_cast<std::size_t>(i)));
        return phi;
    }

    CMatrix beamforming_matrix(const PhaseConfig &pc, const PropagationSet &ps, std::size_t agent)
    {
        const auto n = static_cast<Eigen::Index>(pc.atoms());
        if (ps.w_inter.size() + 1 != pc.layers())
            throw std::invalid_argument("beamforming_matrix: layer count does not match propagation set");
        if (ps.w_first.rows() != n)
            throw std::invalid_argument("beamforming_matrix: atom count does not match propagation set");
        for (const auto &w : ps.w_inter)
            if (w.rows() != n || w.cols() != n)
                throw std::invalid_argument("beamforming_matrix: inter-layer matrix has wrong shape");

        // Diagonal phase matrices are applied as row scalings.
        auto phase_column = [&](std::size_t m) {
            CVector v(n);
            for (Eigen::Index i = 0; i < n; ++i)
                v(i) = std::polar(1.0, pc.get(agent, m, static_cast<std::size_t>(i)));
            return v;
        };

        CMatrix g = phase_column(0).asDiagonal();
        for (std::size_t m = 1; m < pc.layers(); ++m)
        {
            CMatrix next = ps.w_inter[m - 1] * g;
            g = phase_column(m).asDiagonal() * next;
        }
        return g;
    }

} // namespace simcf

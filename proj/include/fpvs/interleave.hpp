/*
 * Copyright (C) 2026 The fpvs Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fpvs/froxel_grid.hpp"

namespace fpvs {

// Volume with per-cell feature vectors, stored channels-last:
// value(x, y, z, c) = values[((z * ny + y) * nx + x) * channels + c].
template <typename T>
struct ChannelTensor {
    int nx = 0;
    int ny = 0;
    int nz = 0;
    int channels = 0;
    std::vector<T> values;

    ChannelTensor() = default;
    ChannelTensor(int nx_, int ny_, int nz_, int channels_, T fill = T(0))
        : nx(nx_), ny(ny_), nz(nz_), channels(channels_),
          values(std::size_t(nx_) * ny_ * nz_ * channels_, fill) {}

    std::size_t cells() const { return std::size_t(nx) * ny * nz; }
    std::size_t size() const { return values.size(); }
    std::size_t offset(int x, int y, int z) const {
        return ((std::size_t(z) * ny + y) * nx + x) * std::size_t(channels);
    }
    T& at(int x, int y, int z, int c) { return values[offset(x, y, z) + c]; }
    const T& at(int x, int y, int z, int c) const { return values[offset(x, y, z) + c]; }
    bool same_shape(const ChannelTensor& o) const {
        return nx == o.nx && ny == o.ny && nz == o.nz && channels == o.channels;
    }
    bool operator==(const ChannelTensor&) const = default;
};

// Real-valued grid over froxels, x fastest.
template <typename T>
struct DenseGrid {
    GridDims dims{};
    std::vector<T> values;

    DenseGrid() = default;
    explicit DenseGrid(GridDims d, T fill = T(0)) : dims(d), values(d.volume(), fill) {}

    T& at(std::uint32_t x, std::uint32_t y, std::uint32_t z) {
        return values[x + std::size_t(dims.nx) * (y + std::size_t(dims.ny) * z)];
    }
    const T& at(std::uint32_t x, std::uint32_t y, std::uint32_t z) const {
        return values[x + std::size_t(dims.nx) * (y + std::size_t(dims.ny) * z)];
    }
};

inline void check_interleave_dims(const GridDims& dims, int d) {
    if (d < 1) throw std::invalid_argument("interleave: block size must be positive");
    const auto ud = static_cast<std::uint32_t>(d);
    if (dims.nx % ud != 0 || dims.ny % ud != 0 || dims.nz % ud != 0)
        throw std::invalid_argument("interleave: block size must divide every grid dimension");
}

// Local position inside a d-block to channel, x fastest.
constexpr int block_channel(int lx, int ly, int lz, int d) { return lx + d * (ly + d * lz); }

// Visits (froxel linear index, tensor value index) for every froxel.
template <typename Visit>
void for_each_interleave_pair(const GridDims& dims, int d, Visit&& visit) {
    const int cx = static_cast<int>(dims.nx) / d;
    const int cy = static_cast<int>(dims.ny) / d;
    const std::size_t channels = std::size_t(d) * d * d;
    for (int z = 0; z < static_cast<int>(dims.nz); ++z) {
        const int bz = z / d, lz = z % d;
        for (int y = 0; y < static_cast<int>(dims.ny); ++y) {
            const int by = y / d, ly = y % d;
            const std::size_t row = (std::size_t(z) * dims.ny + y) * dims.nx;
            for (int x = 0; x < static_cast<int>(dims.nx); ++x) {
                const int bx = x / d, lx = x % d;
                const std::size_t cell = (std::size_t(bz) * cy + by) * cx + bx;
                visit(row + x, cell * channels + block_channel(lx, ly, lz, d));
            }
        }
    }
}

// Repacks each d x d x d block of the grid into one cell with d^3 channels.
template <typename T = float>
ChannelTensor<T> interleave(const FroxelGrid& grid, int d) {
    const GridDims& dims = grid.dims();
    check_interleave_dims(dims, d);
    ChannelTensor<T> out(static_cast<int>(dims.nx) / d, static_cast<int>(dims.ny) / d,
                         static_cast<int>(dims.nz) / d, d * d * d);
    for_each_interleave_pair(dims, d, [&](std::size_t froxel, std::size_t value) {
        out.values[value] = grid.get_linear(froxel) ? T(1) : T(0);
    });
    return out;
}

template <typename T>
ChannelTensor<T> interleave(const DenseGrid<T>& grid, int d) {
    check_interleave_dims(grid.dims, d);
    ChannelTensor<T> out(static_cast<int>(grid.dims.nx) / d, static_cast<int>(grid.dims.ny) / d,
                         static_cast<int>(grid.dims.nz) / d, d * d * d);
    for_each_interleave_pair(grid.dims, d,
                             [&](std::size_t froxel, std::size_t value) { out.values[value] = grid.values[froxel]; });
    return out;
}

template <typename T>
GridDims deinterleaved_dims(const ChannelTensor<T>& t, int d) {
    if (d < 1 || t.channels != d * d * d) throw std::invalid_argument("deinterleave: channel count must equal d^3");
    return {static_cast<std::uint32_t>(t.nx * d), static_cast<std::uint32_t>(t.ny * d),
            static_cast<std::uint32_t>(t.nz * d)};
}

template <typename T>
DenseGrid<T> deinterleave(const ChannelTensor<T>& t, int d) {
    DenseGrid<T> out(deinterleaved_dims(t, d));
    for_each_interleave_pair(out.dims, d,
                             [&](std::size_t froxel, std::size_t value) { out.values[froxel] = t.values[value]; });
    return out;
}

// Inverse repacking followed by the indicator [value >= tau].
template <typename T>
FroxelGrid deinterleave(const ChannelTensor<T>& t, int d, T tau, GridRole role = GridRole::predicted_pvs) {
    FroxelGrid out(deinterleaved_dims(t, d), role);
    for_each_interleave_pair(out.dims(), d, [&](std::size_t froxel, std::size_t value) {
        if (t.values[value] >= tau) out.set_linear(froxel);
    });
    return out;
}

}  // namespace fpvs

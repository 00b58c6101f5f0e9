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

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpvs/core.hpp"

namespace fpvs {

struct GridDims {
    std::uint32_t nx = 0;
    std::uint32_t ny = 0;
    std::uint32_t nz = 0;

    constexpr std::size_t volume() const { return std::size_t(nx) * ny * nz; }
    constexpr bool operator==(const GridDims&) const = default;

    static constexpr GridDims cube(std::uint32_t n) { return {n, n, n}; }
};

struct FroxelCoord {
    std::uint32_t x = 0;
    std::uint32_t y = 0;
    std::uint32_t z = 0;
    constexpr bool operator==(const FroxelCoord&) const = default;
};

enum class GridRole : std::uint8_t { geometry = 0, gt_pvs = 1, predicted_pvs = 2 };

inline const char* to_string(GridRole r) {
    switch (r) {
        case GridRole::geometry: return "geometry";
        case GridRole::gt_pvs: return "gt_pvs";
        case GridRole::predicted_pvs: return "predicted_pvs";
    }
    return "unknown";
}

// Maps normalised coordinates to froxel indices; values of exactly 1.0 are
// clamped into the last cell.
inline FroxelCoord quantize(const Ndc& n, const GridDims& dims) {
    auto q = [](double t, std::uint32_t size) {
        const double f = std::floor(std::clamp(t, 0.0, 1.0) * size);
        return std::min(static_cast<std::uint32_t>(f), size - 1);
    };
    return {q(n.u, dims.nx), q(n.v, dims.ny), q(n.w, dims.nz)};
}

// Bit-packed binary occupancy over a frustum-aligned grid. Eight consecutive
// froxels along x share one byte, least significant bit first.
class FroxelGrid {
public:
    FroxelGrid() = default;

    explicit FroxelGrid(GridDims dims, GridRole role = GridRole::geometry, std::uint8_t supersampling = 1)
        : dims_(dims), role_(role), supersampling_(supersampling) {
        if (dims.nx == 0 || dims.ny == 0 || dims.nz == 0)
            throw std::invalid_argument("FroxelGrid: dimensions must be positive");
        if (dims.nx % 8 != 0) throw std::invalid_argument("FroxelGrid: nx must be divisible by 8");
        bits_.assign(row_bytes() * dims.ny * dims.nz, 0);
    }

    const GridDims& dims() const { return dims_; }
    GridRole role() const { return role_; }
    void set_role(GridRole r) { role_ = r; }
    std::uint8_t supersampling() const { return supersampling_; }
    void set_supersampling(std::uint8_t s) { supersampling_ = s; }

    std::size_t row_bytes() const { return dims_.nx / 8; }
    const std::vector<std::uint8_t>& bytes() const { return bits_; }
    std::vector<std::uint8_t>& bytes() { return bits_; }

    bool in_range(const FroxelCoord& c) const { return c.x < dims_.nx && c.y < dims_.ny && c.z < dims_.nz; }

    std::size_t byte_index(const FroxelCoord& c) const {
        return c.x / 8 + row_bytes() * (c.y + std::size_t(dims_.ny) * c.z);
    }

    // Linear froxel index, x fastest.
    std::size_t linear_index(const FroxelCoord& c) const {
        return c.x + std::size_t(dims_.nx) * (c.y + std::size_t(dims_.ny) * c.z);
    }

    FroxelCoord coord_of(std::size_t linear) const {
        FroxelCoord c;
        c.x = static_cast<std::uint32_t>(linear % dims_.nx);
        linear /= dims_.nx;
        c.y = static_cast<std::uint32_t>(linear % dims_.ny);
        c.z = static_cast<std::uint32_t>(linear / dims_.ny);
        return c;
    }

    void set(const FroxelCoord& c) {
        check(c);
        bits_[byte_index(c)] |= static_cast<std::uint8_t>(1u << (c.x % 8));
    }

    void reset(const FroxelCoord& c) {
        check(c);
        bits_[byte_index(c)] &= static_cast<std::uint8_t>(~(1u << (c.x % 8)));
    }

    bool get(const FroxelCoord& c) const {
        check(c);
        return (bits_[byte_index(c)] >> (c.x % 8)) & 1u;
    }

    bool get_linear(std::size_t linear) const { return (bits_[linear / 8] >> (linear % 8)) & 1u; }
    void set_linear(std::size_t linear) { bits_[linear / 8] |= static_cast<std::uint8_t>(1u << (linear % 8)); }

    std::size_t count() const {
        std::size_t n = 0;
        for (auto b : bits_) n += static_cast<std::size_t>(std::popcount(b));
        return n;
    }

    double occupancy() const { return static_cast<double>(count()) / static_cast<double>(dims_.volume()); }

    void clear() { std::fill(bits_.begin(), bits_.end(), std::uint8_t{0}); }

    FroxelGrid& operator|=(const FroxelGrid& o) {
        require_same_dims(o);
        for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= o.bits_[i];
        return *this;
    }

    FroxelGrid& operator&=(const FroxelGrid& o) {
        require_same_dims(o);
        for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] &= o.bits_[i];
        return *this;
    }

    // True when every set froxel of this grid is also set in o.
    bool subset_of(const FroxelGrid& o) const {
        require_same_dims(o);
        for (std::size_t i = 0; i < bits_.size(); ++i)
            if (bits_[i] & ~o.bits_[i]) return false;
        return true;
    }

    // Number of froxels set here but not in o.
    std::size_t count_not_in(const FroxelGrid& o) const {
        require_same_dims(o);
        std::size_t n = 0;
        for (std::size_t i = 0; i < bits_.size(); ++i)
            n += static_cast<std::size_t>(std::popcount(static_cast<std::uint8_t>(bits_[i] & ~o.bits_[i])));
        return n;
    }

    std::size_t count_and(const FroxelGrid& o) const {
        require_same_dims(o);
        std::size_t n = 0;
        for (std::size_t i = 0; i < bits_.size(); ++i)
            n += static_cast<std::size_t>(std::popcount(static_cast<std::uint8_t>(bits_[i] & o.bits_[i])));
        return n;
    }

    bool same_bits(const FroxelGrid& o) const { return dims_ == o.dims_ && bits_ == o.bits_; }
    bool operator==(const FroxelGrid& o) const {
        return same_bits(o) && role_ == o.role_ && supersampling_ == o.supersampling_;
    }

    void require_same_dims(const FroxelGrid& o) const {
        if (!(dims_ == o.dims_)) throw std::invalid_argument("FroxelGrid: dimension mismatch");
    }

private:
    void check(const FroxelCoord& c) const {
        if (!in_range(c)) throw std::out_of_range("FroxelGrid: coordinate out of range");
    }

    GridDims dims_{};
    GridRole role_ = GridRole::geometry;
    std::uint8_t supersampling_ = 1;
    std::vector<std::uint8_t> bits_;
};

inline double jaccard(const FroxelGrid& a, const FroxelGrid& b) {
    const std::size_t inter = a.count_and(b);
    const std::size_t uni = a.count() + b.count() - inter;
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// ---------------------------------------------------------------------------
// FPVS file format
//
//   "FPVS" | u32 version | u32 nx | u32 ny | u32 nz | u8 role | u8 s |
//   2 reserved bytes | packed bytes
//
// All integers little-endian.
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kGridFormatVersion = 1;
inline constexpr std::size_t kGridHeaderSize = 24;

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                       static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b, 4);
}

inline std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("unexpected end of stream");
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

}  // namespace detail

inline void write_grid(std::ostream& out, const FroxelGrid& g) {
    out.write("FPVS", 4);
    detail::put_u32(out, kGridFormatVersion);
    detail::put_u32(out, g.dims().nx);
    detail::put_u32(out, g.dims().ny);
    detail::put_u32(out, g.dims().nz);
    const char tail[4] = {static_cast<char>(g.role()), static_cast<char>(g.supersampling()), 0, 0};
    out.write(tail, 4);
    out.write(reinterpret_cast<const char*>(g.bytes().data()), static_cast<std::streamsize>(g.bytes().size()));
    if (!out) throw std::runtime_error("write_grid: stream failure");
}

inline FroxelGrid read_grid(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "FPVS", 4) != 0) throw std::runtime_error("read_grid: bad magic");
    const std::uint32_t version = detail::get_u32(in);
    if (version != kGridFormatVersion) throw std::runtime_error("read_grid: unsupported version");
    GridDims dims;
    dims.nx = detail::get_u32(in);
    dims.ny = detail::get_u32(in);
    dims.nz = detail::get_u32(in);
    unsigned char tail[4];
    in.read(reinterpret_cast<char*>(tail), 4);
    if (!in) throw std::runtime_error("read_grid: truncated header");
    if (tail[0] > 2) throw std::runtime_error("read_grid: unknown role tag");
    FroxelGrid g(dims, static_cast<GridRole>(tail[0]), tail[1]);
    in.read(reinterpret_cast<char*>(g.bytes().data()), static_cast<std::streamsize>(g.bytes().size()));
    if (!in) throw std::runtime_error("read_grid: truncated payload");
    return g;
}

inline void save_grid(const std::string& path, const FroxelGrid& g) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_grid(out, g);
}

inline FroxelGrid load_grid(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return read_grid(in);
}

}  // namespace fpvs

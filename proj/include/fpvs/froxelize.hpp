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
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fpvs/core.hpp"
#include "fpvs/froxel_grid.hpp"
#include "fpvs/raster.hpp"

namespace fpvs {

enum class ProjectionMode : std::uint8_t { perspective, ortho_reproject };

struct FroxelizeConfig {
    int supersampling = 4;
    ProjectionMode mode = ProjectionMode::perspective;

    void validate() const {
        if (supersampling < 1 || supersampling > 255)
            throw std::invalid_argument("FroxelizeConfig: supersampling must lie in [1, 255]");
    }
};

// Visits every fragment a triangle scene produces inside the frustum,
// calling visit(froxel, triangle_index). Both froxelize and froxel_id_map
// are built on this traversal so their occupied sets agree exactly.
template <typename Visit>
void for_each_froxel_fragment(const TriScene& scene, const Frustum& frustum, const GridDims& dims,
                              const FroxelizeConfig& cfg, Visit&& visit) {
    cfg.validate();
    if (dims.nx % 8 != 0 || dims.nx == 0 || dims.ny == 0 || dims.nz == 0)
        throw std::invalid_argument("froxelize: nx must be a positive multiple of 8");
    const int s = cfg.supersampling;

    if (cfg.mode == ProjectionMode::perspective) {
        const int width = s * static_cast<int>(dims.nx);
        const int height = s * static_cast<int>(dims.ny);
        for (std::size_t t = 0; t < scene.size(); ++t) {
            rasterize_triangle(frustum.view, width, height, scene.corners(t), [&](int i, int j, double depth) {
                const double w = frustum.depth_to_w(depth);
                if (w < 0.0 || w > 1.0) return;
                const Ndc n{(i + 0.5) / width, (j + 0.5) / height, w};
                visit(quantize(n, dims), t);
            });
        }
        return;
    }

    const int resolution = s * static_cast<int>(std::max({dims.nx, dims.ny, dims.nz}));
    const Aabb box = frustum.world_bounds();
    for (int axis = 0; axis < 3; ++axis) {
        const OrthoView view{box, axis, resolution};
        for (std::size_t t = 0; t < scene.size(); ++t) {
            rasterize_triangle_ortho(view, scene.corners(t), [&](const Vec3& p) {
                if (const auto n = project_to_ndc(frustum, p)) visit(quantize(*n, dims), t);
            });
        }
    }
}

inline FroxelGrid froxelize(const TriScene& scene, const Frustum& frustum, const GridDims& dims,
                            const FroxelizeConfig& cfg = {}) {
    FroxelGrid grid(dims, GridRole::geometry, static_cast<std::uint8_t>(cfg.supersampling));
    for_each_froxel_fragment(scene, frustum, dims, cfg, [&](const FroxelCoord& c, std::size_t) { grid.set(c); });
    return grid;
}

// Per-froxel sorted sets of primitive ids.
class FroxelIdMap {
public:
    FroxelIdMap() = default;
    explicit FroxelIdMap(GridDims dims) : dims_(dims), ids_(dims.volume()) {}

    const GridDims& dims() const { return dims_; }

    void insert(std::size_t linear, std::uint32_t id) {
        auto& v = ids_[linear];
        const auto it = std::lower_bound(v.begin(), v.end(), id);
        if (it == v.end() || *it != id) v.insert(it, id);
    }

    const std::vector<std::uint32_t>& at(std::size_t linear) const { return ids_.at(linear); }
    const std::vector<std::uint32_t>& at(const FroxelCoord& c) const {
        return ids_.at(c.x + std::size_t(dims_.nx) * (c.y + std::size_t(dims_.ny) * c.z));
    }

    std::size_t size() const { return ids_.size(); }

    FroxelGrid occupancy() const {
        FroxelGrid g(dims_);
        for (std::size_t i = 0; i < ids_.size(); ++i)
            if (!ids_[i].empty()) g.set_linear(i);
        return g;
    }

    // Every id present anywhere in the map, sorted.
    std::vector<std::uint32_t> all_ids() const {
        std::vector<std::uint32_t> out;
        for (const auto& v : ids_) out.insert(out.end(), v.begin(), v.end());
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

private:
    GridDims dims_{};
    std::vector<std::vector<std::uint32_t>> ids_;
};

inline FroxelIdMap froxel_id_map(const TriScene& scene, const Frustum& frustum, const GridDims& dims,
                                 const FroxelizeConfig& cfg = {}) {
    FroxelIdMap map(dims);
    for_each_froxel_fragment(scene, frustum, dims, cfg, [&](const FroxelCoord& c, std::size_t t) {
        map.insert(c.x + std::size_t(dims.nx) * (c.y + std::size_t(dims.ny) * c.z), scene.primitive_ids[t]);
    });
    return map;
}

}  // namespace fpvs

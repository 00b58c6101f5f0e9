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

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpvs/core.hpp"
#include "fpvs/froxel_grid.hpp"
#include "fpvs/froxelize.hpp"
#include "fpvs/raster.hpp"

namespace fpvs {

inline constexpr std::uint32_t kNoPrimitive = std::numeric_limits<std::uint32_t>::max();

enum class SamplingMode : std::uint8_t { uniform_grid, uniform_random };

struct OracleConfig {
    int viewpoints = 128;
    SamplingMode sampling = SamplingMode::uniform_grid;
    std::uint64_t seed = 1;
    // Depth-buffer resolution; 0 selects 4x the grid cross-section.
    int width = 0;
    int height = 0;

    int resolved_width(const GridDims& dims) const { return width > 0 ? width : 4 * static_cast<int>(dims.nx); }
    int resolved_height(const GridDims& dims) const { return height > 0 ? height : 4 * static_cast<int>(dims.ny); }

    void validate(const GridDims& dims) const {
        if (viewpoints < 1) throw std::invalid_argument("OracleConfig: viewpoints must be >= 1");
        if (resolved_width(dims) < static_cast<int>(dims.nx) || resolved_height(dims) < static_cast<int>(dims.ny))
            throw std::invalid_argument("OracleConfig: depth-buffer resolution below grid resolution");
    }
};

// Cameras spread over the cell: positions on the lateral disc of radius r
// around the centre, yaw offsets in [-beta, +beta]. uniform_grid uses a
// golden-angle spiral with golden-ratio yaw strata; uniform_random draws from
// a seeded generator. A single viewpoint is the unrotated centre camera.
inline std::vector<Camera> sample_viewpoints(const ViewCell& cell, const OracleConfig& cfg) {
    cell.validate();
    if (cfg.viewpoints < 1) throw std::invalid_argument("sample_viewpoints: viewpoints must be >= 1");
    const Camera base = cell.center_camera();
    std::vector<Camera> cams;
    cams.reserve(static_cast<std::size_t>(cfg.viewpoints));
    if (cfg.viewpoints == 1) {
        cams.push_back(base);
        return cams;
    }
    const double beta = deg_to_rad(cell.beta_deg);
    auto place = [&](double rho, double phi, double yaw) {
        Camera c = base.yawed(yaw);
        c.position = base.position + base.right * (rho * std::cos(phi)) + base.up * (rho * std::sin(phi));
        cams.push_back(c);
    };
    if (cfg.sampling == SamplingMode::uniform_grid) {
        const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
        const double inv_phi = std::numbers::phi - 1.0;
        const int m = cfg.viewpoints;
        for (int i = 0; i < m; ++i) {
            const double rho = cell.radius * std::sqrt((i + 0.5) / m);
            const double frac = std::fmod(0.5 + i * inv_phi, 1.0);
            place(rho, i * golden_angle, -beta + 2.0 * beta * frac);
        }
    } else {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int i = 0; i < cfg.viewpoints; ++i) {
            const double rho = cell.radius * std::sqrt(unit(rng));
            const double phi = 2.0 * std::numbers::pi * unit(rng);
            const double yaw = -beta + 2.0 * beta * unit(rng);
            place(std::min(rho, cell.radius), phi, yaw);
        }
    }
    return cams;
}

// ---------------------------------------------------------------------------
// Depth buffer
// ---------------------------------------------------------------------------

struct DepthBuffer {
    int width = 0;
    int height = 0;
    std::vector<double> depth;        // view depth in metres; +inf when empty
    std::vector<std::uint32_t> ids;   // kNoPrimitive when empty

    DepthBuffer() = default;
    DepthBuffer(int w, int h)
        : width(w), height(h), depth(std::size_t(w) * h, std::numeric_limits<double>::infinity()),
          ids(std::size_t(w) * h, kNoPrimitive) {}

    std::size_t index(int i, int j) const { return std::size_t(j) * width + i; }
    bool empty_at(std::size_t k) const { return ids[k] == kNoPrimitive; }
};

// Rasterizes the triangles for which keep(t) holds with a strict less-than
// depth test; ties keep the earlier triangle.
template <typename Keep>
DepthBuffer render_depth_if(const TriScene& scene, const Camera& cam, int width, int height, Keep&& keep) {
    DepthBuffer buf(width, height);
    for (std::size_t t = 0; t < scene.size(); ++t) {
        if (!keep(t)) continue;
        const std::uint32_t id = scene.primitive_ids[t];
        rasterize_triangle(cam, width, height, scene.corners(t), [&](int i, int j, double z) {
            if (z < cam.near || z > cam.far) return;
            const std::size_t k = buf.index(i, j);
            if (z < buf.depth[k]) {
                buf.depth[k] = z;
                buf.ids[k] = id;
            }
        });
    }
    return buf;
}

inline DepthBuffer render_depth(const TriScene& scene, const Camera& cam, int width, int height) {
    cam.validate();
    return render_depth_if(scene, cam, width, height, [](std::size_t) { return true; });
}

// PFM-style single-channel float image, rows bottom to top, little-endian.
// Empty pixels are written as 0.
inline void write_depth_pfm(const std::string& path, const DepthBuffer& buf) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "Pf\n" << buf.width << " " << buf.height << "\n-1.0\n";
    for (std::size_t k = 0; k < buf.depth.size(); ++k) {
        const float v = buf.empty_at(k) ? 0.0f : static_cast<float>(buf.depth[k]);
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
}

// ---------------------------------------------------------------------------
// Ground truth
// ---------------------------------------------------------------------------

// Marks into `grid` every froxel of `frustum` hit by a visible fragment of
// any camera in `cams`.
inline void accumulate_gt_pvs(const TriScene& scene, const Frustum& frustum, std::span<const Camera> cams,
                              int width, int height, FroxelGrid& grid) {
    for (const Camera& cam : cams) {
        const DepthBuffer buf = render_depth(scene, cam, width, height);
        for (int j = 0; j < height; ++j) {
            for (int i = 0; i < width; ++i) {
                const std::size_t k = buf.index(i, j);
                if (buf.empty_at(k)) continue;
                const auto n = reproject(cam, width, height, {i + 0.5, j + 0.5, buf.depth[k]}, frustum);
                if (n) grid.set(quantize(*n, grid.dims()));
            }
        }
    }
}

inline FroxelGrid compute_gt_pvs(const TriScene& scene, const ViewCell& cell, const GridDims& dims,
                                 const OracleConfig& ocfg, const FroxelizeConfig& fcfg = {},
                                 DepthMapping depth = DepthMapping::linear) {
    ocfg.validate(dims);
    const Frustum frustum = build_viewcell_frustum(cell, depth);
    FroxelGrid grid(dims, GridRole::gt_pvs, static_cast<std::uint8_t>(fcfg.supersampling));
    const auto cams = sample_viewpoints(cell, ocfg);
    accumulate_gt_pvs(scene, frustum, cams, ocfg.resolved_width(dims), ocfg.resolved_height(dims), grid);
    return grid;
}

struct TrainingPair {
    FroxelGrid geometry;
    FroxelGrid gt;
    // gt froxels the orthographic pass alone did not reach (before the merge).
    std::size_t merged_froxels = 0;
};

// Geometry grid (orthographic-reprojection froxelization) and ground-truth
// PVS for one cell. Ground-truth fragments are OR-ed into the geometry grid
// so gt is a subset of geometry exactly.
inline TrainingPair compute_training_pair(const TriScene& scene, const ViewCell& cell, const GridDims& dims,
                                          const OracleConfig& ocfg, const FroxelizeConfig& fcfg = {},
                                          DepthMapping depth = DepthMapping::linear) {
    FroxelizeConfig ortho = fcfg;
    ortho.mode = ProjectionMode::ortho_reproject;
    TrainingPair pair;
    pair.gt = compute_gt_pvs(scene, cell, dims, ocfg, fcfg, depth);
    pair.geometry = froxelize(scene, build_viewcell_frustum(cell, depth), dims, ortho);
    pair.merged_froxels = pair.gt.count_not_in(pair.geometry);
    pair.geometry |= pair.gt;
    return pair;
}

// Independent oracle: casts rays_per_froxel_face * nx by rays_per_froxel_face
// * ny rays through pixel centres of every sampled camera and marks the
// nearest hit within [near, far].
inline FroxelGrid ray_cast_pvs(const TriScene& scene, const ViewCell& cell, const GridDims& dims,
                               int rays_per_froxel_face, const OracleConfig& ocfg,
                               DepthMapping depth = DepthMapping::linear) {
    if (rays_per_froxel_face < 1) throw std::invalid_argument("ray_cast_pvs: rays_per_froxel_face must be >= 1");
    const Frustum frustum = build_viewcell_frustum(cell, depth);
    FroxelGrid grid(dims, GridRole::gt_pvs);
    const int width = rays_per_froxel_face * static_cast<int>(dims.nx);
    const int height = rays_per_froxel_face * static_cast<int>(dims.ny);
    std::vector<std::array<Vec3, 3>> tris(scene.size());
    for (std::size_t t = 0; t < scene.size(); ++t) tris[t] = scene.corners(t);

    for (const Camera& cam : sample_viewpoints(cell, ocfg)) {
        const double tn = cam.tan_half_fov();
        for (int j = 0; j < height; ++j) {
            for (int i = 0; i < width; ++i) {
                const double nx = 2.0 * (i + 0.5) / width - 1.0;
                const double ny = 2.0 * (j + 0.5) / height - 1.0;
                // forward component is 1, so the ray parameter is view depth
                const Vec3 dir = cam.forward + cam.right * (nx * tn) + cam.up * (ny * tn);
                double best = std::numeric_limits<double>::infinity();
                for (const auto& tri : tris) {
                    const double t = intersect_ray_triangle(cam.position, dir, tri);
                    if (t >= cam.near && t <= cam.far && t < best) best = t;
                }
                if (!std::isfinite(best)) continue;
                if (const auto n = project_to_ndc(frustum, cam.position + dir * best)) grid.set(quantize(*n, dims));
            }
        }
    }
    return grid;
}

}  // namespace fpvs

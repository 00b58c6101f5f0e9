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
#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpvs/core.hpp"
#include "fpvs/froxel_grid.hpp"
#include "fpvs/froxelize.hpp"
#include "fpvs/oracle.hpp"

namespace fpvs {

// ---------------------------------------------------------------------------
// Froxel-space metrics
// ---------------------------------------------------------------------------

struct MetricsRecord {
    int frame = 0;
    double fnr = 0.0;  // FN / GTP
    double fpr = 0.0;  // FP / GTP
    double per = -1.0;  // negative when not measured
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t gtp = 0;
    double infer_ms = 0.0;
    double oracle_ms = 0.0;
    bool empty_gt = false;  // rates forced to 0
};

inline MetricsRecord froxel_metrics(const FroxelGrid& pred, const FroxelGrid& gt) {
    pred.require_same_dims(gt);
    MetricsRecord m;
    m.tp = pred.count_and(gt);
    m.fp = pred.count_not_in(gt);
    m.fn = gt.count_not_in(pred);
    m.gtp = gt.count();
    if (m.gtp == 0) {
        m.empty_gt = true;
        return m;
    }
    m.fnr = static_cast<double>(m.fn) / static_cast<double>(m.gtp);
    m.fpr = static_cast<double>(m.fp) / static_cast<double>(m.gtp);
    return m;
}

inline constexpr const char* kMetricsCsvHeader = "frame,fnr,fpr,per,tp,fp,fn,gtp,infer_ms,oracle_ms";

inline void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& rows) {
    out << kMetricsCsvHeader << "\n";
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%zu,%zu,%zu,%zu,%.3f,%.3f\n", r.frame, r.fnr, r.fpr, r.per,
                      r.tp, r.fp, r.fn, r.gtp, r.infer_ms, r.oracle_ms);
        out << buf;
    }
}

// ---------------------------------------------------------------------------
// Culling
// ---------------------------------------------------------------------------

// Primitive ids referenced by at least one PVS-marked froxel, sorted.
inline std::vector<std::uint32_t> cull(const FroxelGrid& pvs, const FroxelIdMap& id_map) {
    if (!(pvs.dims() == id_map.dims())) throw std::invalid_argument("cull: dimension mismatch");
    std::vector<std::uint32_t> kept;
    const std::size_t n = pvs.dims().volume();
    for (std::size_t i = 0; i < n; ++i) {
        if (!pvs.get_linear(i)) continue;
        const auto& ids = id_map.at(i);
        kept.insert(kept.end(), ids.begin(), ids.end());
    }
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    return kept;
}

inline bool contains_id(const std::vector<std::uint32_t>& sorted, std::uint32_t id) {
    return std::binary_search(sorted.begin(), sorted.end(), id);
}

struct PixelErrorResult {
    double per = 0.0;
    std::size_t wrong_pixels = 0;
    std::size_t total_pixels = 0;
};

// Renders the full scene and the scene restricted to kept primitives and
// counts pixels whose front-most primitive id differs, background included.
inline PixelErrorResult pixel_error(const TriScene& scene, const Camera& cam, const std::vector<std::uint32_t>& kept,
                                    int width, int height) {
    const DepthBuffer full = render_depth(scene, cam, width, height);
    const DepthBuffer culled = render_depth_if(scene, cam, width, height, [&](std::size_t t) {
        return contains_id(kept, scene.primitive_ids[t]);
    });
    PixelErrorResult r;
    r.total_pixels = std::size_t(width) * height;
    for (std::size_t k = 0; k < r.total_pixels; ++k)
        if (full.ids[k] != culled.ids[k]) ++r.wrong_pixels;
    r.per = static_cast<double>(r.wrong_pixels) / static_cast<double>(r.total_pixels);
    return r;
}

inline double pixel_error_rate(const TriScene& scene, const Camera& cam, const FroxelGrid& pvs,
                               const FroxelIdMap& id_map, int width, int height) {
    return pixel_error(scene, cam, cull(pvs, id_map), width, height).per;
}

// Adds every primitive seen beyond threshold_distance from one id pass at the
// cell centre over the enlarged field of view to the near-field culled set.
inline std::vector<std::uint32_t> far_field_merge(const TriScene& scene, const ViewCell& cell, const FroxelGrid& pvs,
                                                  const FroxelIdMap& id_map, double threshold_distance, int width,
                                                  int height) {
    if (!(threshold_distance > cell.near && threshold_distance < cell.far))
        throw std::invalid_argument("far_field_merge: threshold must lie within (near, far)");
    std::vector<std::uint32_t> kept = cull(pvs, id_map);
    const Camera cam = Camera::look(cell.center, cell.forward, cell.up, cell.enlarged_fov(), cell.near, cell.far);
    const DepthBuffer buf = render_depth(scene, cam, width, height);
    for (std::size_t k = 0; k < buf.ids.size(); ++k)
        if (!buf.empty_at(k) && buf.depth[k] > threshold_distance) kept.push_back(buf.ids[k]);
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    return kept;
}

// ---------------------------------------------------------------------------
// Temporal bounding volumes
// ---------------------------------------------------------------------------

struct TBV {
    std::uint32_t object_id = 0;
    double t0 = 0.0;
    double t1 = 0.0;
    Aabb box;
};

// Box swept by an AABB moving at constant velocity over [t0, t1].
inline TBV tbv_build(std::uint32_t object_id, const Aabb& at_t0, const Vec3& velocity, double t0, double t1) {
    if (!(t1 >= t0)) throw std::invalid_argument("tbv_build: requires t1 >= t0");
    TBV v{object_id, t0, t1, at_t0};
    v.box.extend(at_t0.translated(velocity * (t1 - t0)));
    return v;
}

struct FroxelRange {
    FroxelCoord lo;
    FroxelCoord hi;
};

// Conservative froxel range of a box: the box is clipped against the near
// plane, its remaining vertices projected, and the NDC bounds of the image
// quantized. nullopt when the box misses the frustum.
inline std::optional<FroxelRange> froxel_range(const Aabb& box, const Frustum& f, const GridDims& dims) {
    if (box.empty()) return std::nullopt;
    const auto corners = box.corners();
    std::vector<Vec3> pts;
    auto depth_of = [&](const Vec3& p) { return dot(p - f.view.position, f.view.forward); };
    for (const auto& c : corners)
        if (depth_of(c) >= f.view.near) pts.push_back(c);
    static constexpr std::array<std::array<int, 2>, 12> edges = {
        {{0, 1}, {2, 3}, {4, 5}, {6, 7}, {0, 2}, {1, 3}, {4, 6}, {5, 7}, {0, 4}, {1, 5}, {2, 6}, {3, 7}}};
    for (const auto& e : edges) {
        const double da = depth_of(corners[e[0]]) - f.view.near;
        const double db = depth_of(corners[e[1]]) - f.view.near;
        if ((da < 0.0) != (db < 0.0)) {
            const double t = da / (da - db);
            pts.push_back(corners[e[0]] + (corners[e[1]] - corners[e[0]]) * t);
        }
    }
    if (pts.empty()) return std::nullopt;
    const double tn = f.view.tan_half_fov();
    double u0 = 1e300, u1 = -1e300, v0 = 1e300, v1 = -1e300, w0 = 1e300, w1 = -1e300;
    for (const auto& p : pts) {
        const Vec3 d = p - f.view.position;
        const double z = std::max(dot(d, f.view.forward), f.view.near);
        const double u = 0.5 + 0.5 * dot(d, f.view.right) / (z * tn);
        const double v = 0.5 + 0.5 * dot(d, f.view.up) / (z * tn);
        const double w = f.depth_to_w(z);
        u0 = std::min(u0, u); u1 = std::max(u1, u);
        v0 = std::min(v0, v); v1 = std::max(v1, v);
        w0 = std::min(w0, w); w1 = std::max(w1, w);
    }
    if (u1 < 0.0 || u0 > 1.0 || v1 < 0.0 || v0 > 1.0 || w1 < 0.0 || w0 > 1.0) return std::nullopt;
    FroxelRange r;
    r.lo = quantize({std::max(u0, 0.0), std::max(v0, 0.0), std::max(w0, 0.0)}, dims);
    r.hi = quantize({std::min(u1, 1.0), std::min(v1, 1.0), std::min(w1, 1.0)}, dims);
    return r;
}

// True when any froxel covered by the TBV is marked in the PVS.
inline bool tbv_test(const TBV& tbv, const Frustum& frustum, const FroxelGrid& pvs) {
    const auto range = froxel_range(tbv.box, frustum, pvs.dims());
    if (!range) return false;
    for (std::uint32_t z = range->lo.z; z <= range->hi.z; ++z)
        for (std::uint32_t y = range->lo.y; y <= range->hi.y; ++y)
            for (std::uint32_t x = range->lo.x; x <= range->hi.x; ++x)
                if (pvs.get({x, y, z})) return true;
    return false;
}

// Visibility of each dynamic object over [t0, t1]. keep_all_dynamic adds
// every dynamic object unconditionally, the fallback for dynamic occluders.
inline std::vector<std::uint32_t> visible_dynamic_objects(const TriScene& scene, const Frustum& frustum,
                                                          const FroxelGrid& pvs, double t0, double t1,
                                                          bool keep_all_dynamic) {
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
        const SceneObject& obj = scene.objects[i];
        if (!obj.dynamic) continue;
        const auto id = static_cast<std::uint32_t>(i);
        if (keep_all_dynamic ||
            tbv_test(tbv_build(id, scene.object_bounds(obj), obj.velocity, t0, t1), frustum, pvs))
            out.push_back(id);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Debug images
// ---------------------------------------------------------------------------

// Binary PPM with ids hashed to colours; background is black. Rows are
// written top to bottom.
inline void write_id_ppm(const std::string& path, const DepthBuffer& buf) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "P6\n" << buf.width << " " << buf.height << "\n255\n";
    for (int j = buf.height - 1; j >= 0; --j)
        for (int i = 0; i < buf.width; ++i) {
            const std::uint32_t id = buf.ids[buf.index(i, j)];
            unsigned char rgb[3] = {0, 0, 0};
            if (id != kNoPrimitive) {
                std::uint32_t h = id * 2654435761u + 0x9e3779b9u;
                h ^= h >> 15;
                rgb[0] = static_cast<unsigned char>(64 + (h & 0xbf));
                rgb[1] = static_cast<unsigned char>(64 + ((h >> 8) & 0xbf));
                rgb[2] = static_cast<unsigned char>(64 + ((h >> 16) & 0xbf));
            }
            out.write(reinterpret_cast<const char*>(rgb), 3);
        }
}

}  // namespace fpvs

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
#include <cmath>

#include "fpvs/core.hpp"

namespace fpvs {

namespace detail {

struct ViewVertex {
    double x, y, z;  // camera space, z along forward
};

inline ViewVertex to_view(const Camera& cam, const Vec3& p) {
    const Vec3 d = p - cam.position;
    return {dot(d, cam.right), dot(d, cam.up), dot(d, cam.forward)};
}

// Sutherland-Hodgman against z >= near. A triangle yields at most four
// vertices.
inline int clip_near(const std::array<ViewVertex, 3>& in, double near, std::array<ViewVertex, 4>& out) {
    int n = 0;
    for (int i = 0; i < 3; ++i) {
        const ViewVertex& a = in[i];
        const ViewVertex& b = in[(i + 1) % 3];
        const bool a_in = a.z >= near;
        const bool b_in = b.z >= near;
        if (a_in) out[n++] = a;
        if (a_in != b_in) {
            const double t = (near - a.z) / (b.z - a.z);
            out[n++] = {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), near};
        }
    }
    return n;
}

inline double edge(double ax, double ay, double bx, double by, double px, double py) {
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

}  // namespace detail

// Rasterizes one triangle into a width x height image of cam, sampling pixel
// centres. emit(i, j, depth) receives every covered pixel with the
// perspective-correct view depth. The triangle is clipped against the near
// plane; nothing is clipped at the far plane.
template <typename Emit>
void rasterize_triangle(const Camera& cam, int width, int height, const std::array<Vec3, 3>& tri, Emit&& emit) {
    const std::array<detail::ViewVertex, 3> v = {detail::to_view(cam, tri[0]), detail::to_view(cam, tri[1]),
                                                 detail::to_view(cam, tri[2])};
    if (v[0].z < cam.near && v[1].z < cam.near && v[2].z < cam.near) return;
    std::array<detail::ViewVertex, 4> poly;
    const int n = detail::clip_near(v, cam.near, poly);
    if (n < 3) return;

    const double t = cam.tan_half_fov();
    std::array<double, 4> sx, sy, inv_z;
    for (int k = 0; k < n; ++k) {
        sx[k] = (0.5 + 0.5 * poly[k].x / (poly[k].z * t)) * width;
        sy[k] = (0.5 + 0.5 * poly[k].y / (poly[k].z * t)) * height;
        inv_z[k] = 1.0 / poly[k].z;
    }

    for (int f = 1; f + 1 < n; ++f) {
        const int a = 0, b = f, c = f + 1;
        const double area = detail::edge(sx[a], sy[a], sx[b], sy[b], sx[c], sy[c]);
        if (std::abs(area) < 1e-300 || !std::isfinite(area)) continue;
        const double lo_x = std::min({sx[a], sx[b], sx[c]});
        const double hi_x = std::max({sx[a], sx[b], sx[c]});
        const double lo_y = std::min({sy[a], sy[b], sy[c]});
        const double hi_y = std::max({sy[a], sy[b], sy[c]});
        const int i0 = std::max(0, static_cast<int>(std::ceil(lo_x - 0.5)));
        const int i1 = std::min(width - 1, static_cast<int>(std::floor(hi_x - 0.5)));
        const int j0 = std::max(0, static_cast<int>(std::ceil(lo_y - 0.5)));
        const int j1 = std::min(height - 1, static_cast<int>(std::floor(hi_y - 0.5)));
        if (i0 > i1 || j0 > j1) continue;
        const double inv_area = 1.0 / area;
        for (int j = j0; j <= j1; ++j) {
            const double py = j + 0.5;
            for (int i = i0; i <= i1; ++i) {
                const double px = i + 0.5;
                const double w0 = detail::edge(sx[b], sy[b], sx[c], sy[c], px, py) * inv_area;
                const double w1 = detail::edge(sx[c], sy[c], sx[a], sy[a], px, py) * inv_area;
                const double w2 = detail::edge(sx[a], sy[a], sx[b], sy[b], px, py) * inv_area;
                if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
                const double iz = w0 * inv_z[a] + w1 * inv_z[b] + w2 * inv_z[c];
                emit(i, j, 1.0 / iz);
            }
        }
    }
}

// Orthographic sampling lattice over an axis-aligned box: rays parallel to
// `axis` through the centres of a resolution x resolution grid spanning the
// other two axes.
struct OrthoView {
    Aabb box;
    int axis = 2;
    int resolution = 1;
};

// Emits the world-space intersection of every lattice ray with the triangle.
// Triangles seen edge-on from this axis produce nothing.
template <typename Emit>
void rasterize_triangle_ortho(const OrthoView& view, const std::array<Vec3, 3>& tri, Emit&& emit) {
    const int a = view.axis;
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    const double lo_b = view.box.lo[b], lo_c = view.box.lo[c];
    const double step_b = (view.box.hi[b] - lo_b) / view.resolution;
    const double step_c = (view.box.hi[c] - lo_c) / view.resolution;
    if (!(step_b > 0.0) || !(step_c > 0.0)) return;

    std::array<double, 3> pb, pc, pa;
    for (int k = 0; k < 3; ++k) {
        pb[k] = (tri[k][b] - lo_b) / step_b;
        pc[k] = (tri[k][c] - lo_c) / step_c;
        pa[k] = tri[k][a];
    }
    const double area = detail::edge(pb[0], pc[0], pb[1], pc[1], pb[2], pc[2]);
    if (std::abs(area) < 1e-12) return;
    const int i0 = std::max(0, static_cast<int>(std::ceil(std::min({pb[0], pb[1], pb[2]}) - 0.5)));
    const int i1 = std::min(view.resolution - 1, static_cast<int>(std::floor(std::max({pb[0], pb[1], pb[2]}) - 0.5)));
    const int j0 = std::max(0, static_cast<int>(std::ceil(std::min({pc[0], pc[1], pc[2]}) - 0.5)));
    const int j1 = std::min(view.resolution - 1, static_cast<int>(std::floor(std::max({pc[0], pc[1], pc[2]}) - 0.5)));
    const double inv_area = 1.0 / area;
    for (int j = j0; j <= j1; ++j) {
        const double y = j + 0.5;
        for (int i = i0; i <= i1; ++i) {
            const double x = i + 0.5;
            const double w0 = detail::edge(pb[1], pc[1], pb[2], pc[2], x, y) * inv_area;
            const double w1 = detail::edge(pb[2], pc[2], pb[0], pc[0], x, y) * inv_area;
            const double w2 = detail::edge(pb[0], pc[0], pb[1], pc[1], x, y) * inv_area;
            if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
            Vec3 p;
            p[a] = w0 * pa[0] + w1 * pa[1] + w2 * pa[2];
            p[b] = lo_b + x * step_b;
            p[c] = lo_c + y * step_c;
            emit(p);
        }
    }
}

// Moller-Trumbore; returns the ray parameter of the hit or a negative value.
inline double intersect_ray_triangle(const Vec3& origin, const Vec3& dir, const std::array<Vec3, 3>& tri) {
    const Vec3 e1 = tri[1] - tri[0];
    const Vec3 e2 = tri[2] - tri[0];
    const Vec3 p = cross(dir, e2);
    const double det = dot(e1, p);
    if (std::abs(det) < 1e-14) return -1.0;
    const double inv = 1.0 / det;
    const Vec3 s = origin - tri[0];
    const double u = dot(s, p) * inv;
    if (u < 0.0 || u > 1.0) return -1.0;
    const Vec3 q = cross(s, e1);
    const double v = dot(dir, q) * inv;
    if (v < 0.0 || u + v > 1.0) return -1.0;
    return dot(e2, q) * inv;
}

}  // namespace fpvs

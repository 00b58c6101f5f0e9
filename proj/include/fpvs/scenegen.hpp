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
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "fpvs/core.hpp"

namespace fpvs {

enum class PrimitiveKind : std::uint8_t {
    cube,
    cone,
    pyramid,
    cylinder,
    dodecahedron,
    icosahedron,
    arch,
    door_wall,
    window_cube,
    blob,
    plane,
};

inline constexpr std::array<PrimitiveKind, 10> kObjectKinds = {
    PrimitiveKind::cube,        PrimitiveKind::cone,  PrimitiveKind::pyramid,   PrimitiveKind::cylinder,
    PrimitiveKind::dodecahedron, PrimitiveKind::icosahedron, PrimitiveKind::arch, PrimitiveKind::door_wall,
    PrimitiveKind::window_cube, PrimitiveKind::blob};

inline const char* to_string(PrimitiveKind k) {
    switch (k) {
        case PrimitiveKind::cube: return "cube";
        case PrimitiveKind::cone: return "cone";
        case PrimitiveKind::pyramid: return "pyramid";
        case PrimitiveKind::cylinder: return "cylinder";
        case PrimitiveKind::dodecahedron: return "dodecahedron";
        case PrimitiveKind::icosahedron: return "icosahedron";
        case PrimitiveKind::arch: return "arch";
        case PrimitiveKind::door_wall: return "door-wall";
        case PrimitiveKind::window_cube: return "window-cube";
        case PrimitiveKind::blob: return "blob";
        case PrimitiveKind::plane: return "plane";
    }
    return "unknown";
}

inline PrimitiveKind parse_primitive_kind(const std::string& s) {
    for (auto k : kObjectKinds)
        if (s == to_string(k)) return k;
    if (s == "plane") return PrimitiveKind::plane;
    throw std::invalid_argument("unknown primitive kind: " + s);
}

namespace detail {

struct MeshBuilder {
    TriScene mesh;

    std::uint32_t vertex(const Vec3& p) {
        mesh.vertices.push_back(p);
        return static_cast<std::uint32_t>(mesh.vertices.size() - 1);
    }
    void tri(std::uint32_t a, std::uint32_t b, std::uint32_t c) {
        mesh.primitive_ids.push_back(static_cast<std::uint32_t>(mesh.triangles.size()));
        mesh.triangles.push_back({a, b, c});
    }
    void quad(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
        tri(a, b, c);
        tri(a, c, d);
    }
};

// Boundary faces of a voxel solid with vertices shared on the lattice, scaled
// so the lattice spans [-0.5, 0.5] on every axis.
inline TriScene voxel_mesh(int nx, int ny, int nz, const std::vector<bool>& solid) {
    auto filled = [&](int x, int y, int z) {
        if (x < 0 || y < 0 || z < 0 || x >= nx || y >= ny || z >= nz) return false;
        return bool(solid[(std::size_t(z) * ny + y) * nx + x]);
    };
    MeshBuilder b;
    std::map<std::tuple<int, int, int>, std::uint32_t> lattice;
    auto vert = [&](int x, int y, int z) {
        const auto key = std::make_tuple(x, y, z);
        if (auto it = lattice.find(key); it != lattice.end()) return it->second;
        const std::uint32_t id =
            b.vertex({double(x) / nx - 0.5, double(y) / ny - 0.5, double(z) / nz - 0.5});
        lattice.emplace(key, id);
        return id;
    };
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                if (!filled(x, y, z)) continue;
                if (!filled(x - 1, y, z)) b.quad(vert(x, y, z), vert(x, y, z + 1), vert(x, y + 1, z + 1), vert(x, y + 1, z));
                if (!filled(x + 1, y, z))
                    b.quad(vert(x + 1, y, z), vert(x + 1, y + 1, z), vert(x + 1, y + 1, z + 1), vert(x + 1, y, z + 1));
                if (!filled(x, y - 1, z)) b.quad(vert(x, y, z), vert(x + 1, y, z), vert(x + 1, y, z + 1), vert(x, y, z + 1));
                if (!filled(x, y + 1, z))
                    b.quad(vert(x, y + 1, z), vert(x, y + 1, z + 1), vert(x + 1, y + 1, z + 1), vert(x + 1, y + 1, z));
                if (!filled(x, y, z - 1)) b.quad(vert(x, y, z), vert(x, y + 1, z), vert(x + 1, y + 1, z), vert(x + 1, y, z));
                if (!filled(x, y, z + 1))
                    b.quad(vert(x, y, z + 1), vert(x + 1, y, z + 1), vert(x + 1, y + 1, z + 1), vert(x, y + 1, z + 1));
            }
    return b.mesh;
}

inline TriScene icosahedron_mesh() {
    const double p = std::numbers::phi;
    MeshBuilder b;
    const std::array<Vec3, 12> v = {{{-1, p, 0}, {1, p, 0}, {-1, -p, 0}, {1, -p, 0},
                                     {0, -1, p}, {0, 1, p}, {0, -1, -p}, {0, 1, -p},
                                     {p, 0, -1}, {p, 0, 1}, {-p, 0, -1}, {-p, 0, 1}}};
    for (const auto& x : v) b.vertex(x * (0.5 / p));
    constexpr std::array<std::array<std::uint32_t, 3>, 20> f = {{{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                                                 {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                                                 {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                                                 {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}}};
    for (const auto& t : f) b.tri(t[0], t[1], t[2]);
    return b.mesh;
}

// Dual of the icosahedron: one pentagon per icosahedron vertex, built from
// the centroids of its five incident faces.
inline TriScene dodecahedron_mesh() {
    const TriScene ico = icosahedron_mesh();
    std::vector<Vec3> centroid(ico.triangles.size());
    for (std::size_t t = 0; t < ico.triangles.size(); ++t) {
        const auto c = ico.corners(t);
        centroid[t] = (c[0] + c[1] + c[2]) / 3.0;
    }
    Aabb box;
    for (const auto& c : centroid) box.extend(c);
    const double scale = 1.0 / (box.hi.x - box.lo.x);
    MeshBuilder b;
    for (const auto& c : centroid) b.vertex(c * scale);
    for (std::uint32_t vi = 0; vi < ico.vertices.size(); ++vi) {
        std::vector<std::uint32_t> ring;
        for (std::uint32_t t = 0; t < ico.triangles.size(); ++t)
            if (std::find(ico.triangles[t].begin(), ico.triangles[t].end(), vi) != ico.triangles[t].end())
                ring.push_back(t);
        const Vec3 axis = normalize(ico.vertices[vi]);
        const Vec3 ref = normalize(centroid[ring[0]] - axis * dot(centroid[ring[0]], axis));
        const Vec3 ref2 = cross(axis, ref);
        std::sort(ring.begin(), ring.end(), [&](std::uint32_t a, std::uint32_t c) {
            auto ang = [&](std::uint32_t t) { return std::atan2(dot(centroid[t], ref2), dot(centroid[t], ref)); };
            return ang(a) < ang(c);
        });
        for (std::size_t k = 1; k + 1 < ring.size(); ++k) b.tri(ring[0], ring[k], ring[k + 1]);
    }
    return b.mesh;
}

}  // namespace detail

// Unit-sized mesh centred at the origin; primitive ids are triangle indices.
inline TriScene make_primitive(PrimitiveKind kind, int segments = 16) {
    using detail::MeshBuilder;
    const double pi = std::numbers::pi;
    switch (kind) {
        case PrimitiveKind::cube: {
            std::vector<bool> solid(1, true);
            return detail::voxel_mesh(1, 1, 1, solid);
        }
        case PrimitiveKind::pyramid: {
            MeshBuilder b;
            const auto a = b.vertex({-0.5, -0.5, -0.5}), c = b.vertex({0.5, -0.5, -0.5});
            const auto d = b.vertex({0.5, -0.5, 0.5}), e = b.vertex({-0.5, -0.5, 0.5});
            const auto apex = b.vertex({0, 0.5, 0});
            b.quad(a, c, d, e);
            b.tri(a, apex, c);
            b.tri(c, apex, d);
            b.tri(d, apex, e);
            b.tri(e, apex, a);
            return b.mesh;
        }
        case PrimitiveKind::cone:
        case PrimitiveKind::cylinder: {
            MeshBuilder b;
            const bool cone = kind == PrimitiveKind::cone;
            const auto base_c = b.vertex({0, -0.5, 0});
            const auto top_c = b.vertex({0, 0.5, 0});
            std::vector<std::uint32_t> lo, hi;
            for (int k = 0; k < segments; ++k) {
                const double a = 2.0 * pi * k / segments;
                lo.push_back(b.vertex({0.5 * std::cos(a), -0.5, 0.5 * std::sin(a)}));
                if (!cone) hi.push_back(b.vertex({0.5 * std::cos(a), 0.5, 0.5 * std::sin(a)}));
            }
            for (int k = 0; k < segments; ++k) {
                const int n = (k + 1) % segments;
                b.tri(base_c, lo[n], lo[k]);
                if (cone) {
                    b.tri(lo[k], lo[n], top_c);
                } else {
                    b.quad(lo[k], lo[n], hi[n], hi[k]);
                    b.tri(top_c, hi[k], hi[n]);
                }
            }
            return b.mesh;
        }
        case PrimitiveKind::icosahedron: return detail::icosahedron_mesh();
        case PrimitiveKind::dodecahedron: return detail::dodecahedron_mesh();
        case PrimitiveKind::arch: {
            // Half-annulus on two legs, extruded along z.
            const int n = std::max(2, segments / 2);
            const double ro = 0.5, ri = 0.3, hz = 0.2;
            std::vector<std::array<double, 2>> outer, inner;
            for (int k = 0; k <= n; ++k) {
                const double a = pi * k / n;
                outer.push_back({ro * std::cos(a), ro * std::sin(a)});
                inner.push_back({ri * std::cos(a), ri * std::sin(a)});
            }
            // Profile loop (counter-clockwise) and the quads tiling it.
            std::vector<std::array<double, 2>> loop;
            loop.push_back({ro, -0.5});                                    // 0
            for (int k = 0; k <= n; ++k) loop.push_back(outer[k]);          // 1 .. n+1
            loop.push_back({-ro, -0.5});                                   // n+2
            loop.push_back({-ri, -0.5});                                   // n+3
            for (int k = n; k >= 0; --k) loop.push_back(inner[k]);          // n+4 .. 2n+4
            loop.push_back({ri, -0.5});                                    // 2n+5
            const int m = static_cast<int>(loop.size());
            auto outer_idx = [&](int k) { return 1 + k; };
            auto inner_idx = [&](int k) { return n + 4 + (n - k); };
            std::vector<std::array<int, 4>> tiles;
            for (int k = 0; k < n; ++k) tiles.push_back({outer_idx(k), outer_idx(k + 1), inner_idx(k + 1), inner_idx(k)});
            tiles.push_back({2 * n + 5, 0, outer_idx(0), inner_idx(0)});
            tiles.push_back({n + 2, n + 3, inner_idx(n), outer_idx(n)});
            MeshBuilder b;
            std::vector<std::uint32_t> front, back;
            for (const auto& p : loop) {
                front.push_back(b.vertex({p[0], p[1], hz}));
                back.push_back(b.vertex({p[0], p[1], -hz}));
            }
            for (const auto& t : tiles) {
                b.quad(front[t[0]], front[t[1]], front[t[2]], front[t[3]]);
                b.quad(back[t[3]], back[t[2]], back[t[1]], back[t[0]]);
            }
            for (int k = 0; k < m; ++k) {
                const int j = (k + 1) % m;
                b.quad(front[k], back[k], back[j], front[j]);
            }
            return b.mesh;
        }
        case PrimitiveKind::door_wall: {
            // 5 x 5 x 1 slab with a door-shaped notch 1 wide and 3 high.
            std::vector<bool> solid(25, true);
            for (int y = 0; y < 3; ++y) solid[std::size_t(y) * 5 + 2] = false;
            TriScene m = detail::voxel_mesh(5, 5, 1, solid);
            for (auto& v : m.vertices) v.z *= 0.2;
            return m;
        }
        case PrimitiveKind::window_cube: {
            // 3 x 3 x 3 cube with the centre column along z removed.
            std::vector<bool> solid(27, true);
            for (int z = 0; z < 3; ++z) solid[(std::size_t(z) * 3 + 1) * 3 + 1] = false;
            return detail::voxel_mesh(3, 3, 3, solid);
        }
        case PrimitiveKind::blob: {
            // 5 x 5 x 3 block with four through-holes along z (genus 4).
            std::vector<bool> solid(75, true);
            for (int z = 0; z < 3; ++z)
                for (int y : {1, 3})
                    for (int x : {1, 3}) solid[(std::size_t(z) * 5 + y) * 5 + x] = false;
            return detail::voxel_mesh(5, 5, 3, solid);
        }
        case PrimitiveKind::plane: {
            MeshBuilder b;
            const auto a = b.vertex({-0.5, 0, -0.5}), c = b.vertex({0.5, 0, -0.5});
            const auto d = b.vertex({0.5, 0, 0.5}), e = b.vertex({-0.5, 0, 0.5});
            b.quad(a, e, d, c);
            return b.mesh;
        }
    }
    throw std::invalid_argument("make_primitive: unknown kind");
}

// Euler characteristic V - E + F of a mesh, counting vertices that are
// referenced by triangles.
inline long euler_characteristic(const TriScene& mesh) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    std::vector<bool> used(mesh.vertices.size(), false);
    for (const auto& t : mesh.triangles)
        for (int k = 0; k < 3; ++k) {
            used[t[k]] = true;
            const auto a = t[k], b = t[(k + 1) % 3];
            edges.emplace_back(std::min(a, b), std::max(a, b));
        }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    const long v = static_cast<long>(std::count(used.begin(), used.end(), true));
    return v - static_cast<long>(edges.size()) + static_cast<long>(mesh.triangles.size());
}

// ---------------------------------------------------------------------------
// Scene generation
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Seed of frame `index` derived from a base seed.
inline std::uint64_t frame_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(base ^ splitmix64(index + 1));
}

struct SceneGenConfig {
    std::uint64_t seed = 1;
    int min_objects = 4;
    int max_objects = 14;
    // Relative sampling weight per entry of kObjectKinds.
    std::array<double, kObjectKinds.size()> class_weights{1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
    double scale_min = 0.5;
    double scale_max = 4.0;
    double stretch_probability = 0.2;
    double stretch_min = 5.0;
    double stretch_max = 20.0;
    double floor_probability = 1.0;
    double wall_probability = 0.3;
    double ceiling_probability = 0.2;
    double height_min = 1.0;
    double height_max = 2.0;
    double half_extent = 16.0;     // objects are placed in [-e, e]^2 around the cell
    double keep_out = 1.5;         // clearance between objects and the cell centre
    // Viewcell parameters.
    double radius = 0.3;
    double fov_deg = 60.0;
    double beta_deg = 15.0;
    double near = 0.3;
    double far = 32.0;

    void validate() const {
        if (min_objects < 0 || max_objects < min_objects)
            throw std::invalid_argument("SceneGenConfig: object count range is empty");
        if (!(scale_min > 0.0 && scale_max >= scale_min && stretch_min > 0.0 && stretch_max >= stretch_min))
            throw std::invalid_argument("SceneGenConfig: scales must be positive and ordered");
        if (!(height_max >= height_min && height_min > 0.0))
            throw std::invalid_argument("SceneGenConfig: height range invalid");
        double total = 0.0;
        for (double w : class_weights) {
            if (w < 0.0) throw std::invalid_argument("SceneGenConfig: negative class weight");
            total += w;
        }
        if (!(total > 0.0)) throw std::invalid_argument("SceneGenConfig: all class weights are zero");
    }
};

struct GeneratedScene {
    TriScene scene;
    ViewCell cell;
    int object_count = 0;  // placed objects, excluding base planes
};

namespace detail {

struct Pose {
    Vec3 scale{1, 1, 1};
    Vec3 euler{};  // yaw (y), pitch (x), roll (z), radians
    Vec3 translation{};
};

inline Vec3 apply_pose(const Pose& p, const Vec3& v) {
    Vec3 s{v.x * p.scale.x, v.y * p.scale.y, v.z * p.scale.z};
    s = rotate_about(s, {0, 0, 1}, p.euler.z);
    s = rotate_about(s, {1, 0, 0}, p.euler.y);
    s = rotate_about(s, {0, 1, 0}, p.euler.x);
    return s + p.translation;
}

inline TriScene posed(const TriScene& mesh, const Pose& pose) {
    TriScene out = mesh;
    for (auto& v : out.vertices) v = apply_pose(pose, v);
    return out;
}

}  // namespace detail

inline GeneratedScene generate_scene(const SceneGenConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double a, double b) { return a + (b - a) * unit(rng); };
    auto log_uniform = [&](double a, double b) { return std::exp(uniform(std::log(a), std::log(b))); };
    const double two_pi = 2.0 * std::numbers::pi;

    GeneratedScene out;
    ViewCell& cell = out.cell;
    const double height = uniform(cfg.height_min, cfg.height_max);
    const double yaw = uniform(0.0, two_pi);
    cell.center = {0.0, height, 0.0};
    cell.forward = {std::sin(yaw), 0.0, std::cos(yaw)};
    cell.up = {0, 1, 0};
    cell.radius = cfg.radius;
    cell.fov_deg = cfg.fov_deg;
    cell.beta_deg = cfg.beta_deg;
    cell.near = cfg.near;
    cell.far = cfg.far;

    std::uint32_t next_id = 0;
    auto add = [&](const TriScene& mesh, const std::string& name) {
        out.scene.append(mesh, next_id, name);
        next_id += static_cast<std::uint32_t>(mesh.triangles.size());
    };

    const double plane_extent = 2.0 * (cfg.half_extent + 4.0);
    const TriScene plane = make_primitive(PrimitiveKind::plane);
    if (unit(rng) < cfg.floor_probability) {
        detail::Pose p;
        p.scale = {plane_extent, 1, plane_extent};
        add(detail::posed(plane, p), "floor");
    }
    if (unit(rng) < cfg.ceiling_probability) {
        detail::Pose p;
        p.scale = {plane_extent, 1, plane_extent};
        p.translation = {0, height + uniform(1.0, 4.0), 0};
        add(detail::posed(plane, p), "ceiling");
    }
    if (unit(rng) < cfg.wall_probability) {
        // Facing the cell, far enough to stay in view, wide enough to span it.
        const double dist = uniform(0.4, 0.9) * cfg.far;
        detail::Pose p;
        p.scale = {plane_extent, 1, plane_extent};
        p.euler = {yaw, std::numbers::pi / 2, 0};
        p.translation = cell.center + cell.forward * dist;
        p.translation.y = 0.0;
        add(detail::posed(plane, p), "wall");
    }

    std::vector<double> cumulative;
    double acc = 0.0;
    for (double w : cfg.class_weights) cumulative.push_back(acc += w);

    const int count = cfg.min_objects + static_cast<int>(unit(rng) * (cfg.max_objects - cfg.min_objects + 1));
    const double clearance = cfg.keep_out + cfg.radius;
    for (int i = 0; i < std::min(count, cfg.max_objects); ++i) {
        const double pick = unit(rng) * acc;
        const auto kind_index = static_cast<std::size_t>(
            std::min<std::ptrdiff_t>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin(),
                                     static_cast<std::ptrdiff_t>(kObjectKinds.size() - 1)));
        const PrimitiveKind kind = kObjectKinds[kind_index];
        detail::Pose pose;
        pose.scale = {log_uniform(cfg.scale_min, cfg.scale_max), log_uniform(cfg.scale_min, cfg.scale_max),
                      log_uniform(cfg.scale_min, cfg.scale_max)};
        if (unit(rng) < cfg.stretch_probability) {
            const int keep = static_cast<int>(unit(rng) * 3.0) % 3;
            for (int a = 0; a < 3; ++a)
                if (a != keep) pose.scale[a] *= log_uniform(cfg.stretch_min, cfg.stretch_max);
        }
        pose.euler = {uniform(0.0, two_pi), uniform(0.0, two_pi), uniform(0.0, two_pi)};
        const TriScene mesh = make_primitive(kind);
        auto clear_of_cell = [&](const Aabb& b) {
            return cell.center.x + clearance < b.lo.x || cell.center.x - clearance > b.hi.x ||
                   cell.center.y + clearance < b.lo.y || cell.center.y - clearance > b.hi.y ||
                   cell.center.z + clearance < b.lo.z || cell.center.z - clearance > b.hi.z;
        };
        // Rejection-sample a position whose bounds keep clear of the cell;
        // after 32 misses the object is pushed out along +x until it clears.
        TriScene m;
        bool placed = false;
        for (int attempt = 0; attempt < 32 && !placed; ++attempt) {
            pose.translation = {uniform(-cfg.half_extent, cfg.half_extent), uniform(0.0, 2.5),
                                uniform(-cfg.half_extent, cfg.half_extent)};
            m = detail::posed(mesh, pose);
            placed = clear_of_cell(m.bounds());
        }
        if (!placed) {
            const Aabb b = m.bounds();
            const double shift = cell.center.x + clearance - b.lo.x + 1.0;
            for (auto& v : m.vertices) v.x += shift;
        }
        add(m, std::string(to_string(kind)) + "_" + std::to_string(i));
        ++out.object_count;
    }
    out.scene.drop_degenerate();
    return out;
}

}  // namespace fpvs

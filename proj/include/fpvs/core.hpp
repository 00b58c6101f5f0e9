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
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fpvs {

// ---------------------------------------------------------------------------
// Vec3
// ---------------------------------------------------------------------------

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr double& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
    constexpr bool operator==(const Vec3&) const = default;

    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double length(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalize(const Vec3& v) {
    const double len = length(v);
    if (!(len > 0.0)) throw std::invalid_argument("normalize: zero-length vector");
    return v / len;
}

constexpr Vec3 vmin(const Vec3& a, const Vec3& b) {
    return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
constexpr Vec3 vmax(const Vec3& a, const Vec3& b) {
    return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Rotates v about a unit axis by angle (radians), Rodrigues form.
inline Vec3 rotate_about(const Vec3& v, const Vec3& axis, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return v * c + cross(axis, v) * s + axis * (dot(axis, v) * (1.0 - c));
}

// ---------------------------------------------------------------------------
// Aabb
// ---------------------------------------------------------------------------

struct Aabb {
    Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};

    bool empty() const { return lo.x > hi.x || lo.y > hi.y || lo.z > hi.z; }
    void extend(const Vec3& p) { lo = vmin(lo, p); hi = vmax(hi, p); }
    void extend(const Aabb& b) {
        if (b.empty()) return;
        lo = vmin(lo, b.lo);
        hi = vmax(hi, b.hi);
    }
    bool contains(const Aabb& b, double eps = 0.0) const {
        return b.lo.x >= lo.x - eps && b.lo.y >= lo.y - eps && b.lo.z >= lo.z - eps &&
               b.hi.x <= hi.x + eps && b.hi.y <= hi.y + eps && b.hi.z <= hi.z + eps;
    }
    Aabb translated(const Vec3& t) const { return {lo + t, hi + t}; }
    std::array<Vec3, 8> corners() const {
        std::array<Vec3, 8> c;
        for (int i = 0; i < 8; ++i) {
            c[i] = {(i & 1) ? hi.x : lo.x, (i & 2) ? hi.y : lo.y, (i & 4) ? hi.z : lo.z};
        }
        return c;
    }
};

// ---------------------------------------------------------------------------
// TriScene
// ---------------------------------------------------------------------------

using Triangle = std::array<std::uint32_t, 3>;

inline constexpr double kDegenerateArea = 1e-12;  // m^2

// A named, contiguous run of triangles. velocity is used for temporal
// bounding volumes of dynamic objects; static objects carry zero velocity.
struct SceneObject {
    std::string name;
    std::size_t first_triangle = 0;
    std::size_t triangle_count = 0;
    Vec3 velocity{};
    bool dynamic = false;
};

struct TriScene {
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;
    std::vector<std::uint32_t> primitive_ids;
    std::vector<SceneObject> objects;

    std::size_t size() const { return triangles.size(); }
    bool empty() const { return triangles.empty(); }

    std::array<Vec3, 3> corners(std::size_t t) const {
        const auto& tri = triangles[t];
        return {vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]};
    }

    double area(std::size_t t) const {
        const auto c = corners(t);
        return 0.5 * length(cross(c[1] - c[0], c[2] - c[0]));
    }

    Aabb bounds() const {
        Aabb b;
        for (const auto& t : triangles)
            for (auto i : t) b.extend(vertices[i]);
        return b;
    }

    Aabb object_bounds(const SceneObject& obj) const {
        Aabb b;
        for (std::size_t t = obj.first_triangle; t < obj.first_triangle + obj.triangle_count; ++t)
            for (auto i : triangles[t]) b.extend(vertices[i]);
        return b;
    }

    // Appends another mesh; its primitive ids are offset by id_offset and it
    // becomes one object when a name is given.
    void append(const TriScene& other, std::uint32_t id_offset = 0, const std::string& name = {}) {
        const auto vbase = static_cast<std::uint32_t>(vertices.size());
        const std::size_t tbase = triangles.size();
        vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
        for (std::size_t t = 0; t < other.triangles.size(); ++t) {
            const auto& tri = other.triangles[t];
            triangles.push_back({tri[0] + vbase, tri[1] + vbase, tri[2] + vbase});
            primitive_ids.push_back(other.primitive_ids[t] + id_offset);
        }
        if (!name.empty()) {
            objects.push_back({name, tbase, other.triangles.size(), {}, false});
        } else {
            for (auto obj : other.objects) {
                obj.first_triangle += tbase;
                objects.push_back(std::move(obj));
            }
        }
    }

    void validate() const {
        if (primitive_ids.size() != triangles.size())
            throw std::invalid_argument("TriScene: primitive id count does not match triangle count");
        for (const auto& v : vertices)
            if (!v.finite()) throw std::invalid_argument("TriScene: non-finite vertex");
        for (const auto& t : triangles)
            for (auto i : t)
                if (i >= vertices.size()) throw std::out_of_range("TriScene: vertex index out of range");
        for (const auto& o : objects)
            if (o.first_triangle + o.triangle_count > triangles.size())
                throw std::out_of_range("TriScene: object triangle range out of range");
    }

    // Drops triangles with area <= eps and returns how many were removed.
    // Object ranges are rewritten to stay contiguous.
    std::size_t drop_degenerate(double eps = kDegenerateArea) {
        std::vector<Triangle> tris;
        std::vector<std::uint32_t> ids;
        std::vector<std::size_t> new_index(triangles.size() + 1, 0);
        tris.reserve(triangles.size());
        ids.reserve(triangles.size());
        for (std::size_t t = 0; t < triangles.size(); ++t) {
            new_index[t] = tris.size();
            if (area(t) > eps) {
                tris.push_back(triangles[t]);
                ids.push_back(primitive_ids[t]);
            }
        }
        new_index[triangles.size()] = tris.size();
        const std::size_t dropped = triangles.size() - tris.size();
        for (auto& o : objects) {
            const std::size_t a = new_index[o.first_triangle];
            const std::size_t b = new_index[o.first_triangle + o.triangle_count];
            o.first_triangle = a;
            o.triangle_count = b - a;
        }
        triangles = std::move(tris);
        primitive_ids = std::move(ids);
        return dropped;
    }
};

// ---------------------------------------------------------------------------
// Camera / Frustum
// ---------------------------------------------------------------------------

enum class DepthMapping : std::uint8_t { linear, logarithmic };

// Pinhole camera with a square image: the same half-angle applies to both
// image axes. forward/up/right form an orthonormal basis, right = up x forward.
struct Camera {
    Vec3 position{};
    Vec3 forward{0, 0, 1};
    Vec3 up{0, 1, 0};
    Vec3 right{1, 0, 0};
    double fov_deg = 60.0;
    double near = 0.3;
    double far = 40.0;

    double tan_half_fov() const { return std::tan(deg_to_rad(fov_deg) * 0.5); }

    // Camera at position looking along forward, with up orthogonalised.
    static Camera look(const Vec3& position, const Vec3& forward, const Vec3& up_hint, double fov_deg,
                       double near, double far) {
        Camera c;
        c.position = position;
        c.forward = normalize(forward);
        c.right = normalize(cross(up_hint, c.forward));
        c.up = cross(c.forward, c.right);
        c.fov_deg = fov_deg;
        c.near = near;
        c.far = far;
        return c;
    }

    // Same camera rotated by yaw (radians) about its up axis.
    Camera yawed(double yaw) const {
        Camera c = *this;
        const double cs = std::cos(yaw);
        const double sn = std::sin(yaw);
        c.forward = forward * cs + right * sn;
        c.right = right * cs - forward * sn;
        return c;
    }

    void validate() const {
        if (!position.finite()) throw std::invalid_argument("Camera: non-finite position");
        const double tol = 1e-6;
        if (std::abs(dot(forward, forward) - 1) > tol || std::abs(dot(up, up) - 1) > tol ||
            std::abs(dot(right, right) - 1) > tol || std::abs(dot(forward, up)) > tol ||
            std::abs(dot(forward, right)) > tol || std::abs(dot(up, right)) > tol)
            throw std::invalid_argument("Camera: basis is not orthonormal");
        if (!(near > 0.0 && near < far)) throw std::invalid_argument("Camera: requires 0 < near < far");
        if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw std::invalid_argument("Camera: fov must lie in (0, 180)");
    }

    // World point of pixel (i, j) centre of a W x H image at view depth z
    // (distance along forward).
    Vec3 unproject_pixel(double px, double py, int width, int height, double depth) const {
        const double t = tan_half_fov();
        const double nx = 2.0 * px / width - 1.0;
        const double ny = 2.0 * py / height - 1.0;
        return position + forward * depth + right * (nx * t * depth) + up * (ny * t * depth);
    }
};

// Plane n.p + d >= 0 is the inside half-space.
struct Plane {
    Vec3 normal{};
    double d = 0.0;
    double signed_distance(const Vec3& p) const { return dot(normal, p) + d; }
};

struct Frustum {
    Camera view;
    DepthMapping depth = DepthMapping::linear;
    // near, far, left, right, bottom, top; normals point inward.
    std::array<Plane, 6> planes{};

    static Frustum from_camera(const Camera& cam, DepthMapping depth = DepthMapping::linear) {
        cam.validate();
        Frustum f;
        f.view = cam;
        f.depth = depth;
        const double t = cam.tan_half_fov();
        const Vec3& o = cam.position;
        auto make = [&](const Vec3& n) {
            const Vec3 nn = normalize(n);
            return Plane{nn, -dot(nn, o)};
        };
        f.planes[0] = Plane{cam.forward, -dot(cam.forward, o) - cam.near};
        f.planes[1] = Plane{-cam.forward, dot(cam.forward, o) + cam.far};
        f.planes[2] = make(cam.forward * t + cam.right);
        f.planes[3] = make(cam.forward * t - cam.right);
        f.planes[4] = make(cam.forward * t + cam.up);
        f.planes[5] = make(cam.forward * t - cam.up);
        return f;
    }

    const Vec3& origin() const { return view.position; }

    bool contains_by_planes(const Vec3& p, double eps = 1e-9) const {
        for (const auto& pl : planes)
            if (pl.signed_distance(p) < -eps) return false;
        return true;
    }

    double depth_to_w(double z) const {
        if (depth == DepthMapping::linear) return (z - view.near) / (view.far - view.near);
        return std::log(z / view.near) / std::log(view.far / view.near);
    }

    double w_to_depth(double w) const {
        if (depth == DepthMapping::linear) return view.near + w * (view.far - view.near);
        return view.near * std::exp(w * std::log(view.far / view.near));
    }

    // The eight corners: near face then far face.
    std::array<Vec3, 8> corners() const {
        std::array<Vec3, 8> c;
        const double t = view.tan_half_fov();
        int k = 0;
        for (double z : {view.near, view.far})
            for (double sy : {-1.0, 1.0})
                for (double sx : {-1.0, 1.0})
                    c[k++] = view.position + view.forward * z + view.right * (sx * t * z) + view.up * (sy * t * z);
        return c;
    }

    Aabb world_bounds() const {
        Aabb b;
        for (const auto& c : corners()) b.extend(c);
        return b;
    }
};

// Normalised frustum coordinates: u, v in [0,1] across the image, w in [0,1]
// from near to far.
struct Ndc {
    double u = 0.0;
    double v = 0.0;
    double w = 0.0;
};

// Projects p into the frustum; nullopt when p lies outside (including behind
// the origin). Points within eps of a face are clamped onto it.
inline std::optional<Ndc> project_to_ndc(const Frustum& f, const Vec3& p, double eps = 1e-9) {
    const Vec3 d = p - f.view.position;
    const double z = dot(d, f.view.forward);
    if (!(z > 0.0)) return std::nullopt;
    const double t = f.view.tan_half_fov();
    const double x = dot(d, f.view.right) / (z * t);
    const double y = dot(d, f.view.up) / (z * t);
    Ndc n{0.5 + 0.5 * x, 0.5 + 0.5 * y, f.depth_to_w(z)};
    const double lo = -eps;
    const double hi = 1.0 + eps;
    if (n.u < lo || n.u > hi || n.v < lo || n.v > hi || n.w < lo || n.w > hi) return std::nullopt;
    n.u = std::clamp(n.u, 0.0, 1.0);
    n.v = std::clamp(n.v, 0.0, 1.0);
    n.w = std::clamp(n.w, 0.0, 1.0);
    return n;
}

inline Vec3 unproject_ndc(const Frustum& f, const Ndc& n) {
    const double z = f.w_to_depth(n.w);
    const double t = f.view.tan_half_fov();
    return f.view.position + f.view.forward * z + f.view.right * ((2.0 * n.u - 1.0) * t * z) +
           f.view.up * ((2.0 * n.v - 1.0) * t * z);
}

// A depth-buffer fragment: pixel coordinates (centre convention applied by
// the caller, e.g. i + 0.5) and view depth along the camera forward axis.
struct Fragment {
    double px = 0.0;
    double py = 0.0;
    double depth = 0.0;
};

inline std::optional<Ndc> reproject(const Camera& from, int width, int height, const Fragment& frag,
                                    const Frustum& to) {
    return project_to_ndc(to, from.unproject_pixel(frag.px, frag.py, width, height, frag.depth));
}

// ---------------------------------------------------------------------------
// ViewCell
// ---------------------------------------------------------------------------

// Region of camera positions within radius of center (lateral disc), yawing
// up to beta either side of forward, each with field of view fov.
struct ViewCell {
    Vec3 center{};
    Vec3 forward{0, 0, 1};
    Vec3 up{0, 1, 0};
    double radius = 0.3;
    double fov_deg = 60.0;
    double beta_deg = 15.0;
    double near = 0.3;
    double far = 40.0;

    double enlarged_fov() const { return fov_deg + 2.0 * beta_deg; }
    double backward_displacement() const { return radius / std::tan(deg_to_rad(fov_deg) * 0.5); }
    Vec3 displaced_origin() const { return center - normalize(forward) * backward_displacement(); }

    // The unrotated camera at the cell centre.
    Camera center_camera() const { return Camera::look(center, forward, up, fov_deg, near, far); }

    void validate() const {
        if (!center.finite()) throw std::invalid_argument("ViewCell: non-finite center");
        if (!(radius > 0.0)) throw std::invalid_argument("ViewCell: radius must be positive");
        if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw std::invalid_argument("ViewCell: fov must lie in (0, 180)");
        if (!(beta_deg >= 0.0)) throw std::invalid_argument("ViewCell: beta must be non-negative");
        if (!(enlarged_fov() < 180.0)) throw std::invalid_argument("ViewCell: fov + 2*beta must be below 180");
        if (!(near > 0.0 && near < far)) throw std::invalid_argument("ViewCell: requires 0 < near < far");
    }
};

// Enlarged frustum enclosing every camera of the cell. The far plane is the
// far plane of the centre camera; the near plane is the closest point any
// sample camera's near plane can reach.
inline Frustum build_viewcell_frustum(const ViewCell& cell, DepthMapping depth = DepthMapping::linear) {
    cell.validate();
    const double disp = cell.backward_displacement();
    const double half = deg_to_rad(cell.fov_deg) * 0.5;
    const double half_enlarged = deg_to_rad(cell.enlarged_fov()) * 0.5;
    const double near = disp + cell.near * std::cos(half_enlarged) / std::cos(half);
    Camera view = Camera::look(cell.displaced_origin(), cell.forward, cell.up, cell.enlarged_fov(), near,
                               disp + cell.far);
    return Frustum::from_camera(view, depth);
}

}  // namespace fpvs

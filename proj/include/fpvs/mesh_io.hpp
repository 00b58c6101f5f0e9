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

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpvs/core.hpp"

namespace fpvs {

// Wavefront-style ASCII mesh: "v x y z" and "f i j k ..." records with
// 1-based (or negative, relative) indices; "g name" / "o name" start an
// object. Polygons are fan-triangulated. Primitive ids are triangle indices.
inline TriScene read_obj(std::istream& in) {
    TriScene scene;
    std::string line;
    std::size_t line_no = 0;
    auto close_object = [&]() {
        if (!scene.objects.empty()) {
            auto& o = scene.objects.back();
            o.triangle_count = scene.triangles.size() - o.first_triangle;
        }
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            Vec3 v;
            if (!(ls >> v.x >> v.y >> v.z)) throw std::runtime_error("obj: malformed vertex at line " + std::to_string(line_no));
            scene.vertices.push_back(v);
        } else if (tag == "f") {
            std::vector<std::uint32_t> idx;
            std::string tok;
            while (ls >> tok) {
                const long raw = std::stol(tok.substr(0, tok.find('/')));
                const long n = static_cast<long>(scene.vertices.size());
                const long i = raw > 0 ? raw - 1 : n + raw;
                if (raw == 0 || i < 0 || i >= n)
                    throw std::runtime_error("obj: face index out of range at line " + std::to_string(line_no));
                idx.push_back(static_cast<std::uint32_t>(i));
            }
            if (idx.size() < 3) throw std::runtime_error("obj: face with fewer than 3 vertices at line " + std::to_string(line_no));
            for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
                scene.primitive_ids.push_back(static_cast<std::uint32_t>(scene.triangles.size()));
                scene.triangles.push_back({idx[0], idx[k], idx[k + 1]});
            }
        } else if (tag == "g" || tag == "o") {
            std::string name;
            std::getline(ls >> std::ws, name);
            close_object();
            scene.objects.push_back({name, scene.triangles.size(), 0, {}, false});
        }
    }
    close_object();
    scene.validate();
    return scene;
}

inline void write_obj(std::ostream& out, const TriScene& scene) {
    char buf[128];
    out << "# fpvs scene\n";
    for (const auto& v : scene.vertices) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
        out << buf;
    }
    std::size_t t = 0;
    auto faces_until = [&](std::size_t end) {
        for (; t < end; ++t) {
            const auto& tri = scene.triangles[t];
            out << "f " << tri[0] + 1 << " " << tri[1] + 1 << " " << tri[2] + 1 << "\n";
        }
    };
    for (const auto& o : scene.objects) {
        if (o.first_triangle < t) throw std::invalid_argument("write_obj: objects must be ordered and disjoint");
        faces_until(o.first_triangle);
        out << "g " << o.name << "\n";
        faces_until(o.first_triangle + o.triangle_count);
    }
    faces_until(scene.triangles.size());
}

inline TriScene load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return read_obj(in);
}

inline void save_obj(const std::string& path, const TriScene& scene) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_obj(out, scene);
}

// Sidecar motion table: one "name vx vy vz" record per dynamic object
// (velocity in m/s). Returns the number of objects matched.
inline std::size_t apply_motion_table(std::istream& in, TriScene& scene) {
    std::string line;
    std::size_t matched = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string name;
        if (!(ls >> name) || name[0] == '#') continue;
        Vec3 v;
        if (!(ls >> v.x >> v.y >> v.z)) throw std::runtime_error("motion table: malformed record for " + name);
        bool found = false;
        for (auto& o : scene.objects) {
            if (o.name == name) {
                o.velocity = v;
                o.dynamic = true;
                found = true;
            }
        }
        if (!found) throw std::runtime_error("motion table: unknown object " + name);
        ++matched;
    }
    return matched;
}

// ---------------------------------------------------------------------------
// Viewcell files: key=value lines, vectors as comma-separated triples.
// ---------------------------------------------------------------------------

inline void write_viewcell(std::ostream& out, const ViewCell& c) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "center=%.17g,%.17g,%.17g\nforward=%.17g,%.17g,%.17g\nup=%.17g,%.17g,%.17g\n"
                  "radius=%.17g\nfov=%.17g\nbeta=%.17g\nnear=%.17g\nfar=%.17g\n",
                  c.center.x, c.center.y, c.center.z, c.forward.x, c.forward.y, c.forward.z, c.up.x, c.up.y, c.up.z,
                  c.radius, c.fov_deg, c.beta_deg, c.near, c.far);
    out << buf;
}

inline ViewCell read_viewcell(std::istream& in) {
    ViewCell c;
    std::string line;
    auto vec = [](const std::string& s) {
        Vec3 v;
        char c1 = 0, c2 = 0;
        std::istringstream is(s);
        if (!(is >> v.x >> c1 >> v.y >> c2 >> v.z) || c1 != ',' || c2 != ',')
            throw std::runtime_error("viewcell: malformed vector " + s);
        return v;
    };
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("viewcell: malformed line " + line);
        const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "center") c.center = vec(val);
        else if (key == "forward") c.forward = vec(val);
        else if (key == "up") c.up = vec(val);
        else if (key == "radius") c.radius = std::stod(val);
        else if (key == "fov") c.fov_deg = std::stod(val);
        else if (key == "beta") c.beta_deg = std::stod(val);
        else if (key == "near") c.near = std::stod(val);
        else if (key == "far") c.far = std::stod(val);
        else throw std::runtime_error("viewcell: unknown key " + key);
    }
    c.validate();
    return c;
}

inline void save_viewcell(const std::string& path, const ViewCell& c) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_viewcell(out, c);
}

inline ViewCell load_viewcell(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return read_viewcell(in);
}

}  // namespace fpvs

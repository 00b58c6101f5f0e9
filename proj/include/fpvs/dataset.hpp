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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpvs/froxel_grid.hpp"
#include "fpvs/froxelize.hpp"
#include "fpvs/mesh_io.hpp"
#include "fpvs/oracle.hpp"
#include "fpvs/scenegen.hpp"

namespace fpvs {

struct ManifestEntry {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    std::string geometry_path;  // as written, relative to the manifest directory
    std::string gt_path;
};

struct Manifest {
    std::filesystem::path directory;
    std::vector<ManifestEntry> entries;

    std::filesystem::path geometry(std::size_t i) const { return directory / entries.at(i).geometry_path; }
    std::filesystem::path gt(std::size_t i) const { return directory / entries.at(i).gt_path; }
};

inline constexpr const char* kManifestName = "manifest.txt";

// One "index seed geometry gt" record per line.
inline void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries) {
    for (const auto& e : entries) out << e.index << " " << e.seed << " " << e.geometry_path << " " << e.gt_path << "\n";
}

inline Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path.string());
    Manifest m;
    m.directory = path.parent_path();
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        ManifestEntry e;
        if (!(ls >> e.index >> e.seed >> e.geometry_path >> e.gt_path))
            throw std::runtime_error("manifest: malformed record: " + line);
        m.entries.push_back(std::move(e));
    }
    return m;
}

struct DatasetConfig {
    SceneGenConfig scene;
    GridDims dims = GridDims::cube(32);
    OracleConfig oracle;
    FroxelizeConfig froxelize;
    std::size_t frames = 200;
    bool write_scenes = false;  // also emit frame_NNNN.obj / .cell
};

class DatasetError : public std::runtime_error {
public:
    DatasetError(std::size_t index, const std::string& what)
        : std::runtime_error("frame " + std::to_string(index) + ": " + what), index_(index) {}
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

struct DatasetSummary {
    std::vector<ManifestEntry> entries;
    std::vector<double> visible_fraction;    // gt occupancy per frame
    std::vector<double> geometry_fraction;   // geometry occupancy per frame
};

inline std::string frame_stem(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%05zu", index);
    return buf;
}

// Scene and training pair of one frame, a pure function of (cfg, index).
struct Frame {
    GeneratedScene generated;
    TrainingPair pair;
    std::uint64_t seed = 0;
};

inline Frame make_frame(const DatasetConfig& cfg, std::size_t index) {
    Frame f;
    f.seed = frame_seed(cfg.scene.seed, index);
    SceneGenConfig sc = cfg.scene;
    sc.seed = f.seed;
    f.generated = generate_scene(sc);
    OracleConfig oc = cfg.oracle;
    oc.seed = splitmix64(f.seed);
    f.pair = compute_training_pair(f.generated.scene, f.generated.cell, cfg.dims, oc, cfg.froxelize);
    return f;
}

// Writes geometry/gt FPVS pairs and manifest.txt into out_dir.
inline DatasetSummary generate_dataset(const DatasetConfig& cfg, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw DatasetError(0, "cannot create " + out_dir.string() + ": " + ec.message());
    DatasetSummary summary;
    for (std::size_t i = 0; i < cfg.frames; ++i) {
        const Frame f = make_frame(cfg, i);
        if (!f.pair.gt.subset_of(f.pair.geometry)) throw DatasetError(i, "ground truth is not a subset of geometry");
        ManifestEntry e{i, f.seed, frame_stem(i) + "_geom.fpvs", frame_stem(i) + "_gt.fpvs"};
        try {
            save_grid((out_dir / e.geometry_path).string(), f.pair.geometry);
            save_grid((out_dir / e.gt_path).string(), f.pair.gt);
            if (cfg.write_scenes) {
                save_obj((out_dir / (frame_stem(i) + ".obj")).string(), f.generated.scene);
                save_viewcell((out_dir / (frame_stem(i) + ".cell")).string(), f.generated.cell);
            }
        } catch (const std::exception& ex) {
            throw DatasetError(i, ex.what());
        }
        summary.visible_fraction.push_back(f.pair.gt.occupancy());
        summary.geometry_fraction.push_back(f.pair.geometry.occupancy());
        summary.entries.push_back(std::move(e));
    }
    std::ofstream out(out_dir / kManifestName);
    if (!out) throw DatasetError(cfg.frames, "cannot write manifest");
    write_manifest(out, summary.entries);
    return summary;
}

}  // namespace fpvs

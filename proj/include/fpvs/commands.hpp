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

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpvs/fpvs.hpp"

namespace fpvs {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitIo = 2, kExitValidation = 3 };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Every setting a command may use. Keys accepted by set() are the long flag
// names without the leading dashes; config files use the same keys.
struct RunConfig {
    std::string command;

    GridDims dims = GridDims::cube(32);
    double radius = 0.3;
    double fov = 60.0;
    double beta = 15.0;
    double near = 0.3;
    double far = 32.0;
    int d = 4;
    int supersample = 4;
    int viewpoints = 128;
    SamplingMode sampling = SamplingMode::uniform_grid;
    int resolution = 0;
    std::uint64_t seed = 1;

    int epochs = 100;
    double lr = 1e-3;
    double decay = 1e-10;
    double alpha = 0.1;
    double lambda = 0.99;
    double tau = 0.5;
    int batch = 3;
    int hidden = 32;
    bool mask = true;
    std::size_t holdout = 0;

    double threshold_distance = 30.0;
    int per_resolution = 256;
    bool deterministic = false;
    std::size_t frames = 200;
    bool write_scenes = false;
    int repeat = 5;
    std::size_t first = 0;
    std::size_t count = static_cast<std::size_t>(-1);

    std::string out, manifest, scene, viewcell, motion, checkpoint, input, gt, pred, log, geometry_out;

    void set(const std::string& key, const std::string& value) {
        auto to_bool = [&](const std::string& v) {
            if (v == "1" || v == "true" || v == "on" || v == "yes" || v.empty()) return true;
            if (v == "0" || v == "false" || v == "off" || v == "no") return false;
            throw UsageError("invalid boolean for " + key + ": " + v);
        };
        try {
            if (key == "dims") {
                std::vector<std::uint32_t> parts;
                std::stringstream ss(value);
                std::string tok;
                while (std::getline(ss, tok, ',')) parts.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
                if (parts.size() == 1) dims = GridDims::cube(parts[0]);
                else if (parts.size() == 3) dims = {parts[0], parts[1], parts[2]};
                else throw UsageError("dims expects N or NX,NY,NZ");
            } else if (key == "radius") radius = std::stod(value);
            else if (key == "fov") fov = std::stod(value);
            else if (key == "beta") beta = std::stod(value);
            else if (key == "near") near = std::stod(value);
            else if (key == "far") far = std::stod(value);
            else if (key == "d") d = std::stoi(value);
            else if (key == "supersample") supersample = std::stoi(value);
            else if (key == "viewpoints") viewpoints = std::stoi(value);
            else if (key == "sampling") {
                if (value == "grid") sampling = SamplingMode::uniform_grid;
                else if (value == "random") sampling = SamplingMode::uniform_random;
                else throw UsageError("sampling expects grid or random");
            } else if (key == "resolution") resolution = std::stoi(value);
            else if (key == "seed") seed = std::stoull(value);
            else if (key == "epochs") epochs = std::stoi(value);
            else if (key == "lr") lr = std::stod(value);
            else if (key == "decay") decay = std::stod(value);
            else if (key == "alpha") alpha = std::stod(value);
            else if (key == "lambda") lambda = std::stod(value);
            else if (key == "tau") tau = std::stod(value);
            else if (key == "batch") batch = std::stoi(value);
            else if (key == "hidden") hidden = std::stoi(value);
            else if (key == "mask") mask = to_bool(value);
            else if (key == "holdout") holdout = std::stoul(value);
            else if (key == "threshold-distance") threshold_distance = std::stod(value);
            else if (key == "per-resolution") per_resolution = std::stoi(value);
            else if (key == "deterministic") deterministic = to_bool(value);
            else if (key == "frames") frames = std::stoul(value);
            else if (key == "write-scenes") write_scenes = to_bool(value);
            else if (key == "repeat") repeat = std::stoi(value);
            else if (key == "first") first = std::stoul(value);
            else if (key == "count") count = std::stoul(value);
            else if (key == "out") out = value;
            else if (key == "manifest") manifest = value;
            else if (key == "scene") scene = value;
            else if (key == "viewcell") viewcell = value;
            else if (key == "motion") motion = value;
            else if (key == "checkpoint") checkpoint = value;
            else if (key == "input") input = value;
            else if (key == "gt") gt = value;
            else if (key == "pred") pred = value;
            else if (key == "log") log = value;
            else if (key == "geometry-out") geometry_out = value;
            else throw UsageError("unknown setting: " + key);
        } catch (const std::invalid_argument&) {
            throw UsageError("invalid value for " + key + ": " + value);
        } catch (const std::out_of_range&) {
            throw UsageError("value out of range for " + key + ": " + value);
        }
    }

    // key=value lines; '#' starts a comment.
    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config: " + path);
        std::string line;
        while (std::getline(in, line)) {
            if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            const auto b = line.find_first_not_of(" \t\r");
            if (b == std::string::npos) continue;
            const auto e = line.find_last_not_of(" \t\r");
            line = line.substr(b, e - b + 1);
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw UsageError("config: expected key=value: " + line);
            auto trim = [](std::string s) {
                const auto x = s.find_first_not_of(" \t");
                const auto y = s.find_last_not_of(" \t");
                return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
            };
            set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }

    ViewCell cell_defaults() const {
        ViewCell c;
        c.radius = radius;
        c.fov_deg = fov;
        c.beta_deg = beta;
        c.near = near;
        c.far = far;
        return c;
    }

    OracleConfig oracle() const {
        OracleConfig o;
        o.viewpoints = viewpoints;
        o.sampling = sampling;
        o.seed = seed;
        o.width = resolution;
        o.height = resolution;
        return o;
    }

    FroxelizeConfig froxelize_config(ProjectionMode mode = ProjectionMode::perspective) const {
        FroxelizeConfig f;
        f.supersampling = supersample;
        f.mode = mode;
        return f;
    }

    TrainConfig train_config() const {
        TrainConfig t;
        t.alpha = alpha;
        t.lambda = lambda;
        t.tau = tau;
        t.learning_rate = lr;
        t.decay = decay;
        t.batch_size = batch;
        t.epochs = epochs;
        t.seed = seed;
        return t;
    }

    ModelConfig model_config() const {
        ModelConfig m = ModelConfig::desk_default(d, hidden);
        m.mask_with_input = mask;
        return m;
    }

    void validate() const {
        if (dims.nx == 0 || dims.ny == 0 || dims.nz == 0 || dims.nx % 8 != 0)
            throw ValidationError("dims: nx must be a positive multiple of 8 and all dims positive");
        cell_defaults().validate();
        froxelize_config().validate();
        oracle().validate(dims);
        train_config().validate();
        if (d < 1) throw ValidationError("d must be positive");
        if (per_resolution < 1) throw ValidationError("per-resolution must be positive");
        if (repeat < 1) throw ValidationError("repeat must be positive");
    }
};

namespace detail {

inline std::string require(const std::string& value, const char* flag) {
    if (value.empty()) throw UsageError(std::string("missing required option --") + flag);
    return value;
}

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline ViewCell load_cell(const RunConfig& cfg) { return load_viewcell(require(cfg.viewcell, "viewcell")); }

inline TriScene load_scene(const RunConfig& cfg) {
    TriScene scene = load_obj(require(cfg.scene, "scene"));
    if (!cfg.motion.empty()) {
        std::ifstream in(cfg.motion);
        if (!in) throw std::runtime_error("cannot open motion table: " + cfg.motion);
        apply_motion_table(in, scene);
    }
    if (const std::size_t dropped = scene.drop_degenerate())
        std::cerr << "warning: dropped " << dropped << " degenerate triangles\n";
    return scene;
}

}  // namespace detail

inline int cmd_gen_dataset(const RunConfig& cfg) {
    DatasetConfig dc;
    dc.scene.seed = cfg.seed;
    dc.scene.radius = cfg.radius;
    dc.scene.fov_deg = cfg.fov;
    dc.scene.beta_deg = cfg.beta;
    dc.scene.near = cfg.near;
    dc.scene.far = cfg.far;
    dc.dims = cfg.dims;
    dc.oracle = cfg.oracle();
    dc.froxelize = cfg.froxelize_config();
    dc.frames = cfg.frames;
    dc.write_scenes = cfg.write_scenes;
    const DatasetSummary s = generate_dataset(dc, detail::require(cfg.out, "out"));
    double mean = 0.0;
    for (double v : s.visible_fraction) mean += v;
    std::cout << "frames " << s.entries.size() << " mean visible fraction "
              << (s.entries.empty() ? 0.0 : mean / static_cast<double>(s.entries.size())) << "\n";
    return kExitOk;
}

inline int cmd_gt(const RunConfig& cfg) {
    const TriScene scene = detail::load_scene(cfg);
    const ViewCell cell = detail::load_cell(cfg);
    const TrainingPair pair = compute_training_pair(scene, cell, cfg.dims, cfg.oracle(), cfg.froxelize_config());
    if (!pair.gt.subset_of(pair.geometry)) throw ValidationError("ground truth is not a subset of the geometry grid");
    save_grid(detail::require(cfg.out, "out"), pair.gt);
    if (!cfg.geometry_out.empty()) save_grid(cfg.geometry_out, pair.geometry);
    std::cout << "gt froxels " << pair.gt.count() << " geometry froxels " << pair.geometry.count() << "\n";
    return kExitOk;
}

inline int cmd_train(const RunConfig& cfg) {
    const Manifest m = read_manifest(detail::require(cfg.manifest, "manifest"));
    if (m.entries.size() <= cfg.holdout) throw ValidationError("holdout leaves no training frames");
    const std::vector<TrainSample> samples = load_samples(m, cfg.d, 0, m.entries.size() - cfg.holdout);
    const std::string out = detail::require(cfg.out, "out");
    const TrainResult r = train(samples, cfg.model_config(), cfg.train_config(), [](const EpochMetrics& e) {
        std::cout << "epoch " << e.epoch << " loss " << e.loss << " fnr " << e.fnr << " fpr " << e.fpr << "\n";
        return true;
    });
    save_checkpoint(out, r.model);
    const std::string log_path = cfg.log.empty() ? out + ".log.csv" : cfg.log;
    std::ofstream log(log_path);
    if (!log) throw std::runtime_error("cannot open for writing: " + log_path);
    write_epoch_log(log, r.log);
    return kExitOk;
}

inline int cmd_infer(const RunConfig& cfg) {
    const Model<float> model = load_checkpoint<float>(detail::require(cfg.checkpoint, "checkpoint"));
    const FroxelGrid geometry = load_grid(detail::require(cfg.input, "input"));
    if (geometry.dims().nx % static_cast<std::uint32_t>(model.d()) != 0 ||
        geometry.dims().ny % static_cast<std::uint32_t>(model.d()) != 0 ||
        geometry.dims().nz % static_cast<std::uint32_t>(model.d()) != 0)
        throw ValidationError("grid dimensions are not divisible by the checkpoint's d");
    const FroxelGrid pred = predict_pvs(geometry, model, cfg.tau);
    save_grid(detail::require(cfg.out, "out"), pred);
    std::cout << "predicted froxels " << pred.count() << "\n";
    return kExitOk;
}

// PER of a predicted PVS for the centre camera of the cell, with far-field
// geometry beyond threshold_distance merged in.
inline double evaluate_per(const RunConfig& cfg, const TriScene& scene, const ViewCell& cell, const FroxelGrid& pvs) {
    const Frustum frustum = build_viewcell_frustum(cell);
    const FroxelIdMap ids = froxel_id_map(scene, frustum, pvs.dims(), cfg.froxelize_config());
    std::vector<std::uint32_t> kept;
    if (cfg.threshold_distance > cell.near && cfg.threshold_distance < cell.far)
        kept = far_field_merge(scene, cell, pvs, ids, cfg.threshold_distance, cfg.per_resolution, cfg.per_resolution);
    else
        kept = cull(pvs, ids);
    return pixel_error(scene, cell.center_camera(), kept, cfg.per_resolution, cfg.per_resolution).per;
}

inline int cmd_eval(const RunConfig& cfg) {
    const std::string out = detail::require(cfg.out, "out");
    std::vector<MetricsRecord> rows;
    if (!cfg.manifest.empty()) {
        const Manifest m = read_manifest(cfg.manifest);
        const Model<float> model = load_checkpoint<float>(detail::require(cfg.checkpoint, "checkpoint"));
        const std::size_t end = std::min(m.entries.size(), cfg.first + std::min(cfg.count, m.entries.size()));
        for (std::size_t i = cfg.first; i < end; ++i) {
            const FroxelGrid geometry = load_grid(m.geometry(i).string());
            const FroxelGrid gt = load_grid(m.gt(i).string());
            const auto t0 = std::chrono::steady_clock::now();
            const FroxelGrid pred = predict_pvs(geometry, model, cfg.tau);
            const double infer_ms = detail::elapsed_ms(t0);
            MetricsRecord r = froxel_metrics(pred, gt);
            r.frame = static_cast<int>(m.entries[i].index);
            r.infer_ms = cfg.deterministic ? 0.0 : infer_ms;
            const auto stem = m.directory / frame_stem(m.entries[i].index);
            if (std::filesystem::exists(stem.string() + ".obj") && std::filesystem::exists(stem.string() + ".cell"))
                r.per = evaluate_per(cfg, load_obj(stem.string() + ".obj"), load_viewcell(stem.string() + ".cell"), pred);
            rows.push_back(r);
        }
    } else {
        const FroxelGrid pred = load_grid(detail::require(cfg.pred, "pred"));
        FroxelGrid gt;
        double oracle_ms = 0.0;
        if (!cfg.gt.empty()) {
            gt = load_grid(cfg.gt);
        } else {
            const TriScene scene = detail::load_scene(cfg);
            const ViewCell cell = detail::load_cell(cfg);
            const auto t0 = std::chrono::steady_clock::now();
            gt = compute_gt_pvs(scene, cell, pred.dims(), cfg.oracle(), cfg.froxelize_config());
            oracle_ms = detail::elapsed_ms(t0);
        }
        MetricsRecord r = froxel_metrics(pred, gt);
        r.oracle_ms = cfg.deterministic ? 0.0 : oracle_ms;
        if (!cfg.scene.empty()) r.per = evaluate_per(cfg, detail::load_scene(cfg), detail::load_cell(cfg), pred);
        rows.push_back(r);
    }
    std::ofstream csv(out);
    if (!csv) throw std::runtime_error("cannot open for writing: " + out);
    write_metrics_csv(csv, rows);
    for (const auto& r : rows)
        if (r.empty_gt) std::cerr << "warning: frame " << r.frame << " has an empty ground truth; rates set to 0\n";
    return kExitOk;
}

struct BenchTimings {
    double froxelize_ms = 0.0;
    double interleave_ms = 0.0;
    double forward_ms = 0.0;
    double deinterleave_ms = 0.0;
    double forward_path_ms() const { return interleave_ms + forward_ms + deinterleave_ms; }
};

// Median-free mean over `repeat` runs of each stage of the inference path.
inline BenchTimings bench_pipeline(const TriScene& scene, const ViewCell& cell, const Model<float>& model,
                                   const RunConfig& cfg) {
    const Frustum frustum = build_viewcell_frustum(cell);
    BenchTimings t;
    for (int r = 0; r < cfg.repeat; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        const FroxelGrid geometry = froxelize(scene, frustum, cfg.dims, cfg.froxelize_config());
        t.froxelize_ms += detail::elapsed_ms(t0);
        t0 = std::chrono::steady_clock::now();
        const ChannelTensor<float> in = interleave<float>(geometry, model.d());
        t.interleave_ms += detail::elapsed_ms(t0);
        t0 = std::chrono::steady_clock::now();
        const ChannelTensor<float> out = model.predict(in);
        t.forward_ms += detail::elapsed_ms(t0);
        t0 = std::chrono::steady_clock::now();
        const FroxelGrid pred = deinterleave(out, model.d(), static_cast<float>(cfg.tau));
        t.deinterleave_ms += detail::elapsed_ms(t0);
        if (pred.dims().volume() != geometry.dims().volume()) throw std::logic_error("bench: shape mismatch");
    }
    const double n = cfg.repeat;
    t.froxelize_ms /= n;
    t.interleave_ms /= n;
    t.forward_ms /= n;
    t.deinterleave_ms /= n;
    return t;
}

inline void write_bench_csv(std::ostream& out, const BenchTimings& t) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "stage,ms\nfroxelize,%.6f\ninterleave,%.6f\nforward,%.6f\ndeinterleave,%.6f\nforward_path,%.6f\n",
                  t.froxelize_ms, t.interleave_ms, t.forward_ms, t.deinterleave_ms, t.forward_path_ms());
    out << buf;
}

inline int cmd_bench(const RunConfig& cfg) {
    TriScene scene;
    ViewCell cell;
    if (!cfg.scene.empty()) {
        scene = detail::load_scene(cfg);
        cell = detail::load_cell(cfg);
    } else {
        SceneGenConfig sc;
        sc.seed = cfg.seed;
        sc.radius = cfg.radius;
        sc.fov_deg = cfg.fov;
        sc.beta_deg = cfg.beta;
        sc.near = cfg.near;
        sc.far = cfg.far;
        GeneratedScene g = generate_scene(sc);
        scene = std::move(g.scene);
        cell = g.cell;
    }
    const Model<float> model = cfg.checkpoint.empty() ? Model<float>(cfg.model_config(), InitMode::he, cfg.seed)
                                                      : load_checkpoint<float>(cfg.checkpoint);
    const BenchTimings t = bench_pipeline(scene, cell, model, cfg);
    write_bench_csv(std::cout, t);
    if (!cfg.out.empty()) {
        std::ofstream out(cfg.out);
        if (!out) throw std::runtime_error("cannot open for writing: " + cfg.out);
        write_bench_csv(out, t);
    }
    return kExitOk;
}

inline int run_command(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.command == "gen-dataset") return cmd_gen_dataset(cfg);
    if (cfg.command == "gt") return cmd_gt(cfg);
    if (cfg.command == "train") return cmd_train(cfg);
    if (cfg.command == "infer") return cmd_infer(cfg);
    if (cfg.command == "eval") return cmd_eval(cfg);
    if (cfg.command == "bench") return cmd_bench(cfg);
    throw UsageError("unknown command: " + cfg.command);
}

// Runs a command and maps failures onto exit codes.
inline int run_command_guarded(const RunConfig& cfg, std::ostream& err = std::cerr) {
    try {
        return run_command(cfg);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ValidationError& e) {
        err << "validation failure: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        err << "validation failure: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::out_of_range& e) {
        err << "validation failure: " << e.what() << "\n";
        return kExitValidation;
    } catch (const TrainingError& e) {
        err << "training failure: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "i/o error: " << e.what() << "\n";
        return kExitIo;
    }
}

}  // namespace fpvs

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

// fpvs: dataset generation, ground truth, training, inference, evaluation
// and benchmarking of froxel-based potentially visible sets.
//
// Settings are layered: built-in defaults, then --config FILE (key=value
// lines using the long flag names), then explicit flags.

#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "fpvs/commands.hpp"

namespace {

struct OptionSpec {
    const char* key;
    const char* help;
    bool flag;
};

// All settings are accepted by every subcommand; a command ignores the
// ones it does not use.
constexpr OptionSpec kOptions[] = {
    {"dims", "grid size N or NX,NY,NZ (NX multiple of 8)", false},
    {"radius", "viewcell radius in metres", false},
    {"fov", "camera field of view in degrees", false},
    {"beta", "maximum yaw deviation in degrees", false},
    {"near", "near plane distance", false},
    {"far", "far plane distance", false},
    {"d", "interleave block size", false},
    {"supersample", "froxelization supersampling factor", false},
    {"viewpoints", "oracle viewpoint count", false},
    {"sampling", "oracle sampling: grid or random", false},
    {"resolution", "oracle depth-buffer resolution (0 = 4x grid)", false},
    {"seed", "random seed", false},
    {"epochs", "training epochs", false},
    {"lr", "learning rate", false},
    {"decay", "learning-rate decay", false},
    {"alpha", "Dice false-positive weight", false},
    {"lambda", "Dice/RVL mixing weight", false},
    {"tau", "classification threshold", false},
    {"batch", "mini-batch size", false},
    {"hidden", "hidden channel width", false},
    {"mask", "mask predictions by input occupancy (true/false)", false},
    {"holdout", "trailing manifest frames excluded from training", false},
    {"threshold-distance", "far-field merge distance", false},
    {"per-resolution", "image resolution for pixel error rate", false},
    {"deterministic", "deterministic outputs (timings written as 0)", true},
    {"frames", "number of dataset frames", false},
    {"write-scenes", "also write scene meshes and viewcells", true},
    {"repeat", "benchmark repetitions", false},
    {"first", "first manifest frame to evaluate", false},
    {"count", "number of manifest frames to evaluate", false},
    {"out", "output path", false},
    {"manifest", "dataset manifest", false},
    {"scene", "scene mesh (.obj)", false},
    {"viewcell", "viewcell file", false},
    {"motion", "motion table for dynamic objects", false},
    {"checkpoint", "model checkpoint", false},
    {"input", "input geometry grid", false},
    {"gt", "ground-truth grid", false},
    {"pred", "predicted grid", false},
    {"log", "training log path", false},
    {"geometry-out", "also write the geometry grid here", false},
};

constexpr const char* kCommands[][2] = {
    {"gen-dataset", "generate random scenes and training pairs"},
    {"gt", "compute the ground-truth PVS of one scene"},
    {"train", "train a model on a dataset"},
    {"infer", "predict a PVS from a geometry grid"},
    {"eval", "write per-frame metrics"},
    {"bench", "time the inference path"},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"froxel-based potentially visible sets"};
    app.require_subcommand(1);
    std::string config_path;
    std::map<std::string, std::string> values;
    std::map<std::string, bool> flags;
    std::vector<std::pair<std::string, CLI::Option*>> options;

    for (const auto& [name, help] : kCommands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "key=value settings file");
        for (const auto& spec : kOptions) {
            const std::string long_name = std::string("--") + spec.key;
            CLI::Option* opt = spec.flag ? sub->add_flag(long_name, flags[spec.key], spec.help)
                                         : sub->add_option(long_name, values[spec.key], spec.help);
            options.emplace_back(spec.key, opt);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return fpvs::kExitUsage;
    }

    fpvs::RunConfig cfg;
    cfg.command = app.get_subcommands().front()->get_name();
    try {
        if (!config_path.empty()) cfg.load_file(config_path);
        for (const auto& [key, opt] : options) {
            if (opt->count() == 0) continue;
            if (flags.count(key)) cfg.set(key, flags[key] ? "true" : "false");
            else cfg.set(key, values[key]);
        }
    } catch (const fpvs::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return fpvs::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return fpvs::kExitIo;
    }
    return fpvs::run_command_guarded(cfg);
}

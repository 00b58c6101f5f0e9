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

// End-to-end acceptance runner. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails. Pass criterion names as arguments
// to run a subset.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fpvs/fpvs.hpp"
#include "gradcheck.hpp"
#include "test_util.hpp"

using namespace fpvs;
namespace ft = fpvs::testing;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// --- interleave ------------------------------------------------------------

Outcome interleave_round_trip() {
    std::mt19937_64 rng(2026);
    std::vector<FroxelGrid> grids;
    for (int k = 0; k < 100; ++k) grids.push_back(ft::random_grid(GridDims::cube(32), rng, 0.5));
    std::size_t failures = 0, trips = 0;
    const auto t0 = Clock::now();
    for (int d : {2, 4, 8}) {
        for (const FroxelGrid& g : grids) {
            failures += !deinterleave(interleave<float>(g, d), d, 0.5f).same_bits(g);
            ++trips;
        }
    }
    const double s = seconds_since(t0);
    return {failures == 0 && s < 1.0,
            std::to_string(trips) + " round trips, " + std::to_string(failures) + " mismatches, " + fmt("%.3f s", s)};
}

// --- neural ----------------------------------------------------------------

Outcome gradient_check() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    std::size_t checked = 0, kinks = 0;
    for (const auto& c : ft::standard_gradcheck_cases()) {
        const auto r = ft::check_model_gradients(c);
        worst = std::max(worst, r.max_rel_error);
        checked += r.checked;
        kinks += r.skipped_kinks;
    }
    double worst_loss = 0.0;
    for (double alpha : {0.1, 0.5, 0.9})
        for (double lambda : {0.0, 0.5, 0.99, 1.0})
            worst_loss = std::max(worst_loss, ft::check_loss_gradients(7, 200, alpha, lambda).max_rel_error);
    const double s = seconds_since(t0);
    return {worst < 1e-4 && worst_loss < 1e-4 && checked > 0 && s < 60.0,
            "network max rel err " + fmt("%.2e", worst) + " over " + std::to_string(checked) + " coords (" +
                std::to_string(kinks) + " kinks skipped), loss max rel err " + fmt("%.2e", worst_loss) + ", " +
                fmt("%.1f s", s)};
}

Outcome loss_anchors() {
    const std::vector<double> gt = {1, 0, 1, 0, 0, 1}, zeros(6, 0.0);
    const double perfect = dice_loss<double>(gt, gt, 0.1).value;
    const double empty = dice_loss<double>(zeros, gt, 0.1).value;
    const std::vector<double> p = {1, 1, 0}, g = {1, 0, 1};
    const double third = dice_loss<double>(p, g, 0.5).value;
    std::vector<double> g1000(1000, 0.0), ones(1000, 1.0);
    for (int i = 0; i < 10; ++i) g1000[i * 100 + 3] = 1.0;
    const double rvl = rvl_loss<double>(ones, g1000).value;
    std::ostringstream d;
    d.precision(17);
    d << "dice(gt,gt)=" << perfect << " dice(0,gt)=" << empty << " dice(1/3 case)=" << third << " rvl=" << rvl;
    return {perfect == 0.0 && empty == 1.0 && third == 1.0 / 3.0 && rvl == 99.0, d.str()};
}

// --- oracle ----------------------------------------------------------------

OracleConfig oracle_m(int m) {
    OracleConfig oc;
    oc.viewpoints = m;
    return oc;
}

Outcome oracle_soundness() {
    const auto t0 = Clock::now();
    std::size_t violations = 0, empty = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SceneGenConfig sc;
        sc.seed = seed;
        const GeneratedScene g = generate_scene(sc);
        OracleConfig oc = oracle_m(128);
        oc.seed = splitmix64(seed);
        const TrainingPair pair = compute_training_pair(g.scene, g.cell, GridDims::cube(32), oc);
        violations += !pair.gt.subset_of(pair.geometry);
        empty += pair.gt.count() == 0;
    }
    return {violations == 0 && empty == 0, "20 scenes, " + std::to_string(violations) + " subset violations, " +
                                               std::to_string(empty) + " empty, " + fmt("%.1f s", seconds_since(t0))};
}

Outcome oracle_cross_validation() {
    const auto t0 = Clock::now();
    const ViewCell cell = ft::default_cell();
    double worst = 1.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const TriScene scene = ft::single_occluder_scene(seed);
        const OracleConfig oc = oracle_m(128);
        const FroxelGrid raster = compute_gt_pvs(scene, cell, GridDims::cube(32), oc);
        const FroxelGrid rays = ray_cast_pvs(scene, cell, GridDims::cube(32), 4, oc);
        worst = std::min(worst, jaccard(raster, rays));
    }
    const double s = seconds_since(t0);
    return {worst >= 0.95 && s < 300.0, "min Jaccard " + fmt("%.4f", worst) + " over 10 scenes, " + fmt("%.1f s", s)};
}

Outcome occlusion_correctness() {
    const ViewCell cell = ft::default_cell();
    const Frustum f = build_viewcell_frustum(cell);
    const double e = 200, z_wall = 8.0;
    const TriScene scene = ft::merge({ft::make_quad({-e, -e, z_wall}, {e, -e, z_wall}, {e, e, z_wall}, {-e, e, z_wall}),
                                      ft::make_box({-3, -3, 14}, {3, 3, 18}),
                                      ft::make_quad({-e, -e, 28}, {e, -e, 28}, {e, e, 28}, {-e, e, 28})});
    const GridDims dims = GridDims::cube(32);
    const FroxelGrid gt = compute_gt_pvs(scene, cell, dims, oracle_m(128));
    const auto layer = quantize(*project_to_ndc(f, {0, 0, z_wall}), dims).z;
    std::size_t behind = 0, in_layer = 0;
    for (std::size_t i = 0; i < dims.volume(); ++i) {
        if (!gt.get_linear(i)) continue;
        const FroxelCoord c = gt.coord_of(i);
        behind += c.z > layer;
        in_layer += c.z == layer;
    }
    return {behind == 0 && in_layer > 0, std::to_string(behind) + " froxels behind the occluder layer, " +
                                             std::to_string(in_layer) + " on it"};
}

Outcome oracle_monotonicity() {
    std::size_t violations = 0, checks = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SceneGenConfig sc;
        sc.seed = 100 + seed;
        const GeneratedScene g = generate_scene(sc);
        const Frustum f = build_viewcell_frustum(g.cell);
        const GridDims dims = GridDims::cube(32);
        OracleConfig oc = oracle_m(128);
        const auto cams = sample_viewpoints(g.cell, oc);
        const int w = oc.resolved_width(dims), h = oc.resolved_height(dims);
        FroxelGrid acc(dims, GridRole::gt_pvs), prev = acc;
        std::size_t used = 0;
        for (std::size_t n : {1, 2, 4, 8, 16, 32, 64, 128}) {
            accumulate_gt_pvs(g.scene, f, std::span(cams).subspan(used, n - used), w, h, acc);
            used = n;
            // The accumulated grid equals a fresh run over the same prefix.
            FroxelGrid fresh(dims, GridRole::gt_pvs);
            accumulate_gt_pvs(g.scene, f, std::span(cams).first(n), w, h, fresh);
            violations += !prev.subset_of(fresh) || !fresh.same_bits(acc);
            prev = fresh;
            ++checks;
        }
    }
    return {violations == 0, std::to_string(checks) + " nested prefixes on 10 scenes, " + std::to_string(violations) +
                                 " violations"};
}

// --- training --------------------------------------------------------------

Outcome training_smoke() {
    const auto t0 = Clock::now();
    DatasetConfig dc;
    dc.frames = 200;
    dc.oracle.viewpoints = 128;
    std::vector<TrainSample> train_set, held_out;
    for (std::size_t i = 0; i < dc.frames; ++i) {
        const Frame f = make_frame(dc, i);
        (i < 180 ? train_set : held_out).push_back(make_sample(f.pair.geometry, f.pair.gt, 4));
    }
    const double gen_s = seconds_since(t0);
    TrainConfig tc;
    tc.epochs = 100;
    tc.learning_rate = 1e-3;
    tc.batch_size = 3;
    tc.alpha = 0.1;
    tc.lambda = 0.99;
    const TrainResult r = train(train_set, ModelConfig::desk_default(4, 32), tc);
    const EvalSummary ev = evaluate(r.model, held_out, tc.tau);
    const double s = seconds_since(t0);
    return {ev.mean_fnr <= 0.05 && ev.mean_fpr <= 0.6 && s < 1800.0,
            "held-out FNR " + fmt("%.4f", ev.mean_fnr) + " FPR " + fmt("%.4f", ev.mean_fpr) + " on " +
                std::to_string(ev.frames) + " frames; final train loss " + fmt("%.4f", r.log.back().loss) +
                "; data " + fmt("%.0f s", gen_s) + ", total " + fmt("%.0f s", s)};
}

Outcome memorization() {
    const auto t0 = Clock::now();
    DatasetConfig dc;
    dc.oracle.viewpoints = 128;
    const Frame f = make_frame(dc, 0);
    const std::vector<TrainSample> one = {make_sample(f.pair.geometry, f.pair.gt, 4)};
    TrainConfig tc;
    tc.learning_rate = 1e-3;
    tc.batch_size = 1;
    Trainer trainer(Model<float>(ModelConfig::desk_default(4, 32), InitMode::he, tc.seed), tc);
    const TrainSample* batch[] = {&one[0]};
    EvalSummary ev;
    long reached = -1;
    for (long step = 1; step <= 500; ++step) {
        trainer.step(batch, step - 1);
        if (step % 10 == 0 || step == 500) {
            ev = evaluate(trainer.model(), one, tc.tau);
            if (ev.mean_fnr <= 0.01 && ev.mean_fpr <= 0.01) {
                reached = step;
                break;
            }
        }
    }
    const double s = seconds_since(t0);
    return {reached > 0 && s < 300.0, "FNR " + fmt("%.4f", ev.mean_fnr) + " FPR " + fmt("%.4f", ev.mean_fpr) +
                                          (reached > 0 ? " at step " + std::to_string(reached) : " after 500 steps") +
                                          ", " + fmt("%.1f s", s)};
}

// --- runtime ---------------------------------------------------------------

Outcome pixel_error_exact() {
    const int w = 40, h = 30;
    const Camera cam = Camera::look({0, 0, 0}, {0, 0, 1}, {0, 1, 0}, 90, 0.3, 40);
    const double e = 100, z = 6.0;
    auto x = [&](int i) { return (2.0 * i / w - 1.0) * z; };
    auto y = [&](int j) { return (2.0 * j / h - 1.0) * z; };
    std::size_t bad = 0, cases = 0;
    for (const auto& [i0, i1, j0, j1] : std::vector<std::array<int, 4>>{{0, 1, 0, 1}, {5, 9, 3, 7}, {12, 40, 0, 30}}) {
        const TriScene scene =
            ft::merge({ft::make_quad({-e, -e, 20}, {e, -e, 20}, {e, e, 20}, {-e, e, 20}),
                       ft::make_quad({x(i0), y(j0), z}, {x(i1), y(j0), z}, {x(i1), y(j1), z}, {x(i0), y(j1), z})});
        const std::size_t k = std::size_t(i1 - i0) * (j1 - j0);
        bad += pixel_error(scene, cam, {0, 1}, w, h).per != double(k) / double(w * h);
        ++cases;
    }
    return {bad == 0, std::to_string(cases) + " cases, " + std::to_string(bad) + " mismatches"};
}

Outcome tbv_behaviour() {
    const ViewCell cell = ft::default_cell();
    const Frustum f = build_viewcell_frustum(cell);
    const double e = 100;
    auto scene_with_crate = [&](double z) {
        TriScene s = ft::merge({ft::make_quad({-e, -1.5, -e}, {e, -1.5, -e}, {e, -1.5, e}, {-e, -1.5, e}, "floor"),
                                ft::make_quad({-e, -1.5, 10}, {e, -1.5, 10}, {e, e, 10}, {-e, e, 10}, "wall"),
                                ft::make_box({-3, -1.5, z}, {-2, -0.5, z + 1}, "crate")});
        s.objects[2].dynamic = true;
        s.objects[2].velocity = {2, 0, 0};
        return s;
    };
    TriScene statics = scene_with_crate(0);
    statics.triangles.resize(4);
    statics.primitive_ids.resize(4);
    statics.objects.resize(2);
    const FroxelGrid pvs = compute_gt_pvs(statics, cell, GridDims::cube(32), oracle_m(128));
    const bool pruned = visible_dynamic_objects(scene_with_crate(14), f, pvs, 0.0, 2.5, false).empty();
    const bool kept = !visible_dynamic_objects(scene_with_crate(5), f, pvs, 0.0, 2.5, false).empty();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-5, 5);
    std::size_t escapes = 0;
    for (int trial = 0; trial < 10; ++trial) {
        Aabb box;
        box.extend(Vec3{u(rng), u(rng), u(rng)});
        box.extend(Vec3{u(rng), u(rng), u(rng)});
        const Vec3 v{u(rng), u(rng), u(rng)};
        const TBV tbv = tbv_build(0, box, v, 1.0, 3.0);
        for (int k = 0; k < 100; ++k) escapes += !tbv.box.contains(box.translated(v * (2.0 * k / 99.0)), 1e-9);
    }
    return {pruned && kept && escapes == 0, std::string("occluded crate ") + (pruned ? "pruned" : "kept") +
                                                ", visible crate " + (kept ? "kept" : "pruned") + ", " +
                                                std::to_string(escapes) + " containment failures over 1000 samples"};
}

// --- CLI -------------------------------------------------------------------

Outcome determinism() {
    ft::TempDir dir("acceptance_det");
    const std::string common = " --dims 32 --viewpoints 16 --d 4 --hidden 8 --epochs 2 --deterministic";
    const std::vector<std::string> files = {"ds/manifest.txt", "ds/frame_00000_geom.fpvs", "ds/frame_00003_gt.fpvs",
                                            "gt.fpvs",         "model.fpvw",               "model.fpvw.log.csv",
                                            "pred.fpvs",       "metrics.csv",              "single.csv"};
    std::vector<std::map<std::string, std::string>> runs;
    for (const char* run : {"a", "b"}) {
        const std::string r = dir / run;
        std::filesystem::create_directories(r);
        auto p = [&](const std::string& f) { return r + "/" + f; };
        const std::vector<std::string> steps = {
            "gen-dataset --frames 4 --write-scenes --out " + p("ds"),
            "gt --scene " + p("ds/frame_00000.obj") + " --viewcell " + p("ds/frame_00000.cell") + " --out " + p("gt.fpvs"),
            "train --manifest " + p("ds/manifest.txt") + " --holdout 1 --out " + p("model.fpvw"),
            "infer --checkpoint " + p("model.fpvw") + " --input " + p("ds/frame_00003_geom.fpvs") + " --out " + p("pred.fpvs"),
            "eval --manifest " + p("ds/manifest.txt") + " --checkpoint " + p("model.fpvw") + " --first 3 --out " +
                p("metrics.csv"),
            "eval --pred " + p("pred.fpvs") + " --scene " + p("ds/frame_00003.obj") + " --viewcell " +
                p("ds/frame_00003.cell") + " --out " + p("single.csv")};
        for (const auto& s : steps) {
            const int code = ft::run_cli(s + common);
            if (code != 0) return {false, "'" + s.substr(0, s.find(' ')) + "' exited with " + std::to_string(code)};
        }
        std::map<std::string, std::string> contents;
        for (const auto& f : files) contents[f] = ft::read_file(p(f));
        runs.push_back(std::move(contents));
    }
    std::vector<std::string> differing;
    for (const auto& f : files)
        if (runs[0][f] != runs[1][f] || runs[0][f].empty()) differing.push_back(f);
    std::string detail = std::to_string(files.size()) + " artifacts compared";
    for (const auto& f : differing) detail += ", differs/empty: " + f;
    return {differing.empty(), detail};
}

Outcome bench_latency() {
    ft::TempDir dir("acceptance_bench");
    const int code = ft::run_cli("bench --dims 32 --d 4 --repeat 5 --out " + (dir / "bench.csv"));
    if (code != 0) return {false, "bench exited with " + std::to_string(code)};
    std::istringstream csv(ft::read_file(dir / "bench.csv"));
    std::string line;
    std::getline(csv, line);
    std::map<std::string, double> ms;
    while (std::getline(csv, line)) {
        const auto comma = line.find(',');
        ms[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
    }
    bool positive = ms.size() == 5;
    std::string detail;
    for (const auto& [k, v] : ms) {
        positive = positive && v > 0.0;
        detail += k + "=" + fmt("%.3f", v) + "ms ";
    }
    return {positive && ms["forward_path"] < 500.0, detail + "(32^3, d=4, hidden 32)"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"interleave_round_trip", interleave_round_trip},
        {"gradient_check", gradient_check},
        {"loss_anchors", loss_anchors},
        {"oracle_soundness", oracle_soundness},
        {"oracle_cross_validation", oracle_cross_validation},
        {"occlusion_correctness", occlusion_correctness},
        {"oracle_monotonicity", oracle_monotonicity},
        {"training_smoke", training_smoke},
        {"memorization", memorization},
        {"pixel_error_exact", pixel_error_exact},
        {"tbv_behaviour", tbv_behaviour},
        {"cli_determinism", determinism},
        {"bench_latency", bench_latency},
    };
    std::set<std::string> only(argv + 1, argv + argc);
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        if (!only.empty() && !only.count(name)) continue;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %s (%s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}

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

#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "fpvs/dataset.hpp"
#include "fpvs/mesh_io.hpp"
#include "fpvs/scenegen.hpp"
#include "test_util.hpp"

using namespace fpvs;
namespace ft = fpvs::testing;

namespace {

// Number of triangles sharing each undirected edge.
std::map<std::pair<std::uint32_t, std::uint32_t>, int> edge_use(const TriScene& m) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> use;
    for (const auto& t : m.triangles)
        for (int k = 0; k < 3; ++k) {
            auto a = t[k], b = t[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            ++use[{a, b}];
        }
    return use;
}

}  // namespace

TEST(PrimitiveTest, NamesRoundTrip) {
    for (PrimitiveKind k : kObjectKinds) EXPECT_EQ(parse_primitive_kind(to_string(k)), k);
    EXPECT_THROW(parse_primitive_kind("teapot"), std::invalid_argument);
    EXPECT_STREQ(to_string(PrimitiveKind::door_wall), "door-wall");
    EXPECT_STREQ(to_string(PrimitiveKind::window_cube), "window-cube");
}

// Genus g closed surfaces have V - E + F = 2 - 2g.
TEST(PrimitiveTest, TopologyOfEachPrimitive) {
    const std::map<PrimitiveKind, long> expected = {
        {PrimitiveKind::cube, 2},         {PrimitiveKind::cone, 2},        {PrimitiveKind::pyramid, 2},
        {PrimitiveKind::cylinder, 2},     {PrimitiveKind::dodecahedron, 2}, {PrimitiveKind::icosahedron, 2},
        {PrimitiveKind::arch, 2},         {PrimitiveKind::door_wall, 2},   {PrimitiveKind::window_cube, 0},
        {PrimitiveKind::blob, -6},
    };
    for (const auto& [kind, chi] : expected) {
        const TriScene m = make_primitive(kind);
        EXPECT_NO_THROW(m.validate());
        EXPECT_EQ(euler_characteristic(m), chi) << to_string(kind);
        for (const auto& [edge, n] : edge_use(m)) ASSERT_EQ(n, 2) << to_string(kind) << " has a non-manifold edge";
        for (std::size_t t = 0; t < m.size(); ++t) EXPECT_GT(m.area(t), kDegenerateArea) << to_string(kind);
    }
    EXPECT_EQ(euler_characteristic(make_primitive(PrimitiveKind::plane)), 1);
    EXPECT_EQ(make_primitive(PrimitiveKind::icosahedron).size(), 20u);
    EXPECT_EQ(make_primitive(PrimitiveKind::cube).size(), 12u);
}

TEST(PrimitiveTest, PrimitivesFitUnitBox) {
    for (PrimitiveKind k : kObjectKinds) {
        const Aabb b = make_primitive(k).bounds();
        EXPECT_TRUE(Aabb({-0.5 - 1e-9, -0.5 - 1e-9, -0.5 - 1e-9}, {0.5 + 1e-9, 0.5 + 1e-9, 0.5 + 1e-9}).contains(b))
            << to_string(k);
    }
}

TEST(SplitMixTest, KnownValues) {
    // Reference outputs of the splitmix64 finaliser for seeds 0 and 1.
    EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafull);
    EXPECT_EQ(splitmix64(1), 0x910a2dec89025cc1ull);
    EXPECT_NE(frame_seed(1, 0), frame_seed(1, 1));
    EXPECT_NE(frame_seed(1, 0), frame_seed(2, 0));
}

TEST(SceneGenTest, SameSeedSameSceneDifferentSeedDifferentScene) {
    SceneGenConfig sc;
    sc.seed = 42;
    const GeneratedScene a = generate_scene(sc);
    const GeneratedScene b = generate_scene(sc);
    EXPECT_EQ(a.scene.vertices, b.scene.vertices);
    EXPECT_EQ(a.scene.triangles, b.scene.triangles);
    EXPECT_EQ(a.cell.forward, b.cell.forward);
    sc.seed = 43;
    const GeneratedScene c = generate_scene(sc);
    EXPECT_NE(a.scene.vertices, c.scene.vertices);
}

TEST(SceneGenTest, ScenesRespectConfiguredRanges) {
    std::set<std::string> kinds_seen;
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        SceneGenConfig sc;
        sc.seed = seed;
        const GeneratedScene g = generate_scene(sc);
        EXPECT_NO_THROW(g.scene.validate());
        EXPECT_GE(g.object_count, sc.min_objects);
        EXPECT_LE(g.object_count, sc.max_objects);
        EXPECT_GE(g.cell.center.y, sc.height_min);
        EXPECT_LE(g.cell.center.y, sc.height_max);
        EXPECT_NEAR(g.cell.forward.y, 0.0, 1e-15);
        EXPECT_EQ(g.cell.radius, sc.radius);
        ASSERT_FALSE(g.scene.objects.empty());
        EXPECT_EQ(g.scene.objects.front().name, "floor");
        for (std::size_t t = 0; t < g.scene.size(); ++t) ASSERT_GT(g.scene.area(t), kDegenerateArea);
        // Placed objects keep clear of the viewcell.
        const double clear = sc.keep_out + sc.radius;
        for (const auto& o : g.scene.objects) {
            const auto us = o.name.rfind('_');
            if (us == std::string::npos) continue;
            kinds_seen.insert(o.name.substr(0, us));
            const Aabb b = g.scene.object_bounds(o);
            const Vec3& c = g.cell.center;
            const bool clear_of_cell = c.x + clear < b.lo.x || c.x - clear > b.hi.x || c.y + clear < b.lo.y ||
                                       c.y - clear > b.hi.y || c.z + clear < b.lo.z || c.z - clear > b.hi.z;
            EXPECT_TRUE(clear_of_cell) << o.name << " seed " << seed;
        }
    }
    EXPECT_EQ(kinds_seen.size(), kObjectKinds.size());
}

TEST(SceneGenTest, ClassWeightsSelectKinds) {
    SceneGenConfig sc;
    sc.class_weights.fill(0.0);
    sc.class_weights[5] = 1.0;  // icosahedron only
    sc.seed = 3;
    const GeneratedScene g = generate_scene(sc);
    for (const auto& o : g.scene.objects)
        if (o.name.find('_') != std::string::npos) {
            EXPECT_EQ(o.name.rfind("icosahedron_", 0), 0u) << o.name;
        }
    sc.class_weights.fill(0.0);
    EXPECT_THROW(generate_scene(sc), std::invalid_argument);
}

TEST(MeshIoTest, ObjRoundTripIsExact) {
    SceneGenConfig sc;
    sc.seed = 9;
    const TriScene s = generate_scene(sc).scene;
    std::stringstream ss;
    write_obj(ss, s);
    const TriScene back = read_obj(ss);
    EXPECT_EQ(back.vertices, s.vertices);
    EXPECT_EQ(back.triangles, s.triangles);
    ASSERT_EQ(back.objects.size(), s.objects.size());
    for (std::size_t i = 0; i < s.objects.size(); ++i) {
        EXPECT_EQ(back.objects[i].name, s.objects[i].name);
        EXPECT_EQ(back.objects[i].first_triangle, s.objects[i].first_triangle);
        EXPECT_EQ(back.objects[i].triangle_count, s.objects[i].triangle_count);
    }
}

TEST(MeshIoTest, ObjPolygonsAreFanTriangulatedAndBadIndicesRejected) {
    std::stringstream ok("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\nf -4 -3 -2\n");
    const TriScene s = read_obj(ok);
    EXPECT_EQ(s.size(), 3u);
    std::stringstream bad("v 0 0 0\nf 1 2 3\n");
    EXPECT_THROW(read_obj(bad), std::runtime_error);
}

TEST(MeshIoTest, MotionTableMarksObjectsDynamic) {
    TriScene s = ft::merge({ft::make_box({0, 0, 0}, {1, 1, 1}, "crate"), ft::make_box({2, 0, 0}, {3, 1, 1}, "wall")});
    std::stringstream table("# name vx vy vz\ncrate 1 0 -2\n");
    EXPECT_EQ(apply_motion_table(table, s), 1u);
    EXPECT_TRUE(s.objects[0].dynamic);
    EXPECT_EQ(s.objects[0].velocity, (Vec3{1, 0, -2}));
    EXPECT_FALSE(s.objects[1].dynamic);
    std::stringstream unknown("ghost 1 1 1\n");
    EXPECT_THROW(apply_motion_table(unknown, s), std::runtime_error);
}

TEST(MeshIoTest, ViewcellRoundTripIsExact) {
    SceneGenConfig sc;
    sc.seed = 5;
    const ViewCell c = generate_scene(sc).cell;
    std::stringstream ss;
    write_viewcell(ss, c);
    const ViewCell back = read_viewcell(ss);
    EXPECT_EQ(back.center, c.center);
    EXPECT_EQ(back.forward, c.forward);
    EXPECT_EQ(back.radius, c.radius);
    EXPECT_EQ(back.far, c.far);
    std::stringstream bad("radius=-1\n");
    EXPECT_THROW(read_viewcell(bad), std::invalid_argument);
}

TEST(DatasetTest, GeneratesManifestAndPairs) {
    ft::TempDir dir("dataset");
    DatasetConfig dc;
    dc.dims = GridDims::cube(16);
    dc.oracle.viewpoints = 8;
    dc.frames = 3;
    dc.write_scenes = true;
    const DatasetSummary s = generate_dataset(dc, dir.path());
    ASSERT_EQ(s.entries.size(), 3u);
    const Manifest m = read_manifest(dir.path() / kManifestName);
    ASSERT_EQ(m.entries.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(m.entries[i].index, i);
        EXPECT_EQ(m.entries[i].seed, frame_seed(dc.scene.seed, i));
        const FroxelGrid geom = load_grid(m.geometry(i).string());
        const FroxelGrid gt = load_grid(m.gt(i).string());
        EXPECT_TRUE(gt.subset_of(geom));
        EXPECT_DOUBLE_EQ(s.visible_fraction[i], gt.occupancy());
        // Each frame can be regenerated independently from its index.
        const Frame f = make_frame(dc, i);
        EXPECT_EQ(f.pair.gt, gt);
        EXPECT_TRUE(std::filesystem::exists(dir / (frame_stem(i) + ".obj")));
    }
    EXPECT_EQ(ft::read_file(dir / "manifest.txt").substr(0, 2), "0 ");
}

TEST(DatasetTest, ManifestRejectsMalformedRecords) {
    ft::TempDir dir("manifest");
    {
        std::ofstream out(dir / "manifest.txt");
        out << "0 12 a.fpvs\n";
    }
    EXPECT_THROW(read_manifest(dir / "manifest.txt"), std::runtime_error);
    EXPECT_THROW(read_manifest(dir / "missing.txt"), std::runtime_error);
}

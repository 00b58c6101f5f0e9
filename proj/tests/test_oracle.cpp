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

#include <cmath>

#include <gtest/gtest.h>

#include "fpvs/oracle.hpp"
#include "fpvs/scenegen.hpp"
#include "test_util.hpp"

using namespace fpvs;
namespace ft = fpvs::testing;

namespace {

OracleConfig small_oracle(int viewpoints = 16) {
    OracleConfig oc;
    oc.viewpoints = viewpoints;
    return oc;
}

}  // namespace

TEST(SampleViewpointsTest, SingleViewpointIsCentreCamera) {
    const ViewCell cell = ft::default_cell();
    const auto cams = sample_viewpoints(cell, small_oracle(1));
    ASSERT_EQ(cams.size(), 1u);
    EXPECT_EQ(cams[0].position, cell.center);
    EXPECT_EQ(cams[0].forward, cell.center_camera().forward);
}

TEST(SampleViewpointsTest, SamplesStayOnLateralDiscWithinYawRange) {
    ViewCell cell = ft::default_cell(0.7);
    cell.center = {1, 2, 3};
    cell.forward = normalize(Vec3{1, 0, 1});
    const Camera base = cell.center_camera();
    for (SamplingMode mode : {SamplingMode::uniform_grid, SamplingMode::uniform_random}) {
        OracleConfig oc = small_oracle(257);
        oc.sampling = mode;
        const auto cams = sample_viewpoints(cell, oc);
        ASSERT_EQ(cams.size(), 257u);
        double max_rho = 0.0, max_yaw = 0.0;
        for (const Camera& c : cams) {
            const Vec3 d = c.position - cell.center;
            EXPECT_NEAR(dot(d, base.forward), 0.0, 1e-12);
            EXPECT_LE(length(d), cell.radius + 1e-12);
            max_rho = std::max(max_rho, length(d));
            EXPECT_NEAR(dot(c.up, base.up), 1.0, 1e-12);  // yaw only
            const double yaw = std::acos(std::clamp(dot(c.forward, base.forward), -1.0, 1.0));
            EXPECT_LE(yaw, deg_to_rad(cell.beta_deg) + 1e-12);
            max_yaw = std::max(max_yaw, yaw);
            EXPECT_NO_THROW(c.validate());
        }
        // The samples spread over the cell rather than collapsing to the centre.
        EXPECT_GT(max_rho, 0.9 * cell.radius);
        EXPECT_GT(max_yaw, 0.9 * deg_to_rad(cell.beta_deg));
    }
}

TEST(SampleViewpointsTest, RandomModeIsSeededGridModeIsNot) {
    const ViewCell cell = ft::default_cell();
    OracleConfig a = small_oracle(32), b = small_oracle(32);
    a.sampling = b.sampling = SamplingMode::uniform_random;
    a.seed = 1;
    b.seed = 1;
    EXPECT_EQ(sample_viewpoints(cell, a)[5].position, sample_viewpoints(cell, b)[5].position);
    b.seed = 2;
    EXPECT_NE(sample_viewpoints(cell, a)[5].position, sample_viewpoints(cell, b)[5].position);
    a.sampling = b.sampling = SamplingMode::uniform_grid;
    EXPECT_EQ(sample_viewpoints(cell, a)[5].position, sample_viewpoints(cell, b)[5].position);
}

TEST(DepthBufferTest, FrontoParallelPlaneHasConstantDepth) {
    const Camera cam = Camera::look({0, 0, 0}, {0, 0, 1}, {0, 1, 0}, 60, 0.3, 40);
    const double e = 30;
    const TriScene s = ft::make_quad({-e, -e, 7}, {e, -e, 7}, {e, e, 7}, {-e, e, 7});
    const DepthBuffer buf = render_depth(s, cam, 24, 24);
    for (std::size_t k = 0; k < buf.depth.size(); ++k) {
        ASSERT_FALSE(buf.empty_at(k));
        EXPECT_NEAR(buf.depth[k], 7.0, 1e-12);
    }
}

TEST(DepthBufferTest, NearestSurfaceWinsAndTiesKeepFirst) {
    const Camera cam = Camera::look({0, 0, 0}, {0, 0, 1}, {0, 1, 0}, 60, 0.3, 40);
    const double e = 30;
    TriScene back = ft::make_quad({-e, -e, 9}, {e, -e, 9}, {e, e, 9}, {-e, e, 9});
    TriScene front = ft::make_quad({-e, -e, 4}, {e, -e, 4}, {e, e, 4}, {-e, e, 4});
    TriScene twin = front;
    const TriScene s = ft::merge({back, front, twin});  // ids 0-1 back, 2-3 front, 4-5 duplicate front
    const DepthBuffer buf = render_depth(s, cam, 16, 16);
    for (std::size_t k = 0; k < buf.ids.size(); ++k) {
        EXPECT_TRUE(buf.ids[k] == 2 || buf.ids[k] == 3) << buf.ids[k];
        EXPECT_NEAR(buf.depth[k], 4.0, 1e-12);
    }
}

TEST(DepthBufferTest, DiscardsBeyondFarAndBeforeNear) {
    const Camera cam = Camera::look({0, 0, 0}, {0, 0, 1}, {0, 1, 0}, 60, 1.0, 10);
    const double e = 30;
    const TriScene s = ft::merge({ft::make_quad({-e, -e, 12}, {e, -e, 12}, {e, e, 12}, {-e, e, 12}),
                                  ft::make_quad({-e, -e, 0.5}, {e, -e, 0.5}, {e, e, 0.5}, {-e, e, 0.5})});
    const DepthBuffer buf = render_depth(s, cam, 8, 8);
    for (std::size_t k = 0; k < buf.ids.size(); ++k) EXPECT_TRUE(buf.empty_at(k));
}

TEST(OracleTest, ConfigValidation) {
    OracleConfig oc;
    oc.viewpoints = 0;
    EXPECT_THROW(oc.validate(GridDims::cube(16)), std::invalid_argument);
    oc.viewpoints = 4;
    oc.width = oc.height = 8;
    EXPECT_THROW(oc.validate(GridDims::cube(16)), std::invalid_argument);
    EXPECT_EQ(OracleConfig{}.resolved_width(GridDims{32, 16, 8}), 128);
    EXPECT_EQ(OracleConfig{}.resolved_height(GridDims{32, 16, 8}), 64);
}

TEST(OracleTest, GroundTruthIsSubsetOfGeometryOnGeneratedScenes) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SceneGenConfig sc;
        sc.seed = seed;
        const GeneratedScene g = generate_scene(sc);
        const TrainingPair pair = compute_training_pair(g.scene, g.cell, GridDims::cube(16), small_oracle());
        EXPECT_TRUE(pair.gt.subset_of(pair.geometry)) << "seed " << seed;
        EXPECT_GT(pair.gt.count(), 0u);
        EXPECT_EQ(pair.gt.role(), GridRole::gt_pvs);
        EXPECT_EQ(pair.geometry.role(), GridRole::geometry);
        // The merge count is exactly what the orthographic pass missed.
        FroxelizeConfig ortho;
        ortho.mode = ProjectionMode::ortho_reproject;
        const FroxelGrid raw = froxelize(g.scene, build_viewcell_frustum(g.cell), GridDims::cube(16), ortho);
        EXPECT_EQ(pair.merged_froxels, pair.gt.count_not_in(raw));
    }
}

TEST(OracleTest, FullCrossSectionOccluderHidesEverythingBehind) {
    const ViewCell cell = ft::default_cell();
    const Frustum f = build_viewcell_frustum(cell);
    const double e = 100, z_wall = 6.0;
    const TriScene scene = ft::merge({ft::make_quad({-e, -e, z_wall}, {e, -e, z_wall}, {e, e, z_wall}, {-e, e, z_wall}),
                                      ft::make_box({-2, -2, 12}, {2, 2, 14}),
                                      ft::make_quad({-e, -e, 25}, {e, -e, 25}, {e, e, 25}, {-e, e, 25})});
    const GridDims dims = GridDims::cube(16);
    const FroxelGrid gt = compute_gt_pvs(scene, cell, dims, small_oracle(32));
    const auto layer = quantize(*project_to_ndc(f, {0, 0, z_wall}), dims).z;
    std::size_t in_layer = 0;
    for (std::size_t i = 0; i < dims.volume(); ++i) {
        if (!gt.get_linear(i)) continue;
        const FroxelCoord c = gt.coord_of(i);
        EXPECT_LE(c.z, layer) << "visible froxel behind the occluder at " << c.x << "," << c.y << "," << c.z;
        in_layer += c.z == layer;
    }
    EXPECT_GT(in_layer, 0u);
}

TEST(OracleTest, NestedViewpointSetsGiveNestedPvs) {
    const ViewCell cell = ft::default_cell();
    const Frustum f = build_viewcell_frustum(cell);
    SceneGenConfig sc;
    sc.seed = 17;
    const GeneratedScene g = generate_scene(sc);
    const Frustum gf = build_viewcell_frustum(g.cell);
    OracleConfig oc = small_oracle(24);
    const auto cams = sample_viewpoints(g.cell, oc);
    FroxelGrid prev(GridDims::cube(16), GridRole::gt_pvs);
    for (std::size_t n = 1; n <= cams.size(); n += 5) {
        FroxelGrid cur(GridDims::cube(16), GridRole::gt_pvs);
        accumulate_gt_pvs(g.scene, gf, std::span(cams).first(n), 64, 64, cur);
        EXPECT_TRUE(prev.subset_of(cur)) << n;
        prev = cur;
    }
    (void)f;
}

TEST(OracleTest, RayCastAgreesWithDepthBuffer) {
    const ViewCell cell = ft::default_cell();
    const GridDims dims = GridDims::cube(16);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const TriScene scene = ft::single_occluder_scene(seed);
        OracleConfig oc = small_oracle(8);
        const FroxelGrid raster = compute_gt_pvs(scene, cell, dims, oc);
        const FroxelGrid rays = ray_cast_pvs(scene, cell, dims, 4, oc);
        EXPECT_GE(jaccard(raster, rays), 0.95) << "seed " << seed;
    }
}

TEST(OracleTest, EmptySceneGivesEmptyGroundTruth) {
    const FroxelGrid gt = compute_gt_pvs(TriScene{}, ft::default_cell(), GridDims::cube(8), small_oracle(4));
    EXPECT_EQ(gt.count(), 0u);
}

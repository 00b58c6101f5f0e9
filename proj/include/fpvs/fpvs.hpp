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

#include "fpvs/core.hpp"
#include "fpvs/dataset.hpp"
#include "fpvs/evalrt.hpp"
#include "fpvs/froxel_grid.hpp"
#include "fpvs/froxelize.hpp"
#include "fpvs/interleave.hpp"
#include "fpvs/mesh_io.hpp"
#include "fpvs/neural.hpp"
#include "fpvs/oracle.hpp"
#include "fpvs/raster.hpp"
#include "fpvs/scenegen.hpp"
#include "fpvs/train.hpp"

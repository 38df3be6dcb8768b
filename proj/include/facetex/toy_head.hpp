/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: include/facetex/toy_head.hpp
 *
 * Copyright 2026 The facetex Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#ifndef FACETEX_TOY_HEAD_HPP_
#define FACETEX_TOY_HEAD_HPP_

#include "facetex/morphable_model.hpp"

namespace facetex {
namespace model {

struct ToyHeadOptions
{
    int subdivisions = 3; // 642 vertices, 1280 faces
    double radius = 20.0;
    int num_shape = 16; // at most 16
    int num_expr = 8;   // at most 8
};

/**
 * A procedural head-like blendshape model on a subdivided icosphere.
 *
 * Model frame: +y up, +z out of the face. The surface is an ellipsoid; shape components
 * are radial displacements by real spherical harmonics of degree 0..3 and expression
 * components are localized bumps on the front half. UVs are a Lambert azimuthal
 * equal-area chart centred on the face direction. The 68 landmarks are the distinct
 * vertices closest to a fixed facial layout.
 */
BlendshapeBasis make_toy_head(const ToyHeadOptions& options = {});

} // namespace model
} // namespace facetex

#endif /* FACETEX_TOY_HEAD_HPP_ */

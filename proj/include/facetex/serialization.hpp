/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: include/facetex/serialization.hpp
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

#ifndef FACETEX_SERIALIZATION_HPP_
#define FACETEX_SERIALIZATION_HPP_

#include "facetex/common.hpp"
#include "facetex/morphable_model.hpp"

#include "json.hpp"

#include <filesystem>
#include <vector>

namespace facetex {
namespace io {

nlohmann::json params_to_json(const model::FaceParams& params);
/// Throws IoError on missing or malformed fields.
model::FaceParams params_from_json(const nlohmann::json& j);

/// Landmark files hold an array of 68 [x, y] pixel pairs.
MatrixXd read_landmarks(const std::filesystem::path& path);
void write_landmarks(const std::filesystem::path& path, const MatrixXd& landmarks);

struct ObjMesh
{
    MatrixXd vertices;  // N x 3
    MatrixXd texcoords; // M x 2, as stored (v axis pointing up)
    std::vector<model::Face> faces;
    std::vector<model::Face> face_texcoords;
};

/**
 * Wavefront OBJ with one vt per vertex (v flipped to the OBJ convention) and faces as
 * v/vt pairs. Coordinates are printed in shortest round-trip form.
 */
void write_obj(const std::filesystem::path& path, const MatrixXd& vertices, const MatrixXd& uv_coords,
               const std::vector<model::Face>& faces);
/// Reads triangles with v, v/vt, v//vn or v/vt/vn references. Throws IoError.
ObjMesh read_obj(const std::filesystem::path& path);

} // namespace io
} // namespace facetex

#endif /* FACETEX_SERIALIZATION_HPP_ */

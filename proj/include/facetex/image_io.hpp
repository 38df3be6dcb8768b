/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: include/facetex/image_io.hpp
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

#ifndef FACETEX_IMAGE_IO_HPP_
#define FACETEX_IMAGE_IO_HPP_

#include "facetex/common.hpp"

#include <cstdint>
#include <filesystem>

namespace facetex {
namespace io {

/// Nearest 8-bit level of a value clamped to [0, 1].
std::uint8_t quantize(double v);

/// 8-bit RGB PNG; values are clamped to [0, 1] and rounded.
void write_png(const std::filesystem::path& path, const Image& image);
/// Reads an 8-bit PNG (grey, grey+alpha, RGB or RGBA) as RGB in [0, 1]. Throws IoError.
Image read_png(const std::filesystem::path& path);

/// 8-bit single-channel PNG with 0 / 255 levels.
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);
/// Any 8-bit PNG; the first channel >= 128 maps to 1.
BinaryMask read_mask_png(const std::filesystem::path& path, MaskKind kind = MaskKind::skin);

void write_texture_png(const std::filesystem::path& path, const UvTexture& texture);
UvTexture read_texture_png(const std::filesystem::path& path);

} // namespace io
} // namespace facetex

#endif /* FACETEX_IMAGE_IO_HPP_ */

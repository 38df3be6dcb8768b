/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: src/common.cpp
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
#include "facetex/common.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace facetex {

Image::Image(int w, int h, const Vector3d& fill) : width(w), height(h)
{
    if (w < 0 || h < 0) {
        throw std::invalid_argument("Image: negative dimensions");
    }
    rgb.resize(static_cast<Eigen::Index>(w) * h, 3);
    rgb.rowwise() = fill.transpose();
}

BinaryMask::BinaryMask(int w, int h, std::uint8_t fill, MaskKind k)
    : width(w), height(h), bits(static_cast<std::size_t>(std::max(0, w * h)), fill ? 1 : 0), kind(k)
{
    if (w < 0 || h < 0) {
        throw std::invalid_argument("BinaryMask: negative dimensions");
    }
}

std::size_t BinaryMask::count() const
{
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

UvTexture::UvTexture(int res, const Vector3d& fill) : resolution(res)
{
    if (!is_power_of_two(res)) {
        throw std::invalid_argument("UvTexture: resolution must be a power of two");
    }
    rgb.resize(static_cast<Eigen::Index>(res) * res, 3);
    rgb.rowwise() = fill.transpose();
}

void UvTexture::clamp()
{
    rgb = rgb.cwiseMax(0.0).cwiseMin(1.0);
}

bool is_power_of_two(int n)
{
    return n > 0 && (n & (n - 1)) == 0;
}

double Rng::normal()
{
    // 1 - uniform() is in (0, 1], so the log is finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace facetex

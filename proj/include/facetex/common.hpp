/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: include/facetex/common.hpp
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

#ifndef FACETEX_COMMON_HPP_
#define FACETEX_COMMON_HPP_

#include "Eigen/Core"

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace facetex {

using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::VectorXd;
using Matrix3d = Eigen::Matrix3d;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using SHCoefficients = Eigen::Matrix<double, 9, 3>;
using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Raised when an input is well-formed but cannot be processed (e.g. a zero-norm embedding).
class DegenerateInput : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

/// Raised on unreadable or malformed files.
class IoError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/**
 * An RGB image with double-precision channels.
 *
 * Pixels are stored row-major: pixel (x, y) lives in row y * width + x of \c rgb,
 * with one column per channel. Values are nominally in [0, 1].
 */
struct Image
{
    int width = 0;
    int height = 0;
    MatrixXd rgb; // (width * height) x 3

    Image() = default;
    Image(int w, int h, const Vector3d& fill = Vector3d::Zero());

    int num_pixels() const { return width * height; }
    int index(int x, int y) const { return y * width + x; }
    auto pixel(int x, int y) { return rgb.row(index(x, y)); }
    Eigen::RowVector3d pixel(int x, int y) const { return rgb.row(index(x, y)); }
};

enum class MaskKind { skin, random, combined, projection };

/// A {0,1} grid with the same pixel layout as Image.
struct BinaryMask
{
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;
    MaskKind kind = MaskKind::projection;

    BinaryMask() = default;
    BinaryMask(int w, int h, std::uint8_t fill, MaskKind k);

    int num_pixels() const { return width * height; }
    std::uint8_t operator()(int x, int y) const { return bits[static_cast<std::size_t>(y * width + x)]; }
    std::size_t count() const;
};

/**
 * A square UV texture. Texel (i, j) covers v in [i/R, (i+1)/R) and u in [j/R, (j+1)/R),
 * and is stored in row i * R + j of \c rgb.
 */
struct UvTexture
{
    int resolution = 0;
    MatrixXd rgb; // (R * R) x 3

    UvTexture() = default;
    UvTexture(int res, const Vector3d& fill);

    int num_texels() const { return resolution * resolution; }
    void clamp();
};

bool is_power_of_two(int n);

/**
 * Seeded generator used everywhere randomness is needed.
 *
 * Draws are built from raw 64-bit Mersenne Twister output instead of the standard
 * distributions, so sequences are identical across standard library implementations.
 */
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal via Box-Muller.
    double normal();

private:
    std::mt19937_64 engine_;
};

} // namespace facetex

#endif /* FACETEX_COMMON_HPP_ */

/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: include/facetex/embedding.hpp
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

#ifndef FACETEX_EMBEDDING_HPP_
#define FACETEX_EMBEDDING_HPP_

#include "facetex/common.hpp"

#include <vector>

namespace facetex {
namespace losses {

/**
 * Deterministic linear face descriptor used in place of a trained recognition network.
 *
 * The image is converted to grey (channel mean), box-averaged onto a 16 x 16 grid and
 * transformed with an orthonormal 2D DCT-II. The descriptor is the 255 non-DC
 * coefficients in row-major order. Being linear, its adjoint gives exact gradients.
 */
class SurrogateEmbedding
{
public:
    static constexpr int grid = 16;
    static constexpr int dims = grid * grid - 1;

    /// Images must be at least grid x grid.
    SurrogateEmbedding(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }

    /// (width*height) x 3 image -> dims-vector.
    VectorXd embed(const MatrixXd& image) const;
    /// Transpose of embed(): dims-vector -> (width*height) x 3 image gradient.
    MatrixXd adjoint(const VectorXd& g) const;

private:
    int width_;
    int height_;
    MatrixXd dct_;                 // grid x grid, orthonormal
    std::vector<int> cell_;        // pixel -> cell index
    std::vector<double> cell_size_; // pixels per cell
};

} // namespace losses
} // namespace facetex

#endif /* FACETEX_EMBEDDING_HPP_ */

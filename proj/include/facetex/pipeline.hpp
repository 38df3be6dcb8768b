/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: include/facetex/pipeline.hpp
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

#ifndef FACETEX_PIPELINE_HPP_
#define FACETEX_PIPELINE_HPP_

#include "facetex/common.hpp"
#include "facetex/losses.hpp"
#include "facetex/morphable_model.hpp"
#include "facetex/refinement.hpp"
#include "facetex/visibility.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace facetex {
namespace pipeline {

/**
 * Settings of a three-phase fit: geometry from landmarks, texture and light from the
 * image, then pose-augmented geometry refinement.
 */
struct FitConfig
{
    int render_size = 64;
    int texture_resolution = 256;
    int steps_geometry = 5000; // landmark-only steps are cheap; fewer stall in the yaw-shift valley
    int steps_texture = 1500;
    int steps_refine = 500;

    losses::LossWeights weights;
    double w_completion = 1e-6; // weight of the texture completion prior

    double lr = 1e-3;
    long decay_every = 500;
    double decay_factor = 0.9;
    double light_lr_scale = 0.1; // light moves slower than the texture
    bool light_fix_dc = true;    // the DC band is fixed: it trades off exactly against albedo
    double refine_lr = 1e-2;     // Adam rate while refining against augmented views
    bool geometry_in_texture_phase = false;

    int views = 2; // k, extra views for the multi-view texture term
    int patch = 16;
    double rho = 0.25;
    int augment_poses = 4;

    bool attention = false;
    bool attention_values_from_geometry = false;
    int attention_patch = 16;
    int attention_dim = 32;

    std::uint64_t seed = 0;

    /// Throws std::invalid_argument on a bad value.
    void validate() const;
    nlohmann::json to_json() const;
    /// Missing keys keep their defaults; unknown keys are rejected with std::invalid_argument.
    static FitConfig from_json(const nlohmann::json& j);
};

/// Runtime knobs that do not change results.
struct FitOptions
{
    int bands = 1;                          // rasterizer bands, 0 = all cores
    std::optional<model::FaceParams> init; // replaces the landmark-based initialisation
};

struct Metrics
{
    double landmark_error_px = 0.0; // L_lmk of the final state
    double image_l1 = 0.0;          // L_tex against the input over the skin mask
    double identity_cosine = 0.0;   // cosine of the surrogate embeddings
    double visibility_l1 = 0.0;     // L_vis of the final projection mask

    nlohmann::json to_json() const;
};

struct PhaseCurve
{
    std::string phase;
    std::vector<double> loss;
};

struct AugmentRecord
{
    refine::PoseSample pose;
    double initial_loss = 0.0;
    double final_loss = 0.0;
};

struct FitResult
{
    model::FaceParams params;
    UvTexture texture;
    std::vector<PhaseCurve> curves; // one per executed phase
    Metrics metrics;
    visibility::UvVisibility visibility;
    std::vector<AugmentRecord> augmentations;
    MatrixXd attention_weights; // empty unless the attention stage ran

    nlohmann::json curves_json() const;
};

/// Neutral shape, expression and pose; camera fitted to the landmarks' centroid and spread.
model::FaceParams initial_params(const model::BlendshapeBasis& basis, const MatrixXd& landmarks, int render_size);

/**
 * Runs the enabled phases. The image must be render_size square, the mask must match it
 * and the landmarks must lie inside the image (std::invalid_argument otherwise). Throws
 * optim::OptimizationFailure if a loss becomes non-finite.
 */
FitResult fit(const FitConfig& config, const Image& image, const BinaryMask& skin, const MatrixXd& landmarks,
              const model::BlendshapeBasis& basis, const FitOptions& options = {});

Metrics evaluate(const model::BlendshapeBasis& basis, const model::FaceParams& params, const UvTexture& texture,
                 const Image& image, const BinaryMask& skin, const MatrixXd& landmarks, int bands = 1);

/// Mean absolute per-channel difference over texels with visibility >= invisible_threshold.
double visible_texture_l1(const UvTexture& estimate, const UvTexture& truth, const visibility::UvVisibility& vis);

/// A smooth random albedo map with values in [0.15, 0.85].
UvTexture procedural_texture(int resolution, std::uint64_t seed);

struct SynthTarget
{
    Image image;
    BinaryMask skin; // the render's projection mask
    MatrixXd landmarks;
    model::FaceParams params;
    UvTexture texture;
};

/// Random in-range parameters and texture, rendered under the neutral light.
SynthTarget synth_target(const model::BlendshapeBasis& basis, std::uint64_t seed, int render_size,
                         int texture_resolution = 256);

/**
 * Writes mesh.obj (posed mesh), texture.png, texture.f64 (+ .json), render.png,
 * render.f64 (+ .json), params.json, metrics.json, curves.json and config.json.
 */
void export_result(const FitResult& result, const FitConfig& config, const model::BlendshapeBasis& basis,
                   const std::filesystem::path& dir);

/// Reloads the raw texture dump written by export_result().
UvTexture import_texture(const std::filesystem::path& dir);

/// A well-mixed seed for substream \p stream, item \p index.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

} // namespace pipeline
} // namespace facetex

#endif /* FACETEX_PIPELINE_HPP_ */

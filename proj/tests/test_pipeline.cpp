/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: tests/test_pipeline.cpp
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
#include "facetex/image_io.hpp"
#include "facetex/losses.hpp"
#include "facetex/pipeline.hpp"
#include "facetex/raw_io.hpp"
#include "facetex/serialization.hpp"
#include "facetex/toy_head.hpp"

#include "test_util.hpp"

#include "doctest.h"

#include <cmath>
#include <fstream>
#include <iterator>
#include <set>

using namespace facetex;
using namespace facetex::testing;

namespace {

const model::BlendshapeBasis& head()
{
    static const auto basis = model::make_toy_head();
    return basis;
}

pipeline::FitConfig small_config()
{
    pipeline::FitConfig c;
    c.render_size = 32;
    c.texture_resolution = 32;
    c.steps_geometry = 60;
    c.steps_texture = 12;
    c.steps_refine = 10;
    c.augment_poses = 2;
    c.patch = 8;
    c.attention = true;
    c.attention_patch = 8;
    c.seed = 5;
    return c;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

} // namespace

TEST_CASE("synthetic targets are seeded and self-consistent")
{
    const auto a = pipeline::synth_target(head(), 3, 64, 64);
    const auto b = pipeline::synth_target(head(), 3, 64, 64);
    CHECK(bitwise_equal(a.image.rgb, b.image.rgb));
    CHECK(a.skin.bits == b.skin.bits);
    CHECK(bitwise_equal(a.texture.rgb, b.texture.rgb));
    CHECK_FALSE(bitwise_equal(pipeline::synth_target(head(), 4, 64, 64).image.rgb, a.image.rgb));

    CHECK(max_abs_diff(a.landmarks, model::landmark_projections(head(), a.params)) == 0.0);
    render::RenderOptions opt;
    const auto out = render::render(head(), a.params, a.texture, opt);
    CHECK(a.skin.bits == out.proj_mask.bits);
    CHECK(bitwise_equal(a.image.rgb, out.image.rgb));
    CHECK(a.landmarks.minCoeff() > 0.0);
    CHECK(a.landmarks.maxCoeff() < 64.0);
    CHECK(a.texture.rgb.minCoeff() >= 0.15);
    CHECK(a.texture.rgb.maxCoeff() <= 0.85);
}

TEST_CASE("the initial camera lands the neutral landmarks near the targets")
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto t = pipeline::synth_target(head(), seed, 64, 16);
        const auto p = pipeline::initial_params(head(), t.landmarks, 64);
        CHECK(p.shape.isZero(0.0));
        CHECK(p.expression.isZero(0.0));
        CHECK(losses::landmark_loss(t.landmarks, model::landmark_projections(head(), p)) < 2.0);
    }
}

TEST_CASE("zero-step phases echo the initialisation")
{
    const auto t = pipeline::synth_target(head(), 7, 32, 32);
    auto cfg = small_config();
    cfg.steps_geometry = cfg.steps_texture = cfg.steps_refine = 0;
    cfg.attention = false;
    pipeline::FitOptions opt;
    opt.init = t.params;
    const auto r = pipeline::fit(cfg, t.image, t.skin, t.landmarks, head(), opt);
    CHECK(r.curves.empty());
    CHECK(r.params.pose == t.params.pose);
    CHECK(r.params.shape == t.params.shape);
    CHECK((r.texture.rgb.array() == 0.5).all());
    CHECK(r.metrics.landmark_error_px == 0.0);
    CHECK(std::isfinite(r.metrics.image_l1));
    CHECK(std::isfinite(r.metrics.identity_cosine));
    CHECK(r.metrics.visibility_l1 == 0.0);
}

TEST_CASE("each phase improves on its start and the fit is deterministic")
{
    const auto t = pipeline::synth_target(head(), 8, 32, 32);
    const auto cfg = small_config();
    const auto a = pipeline::fit(cfg, t.image, t.skin, t.landmarks, head());
    REQUIRE(a.curves.size() == 3);
    CHECK(a.curves[0].phase == "geometry");
    CHECK(a.curves[0].loss.size() == 61);
    for (const auto& c : a.curves) {
        CHECK(*std::min_element(c.loss.begin(), c.loss.end()) <= c.loss.front());
    }
    CHECK(a.augmentations.size() == 2);
    CHECK(a.attention_weights.rows() == 16);
    CHECK(a.curves[0].loss.back() < a.curves[0].loss.front());

    pipeline::FitOptions banded;
    banded.bands = 3;
    const auto b = pipeline::fit(cfg, t.image, t.skin, t.landmarks, head(), banded);
    CHECK(bitwise_equal(a.texture.rgb, b.texture.rgb));
    CHECK(io::params_to_json(a.params).dump() == io::params_to_json(b.params).dump());
    CHECK(a.curves_json().dump() == b.curves_json().dump());
    CHECK(a.metrics.to_json().dump() == b.metrics.to_json().dump());
}

TEST_CASE("fit rejects inconsistent inputs")
{
    const auto t = pipeline::synth_target(head(), 9, 32, 32);
    auto cfg = small_config();
    MatrixXd lm = t.landmarks;
    lm(0, 0) = -1.0;
    CHECK_THROWS_AS(pipeline::fit(cfg, t.image, t.skin, lm, head()), std::invalid_argument);
    CHECK_THROWS_AS(pipeline::fit(cfg, Image(16, 16), t.skin, t.landmarks, head()), std::invalid_argument);
    cfg.texture_resolution = 48;
    CHECK_THROWS_AS(pipeline::fit(cfg, t.image, t.skin, t.landmarks, head()), std::invalid_argument);
}

TEST_CASE("the normalised texture loss barely depends on resolution")
{
    auto p = frontal_params(head(), 64);
    p.cam_scale = 1.2;
    p.cam_trans = Vector3d(32.0 / 1.2, 32.0 / 1.2, 0.0);
    const auto truth = pipeline::procedural_texture(64, 1);
    const auto guess = pipeline::procedural_texture(64, 2);
    double loss[2];
    for (int k = 0; k < 2; ++k) {
        const int size = 64 << k;
        auto q = p;
        q.cam_scale = p.cam_scale * (1 << k);
        render::RenderOptions opt;
        opt.width = opt.height = size;
        const auto target = render::render(head(), q, truth, opt);
        const auto est = render::render(head(), q, guess, opt);
        loss[k] = losses::texture_loss(target.image, est.image, target.proj_mask);
    }
    CHECK(loss[0] > 0.01);
    CHECK(std::abs(loss[1] - loss[0]) / loss[0] < 0.05);
}

TEST_CASE("visible texture error counts only seen texels")
{
    UvTexture est(2, Vector3d(0.5, 0.5, 0.5)), truth(2, Vector3d(0.5, 0.5, 0.5));
    est.rgb.row(0) << 0.8, 0.5, 0.2; // seen, error 0.6
    est.rgb.row(3) << 0.0, 0.0, 0.0; // unseen
    visibility::UvVisibility vis{2, {1.0, 0.5, 0.4, 0.0}};
    CHECK(pipeline::visible_texture_l1(est, truth, vis) == doctest::Approx(0.6 / 6.0).epsilon(1e-15));
    vis.values = {0.0, 0.0, 0.0, 0.0};
    CHECK(pipeline::visible_texture_l1(est, truth, vis) == 0.0);
}

TEST_CASE("fit configs round trip through json and reject bad values")
{
    auto c = small_config();
    c.weights.w_id = 0.25;
    c.rho = 0.4;
    const auto back = pipeline::FitConfig::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());
    CHECK(pipeline::FitConfig::from_json(nlohmann::json::object()).to_json() == pipeline::FitConfig{}.to_json());
    CHECK_THROWS_AS(pipeline::FitConfig::from_json({{"no_such_key", 1}}), std::invalid_argument);

    auto bad = c;
    bad.texture_resolution = 100;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.steps_texture = -1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.rho = 2.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.weights.w_tex = -0.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("derived seeds differ by stream and index")
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 4; ++s) {
        for (std::uint64_t stream = 0; stream < 8; ++stream) {
            for (std::uint64_t i = 0; i < 8; ++i) seen.insert(pipeline::derive_seed(s, stream, i));
        }
    }
    CHECK(seen.size() == 4u * 8u * 8u);
    CHECK(pipeline::derive_seed(1, 2, 3) == pipeline::derive_seed(1, 2, 3));
}

TEST_CASE("exported artifacts reload faithfully")
{
    const auto t = pipeline::synth_target(head(), 10, 32, 32);
    auto cfg = small_config();
    cfg.steps_geometry = 20;
    cfg.steps_texture = 4;
    cfg.steps_refine = 4;
    const auto r = pipeline::fit(cfg, t.image, t.skin, t.landmarks, head());
    TempDir dir("export");
    pipeline::export_result(r, cfg, head(), dir.path());
    for (const char* name : {"mesh.obj", "texture.png", "texture.f64", "render.png", "render.f64", "params.json",
                             "metrics.json", "curves.json", "config.json"}) {
        CHECK(std::filesystem::exists(dir.path() / name));
    }

    const auto mesh = io::read_obj(dir.path() / "mesh.obj");
    const MatrixXd posed = model::apply_pose(model::reconstruct_mesh(head(), r.params.shape, r.params.expression),
                                             r.params.pose, head());
    CHECK(max_abs_diff(mesh.vertices, posed) <= 1e-9);
    CHECK(mesh.faces.size() == head().faces.size());
    CHECK(mesh.faces == head().faces);

    CHECK(bitwise_equal(pipeline::import_texture(dir.path()).rgb, r.texture.rgb));
    const auto png = io::read_texture_png(dir.path() / "texture.png");
    for (Eigen::Index i = 0; i < png.rgb.size(); ++i) {
        const double clamped = std::clamp(r.texture.rgb.data()[i], 0.0, 1.0);
        CHECK(std::abs(png.rgb.data()[i] - clamped) <= 0.5 / 255.0 + 1e-12);
    }

    const auto params = io::params_from_json(io::read_json(dir.path() / "params.json"));
    CHECK(bitwise_equal(params.pose, r.params.pose));
    CHECK(params.cam_scale == r.params.cam_scale);
    CHECK(bitwise_equal(params.light, r.params.light));

    // Exporting the same result twice writes identical bytes.
    TempDir again("export_again");
    pipeline::export_result(r, cfg, head(), again.path());
    for (const char* name : {"mesh.obj", "texture.f64", "render.f64", "params.json", "metrics.json", "curves.json"}) {
        CHECK(slurp(dir.path() / name) == slurp(again.path() / name));
    }
}

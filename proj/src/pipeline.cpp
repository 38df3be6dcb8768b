/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: src/pipeline.cpp
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
#include "facetex/pipeline.hpp"

#include "facetex/attention.hpp"
#include "facetex/graph_ops.hpp"
#include "facetex/image_io.hpp"
#include "facetex/optim.hpp"
#include "facetex/raw_io.hpp"
#include "facetex/render.hpp"
#include "facetex/rotation.hpp"
#include "facetex/serialization.hpp"
#include "facetex/shading.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <numbers>

namespace facetex {
namespace pipeline {

namespace {

constexpr double pi = std::numbers::pi;

const Vector3d background = Vector3d::Zero();

void require(bool ok, const char* what)
{
    if (!ok) {
        throw std::invalid_argument(what);
    }
}

nlohmann::json weights_to_json(const losses::LossWeights& w)
{
    return {{"w_lmk", w.w_lmk}, {"w_tex", w.w_tex}, {"w_vis_tex", w.w_vis_tex},
            {"w_id", w.w_id},   {"w_reg", w.w_reg}, {"w_vis", w.w_vis}};
}

void check_inputs(const FitConfig& config, const Image& image, const BinaryMask& skin, const MatrixXd& landmarks)
{
    const int s = config.render_size;
    require(image.width == s && image.height == s, "fit: image size must equal the configured render size");
    require(skin.width == s && skin.height == s, "fit: skin mask size must equal the image size");
    require(landmarks.rows() == model::num_landmarks && landmarks.cols() == 2, "fit: expected 68 x 2 landmarks");
    require(landmarks.allFinite(), "fit: non-finite landmarks");
    require(landmarks.minCoeff() >= 0.0 && landmarks.maxCoeff() <= s, "fit: landmarks must lie inside the image");
    require(image.rgb.allFinite(), "fit: non-finite image values");
}

render::RenderOptions render_options(const FitConfig& config, int bands)
{
    render::RenderOptions o;
    o.width = config.render_size;
    o.height = config.render_size;
    o.background = background;
    o.bands = bands;
    return o;
}

model::FaceParams with_global(model::FaceParams p, const Vector3d& rotation)
{
    p.pose.head<3>() = rotation;
    return p;
}

// -- phase 1: geometry from landmarks ----------------------------------------

PhaseCurve geometry_phase(const FitConfig& cfg, const MatrixXd& landmarks, const model::BlendshapeBasis& basis,
                          model::FaceParams& params)
{
    auto t = optim::ParamTensors::from(params);
    optim::AdamState adam(optim::AdamConfig{cfg.lr});
    PhaseCurve curve{"geometry", {}};
    double best = std::numeric_limits<double>::infinity();
    model::FaceParams best_params = params;
    const double weights[] = {cfg.weights.w_lmk, cfg.weights.w_reg};
    for (int step = 0; step <= cfg.steps_geometry; ++step) {
        ad::Tape tape;
        const auto v = ad::attach(tape, t, {.shape = true, .expression = true, .pose = true, .camera = true});
        const ad::Var parts[] = {ad::landmark_loss(ad::landmarks_2d(basis, v), tape.constant(landmarks)),
                                 ad::reg_loss(v.shape, v.expression)};
        const ad::Var total = ad::weighted_sum(parts, weights);
        const double value = total.scalar();
        if (!std::isfinite(value)) {
            throw optim::OptimizationFailure("geometry phase: non-finite loss", best_params);
        }
        curve.loss.push_back(value);
        if (value < best) {
            best = value;
            best_params = t.to_params();
        }
        if (step == cfg.steps_geometry) {
            break;
        }
        const auto g = tape.backward(total);
        MatrixXd* leaves[] = {&t.shape, &t.expression, &t.pose, &t.cam_scale, &t.cam_rot, &t.cam_trans};
        const MatrixXd grads[] = {g[v.shape],     g[v.expression], g[v.pose],
                                  g[v.cam_scale], g[v.cam_rot],    g[v.cam_trans]};
        optim::adam_step(leaves, grads, adam, optim::lr_schedule(step, cfg.lr, cfg.decay_every, cfg.decay_factor));
        t.project();
    }
    params = best_params;
    return curve;
}

// -- phase 2: texture and light ------------------------------------------------

struct Views
{
    render::ViewGeometry base;
    std::vector<render::ViewGeometry> extra;
};

Views prepare_views(const model::BlendshapeBasis& basis, const model::FaceParams& p,
                    const std::vector<Vector3d>& rotations, const render::RenderOptions& ropt)
{
    Views v;
    v.base = render::prepare_view(basis, p, ropt);
    for (const auto& r : rotations) {
        v.extra.push_back(render::prepare_view(basis, with_global(p, r), ropt));
    }
    return v;
}

PhaseCurve texture_phase(const FitConfig& cfg, const Image& image, const BinaryMask& skin, const MatrixXd& landmarks,
                         const model::BlendshapeBasis& basis, const render::RenderOptions& ropt,
                         model::FaceParams& params, UvTexture& texture)
{
    const int res = cfg.texture_resolution;
    const int size = cfg.render_size;
    const bool geo = cfg.geometry_in_texture_phase;
    const losses::SurrogateEmbedding embed(size, size);

    Rng pose_rng(derive_seed(cfg.seed, 2));
    std::vector<Vector3d> rotations;
    for (int i = 0; i < cfg.views; ++i) {
        rotations.push_back(refine::pose_axis_angle(refine::sample_pose(pose_rng)));
    }
    Views views = prepare_views(basis, params, rotations, ropt);
    const render::FragmentBuffer* base_frags = &views.base.fragments;
    const visibility::UvVisibility vis = visibility::uv_visibility({base_frags, 1}, basis, res);

    auto t = optim::ParamTensors::from(params);
    MatrixXd tex = texture.rgb;
    UvTexture best_tex = texture;
    model::FaceParams best_params = params;
    double best = std::numeric_limits<double>::infinity();
    optim::AdamState st_tex(optim::AdamConfig{cfg.lr});
    optim::AdamState st_light(optim::AdamConfig{cfg.lr});
    optim::AdamState st_geo(optim::AdamConfig{cfg.lr});

    const MatrixXd masked_input = losses::apply_mask(image.rgb, skin.bits);
    const bool input_has_identity = embed.embed(masked_input).norm() > 0.0;
    const double l_vis_value = losses::visibility_loss(render::coverage_mask(views.base.fragments), skin);

    PhaseCurve curve{"texture", {}};
    for (int step = 0; step <= cfg.steps_texture; ++step) {
        if (geo && step > 0) {
            views = prepare_views(basis, t.to_params(), rotations, ropt);
        }
        const auto stream = static_cast<std::uint64_t>(step) * static_cast<std::uint64_t>(cfg.views + 1);
        const BinaryMask m_mask = visibility::combine_mask(
            skin, visibility::make_patch_mask(size, size, cfg.patch, cfg.rho, derive_seed(cfg.seed, 3, stream)));

        ad::Tape tape;
        const auto v = ad::attach(tape, t,
                                  {.shape = geo, .expression = geo, .pose = geo, .camera = geo, .light = true});
        const ad::Var tex_var = tape.leaf(tex, "texture");
        const ad::Var input = tape.constant(image.rgb);
        const ad::Var rendered = ad::render_view(views.base, tex_var, res, v.light, background);

        const ad::Var l_tex = ad::texture_loss(input, rendered, m_mask.bits);

        std::vector<ad::Var> targets, renders;
        std::vector<std::vector<std::uint8_t>> view_masks;
        for (int i = 0; i < cfg.views; ++i) {
            const auto& view = views.extra[static_cast<std::size_t>(i)];
            targets.push_back(tape.constant(render::shade_view(view, best_tex, best_params.light, background).rgb));
            renders.push_back(ad::render_view(view, tex_var, res, v.light, background));
            const auto patches = visibility::make_patch_mask(size, size, cfg.patch, cfg.rho,
                                                             derive_seed(cfg.seed, 3, stream + 1 + i));
            view_masks.push_back(visibility::combine_mask(render::coverage_mask(view.fragments), patches).bits);
        }
        const ad::Var l_vis_tex = cfg.views > 0 ? ad::vis_texture_loss(targets, renders, view_masks)
                                                : tape.scalar_constant(0.0);

        ad::Var l_id = tape.scalar_constant(0.0);
        if (input_has_identity) {
            try {
                l_id = ad::identity_loss(embed, tape.constant(masked_input), ad::apply_mask(rendered, skin.bits));
            } catch (const DegenerateInput&) {
                // nothing rendered inside the skin mask: the term is undefined, leave it at zero
            }
        }
        const ad::Var l_vis = tape.scalar_constant(l_vis_value);
        const ad::Var l_lmk = ad::landmark_loss(ad::landmarks_2d(basis, v), tape.constant(landmarks));
        const ad::Var l_reg = ad::reg_loss(v.shape, v.expression);

        const ad::Var parts[] = {l_lmk, l_tex, l_vis_tex, l_id, l_reg, l_vis};
        const ad::Var objective[] = {ad::total_loss(parts, cfg.weights), ad::completion_prior(tex_var, vis)};
        const double objective_weights[] = {1.0, cfg.w_completion};
        const ad::Var total = ad::weighted_sum(objective, objective_weights);

        const double value = total.scalar();
        if (!std::isfinite(value)) {
            throw optim::OptimizationFailure("texture phase: non-finite loss", best_params);
        }
        curve.loss.push_back(value);
        if (value < best) {
            best = value;
            best_tex.rgb = tex;
            best_params = t.to_params();
        }
        if (step == cfg.steps_texture) {
            break;
        }

        const auto g = tape.backward(total);
        const double lr = optim::lr_schedule(step, cfg.lr, cfg.decay_every, cfg.decay_factor);
        {
            MatrixXd* leaves[] = {&tex};
            const MatrixXd grads[] = {g[tex_var]};
            optim::adam_step(leaves, grads, st_tex, lr);
            tex = tex.cwiseMax(0.0).cwiseMin(1.0);
        }
        {
            MatrixXd light_grad = g[v.light];
            if (cfg.light_fix_dc) {
                light_grad.row(0).setZero();
            }
            MatrixXd* leaves[] = {&t.light};
            const MatrixXd grads[] = {light_grad};
            optim::adam_step(leaves, grads, st_light, lr * cfg.light_lr_scale);
        }
        if (geo) {
            MatrixXd* leaves[] = {&t.shape, &t.expression, &t.pose, &t.cam_scale, &t.cam_rot, &t.cam_trans};
            const MatrixXd grads[] = {g[v.shape],     g[v.expression], g[v.pose],
                                      g[v.cam_scale], g[v.cam_rot],    g[v.cam_trans]};
            optim::adam_step(leaves, grads, st_geo, lr);
            t.project();
        }
    }
    params = best_params;
    texture = best_tex;
    return curve;
}

// -- phase 3: pose-augmented refinement ----------------------------------------

PhaseCurve refine_phase(const FitConfig& cfg, const MatrixXd& landmarks, const model::BlendshapeBasis& basis,
                        const render::RenderOptions& ropt, model::FaceParams& params, const UvTexture& texture,
                        std::vector<AugmentRecord>& records)
{
    Rng rng(derive_seed(cfg.seed, 4));
    for (int a = 0; a < cfg.augment_poses; ++a) {
        const auto pose = refine::sample_pose(rng);
        const auto aug = refine::augment_render(basis, params, texture, pose, ropt);
        const auto r = refine::refine_pose_camera(aug.landmarks, basis, params, cfg.steps_refine, cfg.refine_lr,
                                                  cfg.weights.w_reg);
        records.push_back({pose, r.initial_loss, r.final_loss});
    }
    const auto r = refine::refine_pose_camera(landmarks, basis, params, cfg.steps_refine, cfg.lr, cfg.weights.w_reg);
    params = r.params;
    return {"refine", r.curve};
}

} // namespace

// -- configuration -----------------------------------------------------------------

void FitConfig::validate() const
{
    require(render_size >= losses::SurrogateEmbedding::grid, "config: render_size must be at least 16");
    require(is_power_of_two(texture_resolution), "config: texture_resolution must be a power of two");
    require(steps_geometry >= 0 && steps_texture >= 0 && steps_refine >= 0, "config: step counts must be >= 0");
    weights.validate();
    require(w_completion >= 0.0 && std::isfinite(w_completion), "config: w_completion must be >= 0");
    require(lr > 0.0 && std::isfinite(lr), "config: lr must be positive");
    require(decay_every > 0 && decay_factor > 0.0 && decay_factor <= 1.0, "config: bad learning-rate schedule");
    require(light_lr_scale >= 0.0 && std::isfinite(light_lr_scale), "config: light_lr_scale must be >= 0");
    require(refine_lr > 0.0 && std::isfinite(refine_lr), "config: refine_lr must be positive");
    require(views >= 0 && augment_poses >= 0, "config: view counts must be >= 0");
    require(patch >= 1 && rho >= 0.0 && rho <= 1.0, "config: need patch >= 1 and rho in [0, 1]");
    require(attention_patch >= 1 && attention_dim >= 1, "config: bad attention settings");
    require(!attention || render_size % attention_patch == 0, "config: render_size must be a multiple of attention_patch");
}

nlohmann::json FitConfig::to_json() const
{
    return {{"render_size", render_size},
            {"texture_resolution", texture_resolution},
            {"steps_geometry", steps_geometry},
            {"steps_texture", steps_texture},
            {"steps_refine", steps_refine},
            {"weights", weights_to_json(weights)},
            {"w_completion", w_completion},
            {"lr", lr},
            {"decay_every", decay_every},
            {"decay_factor", decay_factor},
            {"light_lr_scale", light_lr_scale},
            {"light_fix_dc", light_fix_dc},
            {"refine_lr", refine_lr},
            {"geometry_in_texture_phase", geometry_in_texture_phase},
            {"views", views},
            {"patch", patch},
            {"rho", rho},
            {"augment_poses", augment_poses},
            {"attention", attention},
            {"attention_values_from_geometry", attention_values_from_geometry},
            {"attention_patch", attention_patch},
            {"attention_dim", attention_dim},
            {"seed", seed}};
}

FitConfig FitConfig::from_json(const nlohmann::json& j)
{
    require(j.is_object(), "config: expected a JSON object");
    FitConfig c;
    const auto known = c.to_json();
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.contains(it.key())) {
            throw std::invalid_argument("config: unknown key '" + it.key() + "'");
        }
    }
    try {
        auto get = [&j](const char* key, auto& field) {
            if (j.contains(key)) {
                field = j.at(key).get<std::decay_t<decltype(field)>>();
            }
        };
        get("render_size", c.render_size);
        get("texture_resolution", c.texture_resolution);
        get("steps_geometry", c.steps_geometry);
        get("steps_texture", c.steps_texture);
        get("steps_refine", c.steps_refine);
        get("w_completion", c.w_completion);
        get("lr", c.lr);
        get("decay_every", c.decay_every);
        get("decay_factor", c.decay_factor);
        get("light_lr_scale", c.light_lr_scale);
        get("light_fix_dc", c.light_fix_dc);
        get("refine_lr", c.refine_lr);
        get("geometry_in_texture_phase", c.geometry_in_texture_phase);
        get("views", c.views);
        get("patch", c.patch);
        get("rho", c.rho);
        get("augment_poses", c.augment_poses);
        get("attention", c.attention);
        get("attention_values_from_geometry", c.attention_values_from_geometry);
        get("attention_patch", c.attention_patch);
        get("attention_dim", c.attention_dim);
        get("seed", c.seed);
        if (j.contains("weights")) {
            const auto& w = j.at("weights");
            const auto known_w = weights_to_json(c.weights);
            require(w.is_object(), "config: weights must be an object");
            for (auto it = w.begin(); it != w.end(); ++it) {
                if (!known_w.contains(it.key())) {
                    throw std::invalid_argument("config: unknown weight '" + it.key() + "'");
                }
            }
            auto getw = [&w](const char* key, double& field) {
                if (w.contains(key)) field = w.at(key).get<double>();
            };
            getw("w_lmk", c.weights.w_lmk);
            getw("w_tex", c.weights.w_tex);
            getw("w_vis_tex", c.weights.w_vis_tex);
            getw("w_id", c.weights.w_id);
            getw("w_reg", c.weights.w_reg);
            getw("w_vis", c.weights.w_vis);
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json Metrics::to_json() const
{
    return {{"landmark_error_px", landmark_error_px},
            {"image_l1", image_l1},
            {"identity_cosine", identity_cosine},
            {"visibility_l1", visibility_l1}};
}

nlohmann::json FitResult::curves_json() const
{
    nlohmann::json j;
    j["phases"] = nlohmann::json::array();
    for (const auto& c : curves) {
        j["phases"].push_back({{"phase", c.phase}, {"loss", c.loss}});
    }
    j["augmentations"] = nlohmann::json::array();
    for (const auto& a : augmentations) {
        j["augmentations"].push_back({{"yaw", a.pose.yaw},
                                      {"pitch", a.pose.pitch},
                                      {"roll", a.pose.roll},
                                      {"initial_loss", a.initial_loss},
                                      {"final_loss", a.final_loss}});
    }
    if (attention_weights.size() > 0) {
        j["attention_weights"] = io::to_row_major(attention_weights);
        j["attention_tokens"] = attention_weights.rows();
    }
    return j;
}

// -- fitting -------------------------------------------------------------------

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1) + 0xD1B54A32D192ED03ull * index;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

model::FaceParams initial_params(const model::BlendshapeBasis& basis, const MatrixXd& landmarks, int render_size)
{
    model::FaceParams p = model::FaceParams::neutral(basis);
    p.cam_rot = Vector3d(pi, 0.0, 0.0);
    p.cam_scale = render_size / 64.0;

    // Linear affine camera q = A v + b from the neutral landmarks, then the nearest scaled
    // rotation. Starting the head rotation here avoids a slow walk along the shallow valley
    // in which a small yaw and a sideways shift explain the landmarks almost equally well.
    const MatrixXd v = model::select_landmarks(basis.template_vertices, basis);
    const Eigen::Index n = v.rows();
    MatrixXd design(n, 4);
    design.leftCols<3>() = v;
    design.col(3).setOnes();
    const MatrixXd sol = design.colPivHouseholderQr().solve(landmarks); // 4 x 2
    const Eigen::Matrix<double, 2, 3> a = sol.topRows<3>().transpose();
    const Eigen::Vector2d b = sol.row(3).transpose();
    const Eigen::JacobiSVD<Eigen::Matrix<double, 2, 3>> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double scale = svd.singularValues().mean();
    if (!std::isfinite(scale) || scale <= 0.0 || !b.allFinite()) {
        return p;
    }
    Matrix3d m;
    m.topRows<2>() = svd.matrixU() * svd.matrixV().leftCols<2>().transpose();
    m.row(2) = m.row(0).cross(m.row(1));
    const Matrix3d rc = rodrigues(p.cam_rot);
    p.pose.head<3>() = rotation_log(rc.transpose() * m);
    p.cam_scale = scale;
    const Vector3d c = basis.template_centroid();
    p.cam_trans.head<2>() = b / scale + (m * c).head<2>() - (rc * c).head<2>();
    return p;
}

FitResult fit(const FitConfig& config, const Image& image, const BinaryMask& skin, const MatrixXd& landmarks,
              const model::BlendshapeBasis& basis, const FitOptions& options)
{
    config.validate();
    basis.validate();
    check_inputs(config, image, skin, landmarks);
    const auto ropt = render_options(config, options.bands);

    FitResult result;
    result.params = options.init ? *options.init : initial_params(basis, landmarks, config.render_size);
    result.params.validate(basis);
    result.texture = UvTexture(config.texture_resolution, Vector3d::Constant(0.5));

    if (config.steps_geometry > 0) {
        result.curves.push_back(geometry_phase(config, landmarks, basis, result.params));
    }
    if (config.steps_texture > 0) {
        result.curves.push_back(
            texture_phase(config, image, skin, landmarks, basis, ropt, result.params, result.texture));
    }
    if (config.attention) {
        const auto view = render::prepare_view(basis, result.params, ropt);
        Image input = image;
        input.rgb = losses::apply_mask(image.rgb, skin.bits);
        const MatrixXd f_t = attention::texture_tokens(input, config.attention_patch, config.attention_dim,
                                                       derive_seed(config.seed, 6));
        const MatrixXd f_g = attention::geometry_tokens(view, config.attention_patch, config.attention_dim,
                                                        derive_seed(config.seed, 7));
        result.attention_weights = attention::cross_attend(f_t, f_g, attention::default_scale(f_t),
                                                           config.attention_values_from_geometry)
                                       .weights;
    }
    if (config.steps_refine > 0) {
        result.curves.push_back(
            refine_phase(config, landmarks, basis, ropt, result.params, result.texture, result.augmentations));
    }

    const auto view = render::prepare_view(basis, result.params, ropt);
    const render::FragmentBuffer* frags = &view.fragments;
    result.visibility = visibility::uv_visibility({frags, 1}, basis, config.texture_resolution);
    result.metrics = evaluate(basis, result.params, result.texture, image, skin, landmarks, options.bands);
    return result;
}

Metrics evaluate(const model::BlendshapeBasis& basis, const model::FaceParams& params, const UvTexture& texture,
                 const Image& image, const BinaryMask& skin, const MatrixXd& landmarks, int bands)
{
    render::RenderOptions ropt;
    ropt.width = image.width;
    ropt.height = image.height;
    ropt.bands = bands;
    const auto out = render::render(basis, params, texture, ropt);
    Metrics m;
    m.landmark_error_px = losses::landmark_loss(landmarks, model::landmark_projections(basis, params));
    m.image_l1 = losses::texture_loss(image, out.image, skin);
    const losses::SurrogateEmbedding embed(image.width, image.height);
    try {
        m.identity_cosine = losses::cosine_similarity(embed.embed(losses::apply_mask(image.rgb, skin.bits)),
                                                      embed.embed(losses::apply_mask(out.image.rgb, skin.bits)));
    } catch (const DegenerateInput&) {
        m.identity_cosine = 0.0;
    }
    m.visibility_l1 = losses::visibility_loss(out.proj_mask, skin);
    return m;
}

double visible_texture_l1(const UvTexture& estimate, const UvTexture& truth, const visibility::UvVisibility& vis)
{
    require(estimate.resolution == truth.resolution && vis.resolution == truth.resolution,
            "visible_texture_l1: resolutions differ");
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < vis.values.size(); ++t) {
        if (vis.values[t] < visibility::invisible_threshold) {
            continue;
        }
        ++count;
        const auto r = static_cast<Eigen::Index>(t);
        total += (estimate.rgb.row(r) - truth.rgb.row(r)).cwiseAbs().sum();
    }
    return count == 0 ? 0.0 : total / (3.0 * static_cast<double>(count));
}

// -- synthetic targets ---------------------------------------------------------------

UvTexture procedural_texture(int resolution, std::uint64_t seed)
{
    UvTexture t(resolution, Vector3d::Zero());
    Rng rng(seed);
    const Vector3d base(0.62, 0.46, 0.38);
    struct Wave
    {
        double amp, fx, fy, phase;
        int channel; // -1 = all channels
    };
    std::vector<Wave> waves;
    for (int c = -1; c < 3; ++c) {
        for (int k = 0; k < 2; ++k) {
            Wave w;
            w.amp = rng.uniform(0.03, 0.06);
            w.fx = std::floor(rng.uniform(1.0, 4.0));
            w.fy = std::floor(rng.uniform(1.0, 4.0));
            w.phase = rng.uniform(0.0, 2.0 * pi);
            w.channel = c;
            waves.push_back(w);
        }
    }
    for (int i = 0; i < resolution; ++i) {
        for (int j = 0; j < resolution; ++j) {
            const double u = (j + 0.5) / resolution;
            const double v = (i + 0.5) / resolution;
            Vector3d c = base;
            for (const auto& w : waves) {
                const double d = w.amp * std::sin(2.0 * pi * (w.fx * u + w.fy * v) + w.phase);
                if (w.channel < 0) {
                    c.array() += d;
                } else {
                    c[w.channel] += d;
                }
            }
            t.rgb.row(i * resolution + j) = c.cwiseMax(0.15).cwiseMin(0.85).transpose();
        }
    }
    return t;
}

SynthTarget synth_target(const model::BlendshapeBasis& basis, std::uint64_t seed, int render_size,
                         int texture_resolution)
{
    require(render_size >= 1, "synth_target: render size must be positive");
    Rng rng(derive_seed(seed, 1));
    SynthTarget s;
    auto& p = s.params;
    p = model::FaceParams::neutral(basis);
    for (Eigen::Index i = 0; i < p.shape.size(); ++i) p.shape[i] = rng.uniform(-0.15, 0.15);
    for (Eigen::Index i = 0; i < p.expression.size(); ++i) p.expression[i] = rng.uniform(-0.1, 0.1);
    refine::PoseSample head;
    head.yaw = rng.uniform(-0.25, 0.25);
    head.pitch = rng.uniform(-0.15, 0.15);
    head.roll = rng.uniform(-0.1, 0.1);
    p.pose.head<3>() = refine::pose_axis_angle(head);
    p.pose.tail<3>() = Vector3d(rng.uniform(0.0, 0.1), 0.0, 0.0);
    p.cam_scale = render_size / 64.0 * rng.uniform(0.9, 1.1);
    p.cam_rot = Vector3d(pi, 0.0, 0.0);
    const double centre = render_size / 2.0 / p.cam_scale;
    p.cam_trans = Vector3d(centre + rng.uniform(-2.0, 2.0), centre + rng.uniform(-2.0, 2.0), 0.0);
    p.light = render::neutral_light();

    s.texture = procedural_texture(texture_resolution, derive_seed(seed, 5));
    render::RenderOptions ropt;
    ropt.width = render_size;
    ropt.height = render_size;
    auto out = render::render(basis, p, s.texture, ropt);
    s.image = std::move(out.image);
    s.skin = std::move(out.proj_mask);
    s.skin.kind = MaskKind::skin;
    s.landmarks = model::landmark_projections(basis, p);
    return s;
}

// -- export ------------------------------------------------------------------------------

void export_result(const FitResult& result, const FitConfig& config, const model::BlendshapeBasis& basis,
                   const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory: " + dir.string());
    }
    const auto& p = result.params;
    const MatrixXd posed = model::apply_pose(model::reconstruct_mesh(basis, p.shape, p.expression), p.pose, basis);
    io::write_obj(dir / "mesh.obj", posed, basis.uv_coords, basis.faces);

    const auto res = static_cast<std::int64_t>(result.texture.resolution);
    io::write_texture_png(dir / "texture.png", result.texture);
    io::write_f64_dump(dir / "texture.f64", io::to_row_major(result.texture.rgb), {res, res, 3});

    render::RenderOptions ropt;
    ropt.width = config.render_size;
    ropt.height = config.render_size;
    const auto out = render::render(basis, p, result.texture, ropt);
    const auto size = static_cast<std::int64_t>(config.render_size);
    io::write_png(dir / "render.png", out.image);
    io::write_f64_dump(dir / "render.f64", io::to_row_major(out.image.rgb), {size, size, 3});

    io::write_json(dir / "params.json", io::params_to_json(p));
    io::write_json(dir / "metrics.json", result.metrics.to_json());
    io::write_json(dir / "curves.json", result.curves_json());
    io::write_json(dir / "config.json", config.to_json());
}

UvTexture import_texture(const std::filesystem::path& dir)
{
    const auto dump = io::read_f64_dump(dir / "texture.f64");
    if (dump.shape.size() != 3 || dump.shape[0] != dump.shape[1] || dump.shape[2] != 3) {
        throw IoError("texture dump must have shape [R, R, 3]");
    }
    const int res = static_cast<int>(dump.shape[0]);
    if (!is_power_of_two(res)) {
        throw IoError("texture dump resolution must be a power of two");
    }
    UvTexture t(res, Vector3d::Zero());
    t.rgb = io::from_row_major(dump.values, static_cast<Eigen::Index>(res) * res, 3);
    return t;
}

} // namespace pipeline
} // namespace facetex

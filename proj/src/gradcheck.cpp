/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: src/gradcheck.cpp
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
#include "facetex/gradcheck.hpp"

#include "facetex/attention.hpp"
#include "facetex/graph_ops.hpp"
#include "facetex/losses.hpp"
#include "facetex/render.hpp"
#include "facetex/shading.hpp"
#include "facetex/toy_head.hpp"
#include "facetex/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace facetex {
namespace gradcheck {

namespace {

double evaluate(const Builder& loss, const std::vector<MatrixXd>& inputs)
{
    ad::Tape tape;
    std::vector<ad::Var> leaves;
    for (const auto& m : inputs) {
        leaves.push_back(tape.leaf(m));
    }
    return loss(tape, leaves).scalar();
}

MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0, double hi = 1.0)
{
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = rng.uniform(lo, hi);
    }
    return m;
}

// A matrix whose entries are at least 1e-3 in magnitude, with random signs: used as an
// offset between the two arguments of an L1 loss so that no entry sits near a kink.
MatrixXd offsets(Rng& rng, Eigen::Index rows, Eigen::Index cols, double max = 0.5)
{
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double mag = rng.uniform(1e-3, max);
        m.data()[i] = rng.uniform() < 0.5 ? -mag : mag;
    }
    return m;
}

std::vector<std::uint8_t> random_mask(Rng& rng, std::size_t n)
{
    std::vector<std::uint8_t> m(n);
    for (auto& b : m) b = rng.uniform() < 0.6 ? 1 : 0;
    m[0] = 1;
    return m;
}

// Weighted sum of all entries, turning a matrix output into a scalar.
ad::Var contract(ad::Tape& tape, const ad::Var& out, const MatrixXd& weights)
{
    return ad::sum(ad::mul(out, tape.constant(weights)));
}

const model::BlendshapeBasis& toy_head()
{
    static const model::BlendshapeBasis basis = model::make_toy_head();
    return basis;
}

struct Check
{
    double tolerance;
    bool elementwise;
    // Runs one trial and returns its error.
    std::function<double(Rng&)> trial;
};

double primitive(const Builder& f, std::vector<MatrixXd> inputs)
{
    return compare(f, std::move(inputs)).normwise;
}

std::map<std::string, Check> make_checks()
{
    std::map<std::string, Check> checks;
    checks["rodrigues"] = {1e-6, false, [](Rng& rng) {
                               const double scale = rng.uniform() < 0.25 ? 1e-4 : 1.0;
                               const MatrixXd w = scale * random_matrix(rng, 3, 1, -1.5, 1.5);
                               const MatrixXd c = random_matrix(rng, 3, 3);
                               return primitive([c](ad::Tape& t, const auto& x) { return contract(t, ad::rodrigues(x[0]), c); },
                                                {w});
                           }};
    checks["bilinear_sample"] = {1e-6, false, [](Rng& rng) {
                                     const int res = 8;
                                     const MatrixXd tex = random_matrix(rng, res * res, 3, 0.0, 1.0);
                                     const MatrixXd uv = random_matrix(rng, 12, 2, 0.0, 1.0);
                                     const MatrixXd c = random_matrix(rng, 12, 3);
                                     return primitive(
                                         [uv, c](ad::Tape& t, const auto& x) {
                                             return contract(t, ad::bilinear_sample(x[0], res, uv), c);
                                         },
                                         {tex});
                                 }};
    checks["sh_shade"] = {1e-6, false, [](Rng& rng) {
                              const int k = 6;
                              const MatrixXd albedo = random_matrix(rng, k, 3, 0.2, 1.0);
                              MatrixXd normals = random_matrix(rng, k, 3);
                              normals.rowwise().normalize();
                              MatrixXd light = random_matrix(rng, 9, 3, -0.3, 0.3);
                              light.row(0).array() += 4.0; // keeps the shading away from the zero clamp
                              const MatrixXd c = random_matrix(rng, k, 3);
                              return primitive(
                                  [c](ad::Tape& t, const auto& x) { return contract(t, ad::sh_shade(x[0], x[1], x[2]), c); },
                                  {albedo, normals, light});
                          }};
    checks["cross_attention"] = {1e-6, false, [](Rng& rng) {
                                     const MatrixXd ft = random_matrix(rng, 8, 4);
                                     const MatrixXd fg = random_matrix(rng, 8, 4);
                                     const MatrixXd c = random_matrix(rng, 8, 4);
                                     const bool geo_values = rng.uniform() < 0.5;
                                     return primitive(
                                         [c, geo_values](ad::Tape& t, const auto& x) {
                                             return contract(t, ad::cross_attend(x[0], x[1], 4.0, geo_values), c);
                                         },
                                         {ft, fg});
                                 }};
    checks["landmark_loss"] = {1e-6, false, [](Rng& rng) {
                                   const MatrixXd p = random_matrix(rng, model::num_landmarks, 2, 0.0, 64.0);
                                   const MatrixXd q = p + offsets(rng, model::num_landmarks, 2, 2.0);
                                   return primitive([](ad::Tape&, const auto& x) { return ad::landmark_loss(x[0], x[1]); },
                                                    {p, q});
                               }};
    checks["reg_loss"] = {1e-6, false, [](Rng& rng) {
                              return primitive([](ad::Tape&, const auto& x) { return ad::reg_loss(x[0], x[1]); },
                                               {random_matrix(rng, 16, 1), random_matrix(rng, 8, 1)});
                          }};
    checks["texture_loss"] = {1e-6, false, [](Rng& rng) {
                                  const MatrixXd a = random_matrix(rng, 64, 3, 0.0, 1.0);
                                  const MatrixXd b = a + offsets(rng, 64, 3, 0.2);
                                  const auto mask = random_mask(rng, 64);
                                  return primitive(
                                      [mask](ad::Tape&, const auto& x) { return ad::texture_loss(x[0], x[1], mask); },
                                      {a, b});
                              }};
    checks["vis_texture_loss"] = {1e-6, false, [](Rng& rng) {
                                      std::vector<MatrixXd> in;
                                      std::vector<std::vector<std::uint8_t>> masks;
                                      for (int v = 0; v < 3; ++v) {
                                          const MatrixXd a = random_matrix(rng, 64, 3, 0.0, 1.0);
                                          in.push_back(a);
                                          in.push_back(a + offsets(rng, 64, 3, 0.2));
                                          masks.push_back(random_mask(rng, 64));
                                      }
                                      return primitive(
                                          [masks](ad::Tape&, const auto& x) {
                                              const std::vector<ad::Var> targets = {x[0], x[2], x[4]};
                                              const std::vector<ad::Var> renders = {x[1], x[3], x[5]};
                                              return ad::vis_texture_loss(targets, renders, masks);
                                          },
                                          in);
                                  }};
    checks["identity_loss"] = {1e-6, false, [](Rng& rng) {
                                   static const losses::SurrogateEmbedding embed(16, 16);
                                   const MatrixXd a = random_matrix(rng, 256, 3, 0.0, 1.0);
                                   const MatrixXd b = random_matrix(rng, 256, 3, 0.0, 1.0);
                                   return primitive(
                                       [](ad::Tape&, const auto& x) { return ad::identity_loss(embed, x[0], x[1]); },
                                       {a, b});
                               }};
    checks["visibility_loss"] = {1e-6, false, [](Rng& rng) {
                                     const MatrixXd a = random_matrix(rng, 100, 1, 0.0, 1.0);
                                     const MatrixXd b = a + offsets(rng, 100, 1, 0.5);
                                     return primitive(
                                         [](ad::Tape&, const auto& x) { return ad::visibility_loss(x[0], x[1]); },
                                         {a, b});
                                 }};
    checks["total_loss"] = {1e-6, false, [](Rng& rng) {
                                losses::LossWeights w;
                                w.w_lmk = rng.uniform(0.0, 2.0);
                                w.w_tex = rng.uniform(0.0, 2.0);
                                w.w_vis_tex = rng.uniform(0.0, 2.0);
                                w.w_id = rng.uniform(0.0, 2.0);
                                w.w_reg = rng.uniform(0.0, 2.0);
                                w.w_vis = rng.uniform(0.0, 2.0);
                                std::vector<MatrixXd> parts;
                                for (int i = 0; i < losses::num_terms; ++i) parts.push_back(random_matrix(rng, 1, 1, 0.0, 3.0));
                                return primitive(
                                    [w](ad::Tape&, const auto& x) {
                                        return ad::total_loss(std::span<const ad::Var>(x.data(), x.size()), w);
                                    },
                                    parts);
                            }};
    checks["completion_prior"] = {1e-6, false, [](Rng& rng) {
                                      auto vis = std::make_shared<visibility::UvVisibility>();
                                      vis->resolution = 8;
                                      for (int i = 0; i < 64; ++i) vis->values.push_back(rng.uniform() < 0.5 ? 1.0 : rng.uniform());
                                      // A ramp plus offsets keeps every neighbour difference away from zero.
                                      MatrixXd tex(64, 3);
                                      for (int i = 0; i < 64; ++i) {
                                          for (int c = 0; c < 3; ++c) {
                                              tex(i, c) = 0.01 * (i % 8) + 0.037 * (i / 8) + 0.3 * c + rng.uniform(0.0, 0.004);
                                          }
                                      }
                                      return primitive(
                                          [vis](ad::Tape&, const auto& x) { return ad::completion_prior(x[0], *vis); },
                                          {tex});
                                  }};
    checks["geometry_chain"] = {1e-6, false, [](Rng& rng) {
                                    const auto& basis = toy_head();
                                    MatrixXd pose = random_matrix(rng, 6, 1, -0.4, 0.4);
                                    const MatrixXd target = random_matrix(rng, model::num_landmarks, 2, 0.0, 64.0);
                                    std::vector<MatrixXd> in = {random_matrix(rng, basis.num_shape(), 1),
                                                                random_matrix(rng, basis.num_expr(), 1),
                                                                pose,
                                                                MatrixXd::Constant(1, 1, rng.uniform(0.8, 1.2)),
                                                                Vector3d(std::numbers::pi + rng.uniform(-0.3, 0.3),
                                                                         rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)),
                                                                random_matrix(rng, 3, 1, 20.0, 40.0)};
                                    const MatrixXd c = random_matrix(rng, model::num_landmarks, 2);
                                    return primitive(
                                        [&basis, c](ad::Tape& t, const auto& x) {
                                            ad::ParamVars v;
                                            v.shape = x[0];
                                            v.expression = x[1];
                                            v.pose = x[2];
                                            v.cam_scale = x[3];
                                            v.cam_rot = x[4];
                                            v.cam_trans = x[5];
                                            return contract(t, ad::landmarks_2d(basis, v), c);
                                        },
                                        in);
                                }};
    checks["render_16x16"] = {1e-4, true, [](Rng& rng) {
                                  static const losses::SurrogateEmbedding embed(16, 16);
                                  const auto& basis = toy_head();
                                  const int size = 16;
                                  const int res = 16;
                                  auto p = model::FaceParams::neutral(basis);
                                  p.pose.head<3>() = Vector3d(rng.uniform(-0.3, 0.3), rng.uniform(-0.5, 0.5), 0.0);
                                  p.cam_scale = 0.25;
                                  p.cam_rot = Vector3d(std::numbers::pi, 0.0, 0.0);
                                  p.cam_trans = Vector3d(32.0, 32.0, 0.0);
                                  render::RenderOptions ropt;
                                  ropt.width = size;
                                  ropt.height = size;
                                  auto view = std::make_shared<render::ViewGeometry>(render::prepare_view(basis, p, ropt));
                                  MatrixXd light = render::neutral_light();
                                  light.bottomRows(8) = random_matrix(rng, 8, 3, -0.05, 0.05);
                                  const MatrixXd tex = random_matrix(rng, res * res, 3, 0.1, 0.8);
                                  // Target: the render itself pushed away from every kink of the L1 term.
                                  ad::Tape t0;
                                  const MatrixXd rendered = ad::render_view(*view, t0.constant(tex), res, t0.constant(light),
                                                                            Vector3d::Zero())
                                                                .value();
                                  const MatrixXd target = rendered + offsets(rng, rendered.rows(), 3, 0.1);
                                  const auto mask = render::coverage_mask(view->fragments).bits;
                                  return compare(
                                             [view, target, mask](ad::Tape& t, const auto& x) {
                                                 const ad::Var img = ad::render_view(*view, x[0], res, x[1], Vector3d::Zero());
                                                 const ad::Var tgt = t.constant(target);
                                                 const ad::Var parts[] = {
                                                     ad::texture_loss(tgt, img, mask),
                                                     ad::identity_loss(embed, ad::apply_mask(tgt, mask), ad::apply_mask(img, mask))};
                                                 const double w[] = {1.0, 1.0};
                                                 return ad::weighted_sum(parts, w);
                                             },
                                             {tex, light})
                                      .elementwise;
                              }};
    return checks;
}

const std::map<std::string, Check>& checks()
{
    static const auto all = make_checks();
    return all;
}

} // namespace

Comparison compare(const Builder& loss, std::vector<MatrixXd> inputs, double h, double floor_ratio)
{
    ad::Tape tape;
    std::vector<ad::Var> leaves;
    for (const auto& m : inputs) {
        leaves.push_back(tape.leaf(m));
    }
    const auto grads = tape.backward(loss(tape, leaves));
    std::vector<double> analytic, numeric;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        const MatrixXd& g = grads[leaves[k]];
        for (Eigen::Index i = 0; i < inputs[k].size(); ++i) {
            double& x = inputs[k].data()[i];
            const double x0 = x;
            x = x0 + h;
            const double fp = evaluate(loss, inputs);
            x = x0 - h;
            const double fm = evaluate(loss, inputs);
            x = x0;
            analytic.push_back(g.data()[i]);
            numeric.push_back((fp - fm) / (2.0 * h));
        }
    }
    const Eigen::Map<const VectorXd> a(analytic.data(), static_cast<Eigen::Index>(analytic.size()));
    const Eigen::Map<const VectorXd> f(numeric.data(), static_cast<Eigen::Index>(numeric.size()));
    Comparison c;
    const double scale = std::max(a.norm(), f.norm());
    c.normwise = scale > 0.0 ? (a - f).norm() / scale : 0.0;
    const double floor = floor_ratio * std::max(a.cwiseAbs().maxCoeff(), f.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double denom = std::max({std::abs(a[i]), std::abs(f[i]), floor});
        if (denom > 0.0) {
            c.elementwise = std::max(c.elementwise, std::abs(a[i] - f[i]) / denom);
        }
    }
    return c;
}

std::vector<std::string> check_names()
{
    return {"rodrigues",     "bilinear_sample", "sh_shade",      "cross_attention", "landmark_loss",
            "reg_loss",      "texture_loss",    "vis_texture_loss", "identity_loss", "visibility_loss",
            "total_loss",    "completion_prior", "geometry_chain", "render_16x16"};
}

CheckResult run_check(const std::string& name, const SuiteOptions& options)
{
    const auto it = checks().find(name);
    if (it == checks().end()) {
        throw std::invalid_argument("gradcheck: unknown check '" + name + "'");
    }
    CheckResult r;
    r.name = name;
    r.tolerance = it->second.tolerance;
    r.elementwise = it->second.elementwise;
    for (int trial = 0; trial < options.trials; ++trial) {
        Rng rng(options.seed * 1000003ull + static_cast<std::uint64_t>(trial));
        r.max_error = std::max(r.max_error, it->second.trial(rng));
        ++r.trials;
    }
    return r;
}

std::vector<CheckResult> run_suite(const std::string& suite, const SuiteOptions& options)
{
    std::vector<CheckResult> out;
    if (suite == "all") {
        for (const auto& name : check_names()) {
            out.push_back(run_check(name, options));
        }
    } else {
        out.push_back(run_check(suite, options));
    }
    return out;
}

} // namespace gradcheck
} // namespace facetex

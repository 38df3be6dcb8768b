/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: tests/test_autodiff.cpp
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
#include "facetex/autodiff.hpp"
#include "facetex/graph_ops.hpp"
#include "facetex/losses.hpp"
#include "facetex/render.hpp"
#include "facetex/toy_head.hpp"

#include "test_util.hpp"

#include "doctest.h"

#include <functional>

using namespace facetex;
using namespace facetex::testing;

namespace {

using Graph = std::function<ad::Var(ad::Tape&, const ad::Var&)>;

MatrixXd gradient_of(const Graph& f, const MatrixXd& x)
{
    ad::Tape tape;
    const auto leaf = tape.leaf(x);
    return tape.backward(f(tape, leaf))[leaf];
}

double value_of(const Graph& f, const MatrixXd& x)
{
    ad::Tape tape;
    return f(tape, tape.constant(x)).scalar();
}

MatrixXd central_differences(const Graph& f, const MatrixXd& x, double h = 1e-6)
{
    MatrixXd g(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        MatrixXd xp = x, xm = x;
        xp.data()[i] += h;
        xm.data()[i] -= h;
        g.data()[i] = (value_of(f, xp) - value_of(f, xm)) / (2.0 * h);
    }
    return g;
}

double relative_error(const MatrixXd& a, const MatrixXd& b)
{
    const double scale = std::max({a.norm(), b.norm(), 1e-300});
    return (a - b).norm() / scale;
}

} // namespace

TEST_CASE("the derivative of x squared at 3 is 6")
{
    ad::Tape tape;
    const auto x = tape.leaf(MatrixXd::Constant(1, 1, 3.0), "x");
    const auto loss = ad::mul(x, x);
    CHECK(loss.scalar() == 9.0);
    CHECK(tape.backward(loss)[x](0, 0) == 6.0);
    CHECK(tape.name(x) == "x");
}

TEST_CASE("a weighted softmax sum matches central differences")
{
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const MatrixXd z = random_matrix(rng, 3, 5, -2.0, 2.0);
        const MatrixXd c = random_matrix(rng, 3, 5);
        const Graph f = [&](ad::Tape& t, const ad::Var& v) { return ad::sum(ad::mul(ad::softmax_rows(v), t.constant(c))); };
        CHECK(relative_error(gradient_of(f, z), central_differences(f, z)) < 1e-6);
    }
}

TEST_CASE("softmax rows are stable for large scores")
{
    ad::Tape tape;
    MatrixXd z(1, 3);
    z << 1000.0, 1000.0, -1000.0;
    const auto s = ad::softmax_rows(tape.constant(z));
    CHECK(s.value().allFinite());
    CHECK(s.value()(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s.value()(0, 2) == 0.0);
}

TEST_CASE("matrix products, transposes, blocks and gathers differentiate correctly")
{
    Rng rng(42);
    const MatrixXd a = random_matrix(rng, 4, 3);
    const MatrixXd b = random_matrix(rng, 3, 5);
    const Graph f = [&](ad::Tape& t, const ad::Var& v) {
        const auto p = ad::matmul(v, t.constant(b));
        const auto q = ad::gather_rows(ad::transpose(p), {4, 0, 0, 2});
        const auto r = ad::block(q, 1, 1, 3, 2);
        return ad::add(ad::square_norm(r), ad::scale(ad::sum(ad::sub(p, t.constant(MatrixXd::Ones(4, 5)))), 0.3));
    };
    CHECK(relative_error(gradient_of(f, a), central_differences(f, a)) < 1e-6);
}

TEST_CASE("the tape rodrigues matches central differences")
{
    Rng rng(43);
    const MatrixXd c = random_matrix(rng, 3, 3);
    for (int trial = 0; trial < 20; ++trial) {
        const MatrixXd w = random_matrix(rng, 3, 1, -2.0, 2.0);
        const Graph f = [&](ad::Tape& t, const ad::Var& v) { return ad::sum(ad::mul(ad::rodrigues(v), t.constant(c))); };
        CHECK(relative_error(gradient_of(f, w), central_differences(f, w)) < 1e-6);
    }
}

TEST_CASE("gradients are linear in the loss")
{
    Rng rng(44);
    const MatrixXd x = random_matrix(rng, 4, 4);
    const MatrixXd c = random_matrix(rng, 4, 4);
    const double a = 0.7, b = -2.3;
    const auto l1 = [&](ad::Tape&, const ad::Var& v) { return ad::square_norm(v); };
    const auto l2 = [&](ad::Tape& t, const ad::Var& v) { return ad::sum(ad::mul(ad::softmax_rows(v), t.constant(c))); };
    const Graph combined = [&](ad::Tape& t, const ad::Var& v) {
        const std::array parts = {l1(t, v), l2(t, v)};
        const std::array<double, 2> w = {a, b};
        return ad::weighted_sum(parts, w);
    };
    const MatrixXd expected = a * gradient_of(l1, x) + b * gradient_of(l2, x);
    CHECK(max_abs_diff(gradient_of(combined, x), expected) < 1e-10);
}

TEST_CASE("backward only reports trainable leaves")
{
    ad::Tape tape;
    const auto x = tape.leaf(MatrixXd::Constant(2, 1, 1.0));
    const auto c = tape.constant(MatrixXd::Constant(2, 1, 2.0));
    const auto unused = tape.leaf(MatrixXd::Constant(1, 1, 5.0));
    const auto grads = tape.backward(ad::sum(ad::mul(x, c)));
    CHECK(grads.contains(x));
    CHECK_FALSE(grads.contains(c));
    CHECK(grads.contains(unused));
    CHECK(grads[unused](0, 0) == 0.0);
    CHECK(grads[x] == MatrixXd::Constant(2, 1, 2.0));
    CHECK_THROWS_AS((void)grads[c], std::invalid_argument);
    CHECK_FALSE(tape.requires_grad(c));
}

TEST_CASE("backward rejects losses that are not scalars on the tape")
{
    ad::Tape tape, other;
    const auto x = tape.leaf(MatrixXd::Constant(2, 2, 1.0));
    const auto y = other.leaf(MatrixXd::Constant(1, 1, 1.0));
    CHECK_THROWS_AS(tape.backward(y), std::invalid_argument);
    CHECK_THROWS_AS(tape.backward(x), std::invalid_argument);
    CHECK_THROWS_AS(tape.backward(ad::Var{}), std::invalid_argument);
    CHECK_THROWS_AS(ad::add(x, tape.leaf(MatrixXd::Zero(3, 2))), std::invalid_argument);
}

TEST_CASE("a loss reused along several paths accumulates its gradient")
{
    ad::Tape tape;
    const auto x = tape.leaf(MatrixXd::Constant(1, 1, 2.0));
    const auto y = ad::mul(x, x);             // 4
    const auto z = ad::add(ad::mul(y, x), y); // x^3 + x^2
    CHECK(tape.backward(z)[x](0, 0) == 3.0 * 4.0 + 2.0 * 2.0);
}

TEST_CASE("the textured render loss gradient matches per-texel differences")
{
    const auto basis = model::make_toy_head();
    auto p = frontal_params(basis, 16);
    p.cam_scale = 0.5;
    p.cam_trans = Vector3d(8.0, 8.0, 0.0);
    p.pose.head<3>() = Vector3d(0.1, 0.3, 0.0);
    render::RenderOptions opt;
    opt.width = opt.height = 16;
    const auto view = render::prepare_view(basis, p, opt);
    REQUIRE(view.shading.pixels.size() > 100);

    Rng rng(45);
    const int res = 16;
    const MatrixXd texture = random_matrix(rng, res * res, 3, 0.2, 0.6);
    SHCoefficients light = p.light;
    light.bottomRows<8>() = random_matrix(rng, 8, 3, -0.1, 0.1);

    // Keep every residual at least 0.1 away from the L1 kink.
    ad::Tape probe;
    const MatrixXd base = ad::render_view(view, probe.constant(texture), res, probe.constant(light), Vector3d::Zero()).value();
    MatrixXd target = base;
    for (Eigen::Index i = 0; i < target.size(); ++i) {
        target.data()[i] += rng.uniform() < 0.5 ? -0.3 : 0.3;
    }
    std::vector<std::uint8_t> mask(256, 1);
    for (std::size_t i = 0; i < mask.size(); i += 7) mask[i] = 0;

    const Graph f = [&](ad::Tape& t, const ad::Var& tex) {
        const auto img = ad::render_view(view, tex, res, t.constant(light), Vector3d::Zero());
        return ad::texture_loss(img, t.constant(target), mask);
    };
    const MatrixXd g = gradient_of(f, texture);
    const MatrixXd fd = central_differences(f, texture);
    int nonzero = 0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        CHECK(std::abs(g.data()[i] - fd.data()[i]) <= 1e-4 * std::abs(fd.data()[i]) + 1e-12);
        nonzero += g.data()[i] != 0.0;
    }
    CHECK(nonzero > 30);
}

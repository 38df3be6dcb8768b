/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: tests/test_io.cpp
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
#include "facetex/raw_io.hpp"
#include "facetex/serialization.hpp"
#include "facetex/toy_head.hpp"

#include "test_util.hpp"

#include "doctest.h"

#include <cmath>
#include <fstream>

using namespace facetex;
using namespace facetex::testing;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream(p, std::ios::binary) << text;
}

} // namespace

TEST_CASE("quantisation rounds to the nearest level and clamps")
{
    CHECK(io::quantize(0.0) == 0);
    CHECK(io::quantize(1.0) == 255);
    CHECK(io::quantize(-0.3) == 0);
    CHECK(io::quantize(7.0) == 255);
    CHECK(io::quantize(0.5) == 128);
    CHECK(io::quantize(100.4 / 255.0) == 100);
    CHECK(io::quantize(100.6 / 255.0) == 101);
}

TEST_CASE("png images round trip within half a level")
{
    TempDir dir("png");
    Rng rng(111);
    Image im(13, 7);
    im.rgb = random_matrix(rng, 91, 3, -0.2, 1.2);
    io::write_png(dir.path() / "a.png", im);
    const Image back = io::read_png(dir.path() / "a.png");
    REQUIRE(back.width == 13);
    REQUIRE(back.height == 7);
    for (Eigen::Index i = 0; i < im.rgb.size(); ++i) {
        const double c = std::clamp(im.rgb.data()[i], 0.0, 1.0);
        CHECK(std::abs(back.rgb.data()[i] - c) <= 0.5 / 255.0 + 1e-12);
        CHECK(back.rgb.data()[i] * 255.0 == std::round(back.rgb.data()[i] * 255.0));
    }
    io::write_png(dir.path() / "b.png", back);
    CHECK(bitwise_equal(io::read_png(dir.path() / "b.png").rgb, back.rgb));
}

TEST_CASE("masks threshold at 128 and grey files read as RGB")
{
    TempDir dir("mask");
    Image im(4, 1);
    im.rgb.col(0) << 0.0, 127.0 / 255.0, 128.0 / 255.0, 1.0;
    im.rgb.col(1) = im.rgb.col(0);
    im.rgb.col(2) = im.rgb.col(0);
    io::write_png(dir.path() / "levels.png", im);
    const auto m = io::read_mask_png(dir.path() / "levels.png");
    CHECK(m.bits == std::vector<std::uint8_t>{0, 0, 1, 1});
    CHECK(m.kind == MaskKind::skin);

    BinaryMask written(3, 2, 0, MaskKind::skin);
    written.bits = {1, 0, 1, 1, 0, 0};
    io::write_mask_png(dir.path() / "mask.png", written);
    CHECK(io::read_mask_png(dir.path() / "mask.png").bits == written.bits);
    const Image grey = io::read_png(dir.path() / "mask.png");
    CHECK(grey.rgb.row(0) == Eigen::RowVector3d(1, 1, 1));
    CHECK(grey.rgb.row(1) == Eigen::RowVector3d(0, 0, 0));
}

TEST_CASE("texture pngs keep the texel layout")
{
    TempDir dir("texpng");
    UvTexture t(4, Vector3d::Zero());
    for (int i = 0; i < 16; ++i) t.rgb.row(i) << i / 15.0, 1.0 - i / 15.0, 0.5;
    io::write_texture_png(dir.path() / "t.png", t);
    const auto back = io::read_texture_png(dir.path() / "t.png");
    CHECK(back.resolution == 4);
    CHECK(max_abs_diff(back.rgb, t.rgb) <= 0.5 / 255.0 + 1e-12);
}

TEST_CASE("unreadable pngs raise io errors")
{
    TempDir dir("badpng");
    CHECK_THROWS_AS(io::read_png(dir.path() / "missing.png"), IoError);
    write_text(dir.path() / "junk.png", "definitely not a png");
    CHECK_THROWS_AS(io::read_png(dir.path() / "junk.png"), IoError);
    CHECK_THROWS_AS(io::read_mask_png(dir.path() / "junk.png"), IoError);
    Image wide(8, 4);
    io::write_png(dir.path() / "wide.png", wide);
    CHECK_THROWS_AS(io::read_texture_png(dir.path() / "wide.png"), IoError);
}

TEST_CASE("raw float dumps are bit exact")
{
    TempDir dir("raw");
    Rng rng(112);
    const MatrixXd m = random_matrix(rng, 5, 3, -1e300, 1e300);
    std::vector<double> values = io::to_row_major(m);
    values.push_back(-0.0);
    values.push_back(std::numeric_limits<double>::denorm_min());
    io::write_f64(dir.path() / "a.f64", values);
    const auto back = io::read_f64(dir.path() / "a.f64");
    REQUIRE(back.size() == values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        CHECK(std::bit_cast<std::uint64_t>(back[i]) == std::bit_cast<std::uint64_t>(values[i]));
    }
    CHECK(io::from_row_major(io::to_row_major(m), 5, 3) == m);

    io::write_f64_dump(dir.path() / "d.f64", io::to_row_major(m), {5, 3});
    const auto dump = io::read_f64_dump(dir.path() / "d.f64");
    CHECK(dump.shape == std::vector<std::int64_t>{5, 3});
    CHECK(dump.values == io::to_row_major(m));
    CHECK_THROWS_AS(io::write_f64_dump(dir.path() / "e.f64", {1.0, 2.0}, {3}), std::invalid_argument);

    const std::vector<std::uint32_t> ints = {0, 7, 0xffffffffu};
    io::write_u32(dir.path() / "i.u32", ints);
    CHECK(io::read_u32(dir.path() / "i.u32") == ints);

    write_text(dir.path() / "short.f64", "abc");
    CHECK_THROWS_AS(io::read_f64(dir.path() / "short.f64"), IoError);
    CHECK_THROWS_AS(io::read_f64(dir.path() / "missing.f64"), IoError);
}

TEST_CASE("landmark files hold 68 pixel pairs")
{
    TempDir dir("landmarks");
    Rng rng(113);
    const MatrixXd lm = random_matrix(rng, 68, 2, 0.0, 64.0);
    io::write_landmarks(dir.path() / "l.json", lm);
    CHECK(io::read_landmarks(dir.path() / "l.json") == lm);

    write_text(dir.path() / "short.json", "[[1, 2], [3, 4]]");
    CHECK_THROWS_AS(io::read_landmarks(dir.path() / "short.json"), IoError);
    write_text(dir.path() / "broken.json", "[[1, 2], ");
    CHECK_THROWS_AS(io::read_landmarks(dir.path() / "broken.json"), IoError);
    nlohmann::json j = nlohmann::json::array();
    for (int i = 0; i < 68; ++i) j.push_back({i, "x"});
    write_text(dir.path() / "strings.json", j.dump());
    CHECK_THROWS_AS(io::read_landmarks(dir.path() / "strings.json"), IoError);
}

TEST_CASE("face params round trip through json")
{
    const auto basis = model::make_toy_head();
    Rng rng(114);
    auto p = model::FaceParams::neutral(basis);
    p.shape = random_matrix(rng, basis.num_shape(), 1);
    p.expression = random_matrix(rng, basis.num_expr(), 1);
    p.pose = random_matrix(rng, 6, 1);
    p.cam_scale = 0.1 + rng.uniform();
    p.cam_rot = random_vector(rng);
    p.cam_trans = random_vector(rng, -40.0, 40.0);
    p.light = random_matrix(rng, 9, 3);
    const auto j = io::params_to_json(p);
    const auto back = io::params_from_json(nlohmann::json::parse(j.dump()));
    CHECK(bitwise_equal(back.shape, p.shape));
    CHECK(bitwise_equal(back.expression, p.expression));
    CHECK(bitwise_equal(back.pose, p.pose));
    CHECK(back.cam_scale == p.cam_scale);
    CHECK(bitwise_equal(back.cam_rot, p.cam_rot));
    CHECK(bitwise_equal(back.cam_trans, p.cam_trans));
    CHECK(bitwise_equal(back.light, p.light));

    auto missing = j;
    missing.erase("light");
    CHECK_THROWS_AS(io::params_from_json(missing), IoError);
    auto wrong = j;
    wrong["pose"] = {1, 2};
    CHECK_THROWS_AS(io::params_from_json(wrong), IoError);
}

TEST_CASE("obj meshes round trip and accept the usual face forms")
{
    TempDir dir("obj");
    const auto basis = model::make_toy_head();
    io::write_obj(dir.path() / "m.obj", basis.template_vertices, basis.uv_coords, basis.faces);
    const auto mesh = io::read_obj(dir.path() / "m.obj");
    CHECK(max_abs_diff(mesh.vertices, basis.template_vertices) <= 1e-9);
    CHECK(mesh.faces == basis.faces);
    CHECK(mesh.face_texcoords == basis.faces);
    MatrixXd flipped = basis.uv_coords;
    flipped.col(1) = (1.0 - flipped.col(1).array()).matrix();
    CHECK(max_abs_diff(mesh.texcoords, flipped) <= 1e-12);

    write_text(dir.path() / "forms.obj",
               "# comment\nv 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nvt 0 0\nvn 0 0 1\n"
               "f 1 2 3\nf 2/1 4/1 3/1\nf 1//1 2//1 4//1\nf 3/1/1 2/1/1 4/1/1\n");
    const auto forms = io::read_obj(dir.path() / "forms.obj");
    CHECK(forms.vertices.rows() == 4);
    REQUIRE(forms.faces.size() == 4);
    CHECK(forms.faces[1] == model::Face{1, 3, 2});
    CHECK(forms.face_texcoords[0] == model::Face{-1, -1, -1});
    CHECK(forms.face_texcoords[2] == model::Face{-1, -1, -1});
    CHECK(forms.face_texcoords[3] == model::Face{0, 0, 0});

    write_text(dir.path() / "quad.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 4 3\n");
    CHECK_THROWS_AS(io::read_obj(dir.path() / "quad.obj"), IoError);
    write_text(dir.path() / "range.obj", "v 0 0 0\nf 1 2 3\n");
    CHECK_THROWS_AS(io::read_obj(dir.path() / "range.obj"), IoError);
    write_text(dir.path() / "bad.obj", "v 0 zero 0\n");
    CHECK_THROWS_AS(io::read_obj(dir.path() / "bad.obj"), IoError);
    CHECK_THROWS_AS(io::read_obj(dir.path() / "missing.obj"), IoError);
}

TEST_CASE("json files report parse failures as io errors")
{
    TempDir dir("json");
    io::write_json(dir.path() / "a.json", {{"k", 1.5}});
    CHECK(io::read_json(dir.path() / "a.json")["k"] == 1.5);
    write_text(dir.path() / "b.json", "{ nope");
    CHECK_THROWS_AS(io::read_json(dir.path() / "b.json"), IoError);
    CHECK_THROWS_AS(io::read_json(dir.path() / "c.json"), IoError);
}

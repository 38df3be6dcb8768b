/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: src/serialization.cpp
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
#include "facetex/serialization.hpp"

#include "facetex/raw_io.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>
#include <string>

namespace facetex {
namespace io {

namespace {

std::vector<double> flat(const MatrixXd& m)
{
    return to_row_major(m);
}

MatrixXd matrix_field(const nlohmann::json& j, const char* key, Eigen::Index rows, Eigen::Index cols)
{
    const auto values = j.at(key).get<std::vector<double>>();
    if (rows < 0) {
        rows = static_cast<Eigen::Index>(values.size()) / cols;
    }
    return from_row_major(values, rows, cols);
}

} // namespace

nlohmann::json params_to_json(const model::FaceParams& p)
{
    nlohmann::json j;
    j["shape"] = flat(p.shape);
    j["expression"] = flat(p.expression);
    j["pose"] = flat(p.pose);
    j["cam_scale"] = p.cam_scale;
    j["cam_rot"] = flat(p.cam_rot);
    j["cam_trans"] = flat(p.cam_trans);
    j["light"] = flat(p.light);
    return j;
}

model::FaceParams params_from_json(const nlohmann::json& j)
{
    try {
        model::FaceParams p;
        p.shape = matrix_field(j, "shape", -1, 1);
        p.expression = matrix_field(j, "expression", -1, 1);
        p.pose = matrix_field(j, "pose", 6, 1);
        p.cam_scale = j.at("cam_scale").get<double>();
        p.cam_rot = matrix_field(j, "cam_rot", 3, 1);
        p.cam_trans = matrix_field(j, "cam_trans", 3, 1);
        p.light = matrix_field(j, "light", 9, 3);
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed parameter JSON: ") + e.what());
    }
}

MatrixXd read_landmarks(const std::filesystem::path& path)
{
    const auto j = read_json(path);
    if (!j.is_array() || j.size() != model::num_landmarks) {
        throw IoError("landmark file must hold 68 [x, y] pairs: " + path.string());
    }
    MatrixXd m(model::num_landmarks, 2);
    try {
        for (int i = 0; i < model::num_landmarks; ++i) {
            const auto& row = j.at(static_cast<std::size_t>(i));
            if (!row.is_array() || row.size() != 2) {
                throw IoError("landmark entries must be [x, y] pairs: " + path.string());
            }
            m(i, 0) = row.at(0).get<double>();
            m(i, 1) = row.at(1).get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed landmark JSON: ") + e.what());
    }
    return m;
}

void write_landmarks(const std::filesystem::path& path, const MatrixXd& landmarks)
{
    nlohmann::json j = nlohmann::json::array();
    for (Eigen::Index i = 0; i < landmarks.rows(); ++i) {
        j.push_back({landmarks(i, 0), landmarks(i, 1)});
    }
    write_json(path, j);
}

void write_obj(const std::filesystem::path& path, const MatrixXd& vertices, const MatrixXd& uv_coords,
               const std::vector<model::Face>& faces)
{
    if (vertices.cols() != 3 || uv_coords.cols() != 2 || uv_coords.rows() != vertices.rows()) {
        throw std::invalid_argument("write_obj: need N x 3 vertices and N x 2 uv coordinates");
    }
    std::string text;
    for (Eigen::Index i = 0; i < vertices.rows(); ++i) {
        text += fmt::format("v {} {} {}\n", vertices(i, 0), vertices(i, 1), vertices(i, 2));
    }
    for (Eigen::Index i = 0; i < uv_coords.rows(); ++i) {
        text += fmt::format("vt {} {}\n", uv_coords(i, 0), 1.0 - uv_coords(i, 1));
    }
    for (const auto& f : faces) {
        text += fmt::format("f {0}/{0} {1}/{1} {2}/{2}\n", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << text;
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

ObjMesh read_obj(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open: " + path.string());
    }
    std::vector<double> v, vt;
    ObjMesh mesh;
    std::string line;
    auto parse_ref = [&](const std::string& tok, int& vi, int& ti) {
        const auto slash = tok.find('/');
        vi = std::stoi(tok.substr(0, slash)) - 1;
        ti = -1;
        if (slash != std::string::npos) {
            const auto rest = tok.substr(slash + 1);
            const auto slash2 = rest.find('/');
            const auto t = rest.substr(0, slash2);
            if (!t.empty()) ti = std::stoi(t) - 1;
        }
    };
    try {
        while (std::getline(in, line)) {
            std::istringstream ss(line);
            std::string tag;
            ss >> tag;
            if (tag == "v") {
                double x, y, z;
                if (!(ss >> x >> y >> z)) throw IoError("bad vertex line in " + path.string());
                v.insert(v.end(), {x, y, z});
            } else if (tag == "vt") {
                double s, t;
                if (!(ss >> s >> t)) throw IoError("bad texcoord line in " + path.string());
                vt.insert(vt.end(), {s, t});
            } else if (tag == "f") {
                model::Face f{}, ft{};
                std::string tok;
                int n = 0;
                while (ss >> tok) {
                    if (n == 3) throw IoError("only triangles are supported: " + path.string());
                    parse_ref(tok, f[static_cast<std::size_t>(n)], ft[static_cast<std::size_t>(n)]);
                    ++n;
                }
                if (n != 3) throw IoError("only triangles are supported: " + path.string());
                mesh.faces.push_back(f);
                mesh.face_texcoords.push_back(ft);
            }
        }
    } catch (const std::logic_error&) {
        throw IoError("malformed OBJ: " + path.string());
    }
    mesh.vertices = from_row_major(v, static_cast<Eigen::Index>(v.size() / 3), 3);
    mesh.texcoords = from_row_major(vt, static_cast<Eigen::Index>(vt.size() / 2), 2);
    for (const auto& f : mesh.faces) {
        for (int i : f) {
            if (i < 0 || i >= mesh.vertices.rows()) throw IoError("face index out of range in " + path.string());
        }
    }
    return mesh;
}

} // namespace io
} // namespace facetex

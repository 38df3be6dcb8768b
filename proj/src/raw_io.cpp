/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: src/raw_io.cpp
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
#include "facetex/raw_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace facetex {
namespace io {

static_assert(std::endian::native == std::endian::little, "raw asset files are little-endian");

namespace {

std::vector<char> read_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const char* data, std::size_t size)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.write(data, static_cast<std::streamsize>(size));
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

template <typename T>
std::vector<T> read_array(const std::filesystem::path& path)
{
    const auto bytes = read_bytes(path);
    if (bytes.size() % sizeof(T) != 0) {
        throw IoError(path.string() + ": size is not a multiple of the element size");
    }
    std::vector<T> values(bytes.size() / sizeof(T));
    std::memcpy(values.data(), bytes.data(), bytes.size());
    return values;
}

} // namespace

void write_f64(const std::filesystem::path& path, const std::vector<double>& values)
{
    write_bytes(path, reinterpret_cast<const char*>(values.data()), values.size() * sizeof(double));
}

std::vector<double> read_f64(const std::filesystem::path& path)
{
    return read_array<double>(path);
}

void write_u32(const std::filesystem::path& path, const std::vector<std::uint32_t>& values)
{
    write_bytes(path, reinterpret_cast<const char*>(values.data()), values.size() * sizeof(std::uint32_t));
}

std::vector<std::uint32_t> read_u32(const std::filesystem::path& path)
{
    return read_array<std::uint32_t>(path);
}

std::vector<double> to_row_major(const MatrixXd& m)
{
    std::vector<double> out(static_cast<std::size_t>(m.size()));
    Eigen::Map<RowMatrixXd>(out.data(), m.rows(), m.cols()) = m;
    return out;
}

MatrixXd from_row_major(const std::vector<double>& values, Eigen::Index rows, Eigen::Index cols)
{
    if (static_cast<Eigen::Index>(values.size()) != rows * cols) {
        throw IoError("array has " + std::to_string(values.size()) + " values, expected " +
                      std::to_string(rows * cols));
    }
    return Eigen::Map<const RowMatrixXd>(values.data(), rows, cols);
}

void write_f64_dump(const std::filesystem::path& path, const std::vector<double>& values,
                    const std::vector<std::int64_t>& shape)
{
    std::int64_t count = 1;
    for (auto d : shape) {
        if (d < 0) {
            throw std::invalid_argument("write_f64_dump: negative extent");
        }
        count *= d;
    }
    if (count != static_cast<std::int64_t>(values.size())) {
        throw std::invalid_argument("write_f64_dump: shape does not match the data size");
    }
    write_f64(path, values);
    nlohmann::json sidecar;
    sidecar["dtype"] = "float64";
    sidecar["order"] = "row-major";
    sidecar["shape"] = shape;
    write_json(path.string() + ".json", sidecar);
}

F64Dump read_f64_dump(const std::filesystem::path& path)
{
    F64Dump dump;
    dump.values = read_f64(path);
    const auto sidecar = read_json(path.string() + ".json");
    try {
        dump.shape = sidecar.at("shape").get<std::vector<std::int64_t>>();
    } catch (const nlohmann::json::exception&) {
        throw IoError(path.string() + ".json: missing or malformed shape");
    }
    std::int64_t expected = 1;
    for (auto d : dump.shape) {
        expected *= d;
    }
    if (expected != static_cast<std::int64_t>(dump.values.size())) {
        throw IoError(path.string() + ": shape does not match the data size");
    }
    return dump;
}

nlohmann::json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

} // namespace io
} // namespace facetex

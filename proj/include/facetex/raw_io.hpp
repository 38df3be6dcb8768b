/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: include/facetex/raw_io.hpp
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

#ifndef FACETEX_RAW_IO_HPP_
#define FACETEX_RAW_IO_HPP_

#include "facetex/common.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace facetex {
namespace io {

// Raw arrays are little-endian; the host must be too.
void write_f64(const std::filesystem::path& path, const std::vector<double>& values);
std::vector<double> read_f64(const std::filesystem::path& path);
void write_u32(const std::filesystem::path& path, const std::vector<std::uint32_t>& values);
std::vector<std::uint32_t> read_u32(const std::filesystem::path& path);

/// Row-major copy of a matrix.
std::vector<double> to_row_major(const MatrixXd& m);
MatrixXd from_row_major(const std::vector<double>& values, Eigen::Index rows, Eigen::Index cols);

/**
 * Writes \p values as float64 to \p path and a sidecar \p path + ".json" holding
 * {"dtype": "float64", "shape": shape, "order": "row-major"}.
 */
void write_f64_dump(const std::filesystem::path& path, const std::vector<double>& values,
                    const std::vector<std::int64_t>& shape);

struct F64Dump
{
    std::vector<double> values;
    std::vector<std::int64_t> shape;
};
F64Dump read_f64_dump(const std::filesystem::path& path);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

} // namespace io
} // namespace facetex

#endif /* FACETEX_RAW_IO_HPP_ */

/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: src/image_io.cpp
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

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

namespace facetex {
namespace io {

namespace {

struct Raster8
{
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> data; // row-major, interleaved
};

struct FileCloser
{
    void operator()(std::FILE* f) const { std::fclose(f); }
};

void write_raster(const std::filesystem::path& path, const Raster8& r)
{
    std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.string().c_str(), "wb"));
    if (!file) {
        throw IoError("cannot open for writing: " + path.string());
    }
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encoding failed: " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(r.width), static_cast<png_uint_32>(r.height), 8,
                 r.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const auto stride = static_cast<std::size_t>(r.width) * static_cast<std::size_t>(r.channels);
    for (int y = 0; y < r.height; ++y) {
        png_write_row(png, const_cast<png_bytep>(r.data.data() + static_cast<std::size_t>(y) * stride));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Raster8 read_raster(const std::filesystem::path& path)
{
    std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.string().c_str(), "rb"));
    if (!file) {
        throw IoError("cannot open: " + path.string());
    }
    png_byte sig[8];
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        throw IoError("not a PNG file: " + path.string());
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng initialisation failed");
    }
    Raster8 r;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("PNG decoding failed: " + path.string());
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    if (png_get_bit_depth(png, info) != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("only 8-bit PNG files are supported: " + path.string());
    }
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
    }
    png_read_update_info(png, info);
    r.width = static_cast<int>(png_get_image_width(png, info));
    r.height = static_cast<int>(png_get_image_height(png, info));
    r.channels = png_get_channels(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    r.data.resize(stride * static_cast<std::size_t>(r.height));
    std::vector<png_bytep> rows(static_cast<std::size_t>(r.height));
    for (int y = 0; y < r.height; ++y) {
        rows[static_cast<std::size_t>(y)] = r.data.data() + static_cast<std::size_t>(y) * stride;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return r;
}

} // namespace

std::uint8_t quantize(double v)
{
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void write_png(const std::filesystem::path& path, const Image& image)
{
    Raster8 r{image.width, image.height, 3, {}};
    r.data.resize(static_cast<std::size_t>(image.num_pixels()) * 3);
    for (int p = 0; p < image.num_pixels(); ++p) {
        for (int c = 0; c < 3; ++c) {
            r.data[static_cast<std::size_t>(3 * p + c)] = quantize(image.rgb(p, c));
        }
    }
    write_raster(path, r);
}

Image read_png(const std::filesystem::path& path)
{
    const Raster8 r = read_raster(path);
    Image image(r.width, r.height);
    const int colour = r.channels >= 3 ? 3 : 1;
    for (int p = 0; p < image.num_pixels(); ++p) {
        for (int c = 0; c < 3; ++c) {
            const int src = colour == 3 ? c : 0;
            image.rgb(p, c) = r.data[static_cast<std::size_t>(p * r.channels + src)] / 255.0;
        }
    }
    return image;
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask)
{
    Raster8 r{mask.width, mask.height, 1, {}};
    r.data.resize(mask.bits.size());
    std::transform(mask.bits.begin(), mask.bits.end(), r.data.begin(),
                   [](std::uint8_t b) { return static_cast<std::uint8_t>(b ? 255 : 0); });
    write_raster(path, r);
}

BinaryMask read_mask_png(const std::filesystem::path& path, MaskKind kind)
{
    const Raster8 r = read_raster(path);
    BinaryMask mask(r.width, r.height, 0, kind);
    for (int p = 0; p < mask.num_pixels(); ++p) {
        mask.bits[static_cast<std::size_t>(p)] = r.data[static_cast<std::size_t>(p * r.channels)] >= 128 ? 1 : 0;
    }
    return mask;
}

void write_texture_png(const std::filesystem::path& path, const UvTexture& texture)
{
    Image image(texture.resolution, texture.resolution);
    image.rgb = texture.rgb;
    write_png(path, image);
}

UvTexture read_texture_png(const std::filesystem::path& path)
{
    const Image image = read_png(path);
    if (image.width != image.height || !is_power_of_two(image.width)) {
        throw IoError("texture PNG must be square with a power-of-two side: " + path.string());
    }
    UvTexture t(image.width, Vector3d::Zero());
    t.rgb = image.rgb;
    return t;
}

} // namespace io
} // namespace facetex

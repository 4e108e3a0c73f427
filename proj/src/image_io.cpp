// SPDX-License-Identifier: Apache-2.0
#include "tryonlab/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>

#include "tryonlab/error.hpp"

namespace tryonlab {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

} // namespace

Image8 read_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) raise(ErrorCode::CorruptImage, "cannot open image", path.string());

    png_byte header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8))
        raise(ErrorCode::CorruptImage, "not a PNG file", path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) raise(ErrorCode::IoFailure, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        raise(ErrorCode::IoFailure, "png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(ErrorCode::CorruptImage, "libpng decode error", path.string());
    }

    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const png_byte color = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);

    // Normalize everything to 8-bit gray or RGB.
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(ErrorCode::CorruptImage, "unsupported channel count", path.string());
    }

    Image8 image;
    image.height = static_cast<int>(height);
    image.width = static_cast<int>(width);
    image.channels = channels;
    image.pixels.resize(static_cast<std::size_t>(height) * width * channels);

    std::vector<png_bytep> rows(height);
    const std::size_t stride = static_cast<std::size_t>(width) * channels;
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = image.pixels.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return image;
}

void write_png(const std::filesystem::path& path, const Image8& image) {
    if (image.channels != 1 && image.channels != 3)
        raise(ErrorCode::IoFailure, "write_png supports 1 or 3 channels");
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) raise(ErrorCode::IoFailure, "cannot open file for writing", path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) raise(ErrorCode::IoFailure, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        raise(ErrorCode::IoFailure, "png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        raise(ErrorCode::IoFailure, "libpng encode error", path.string());
    }

    png_init_io(png, fp.get());
    // Fixed settings keep emitted bytes reproducible for identical inputs.
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
                 static_cast<png_uint_32>(image.height), 8,
                 image.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_bytep> rows(image.height);
    const std::size_t stride = static_cast<std::size_t>(image.width) * image.channels;
    for (int y = 0; y < image.height; ++y)
        rows[y] = const_cast<png_bytep>(image.pixels.data() + y * stride);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

std::uint8_t quantize8(float v) {
    if (!(v > 0.0f)) return 0;
    if (v >= 1.0f) return 255;
    return static_cast<std::uint8_t>(std::lround(v * 255.0f));
}

Image8 to_image8(const TensorF& chw) {
    if (chw.ndim() != 3 || (chw.dim(0) != 1 && chw.dim(0) != 3))
        raise(ErrorCode::ShapeMismatch, "to_image8 expects (1|3, H, W)");
    Image8 image;
    image.channels = chw.dim(0);
    image.height = chw.dim(1);
    image.width = chw.dim(2);
    image.pixels.resize(chw.numel());
    for (int c = 0; c < image.channels; ++c)
        for (int y = 0; y < image.height; ++y)
            for (int x = 0; x < image.width; ++x)
                image.at(y, x, c) = quantize8(chw.at(c, y, x));
    return image;
}

TensorF to_float(const Image8& image) {
    TensorF chw({image.channels, image.height, image.width});
    for (int c = 0; c < image.channels; ++c)
        for (int y = 0; y < image.height; ++y)
            for (int x = 0; x < image.width; ++x)
                chw.at(c, y, x) = dequantize8(image.at(y, x, c));
    return chw;
}

void snap_to_u8_grid(TensorF& chw) {
    for (std::size_t i = 0; i < chw.numel(); ++i) chw[i] = dequantize8(quantize8(chw[i]));
}

namespace {
constexpr float kFloMagic = 202021.25f;
}

TensorF read_flo(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) raise(ErrorCode::IoFailure, "cannot open flow file", path.string());
    float magic = 0;
    std::int32_t w = 0, h = 0;
    if (std::fread(&magic, 4, 1, fp.get()) != 1 || magic != kFloMagic)
        raise(ErrorCode::CorruptImage, "bad .flo magic", path.string());
    if (std::fread(&w, 4, 1, fp.get()) != 1 || std::fread(&h, 4, 1, fp.get()) != 1 || w <= 0 || h <= 0)
        raise(ErrorCode::CorruptImage, "bad .flo dimensions", path.string());

    std::vector<float> interleaved(static_cast<std::size_t>(w) * h * 2);
    if (std::fread(interleaved.data(), 4, interleaved.size(), fp.get()) != interleaved.size())
        raise(ErrorCode::CorruptImage, "truncated .flo payload", path.string());

    TensorF flow({2, h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t i = (static_cast<std::size_t>(y) * w + x) * 2;
            flow.at(0, y, x) = interleaved[i];
            flow.at(1, y, x) = interleaved[i + 1];
        }
    return flow;
}

void write_flo(const std::filesystem::path& path, const TensorF& flow) {
    if (flow.ndim() != 3 || flow.dim(0) != 2)
        raise(ErrorCode::ShapeMismatch, "write_flo expects (2, H, W)");
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) raise(ErrorCode::IoFailure, "cannot open flow file for writing", path.string());
    const std::int32_t h = flow.dim(1);
    const std::int32_t w = flow.dim(2);
    std::vector<float> interleaved(static_cast<std::size_t>(w) * h * 2);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t i = (static_cast<std::size_t>(y) * w + x) * 2;
            interleaved[i] = flow.at(0, y, x);
            interleaved[i + 1] = flow.at(1, y, x);
        }
    bool ok = std::fwrite(&kFloMagic, 4, 1, fp.get()) == 1 &&
              std::fwrite(&w, 4, 1, fp.get()) == 1 && std::fwrite(&h, 4, 1, fp.get()) == 1 &&
              std::fwrite(interleaved.data(), 4, interleaved.size(), fp.get()) == interleaved.size();
    if (!ok) raise(ErrorCode::IoFailure, "failed writing .flo payload", path.string());
}

} // namespace tryonlab

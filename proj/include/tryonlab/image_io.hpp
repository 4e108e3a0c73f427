// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "tryonlab/tensor.hpp"

namespace tryonlab {

/// 8-bit image buffer as stored on disk. Values are raw bytes; `channels`
/// is 1 (gray) or 3 (RGB).
struct Image8 {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<std::uint8_t> pixels; // HWC

    std::uint8_t& at(int y, int x, int c) {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t at(int y, int x, int c) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
};

Image8 read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image8& image);

/// Quantize a float image in [0,1] to the 8-bit grid (round-half-away),
/// the exact inverse of `to_float`.
std::uint8_t quantize8(float v);
inline float dequantize8(std::uint8_t v) { return static_cast<float>(v) / 255.0f; }

/// CHW float [0,1] <-> HWC 8-bit.
Image8 to_image8(const TensorF& chw);
TensorF to_float(const Image8& image);

/// Snap a float image onto the 8-bit grid in place: f -> dequantize(quantize(f)).
void snap_to_u8_grid(TensorF& chw);

/// Middlebury two-band float flow file. Stored as magic 202021.25f,
/// int32 width, int32 height, then row-major interleaved (dx, dy) floats.
/// In-memory layout here is (2, H, W) with channel 0 = dx, channel 1 = dy.
TensorF read_flo(const std::filesystem::path& path);
void write_flo(const std::filesystem::path& path, const TensorF& flow);

} // namespace tryonlab

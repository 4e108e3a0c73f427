// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tryonlab/tensor.hpp"

namespace tryonlab {

/// Bilinear lookup on a (C,H,W) image at real-valued (y, x), border clamped.
float bilinear_clamp(const TensorF& img, int c, float y, float x);

/// Bilinear lookup treating everything outside [0,H)x[0,W) as zero.
float bilinear_zero(const TensorF& img, int c, float y, float x);

/// Resize (C,H,W) -> (C,out_h,out_w) with bilinear sampling on pixel
/// centers: output pixel i samples input at (i + 0.5) * in/out - 0.5.
TensorF bilinear_resize(const TensorF& img, int out_h, int out_w);

/// Box average over factor x factor blocks; trailing partial blocks average
/// the pixels they actually cover, so output dims are ceil(in / factor).
TensorF box_downsample(const TensorF& img, int factor);

/// 2x2 mean pooling with stride 2; odd trailing row/column is dropped.
TensorF halve(const TensorF& img);

/// BT.601 luma (0.299 R + 0.587 G + 0.114 B) of a (3,H,W) image -> (H,W).
TensorF luma(const TensorF& rgb);

} // namespace tryonlab

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "tryonlab/dataset.hpp"
#include "tryonlab/tensor.hpp"

namespace tryonlab {

/// Thin-plate-spline sampling map. Control points live in the output
/// image's normalized coordinates ([-1,1], pixel-center convention:
/// u = (2x+1)/W - 1); the spline interpolates control -> target and each
/// output pixel backward-samples the cloth at its mapped target location.
/// Shifting every target by +0.25 in u therefore samples W/8 px to the
/// right, moving content left.
struct TpsParams {
    int grid = 5;               // G control points per side, >= 3
    std::vector<float> control; // 2*G*G interleaved (x,y), row-major lattice
    std::vector<float> target;  // 2*G*G interleaved (x,y)

    /// Canonical uniform G x G lattice spanning [-1,1] inclusive.
    static std::vector<float> uniform_lattice(int grid);
    static TpsParams identity(int grid = 5);
};

/// Text form: one header line "tps <G>" followed by the 2*G*G target
/// numbers, whitespace separated. The control grid is not stored; decoding
/// always pairs the targets with the canonical uniform lattice.
std::string tps_to_text(const TpsParams& params);
TpsParams tps_from_text(const std::string& text);

/// Warped garment ready for composition; image is zero wherever mask is.
struct WarpedCloth {
    TensorF image; // (3,H,W)
    TensorF mask;  // (H,W), values in {0,1}
};

/// Backward-sample the masked cloth through the spline with bilinear
/// interpolation; samples outside the cloth read as zero, and the warped
/// mask is thresholded at 0.5.
WarpedCloth tps_warp(const TensorF& cloth, const TensorF& cloth_mask, const TpsParams& params,
                     int out_h, int out_w);

/// Ground-truth stand-in for a trained warper during reconstruction
/// training: the frame restricted to its worn-garment mask.
WarpedCloth oracle_warp(const VideoSample& sample, int frame_idx);

} // namespace tryonlab

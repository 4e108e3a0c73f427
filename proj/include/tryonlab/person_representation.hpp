// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "tryonlab/dataset.hpp"
#include "tryonlab/tensor.hpp"

namespace tryonlab {

enum class PoseModeKind { coco, dense };

const char* pose_mode_name(PoseModeKind kind);
PoseModeKind pose_mode_from_name(const std::string& name);

struct PoseMode {
    PoseModeKind kind = PoseModeKind::dense;
    int heatmap_radius = 3; // px, coco rasterization only; >= 1
};

/// One named block of consecutive channels in a stacked input map.
struct ChannelBlock {
    std::string name;
    int channels = 0;
};

bool operator==(const ChannelBlock& a, const ChannelBlock& b);

/// Stacked per-frame network input: agnostic person (3), blurred body
/// shape (1), head region (3), then the pose block (18 keypoint discs or
/// 3 dense-surface channels).
struct PersonRepresentation {
    TensorF channels; // (C,H,W), C = sum of layout sizes
    std::vector<ChannelBlock> layout;

    int total_channels() const;
    int pose_channels() const;
    /// Bytes held by the pose block alone; the dense encoding is exactly
    /// one sixth of the keypoint encoding at equal resolution.
    std::size_t pose_block_bytes() const;
};

/// One solid unit-value disc per keypoint: channel i is 1 where the pixel
/// center lies within `radius` (L2) of point i, 0 elsewhere; absent points
/// give all-zero channels. Output (18,H,W).
TensorF rasterize_coco(const KeypointSet& keypoints, int height, int width, int radius);

/// Dense-surface encoding (3,H,W): part index / 24, then u, v unchanged.
TensorF encode_dense(const IUVMap& map);

/// Dense part indices treated as the head when carving the head region.
/// Covers both the synthetic corpus (2) and the 24-part convention where
/// the face occupies the last two slots.
inline constexpr int kHeadParts[] = {2, 23, 24};

PersonRepresentation build_representation(const VideoSample& sample, int frame_idx,
                                          const PoseMode& mode);

} // namespace tryonlab

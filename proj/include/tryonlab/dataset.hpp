// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tryonlab/tensor.hpp"

namespace tryonlab {

enum class Split { train, val, test };

const char* split_name(Split split);
Split split_from_name(const std::string& name);

/// On-disk layout, rooted at <root>/<split>/<video_id>/:
///   frames/%05d.png            RGB frames, contiguously indexed from 0
///   cloth/product.png          isolated cloth product image
///   cloth/product_mask.png     binary product mask
///   garment_mask/%05d.png      per-frame binary mask of the worn garment
///   pose_coco/%05d.json        18 keypoint entries (x, y, confidence), null = absent
///   pose_dense/%05d.png        R = part index, G = U*255, B = V*255
///   flow/%05d.flo              flow warping frame t onto frame t+1 (count = frames-1)
struct VvtLayout {
    static std::filesystem::path video_dir(const std::filesystem::path& root, Split split,
                                           const std::string& video_id);
    static std::filesystem::path frame(const std::filesystem::path& vdir, int idx);
    static std::filesystem::path cloth(const std::filesystem::path& vdir);
    static std::filesystem::path cloth_mask(const std::filesystem::path& vdir);
    static std::filesystem::path garment_mask(const std::filesystem::path& vdir, int idx);
    static std::filesystem::path pose_coco(const std::filesystem::path& vdir, int idx);
    static std::filesystem::path pose_dense(const std::filesystem::path& vdir, int idx);
    static std::filesystem::path flow(const std::filesystem::path& vdir, int idx);
};

struct DatasetManifest {
    std::filesystem::path root;
    Split split = Split::train;
    std::vector<std::string> video_ids; // sorted; iteration order is deterministic
    int height = 0;
    int width = 0;
    std::map<std::string, int> frame_counts;

    int frame_count(const std::string& video_id) const;
    std::filesystem::path video_dir(const std::string& video_id) const {
        return VvtLayout::video_dir(root, split, video_id);
    }
};

struct Keypoint {
    float x = 0;
    float y = 0;
    float confidence = 1.0f;
};

/// 18-slot CocoPose keypoint set; absent points carry no coordinates.
struct KeypointSet {
    static constexpr int kNumPoints = 18;
    std::array<std::optional<Keypoint>, kNumPoints> points;
};

/// Dense per-pixel body annotation: part index image (0 = background,
/// values bounded by kNumParts) plus normalized surface coordinates.
struct IUVMap {
    static constexpr int kNumParts = 24;
    Tensor<std::uint8_t> part; // (H, W)
    TensorF u;                 // (H, W) in [0,1]
    TensorF v;                 // (H, W) in [0,1]
};

struct VideoSample {
    std::string video_id;
    int frame_start = 0;              // dataset index of frames[0]
    std::vector<TensorF> frames;      // (3, H, W), values in [0,1]
    TensorF cloth;                    // (3, H, W)
    TensorF cloth_mask;               // (H, W), values in {0,1}
    std::vector<TensorF> garment_masks; // per frame, (H, W), values in {0,1}
    std::optional<std::vector<KeypointSet>> pose_coco;
    std::optional<std::vector<IUVMap>> pose_dense;

    int frame_count() const { return static_cast<int>(frames.size()); }
    int height() const { return frames.empty() ? 0 : frames[0].dim(1); }
    int width() const { return frames.empty() ? 0 : frames[0].dim(2); }
};

DatasetManifest scan_manifest(const std::filesystem::path& root, Split split);

VideoSample load_sample(const DatasetManifest& manifest, const std::string& video_id,
                        std::pair<int, int> frame_range);
VideoSample load_sample(const DatasetManifest& manifest, const std::string& video_id);

/// Flow field warping frame `t` onto frame `t+1`; valid t in [0, frames-2].
TensorF load_flow(const DatasetManifest& manifest, const std::string& video_id, int t);

KeypointSet parse_keypoint_json(const std::string& text, int height, int width,
                                const std::string& origin);
std::string keypoint_json(const KeypointSet& set);

struct SyntheticSpec {
    int num_videos = 4;
    int frames_per_video = 8;
    int height = 64;
    int width = 48;
    std::uint64_t seed = 0;
};

/// Procedural stand-in corpus in the exact on-disk layout above. Writes a
/// train split with `num_videos` videos plus smaller val/test splits
/// (max(1, num_videos/4) videos each) drawn from independent seed streams.
/// Deterministic for a fixed spec. Returns the train-split manifest.
DatasetManifest generate_synthetic(const std::filesystem::path& root, const SyntheticSpec& spec);

/// In-memory render of one synthetic video, exposed so tests can compare
/// written trees against the generator's own arrays.
struct SyntheticVideo {
    std::string video_id;
    std::vector<TensorF> frames;        // snapped to the 8-bit grid
    TensorF cloth;
    TensorF cloth_mask;
    std::vector<TensorF> garment_masks;
    std::vector<KeypointSet> keypoints;
    std::vector<IUVMap> iuv;
    std::vector<TensorF> flows;         // frames-1 entries, (2, H, W)
};

SyntheticVideo render_synthetic_video(const SyntheticSpec& spec, Split split, int video_index);

} // namespace tryonlab

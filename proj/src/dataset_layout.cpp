// SPDX-License-Identifier: Apache-2.0
#include <cstdio>

#include "tryonlab/dataset.hpp"
#include "tryonlab/error.hpp"

namespace tryonlab {

namespace fs = std::filesystem;

const char* split_name(Split split) {
    switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    }
    return "train";
}

Split split_from_name(const std::string& name) {
    if (name == "train") return Split::train;
    if (name == "val") return Split::val;
    if (name == "test") return Split::test;
    raise(ErrorCode::ConfigInvalid, "unknown split", name);
}

namespace {
std::string indexed(const char* stem, int idx, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s/%05d%s", stem, idx, ext);
    return buf;
}
} // namespace

fs::path VvtLayout::video_dir(const fs::path& root, Split split, const std::string& video_id) {
    return root / split_name(split) / video_id;
}
fs::path VvtLayout::frame(const fs::path& vdir, int idx) { return vdir / indexed("frames", idx, ".png"); }
fs::path VvtLayout::cloth(const fs::path& vdir) { return vdir / "cloth/product.png"; }
fs::path VvtLayout::cloth_mask(const fs::path& vdir) { return vdir / "cloth/product_mask.png"; }
fs::path VvtLayout::garment_mask(const fs::path& vdir, int idx) {
    return vdir / indexed("garment_mask", idx, ".png");
}
fs::path VvtLayout::pose_coco(const fs::path& vdir, int idx) {
    return vdir / indexed("pose_coco", idx, ".json");
}
fs::path VvtLayout::pose_dense(const fs::path& vdir, int idx) {
    return vdir / indexed("pose_dense", idx, ".png");
}
fs::path VvtLayout::flow(const fs::path& vdir, int idx) { return vdir / indexed("flow", idx, ".flo"); }

int DatasetManifest::frame_count(const std::string& video_id) const {
    auto it = frame_counts.find(video_id);
    if (it == frame_counts.end())
        raise(ErrorCode::IndexOutOfRange, "video not in manifest", video_id);
    return it->second;
}

} // namespace tryonlab

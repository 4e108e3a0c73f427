// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tryonlab/dataset.hpp"
#include "tryonlab/error.hpp"
#include "tryonlab/image_io.hpp"

namespace tryonlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int count_indexed_files(const fs::path& dir, const char* ext) {
    if (!fs::exists(dir)) return 0;
    int n = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ext) n++;
    }
    return n;
}

void require_file(const fs::path& p, const std::string& video_id, const char* kind) {
    if (!fs::exists(p))
        raise(ErrorCode::MissingAnnotation, std::string("missing ") + kind, video_id + ": " + p.string());
}

TensorF load_binary_mask(const fs::path& path) {
    Image8 img = read_png(path);
    TensorF mask({img.height, img.width});
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            mask.at(y, x) = img.at(y, x, 0) >= 128 ? 1.0f : 0.0f;
    return mask;
}

TensorF load_rgb(const fs::path& path) {
    Image8 img = read_png(path);
    if (img.channels != 3) raise(ErrorCode::CorruptImage, "expected RGB image", path.string());
    return to_float(img);
}

IUVMap load_iuv(const fs::path& path) {
    Image8 img = read_png(path);
    if (img.channels != 3) raise(ErrorCode::CorruptImage, "expected 3-channel IUV image", path.string());
    IUVMap map;
    map.part = Tensor<std::uint8_t>({img.height, img.width});
    map.u = TensorF({img.height, img.width});
    map.v = TensorF({img.height, img.width});
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const std::uint8_t part = img.at(y, x, 0);
            if (part > IUVMap::kNumParts)
                raise(ErrorCode::PartIndexOutOfRange, "part index exceeds 24", path.string());
            map.part.at(y, x) = part;
            if (part == 0) {
                map.u.at(y, x) = 0.0f;
                map.v.at(y, x) = 0.0f;
            } else {
                map.u.at(y, x) = dequantize8(img.at(y, x, 1));
                map.v.at(y, x) = dequantize8(img.at(y, x, 2));
            }
        }
    return map;
}

} // namespace

KeypointSet parse_keypoint_json(const std::string& text, int height, int width,
                                const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        raise(ErrorCode::CorruptImage, std::string("unparseable keypoint json: ") + e.what(), origin);
    }
    if (!doc.is_object() || !doc.contains("points") || !doc["points"].is_array() ||
        doc["points"].size() != KeypointSet::kNumPoints)
        raise(ErrorCode::CorruptImage, "keypoint json must hold exactly 18 points", origin);

    KeypointSet set;
    for (int i = 0; i < KeypointSet::kNumPoints; ++i) {
        const json& p = doc["points"][i];
        if (p.is_null()) continue;
        Keypoint kp;
        kp.x = p.at("x").get<float>();
        kp.y = p.at("y").get<float>();
        kp.confidence = p.at("confidence").get<float>();
        if (kp.x < 0 || kp.x >= static_cast<float>(width) || kp.y < 0 ||
            kp.y >= static_cast<float>(height))
            raise(ErrorCode::CorruptImage, "keypoint outside image bounds", origin);
        if (kp.confidence < 0.0f || kp.confidence > 1.0f)
            raise(ErrorCode::CorruptImage, "keypoint confidence outside [0,1]", origin);
        set.points[i] = kp;
    }
    return set;
}

std::string keypoint_json(const KeypointSet& set) {
    json points = json::array();
    for (const auto& p : set.points) {
        if (!p) {
            points.push_back(nullptr);
        } else {
            points.push_back({{"x", p->x}, {"y", p->y}, {"confidence", p->confidence}});
        }
    }
    return json{{"points", points}}.dump();
}

DatasetManifest scan_manifest(const fs::path& root, Split split) {
    const fs::path split_dir = root / split_name(split);
    if (!fs::exists(split_dir))
        raise(ErrorCode::EmptyDataset, "split directory does not exist", split_dir.string());

    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(split_dir)) {
        if (entry.is_directory()) ids.push_back(entry.path().filename().string());
    }
    std::sort(ids.begin(), ids.end());
    if (ids.empty()) raise(ErrorCode::EmptyDataset, "no videos found", split_dir.string());

    DatasetManifest manifest;
    manifest.root = root;
    manifest.split = split;

    for (const std::string& id : ids) {
        const fs::path vdir = split_dir / id;
        const int n = count_indexed_files(vdir / "frames", ".png");
        if (n < 1)
            raise(ErrorCode::MissingAnnotation, "missing frames", id);
        for (int i = 0; i < n; ++i) require_file(VvtLayout::frame(vdir, i), id, "frames");
        require_file(VvtLayout::cloth(vdir), id, "cloth");
        require_file(VvtLayout::cloth_mask(vdir), id, "cloth_mask");
        for (int i = 0; i < n; ++i) {
            require_file(VvtLayout::garment_mask(vdir, i), id, "garment_mask");
            require_file(VvtLayout::pose_coco(vdir, i), id, "pose_coco");
            require_file(VvtLayout::pose_dense(vdir, i), id, "pose_dense");
        }
        for (int i = 0; i + 1 < n; ++i) require_file(VvtLayout::flow(vdir, i), id, "flow");
        manifest.video_ids.push_back(id);
        manifest.frame_counts[id] = n;
    }

    const Image8 probe = read_png(VvtLayout::frame(split_dir / ids[0], 0));
    manifest.height = probe.height;
    manifest.width = probe.width;
    return manifest;
}

VideoSample load_sample(const DatasetManifest& manifest, const std::string& video_id,
                        std::pair<int, int> frame_range) {
    const int n = manifest.frame_count(video_id);
    const auto [start, end] = frame_range;
    if (start < 0 || end > n || start >= end)
        raise(ErrorCode::IndexOutOfRange, "invalid frame range",
              video_id + ": [" + std::to_string(start) + "," + std::to_string(end) + ") of " +
                  std::to_string(n));

    const fs::path vdir = manifest.video_dir(video_id);
    VideoSample sample;
    sample.video_id = video_id;
    sample.frame_start = start;
    sample.cloth = load_rgb(VvtLayout::cloth(vdir));
    sample.cloth_mask = load_binary_mask(VvtLayout::cloth_mask(vdir));

    std::vector<KeypointSet> coco;
    std::vector<IUVMap> dense;
    for (int i = start; i < end; ++i) {
        TensorF frame = load_rgb(VvtLayout::frame(vdir, i));
        if (!sample.frames.empty() &&
            (frame.dim(1) != sample.frames[0].dim(1) || frame.dim(2) != sample.frames[0].dim(2)))
            raise(ErrorCode::CorruptImage, "frame size mismatch within video",
                  VvtLayout::frame(vdir, i).string());
        const int h = frame.dim(1), w = frame.dim(2);
        sample.frames.push_back(std::move(frame));
        sample.garment_masks.push_back(load_binary_mask(VvtLayout::garment_mask(vdir, i)));

        const fs::path kp_path = VvtLayout::pose_coco(vdir, i);
        std::ifstream in(kp_path);
        if (!in) raise(ErrorCode::CorruptImage, "cannot read keypoint file", kp_path.string());
        std::stringstream buf;
        buf << in.rdbuf();
        coco.push_back(parse_keypoint_json(buf.str(), h, w, kp_path.string()));
        dense.push_back(load_iuv(VvtLayout::pose_dense(vdir, i)));
    }
    sample.pose_coco = std::move(coco);
    sample.pose_dense = std::move(dense);
    return sample;
}

VideoSample load_sample(const DatasetManifest& manifest, const std::string& video_id) {
    return load_sample(manifest, video_id, {0, manifest.frame_count(video_id)});
}

TensorF load_flow(const DatasetManifest& manifest, const std::string& video_id, int t) {
    const int n = manifest.frame_count(video_id);
    if (t < 0 || t >= n - 1)
        raise(ErrorCode::IndexOutOfRange, "flow index out of range",
              video_id + ": " + std::to_string(t));
    return read_flo(VvtLayout::flow(manifest.video_dir(video_id), t));
}

} // namespace tryonlab

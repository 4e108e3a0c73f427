// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "tryonlab/error.hpp"
#include "tryonlab/image_ops.hpp"
#include "tryonlab/person_representation.hpp"

namespace tryonlab {

const char* pose_mode_name(PoseModeKind kind) {
    return kind == PoseModeKind::coco ? "coco" : "dense";
}

PoseModeKind pose_mode_from_name(const std::string& name) {
    if (name == "coco") return PoseModeKind::coco;
    if (name == "dense") return PoseModeKind::dense;
    raise(ErrorCode::ConfigInvalid, "unknown pose mode", name);
}

bool operator==(const ChannelBlock& a, const ChannelBlock& b) {
    return a.name == b.name && a.channels == b.channels;
}

int PersonRepresentation::total_channels() const {
    int c = 0;
    for (const ChannelBlock& block : layout) c += block.channels;
    return c;
}

int PersonRepresentation::pose_channels() const {
    for (const ChannelBlock& block : layout)
        if (block.name == "pose") return block.channels;
    return 0;
}

std::size_t PersonRepresentation::pose_block_bytes() const {
    return static_cast<std::size_t>(pose_channels()) * channels.plane() * sizeof(float);
}

TensorF rasterize_coco(const KeypointSet& keypoints, int height, int width, int radius) {
    if (height < 1 || width < 1) raise(ErrorCode::ConfigInvalid, "rasterization size must be positive");
    if (radius < 1) raise(ErrorCode::ConfigInvalid, "heatmap radius must be >= 1");
    TensorF out({KeypointSet::kNumPoints, height, width});
    for (int i = 0; i < KeypointSet::kNumPoints; ++i) {
        if (!keypoints.points[i]) continue;
        const float cx = keypoints.points[i]->x, cy = keypoints.points[i]->y;
        const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
        const int y1 = std::min(height - 1, static_cast<int>(std::ceil(cy + radius)));
        const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
        const int x1 = std::min(width - 1, static_cast<int>(std::ceil(cx + radius)));
        const float r2 = static_cast<float>(radius) * static_cast<float>(radius);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                const float dx = static_cast<float>(x) - cx, dy = static_cast<float>(y) - cy;
                if (dx * dx + dy * dy <= r2) out.at(i, y, x) = 1.0f;
            }
    }
    return out;
}

TensorF encode_dense(const IUVMap& map) {
    const int h = map.part.dim(0), w = map.part.dim(1);
    TensorF out({3, h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int part = map.part.at(y, x);
            if (part > IUVMap::kNumParts)
                raise(ErrorCode::PartIndexOutOfRange, "part index exceeds 24");
            out.at(0, y, x) = static_cast<float>(part) / IUVMap::kNumParts;
            out.at(1, y, x) = map.u.at(y, x);
            out.at(2, y, x) = map.v.at(y, x);
        }
    return out;
}

namespace {

struct Pt {
    double x, y;
};

double cross(Pt o, Pt a, Pt b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

// Monotone-chain convex hull; returns CCW vertices, degenerate inputs give
// fewer than 3 vertices.
std::vector<Pt> convex_hull(std::vector<Pt> pts) {
    std::sort(pts.begin(), pts.end(),
              [](Pt a, Pt b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](Pt a, Pt b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    const int n = static_cast<int>(pts.size());
    if (n < 3) return pts;
    std::vector<Pt> hull(2 * n);
    int k = 0;
    for (int i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const int lower = k + 1;
    for (int i = n - 2; i >= 0; --i) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

bool inside_hull(const std::vector<Pt>& hull, Pt p) {
    const int n = static_cast<int>(hull.size());
    for (int i = 0; i < n; ++i)
        if (cross(hull[i], hull[(i + 1) % n], p) < 0) return false;
    return true;
}

// Person silhouette before blurring: union of dense parts, or the filled
// keypoint convex hull (discs when too few points span an area).
TensorF silhouette_dense(const IUVMap& map) {
    const int h = map.part.dim(0), w = map.part.dim(1);
    TensorF sil({1, h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) sil.at(0, y, x) = map.part.at(y, x) > 0 ? 1.0f : 0.0f;
    return sil;
}

TensorF silhouette_coco(const KeypointSet& keypoints, int h, int w, int radius) {
    std::vector<Pt> pts;
    for (const auto& p : keypoints.points)
        if (p) pts.push_back({p->x, p->y});
    TensorF sil({1, h, w});
    const std::vector<Pt> hull = convex_hull(pts);
    if (hull.size() >= 3) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                sil.at(0, y, x) =
                    inside_hull(hull, {static_cast<double>(x), static_cast<double>(y)}) ? 1.0f : 0.0f;
        return sil;
    }
    const double r = std::max(2, radius);
    for (const Pt& c : pts)
        for (int y = std::max(0, static_cast<int>(c.y - r)); y <= std::min(h - 1, static_cast<int>(c.y + r)); ++y)
            for (int x = std::max(0, static_cast<int>(c.x - r)); x <= std::min(w - 1, static_cast<int>(c.x + r)); ++x)
                if ((x - c.x) * (x - c.x) + (y - c.y) * (y - c.y) <= r * r) sil.at(0, y, x) = 1.0f;
    return sil;
}

bool is_head_part(int part) {
    for (int head : kHeadParts)
        if (part == head) return true;
    return false;
}

} // namespace

PersonRepresentation build_representation(const VideoSample& sample, int frame_idx,
                                          const PoseMode& mode) {
    if (mode.heatmap_radius < 1) raise(ErrorCode::ConfigInvalid, "heatmap radius must be >= 1");
    if (frame_idx < 0 || frame_idx >= sample.frame_count())
        raise(ErrorCode::IndexOutOfRange, "frame index out of range", std::to_string(frame_idx));
    const bool coco = mode.kind == PoseModeKind::coco;
    if (coco && !sample.pose_coco)
        raise(ErrorCode::AnnotationUnavailable, "keypoint annotations not loaded", sample.video_id);
    if (!coco && !sample.pose_dense)
        raise(ErrorCode::AnnotationUnavailable, "dense annotations not loaded", sample.video_id);

    const TensorF& frame = sample.frames[frame_idx];
    const TensorF& garment = sample.garment_masks[frame_idx];
    const int h = frame.dim(1), w = frame.dim(2);

    TensorF agnostic({3, h, w});
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                agnostic.at(c, y, x) = frame.at(c, y, x) * (1.0f - garment.at(y, x));

    const TensorF sil = coco
                            ? silhouette_coco((*sample.pose_coco)[frame_idx], h, w, mode.heatmap_radius)
                            : silhouette_dense((*sample.pose_dense)[frame_idx]);
    const TensorF body_shape = bilinear_resize(box_downsample(sil, 8), h, w);

    TensorF head({3, h, w});
    if (coco) {
        // Face box from nose, eyes, and ears; keypoint slots 0 and 14..17.
        const KeypointSet& kps = (*sample.pose_coco)[frame_idx];
        float x0 = 1e9f, y0 = 1e9f, x1 = -1e9f, y1 = -1e9f;
        bool any = false;
        for (int i : {0, 14, 15, 16, 17}) {
            if (!kps.points[i]) continue;
            any = true;
            x0 = std::min(x0, kps.points[i]->x);
            x1 = std::max(x1, kps.points[i]->x);
            y0 = std::min(y0, kps.points[i]->y);
            y1 = std::max(y1, kps.points[i]->y);
        }
        if (any) {
            const float pad = static_cast<float>(std::max(2, mode.heatmap_radius));
            for (int c = 0; c < 3; ++c)
                for (int y = 0; y < h; ++y)
                    for (int x = 0; x < w; ++x) {
                        const bool in = x >= x0 - pad && x <= x1 + pad && y >= y0 - pad && y <= y1 + pad;
                        head.at(c, y, x) = in ? frame.at(c, y, x) : 0.0f;
                    }
        }
    } else {
        const IUVMap& map = (*sample.pose_dense)[frame_idx];
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (is_head_part(map.part.at(y, x)))
                    for (int c = 0; c < 3; ++c) head.at(c, y, x) = frame.at(c, y, x);
    }

    const TensorF pose = coco ? rasterize_coco((*sample.pose_coco)[frame_idx], h, w, mode.heatmap_radius)
                              : encode_dense((*sample.pose_dense)[frame_idx]);

    PersonRepresentation rep;
    rep.layout = {{"agnostic_person", 3},
                  {"body_shape", 1},
                  {"head_region", 3},
                  {"pose", pose.dim(0)}};
    rep.channels = concat_channels(std::vector<const TensorF*>{&agnostic, &body_shape, &head, &pose});
    if (!rep.channels.all_finite())
        raise(ErrorCode::CorruptImage, "non-finite person representation", sample.video_id);
    return rep;
}

} // namespace tryonlab

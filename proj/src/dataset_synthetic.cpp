// SPDX-License-Identifier: Apache-2.0
//
// Procedural stand-in corpus: an articulated stick figure (head, torso,
// limbs as capsules) sways and swings its arms in front of a dark
// gradient background. The torso region doubles as the worn garment and
// carries a smooth high-frequency texture; every annotation (keypoints,
// IUV, garment mask, flow) is derived analytically from the same part
// poses that drive rendering, so all ground truth is exact by
// construction. Shapes and textures are kept C1-smooth so that bilinear
// backward warping reproduces frames to well under the documented flow
// tolerance.

#include <array>
#include <cmath>
#include <fstream>

#include "tryonlab/dataset.hpp"
#include "tryonlab/error.hpp"
#include "tryonlab/image_io.hpp"
#include "tryonlab/rng.hpp"

namespace tryonlab {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEdge = 0.9; // half-width in px of the smooth silhouette edge

struct Vec2 {
    double x = 0, y = 0;
};
Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

double clamp01(double v) { return v < 0 ? 0 : (v > 1 ? 1 : v); }
double smoothstep(double a, double b, double x) {
    const double t = clamp01((x - a) / (b - a));
    return t * t * (3 - 2 * t);
}

struct Rgb {
    double r = 0, g = 0, b = 0;
};
Rgb lerp(Rgb a, Rgb b, double t) {
    return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

enum class PatternKind { stripes, checker, blobs };

struct GlyphBlob {
    double u, v, sigma, weight;
};

struct GarmentStyle {
    PatternKind pattern = PatternKind::stripes;
    double wavelength = 10.0; // px, kept >= 8 so bilinear sampling stays accurate
    double angle = 0.0;
    Rgb color_a, color_b;
    std::vector<GlyphBlob> blobs;

    Rgb sample(double u, double v) const {
        double w = 0.5;
        switch (pattern) {
        case PatternKind::stripes: {
            const double s = u * std::cos(angle) + v * std::sin(angle);
            w = 0.5 + 0.5 * std::sin(2 * kPi * s / wavelength);
            break;
        }
        case PatternKind::checker:
            w = 0.5 + 0.5 * std::sin(2 * kPi * u / wavelength) * std::sin(2 * kPi * v / wavelength);
            break;
        case PatternKind::blobs: {
            double acc = 0;
            for (const GlyphBlob& blob : blobs) {
                const double du = u - blob.u, dv = v - blob.v;
                acc += blob.weight * std::exp(-(du * du + dv * dv) / (2 * blob.sigma * blob.sigma));
            }
            w = clamp01(acc);
            break;
        }
        }
        return lerp(color_a, color_b, w);
    }
};

// Body part as a capsule (segment a->b plus radius). The local frame
// (axis along the segment, perpendicular across it) moves rigidly with
// the part, which is what makes texture motion and flow exact.
struct PartPose {
    int part_index = 0;
    Vec2 a, b;
    double radius = 1;

    double length() const { return norm(b - a); }
    void local_axes(Vec2& u_axis, Vec2& v_axis) const {
        Vec2 d = b - a;
        const double len = norm(d);
        v_axis = len > 1e-12 ? (1.0 / len) * d : Vec2{0, 1};
        u_axis = {-v_axis.y, v_axis.x};
    }
    Vec2 to_local(Vec2 p) const {
        Vec2 u_axis, v_axis;
        local_axes(u_axis, v_axis);
        Vec2 d = p - a;
        return {dot(d, u_axis), dot(d, v_axis)};
    }
    Vec2 to_world(Vec2 local) const {
        Vec2 u_axis, v_axis;
        local_axes(u_axis, v_axis);
        return a + local.x * u_axis + local.y * v_axis;
    }
    double sdf(Vec2 p) const {
        const Vec2 local = to_local(p);
        const double t = std::min(std::max(local.y, 0.0), length());
        const double dx = local.x, dy = local.y - t;
        return std::sqrt(dx * dx + dy * dy) - radius;
    }
};

// Fixed identifiers; the torso is the worn garment.
enum PartId : int {
    kTorso = 1,
    kHead = 2,
    kUpperArmL = 3,
    kUpperArmR = 4,
    kLowerArmL = 5,
    kLowerArmR = 6,
    kUpperLegL = 7,
    kUpperLegR = 8,
    kLowerLegL = 9,
    kLowerLegR = 10,
};

struct FigureStyle {
    double fig_height;  // px
    double pelvis_y;    // px
    double sway_amp_x;  // px
    double sway_amp_y;  // px
    double sway_freq;
    double sway_phase;
    double arm_base_l, arm_base_r; // rad, from straight down, positive = outward
    double arm_amp;
    double arm_freq;
    double arm_phase;
    double elbow_bend;
    double leg_swing;
    Rgb skin, pants, hair;
    Rgb bg_top, bg_bottom;
    GarmentStyle garment;
    std::array<bool, KeypointSet::kNumPoints> keypoint_present{};
};

struct FigureFrame {
    std::vector<PartPose> parts; // painter order, last drawn on top
    std::array<Vec2, KeypointSet::kNumPoints> joints;
};

// COCO/OpenPose keypoint slots.
enum KpId : int {
    kKpNose = 0,
    kKpNeck = 1,
    kKpRShoulder = 2,
    kKpRElbow = 3,
    kKpRWrist = 4,
    kKpLShoulder = 5,
    kKpLElbow = 6,
    kKpLWrist = 7,
    kKpRHip = 8,
    kKpRKnee = 9,
    kKpRAnkle = 10,
    kKpLHip = 11,
    kKpLKnee = 12,
    kKpLAnkle = 13,
    kKpREye = 14,
    kKpLEye = 15,
    kKpREar = 16,
    kKpLEar = 17,
};

FigureStyle make_style(Rng& rng, int height, int width) {
    FigureStyle s;
    s.fig_height = height * rng.uniform(0.70, 0.78);
    s.pelvis_y = height * rng.uniform(0.58, 0.62);
    // Per-frame displacements stay below ~2 px so consecutive frames are
    // related by small, bilinear-friendly motion.
    s.sway_amp_x = width * rng.uniform(0.02, 0.045);
    s.sway_amp_y = height * rng.uniform(0.004, 0.010);
    s.sway_freq = rng.index(2) == 0 ? 0.5 : 1.0;
    s.sway_phase = rng.uniform(0, 1);
    s.arm_base_l = rng.uniform(0.35, 0.55);
    s.arm_base_r = rng.uniform(0.35, 0.55);
    s.arm_amp = rng.uniform(0.08, 0.18);
    s.arm_freq = rng.index(2) == 0 ? 0.5 : 1.0;
    s.arm_phase = rng.uniform(0, 1);
    s.elbow_bend = rng.uniform(0.2, 0.4);
    s.leg_swing = rng.uniform(0.02, 0.05);

    s.skin = {rng.uniform(0.70, 0.85), rng.uniform(0.55, 0.68), rng.uniform(0.45, 0.58)};
    s.pants = {rng.uniform(0.15, 0.30), rng.uniform(0.15, 0.30), rng.uniform(0.25, 0.45)};
    s.hair = {rng.uniform(0.10, 0.35), rng.uniform(0.08, 0.25), rng.uniform(0.05, 0.20)};
    s.bg_top = {rng.uniform(0.04, 0.10), rng.uniform(0.04, 0.10), rng.uniform(0.06, 0.14)};
    s.bg_bottom = {s.bg_top.r + 0.05, s.bg_top.g + 0.05, s.bg_top.b + 0.05};

    GarmentStyle& g = s.garment;
    const int kind = static_cast<int>(rng.index(3));
    g.pattern = kind == 0 ? PatternKind::stripes : (kind == 1 ? PatternKind::checker : PatternKind::blobs);
    g.wavelength = rng.uniform(8.0, 13.0);
    g.angle = rng.uniform(0, kPi);
    // Bright, saturated two-color palette against the dark background.
    g.color_a = {rng.uniform(0.55, 0.95), rng.uniform(0.25, 0.65), rng.uniform(0.25, 0.65)};
    g.color_b = {rng.uniform(0.25, 0.65), rng.uniform(0.55, 0.95), rng.uniform(0.35, 0.85)};
    if (g.pattern == PatternKind::blobs) {
        const int count = 6 + static_cast<int>(rng.index(5));
        for (int i = 0; i < count; ++i) {
            GlyphBlob blob;
            blob.u = rng.uniform(-8.0, 8.0);
            blob.v = rng.uniform(0.0, 16.0);
            blob.sigma = rng.uniform(2.0, 3.5);
            blob.weight = rng.uniform(0.7, 1.2);
            g.blobs.push_back(blob);
        }
    }

    s.keypoint_present.fill(true);
    if (rng.uniform(0, 1) < 0.25) s.keypoint_present[kKpREar] = false;
    if (rng.uniform(0, 1) < 0.25) s.keypoint_present[kKpLEar] = false;
    return s;
}

FigureFrame pose_figure(const FigureStyle& s, int width, double t01) {
    const double fh = s.fig_height;
    const double cx = width * 0.5 + s.sway_amp_x * std::sin(2 * kPi * (s.sway_freq * t01 + s.sway_phase));
    const double cy = s.pelvis_y + s.sway_amp_y * std::sin(2 * kPi * (s.sway_freq * t01 + s.sway_phase + 0.3));

    FigureFrame f;
    const Vec2 pelvis{cx, cy};
    const Vec2 neck = pelvis - Vec2{0, 0.30 * fh};
    const Vec2 head_c = neck - Vec2{0, 0.115 * fh};
    const double head_r = 0.085 * fh;

    const Vec2 sho_l = neck + Vec2{-0.155 * fh, 0.012 * fh};
    const Vec2 sho_r = neck + Vec2{+0.155 * fh, 0.012 * fh};
    const Vec2 hip_l = pelvis + Vec2{-0.085 * fh, 0};
    const Vec2 hip_r = pelvis + Vec2{+0.085 * fh, 0};

    const double swing = std::sin(2 * kPi * (s.arm_freq * t01 + s.arm_phase));
    const double ang_l = s.arm_base_l + s.arm_amp * swing;         // outward from down
    const double ang_r = s.arm_base_r - s.arm_amp * swing;
    const double upper_arm = 0.155 * fh, lower_arm = 0.145 * fh;

    auto arm_dir = [](double outward, int side) {
        // side -1 = left (screen -x), +1 = right; angle measured from straight down
        return Vec2{side * std::sin(outward), std::cos(outward)};
    };
    const Vec2 elb_l = sho_l + upper_arm * arm_dir(ang_l, -1);
    const Vec2 elb_r = sho_r + upper_arm * arm_dir(ang_r, +1);
    const Vec2 wri_l = elb_l + lower_arm * arm_dir(ang_l + s.elbow_bend * (0.5 + 0.5 * swing), -1);
    const Vec2 wri_r = elb_r + lower_arm * arm_dir(ang_r + s.elbow_bend * (0.5 - 0.5 * swing), +1);

    const double leg = std::sin(2 * kPi * (s.sway_freq * t01 + s.sway_phase + 0.15));
    const double upper_leg = 0.20 * fh, lower_leg = 0.185 * fh;
    const Vec2 kne_l = hip_l + upper_leg * Vec2{-s.leg_swing * leg, 1.0};
    const Vec2 kne_r = hip_r + upper_leg * Vec2{+s.leg_swing * leg, 1.0};
    const Vec2 ank_l = kne_l + lower_leg * Vec2{+s.leg_swing * 0.5 * leg, 1.0};
    const Vec2 ank_r = kne_r + lower_leg * Vec2{-s.leg_swing * 0.5 * leg, 1.0};

    const double arm_r = 0.045 * fh, leg_r = 0.055 * fh, torso_r = 0.175 * fh;

    // Painter order: legs, torso (garment), head, arms on top.
    f.parts = {
        {kUpperLegL, hip_l, kne_l, leg_r},
        {kUpperLegR, hip_r, kne_r, leg_r},
        {kLowerLegL, kne_l, ank_l, leg_r * 0.9},
        {kLowerLegR, kne_r, ank_r, leg_r * 0.9},
        {kTorso, neck, pelvis, torso_r},
        {kHead, head_c, head_c + Vec2{0, 1e-6}, head_r},
        {kUpperArmL, sho_l, elb_l, arm_r},
        {kUpperArmR, sho_r, elb_r, arm_r},
        {kLowerArmL, elb_l, wri_l, arm_r * 0.9},
        {kLowerArmR, elb_r, wri_r, arm_r * 0.9},
    };

    f.joints[kKpNose] = head_c + Vec2{0, 0.01 * fh};
    f.joints[kKpNeck] = neck;
    f.joints[kKpRShoulder] = sho_r;
    f.joints[kKpRElbow] = elb_r;
    f.joints[kKpRWrist] = wri_r;
    f.joints[kKpLShoulder] = sho_l;
    f.joints[kKpLElbow] = elb_l;
    f.joints[kKpLWrist] = wri_l;
    f.joints[kKpRHip] = hip_r;
    f.joints[kKpRKnee] = kne_r;
    f.joints[kKpRAnkle] = ank_r;
    f.joints[kKpLHip] = hip_l;
    f.joints[kKpLKnee] = kne_l;
    f.joints[kKpLAnkle] = ank_l;
    f.joints[kKpREye] = head_c + Vec2{+0.035 * fh, -0.02 * fh};
    f.joints[kKpLEye] = head_c + Vec2{-0.035 * fh, -0.02 * fh};
    f.joints[kKpREar] = head_c + Vec2{+0.07 * fh, 0};
    f.joints[kKpLEar] = head_c + Vec2{-0.07 * fh, 0};
    return f;
}

Rgb part_color(const FigureStyle& s, const PartPose& part, Vec2 local) {
    switch (part.part_index) {
    case kTorso:
        return s.garment.sample(local.x, local.y);
    case kHead: {
        // hair cap over skin
        const double cap = smoothstep(-1.0, 1.0, -(local.y + 0.35 * part.radius));
        return lerp(s.skin, s.hair, cap);
    }
    case kUpperLegL:
    case kUpperLegR:
    case kLowerLegL:
    case kLowerLegR:
        return s.pants;
    default:
        return s.skin;
    }
}

struct RenderedFrame {
    TensorF image;               // (3, H, W)
    Tensor<std::uint8_t> part;   // (H, W) topmost part id, 0 = background
    TensorF local_u, local_v;    // (H, W) topmost part local coords, px
};

RenderedFrame render_frame(const FigureStyle& s, const FigureFrame& f, int height, int width) {
    RenderedFrame out;
    out.image = TensorF({3, height, width});
    out.part = Tensor<std::uint8_t>({height, width});
    out.local_u = TensorF({height, width});
    out.local_v = TensorF({height, width});

    for (int y = 0; y < height; ++y) {
        const double ty = static_cast<double>(y) / std::max(1, height - 1);
        for (int x = 0; x < width; ++x) {
            Rgb color = lerp(s.bg_top, s.bg_bottom, ty);
            int top_part = 0;
            Vec2 top_local{0, 0};
            const Vec2 p{static_cast<double>(x), static_cast<double>(y)};
            for (const PartPose& part : f.parts) {
                const double sd = part.sdf(p);
                if (sd > kEdge) continue;
                const double alpha = 1.0 - smoothstep(-kEdge, kEdge, sd);
                const Vec2 local = part.to_local(p);
                color = lerp(color, part_color(s, part, local), alpha);
                if (alpha > 0.5) {
                    top_part = part.part_index;
                    top_local = local;
                }
            }
            out.image.at(0, y, x) = static_cast<float>(clamp01(color.r));
            out.image.at(1, y, x) = static_cast<float>(clamp01(color.g));
            out.image.at(2, y, x) = static_cast<float>(clamp01(color.b));
            out.part.at(y, x) = static_cast<std::uint8_t>(top_part);
            out.local_u.at(y, x) = static_cast<float>(top_local.x);
            out.local_v.at(y, x) = static_cast<float>(top_local.y);
        }
    }
    return out;
}

const PartPose* find_part(const FigureFrame& f, int part_index) {
    for (const PartPose& part : f.parts)
        if (part.part_index == part_index) return &part;
    return nullptr;
}

IUVMap make_iuv(const RenderedFrame& rf, const FigureFrame& f) {
    const int h = rf.part.dim(0), w = rf.part.dim(1);
    IUVMap map;
    map.part = rf.part;
    map.u = TensorF({h, w});
    map.v = TensorF({h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int id = rf.part.at(y, x);
            if (id == 0) continue;
            const PartPose* part = find_part(f, id);
            const double r = part->radius;
            const double len = part->length();
            const double u01 = clamp01((rf.local_u.at(y, x) + r) / (2 * r));
            const double v01 = clamp01((rf.local_v.at(y, x) + r) / (len + 2 * r));
            // Snap to the 8-bit grid the on-disk format stores.
            map.u.at(y, x) = dequantize8(quantize8(static_cast<float>(u01)));
            map.v.at(y, x) = dequantize8(quantize8(static_cast<float>(v01)));
        }
    return map;
}

TensorF make_flow(const RenderedFrame& next, const FigureFrame& cur, const FigureFrame& nxt) {
    // Motion extends a few pixels past each silhouette so the smooth edge
    // band (whose color is dominated by the part) is transported with the
    // part, matching how flow ground truth handles occlusion boundaries.
    constexpr double kHalo = 3.0;
    const int h = next.part.dim(0), w = next.part.dim(1);
    TensorF flow({2, h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const Vec2 p{static_cast<double>(x), static_cast<double>(y)};
            int id = next.part.at(y, x);
            Vec2 local{next.local_u.at(y, x), next.local_v.at(y, x)};
            if (id == 0) {
                double best = kHalo;
                for (const PartPose& part : nxt.parts) {
                    const double sd = part.sdf(p);
                    if (sd <= best) {
                        best = sd;
                        id = part.part_index;
                        local = part.to_local(p);
                    }
                }
                if (id == 0) continue;
            }
            const PartPose* part_prev = find_part(cur, id);
            const Vec2 src = part_prev->to_world(local);
            flow.at(0, y, x) = static_cast<float>(src.x - x);
            flow.at(1, y, x) = static_cast<float>(src.y - y);
        }
    return flow;
}

TensorF visible_garment_mask(const RenderedFrame& rf) {
    const int h = rf.part.dim(0), w = rf.part.dim(1);
    TensorF mask({h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) mask.at(y, x) = rf.part.at(y, x) == kTorso ? 1.0f : 0.0f;
    return mask;
}

Image8 mask_to_image8(const TensorF& mask) {
    Image8 img;
    img.height = mask.dim(0);
    img.width = mask.dim(1);
    img.channels = 1;
    img.pixels.resize(mask.numel());
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            img.at(y, x, 0) = mask.at(y, x) > 0.5f ? 255 : 0;
    return img;
}

Image8 iuv_to_image8(const IUVMap& map) {
    Image8 img;
    img.height = map.part.dim(0);
    img.width = map.part.dim(1);
    img.channels = 3;
    img.pixels.resize(static_cast<std::size_t>(img.height) * img.width * 3);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            img.at(y, x, 0) = map.part.at(y, x);
            img.at(y, x, 1) = quantize8(map.u.at(y, x));
            img.at(y, x, 2) = quantize8(map.v.at(y, x));
        }
    return img;
}

std::string video_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "video_%04d", index);
    return buf;
}

KeypointSet make_keypoints(const FigureStyle& s, const FigureFrame& f, Rng& rng, int height,
                           int width) {
    KeypointSet set;
    for (int i = 0; i < KeypointSet::kNumPoints; ++i) {
        if (!s.keypoint_present[i]) continue;
        const Vec2 j = f.joints[i];
        Keypoint kp;
        kp.x = static_cast<float>(j.x);
        kp.y = static_cast<float>(j.y);
        kp.confidence = static_cast<float>(rng.uniform(0.85, 1.0));
        // Bounds checked on the stored floats; narrowing must not round out.
        if (kp.x < 0 || kp.x >= width || kp.y < 0 || kp.y >= height) continue;
        set.points[i] = kp;
    }
    return set;
}

} // namespace

SyntheticVideo render_synthetic_video(const SyntheticSpec& spec, Split split, int video_index) {
    if (spec.frames_per_video < 2)
        raise(ErrorCode::ConfigInvalid, "frames_per_video must be >= 2");
    if (spec.num_videos < 1) raise(ErrorCode::ConfigInvalid, "num_videos must be >= 1");
    if (spec.height < 32 || spec.width < 24)
        raise(ErrorCode::ConfigInvalid, "frame size must be at least 32x24");

    const std::string id = video_name(video_index);
    Rng rng(substream_seed(spec.seed, std::string(split_name(split)) + "/" + id));
    const FigureStyle style = make_style(rng, spec.height, spec.width);
    Rng conf_rng(substream_seed(spec.seed, std::string(split_name(split)) + "/" + id + "/conf"));

    SyntheticVideo video;
    video.video_id = id;

    std::vector<FigureFrame> figures;
    std::vector<RenderedFrame> rendered;
    for (int t = 0; t < spec.frames_per_video; ++t) {
        const double t01 = static_cast<double>(t) / spec.frames_per_video;
        figures.push_back(pose_figure(style, spec.width, t01));
        rendered.push_back(render_frame(style, figures.back(), spec.height, spec.width));

        TensorF frame = rendered.back().image;
        snap_to_u8_grid(frame);
        video.frames.push_back(std::move(frame));
        video.garment_masks.push_back(visible_garment_mask(rendered.back()));
        video.keypoints.push_back(make_keypoints(style, figures.back(), conf_rng, spec.height, spec.width));
        video.iuv.push_back(make_iuv(rendered.back(), figures.back()));
    }
    for (int t = 0; t + 1 < spec.frames_per_video; ++t)
        video.flows.push_back(make_flow(rendered[t + 1], figures[t], figures[t + 1]));

    // Cloth product image: the same garment capsule and texture rendered in a
    // fixed upright pose on a white ground.
    {
        const PartPose* torso = find_part(figures[0], kTorso);
        FigureStyle flat = style;
        flat.bg_top = flat.bg_bottom = {1.0, 1.0, 1.0};
        FigureFrame product_frame;
        const double len = torso->length();
        const Vec2 a{spec.width * 0.5, spec.height * 0.5 - len * 0.5};
        const Vec2 b{spec.width * 0.5, spec.height * 0.5 + len * 0.5};
        product_frame.parts = {{kTorso, a, b, torso->radius}};
        const RenderedFrame rf = render_frame(flat, product_frame, spec.height, spec.width);
        video.cloth = rf.image;
        snap_to_u8_grid(video.cloth);
        video.cloth_mask = visible_garment_mask(rf);
    }
    return video;
}

namespace {

void write_video_tree(const fs::path& root, Split split, const SyntheticVideo& video) {
    const fs::path vdir = VvtLayout::video_dir(root, split, video.video_id);
    std::error_code ec;
    for (const char* sub : {"frames", "cloth", "garment_mask", "pose_coco", "pose_dense", "flow"}) {
        fs::create_directories(vdir / sub, ec);
        if (ec) raise(ErrorCode::IoFailure, "cannot create dataset directory", (vdir / sub).string());
    }
    const int n = static_cast<int>(video.frames.size());
    for (int t = 0; t < n; ++t) {
        write_png(VvtLayout::frame(vdir, t), to_image8(video.frames[t]));
        write_png(VvtLayout::garment_mask(vdir, t), mask_to_image8(video.garment_masks[t]));
        write_png(VvtLayout::pose_dense(vdir, t), iuv_to_image8(video.iuv[t]));
        std::ofstream out(VvtLayout::pose_coco(vdir, t));
        if (!out) raise(ErrorCode::IoFailure, "cannot write keypoint file");
        out << keypoint_json(video.keypoints[t]) << "\n";
    }
    for (int t = 0; t + 1 < n; ++t) write_flo(VvtLayout::flow(vdir, t), video.flows[t]);
    write_png(VvtLayout::cloth(vdir), to_image8(video.cloth));
    write_png(VvtLayout::cloth_mask(vdir), mask_to_image8(video.cloth_mask));
}

} // namespace

DatasetManifest generate_synthetic(const fs::path& root, const SyntheticSpec& spec) {
    const int side_videos = std::max(1, spec.num_videos / 4);
    for (Split split : {Split::train, Split::val, Split::test}) {
        const int count = split == Split::train ? spec.num_videos : side_videos;
        for (int i = 0; i < count; ++i)
            write_video_tree(root, split, render_synthetic_video(spec, split, i));
    }
    return scan_manifest(root, Split::train);
}

} // namespace tryonlab

// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"

#include "tryonlab/cloth_warp.hpp"
#include "tryonlab/dataset.hpp"
#include "tryonlab/error.hpp"
#include "tryonlab/image_ops.hpp"
#include "tryonlab/rng.hpp"

using namespace tryonlab;

#define CHECK_RAISES(code_, ...)                                                                   \
    do {                                                                                           \
        bool caught_ = false;                                                                      \
        try {                                                                                      \
            __VA_ARGS__;                                                                           \
        } catch (const Error& e_) {                                                                \
            caught_ = true;                                                                        \
            CHECK(e_.code() == code_);                                                             \
        }                                                                                          \
        CHECK_MESSAGE(caught_, "expected " #__VA_ARGS__ " to raise");                              \
    } while (0)

namespace {

TensorF checkerboard(int h, int w, int cell) {
    TensorF img({3, h, w});
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                img.at(c, y, x) = ((x / cell + y / cell) % 2 == 0) ? 1.0f : 0.1f * (c + 1);
    return img;
}

TensorF random_image(Rng& rng, int c, int h, int w) {
    TensorF img({c, h, w});
    for (std::size_t i = 0; i < img.numel(); ++i) img[i] = rng.uniformf(0.0f, 1.0f);
    return img;
}

TensorF ones_mask(int h, int w) { return TensorF({h, w}, 1.0f); }

} // namespace

TEST_CASE("identity parameters reproduce the masked cloth exactly") {
    const int h = 32, w = 24;
    Rng rng(5);
    const TensorF cloth = random_image(rng, 3, h, w);

    const WarpedCloth same = tps_warp(cloth, ones_mask(h, w), TpsParams::identity(5), h, w);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                CHECK(std::abs(same.image.at(c, y, x) - cloth.at(c, y, x)) <= 1e-6f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) CHECK(same.mask.at(y, x) == 1.0f);

    // With a real mask the output is the pre-masked cloth.
    TensorF mask({h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) mask.at(y, x) = (x > 5 && x < 18 && y > 4 && y < 28) ? 1.0f : 0.0f;
    const WarpedCloth masked = tps_warp(cloth, mask, TpsParams::identity(5), h, w);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                CHECK(std::abs(masked.image.at(c, y, x) - cloth.at(c, y, x) * mask.at(y, x)) <= 1e-6f);
}

TEST_CASE("identity parameters at a new size match a bilinear resample") {
    const int h = 32, w = 24;
    Rng rng(6);
    const TensorF cloth = random_image(rng, 3, h, w);
    const WarpedCloth got = tps_warp(cloth, ones_mask(h, w), TpsParams::identity(4), 48, 36);
    const TensorF want = bilinear_resize(cloth, 48, 36);
    for (int c = 0; c < 3; ++c)
        for (int y = 1; y < 47; ++y)
            for (int x = 1; x < 35; ++x)
                CHECK(got.image.at(c, y, x) == doctest::Approx(want.at(c, y, x)).epsilon(1e-5));
}

TEST_CASE("quarter shift in normalized units moves content an eighth of width") {
    const int h = 40, w = 48;
    const TensorF cloth = checkerboard(h, w, 4);
    TpsParams p = TpsParams::identity(5);
    for (std::size_t i = 0; i < p.target.size(); i += 2) p.target[i] += 0.25f;

    const WarpedCloth got = tps_warp(cloth, ones_mask(h, w), p, h, w);
    const int shift = w / 8;
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (x + shift < w) {
                    CHECK(got.image.at(c, y, x) ==
                          doctest::Approx(cloth.at(c, y, x + shift)).epsilon(1e-5));
                } else {
                    CHECK(got.mask.at(y, x) == 0.0f);
                    CHECK(got.image.at(c, y, x) == 0.0f);
                }
            }
}

TEST_CASE("warp is linear in pixel intensities") {
    const int h = 24, w = 20;
    Rng rng(7);
    const TensorF img1 = random_image(rng, 3, h, w);
    const TensorF img2 = random_image(rng, 3, h, w);
    TensorF mask({h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) mask.at(y, x) = (x + y) % 3 == 0 ? 0.0f : 1.0f;

    TpsParams p = TpsParams::identity(4);
    Rng jitter(8);
    for (float& v : p.target) v += jitter.uniformf(-0.15f, 0.15f);

    const float a = 0.7f, b = -0.3f;
    TensorF combo({3, h, w});
    for (std::size_t i = 0; i < combo.numel(); ++i) combo[i] = a * img1[i] + b * img2[i];

    const WarpedCloth w1 = tps_warp(img1, mask, p, h, w);
    const WarpedCloth w2 = tps_warp(img2, mask, p, h, w);
    const WarpedCloth wc = tps_warp(combo, mask, p, h, w);
    for (std::size_t i = 0; i < wc.image.numel(); ++i)
        CHECK(wc.image[i] == doctest::Approx(a * w1.image[i] + b * w2.image[i]).epsilon(1e-4));
}

TEST_CASE("warp output is zero wherever its mask is zero") {
    const int h = 30, w = 26;
    Rng rng(9);
    const TensorF cloth = random_image(rng, 3, h, w);
    TensorF mask({h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) mask.at(y, x) = (y < h / 2) ? 1.0f : 0.0f;

    TpsParams p = TpsParams::identity(5);
    Rng jitter(10);
    for (float& v : p.target) v += jitter.uniformf(-0.2f, 0.2f);
    const WarpedCloth got = tps_warp(cloth, mask, p, h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (got.mask.at(y, x) == 0.0f)
                for (int c = 0; c < 3; ++c) CHECK(got.image.at(c, y, x) == 0.0f);
}

TEST_CASE("degenerate control points are rejected") {
    TpsParams p = TpsParams::identity(3);
    for (std::size_t i = 0; i < p.control.size(); i += 2) {
        p.control[i] = 0.1f;
        p.control[i + 1] = -0.4f;
    }
    CHECK_RAISES(ErrorCode::DegenerateTps, tps_warp(TensorF({3, 8, 8}), ones_mask(8, 8), p, 8, 8));

    TpsParams line = TpsParams::identity(3);
    for (std::size_t i = 0; i < line.control.size(); i += 2) {
        line.control[i] = static_cast<float>(i) / line.control.size();
        line.control[i + 1] = 2.0f * line.control[i]; // all on y = 2x
    }
    CHECK_RAISES(ErrorCode::DegenerateTps,
                 tps_warp(TensorF({3, 8, 8}), ones_mask(8, 8), line, 8, 8));
}

TEST_CASE("tps text form round trips and validates") {
    TpsParams p = TpsParams::identity(5);
    Rng rng(11);
    for (float& v : p.target) v += rng.uniformf(-0.3f, 0.3f);
    const TpsParams back = tps_from_text(tps_to_text(p));
    CHECK(back.grid == p.grid);
    REQUIRE(back.target.size() == p.target.size());
    for (std::size_t i = 0; i < p.target.size(); ++i) CHECK(back.target[i] == p.target[i]);
    CHECK(back.control == TpsParams::uniform_lattice(5));

    CHECK_RAISES(ErrorCode::ConfigInvalid, tps_from_text("tps 2\n0 0"));
    CHECK_RAISES(ErrorCode::ConfigInvalid, tps_from_text("nope 5\n"));
    CHECK_RAISES(ErrorCode::ConfigInvalid, tps_from_text("tps 3\n1 2 3"));
    CHECK_RAISES(ErrorCode::ConfigInvalid, tps_from_text(tps_to_text(p) + " 42"));
}

TEST_CASE("oracle warp is the frame restricted to the garment mask") {
    SyntheticSpec spec;
    spec.num_videos = 1;
    spec.frames_per_video = 2;
    spec.height = 48;
    spec.width = 36;
    spec.seed = 4;
    const SyntheticVideo video = render_synthetic_video(spec, Split::train, 0);
    VideoSample sample;
    sample.video_id = video.video_id;
    sample.frames = video.frames;
    sample.garment_masks = video.garment_masks;

    const WarpedCloth got = oracle_warp(sample, 1);
    CHECK(got.mask.vec() == video.garment_masks[1].vec());
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 48; ++y)
            for (int x = 0; x < 36; ++x)
                CHECK(got.image.at(c, y, x) ==
                      video.frames[1].at(c, y, x) * video.garment_masks[1].at(y, x));

    // All-zero mask gives an all-zero warp.
    sample.garment_masks[0].fill(0.0f);
    const WarpedCloth zero = oracle_warp(sample, 0);
    for (std::size_t i = 0; i < zero.image.numel(); ++i) CHECK(zero.image[i] == 0.0f);

    CHECK_RAISES(ErrorCode::IndexOutOfRange, oracle_warp(sample, 2));
}

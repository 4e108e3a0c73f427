// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "tryonlab/error.hpp"
#include "tryonlab/image_ops.hpp"

namespace tryonlab {

float bilinear_clamp(const TensorF& img, int c, float y, float x) {
    const int h = img.dim(1), w = img.dim(2);
    const auto pix = [&](int yy, int xx) {
        yy = std::clamp(yy, 0, h - 1);
        xx = std::clamp(xx, 0, w - 1);
        return img.at(c, yy, xx);
    };
    const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
    const float fx = x - static_cast<float>(x0), fy = y - static_cast<float>(y0);
    const float top = pix(y0, x0) * (1 - fx) + pix(y0, x0 + 1) * fx;
    const float bot = pix(y0 + 1, x0) * (1 - fx) + pix(y0 + 1, x0 + 1) * fx;
    return top * (1 - fy) + bot * fy;
}

float bilinear_zero(const TensorF& img, int c, float y, float x) {
    const int h = img.dim(1), w = img.dim(2);
    const auto pix = [&](int yy, int xx) {
        if (yy < 0 || yy >= h || xx < 0 || xx >= w) return 0.0f;
        return img.at(c, yy, xx);
    };
    const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
    const float fx = x - static_cast<float>(x0), fy = y - static_cast<float>(y0);
    const float top = pix(y0, x0) * (1 - fx) + pix(y0, x0 + 1) * fx;
    const float bot = pix(y0 + 1, x0) * (1 - fx) + pix(y0 + 1, x0 + 1) * fx;
    return top * (1 - fy) + bot * fy;
}

TensorF bilinear_resize(const TensorF& img, int out_h, int out_w) {
    if (img.ndim() != 3) raise(ErrorCode::ShapeMismatch, "bilinear_resize expects (C,H,W)");
    if (out_h < 1 || out_w < 1) raise(ErrorCode::ConfigInvalid, "resize target must be positive");
    const int c = img.dim(0);
    const float sy = static_cast<float>(img.dim(1)) / static_cast<float>(out_h);
    const float sx = static_cast<float>(img.dim(2)) / static_cast<float>(out_w);
    TensorF out({c, out_h, out_w});
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < out_h; ++y)
            for (int x = 0; x < out_w; ++x)
                out.at(ch, y, x) =
                    bilinear_clamp(img, ch, (y + 0.5f) * sy - 0.5f, (x + 0.5f) * sx - 0.5f);
    return out;
}

TensorF box_downsample(const TensorF& img, int factor) {
    if (img.ndim() != 3) raise(ErrorCode::ShapeMismatch, "box_downsample expects (C,H,W)");
    if (factor < 1) raise(ErrorCode::ConfigInvalid, "downsample factor must be >= 1");
    const int c = img.dim(0), h = img.dim(1), w = img.dim(2);
    const int oh = (h + factor - 1) / factor, ow = (w + factor - 1) / factor;
    TensorF out({c, oh, ow});
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                const int y1 = std::min(h, (y + 1) * factor), x1 = std::min(w, (x + 1) * factor);
                double sum = 0;
                for (int yy = y * factor; yy < y1; ++yy)
                    for (int xx = x * factor; xx < x1; ++xx) sum += img.at(ch, yy, xx);
                out.at(ch, y, x) =
                    static_cast<float>(sum / ((y1 - y * factor) * (x1 - x * factor)));
            }
    return out;
}

TensorF halve(const TensorF& img) {
    if (img.ndim() != 3) raise(ErrorCode::ShapeMismatch, "halve expects (C,H,W)");
    const int c = img.dim(0), oh = img.dim(1) / 2, ow = img.dim(2) / 2;
    if (oh < 1 || ow < 1) raise(ErrorCode::ImageTooSmall, "cannot halve below 1 px");
    TensorF out({c, oh, ow});
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x)
                out.at(ch, y, x) = 0.25f * (img.at(ch, 2 * y, 2 * x) + img.at(ch, 2 * y, 2 * x + 1) +
                                            img.at(ch, 2 * y + 1, 2 * x) +
                                            img.at(ch, 2 * y + 1, 2 * x + 1));
    return out;
}

TensorF luma(const TensorF& rgb) {
    if (rgb.ndim() != 3 || rgb.dim(0) != 3)
        raise(ErrorCode::ShapeMismatch, "luma expects (3,H,W)");
    const int h = rgb.dim(1), w = rgb.dim(2);
    TensorF out({h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.at(y, x) =
                0.299f * rgb.at(0, y, x) + 0.587f * rgb.at(1, y, x) + 0.114f * rgb.at(2, y, x);
    return out;
}

} // namespace tryonlab

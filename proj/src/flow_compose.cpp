// SPDX-License-Identifier: Apache-2.0
#include "tryonlab/flow_compose.hpp"

#include <cmath>

#include "tryonlab/error.hpp"
#include "tryonlab/image_ops.hpp"

namespace tryonlab {

FlowField FlowField::from_tensor(TensorF displacement) {
    if (displacement.ndim() != 3 || displacement.dim(0) != 2)
        raise(ErrorCode::ShapeMismatch, "flow field must be (2,H,W)");
    const float max_dx = static_cast<float>(displacement.dim(2));
    const float max_dy = static_cast<float>(displacement.dim(1));
    const std::size_t plane = displacement.plane();
    for (std::size_t i = 0; i < plane; ++i) {
        const float dx = displacement.channel(0)[i];
        const float dy = displacement.channel(1)[i];
        if (!std::isfinite(dx) || !std::isfinite(dy))
            raise(ErrorCode::ShapeMismatch, "flow field has non-finite displacement");
        if (std::abs(dx) > max_dx || std::abs(dy) > max_dy)
            raise(ErrorCode::ShapeMismatch, "flow displacement exceeds frame size");
    }
    FlowField f;
    f.displacement = std::move(displacement);
    return f;
}

TensorF backward_warp(const TensorF& prev, const FlowField& flow) {
    if (prev.ndim() != 3)
        raise(ErrorCode::ShapeMismatch, "backward_warp expects a (C,H,W) image");
    const int h = prev.dim(1), w = prev.dim(2);
    if (flow.height() != h || flow.width() != w)
        raise(ErrorCode::ShapeMismatch, "flow and image dimensions disagree");
    TensorF out(prev.shape());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const float sx = static_cast<float>(x) + flow.displacement.at(0, y, x);
            const float sy = static_cast<float>(y) + flow.displacement.at(1, y, x);
            for (int c = 0; c < prev.dim(0); ++c)
                out.at(c, y, x) = bilinear_clamp(prev, c, sy, sx);
        }
    return out;
}

FlowComposeOutput flow_compose(const TensorF& composed, const TensorF& prev_final,
                               const FlowField& flow, const TensorF& flow_mask) {
    if (composed.ndim() != 3 || composed.dim(0) != 3 || !composed.same_shape(prev_final))
        raise(ErrorCode::ShapeMismatch, "flow_compose expects matching (3,H,W) images");
    if (flow_mask.ndim() != 2 || flow_mask.dim(0) != composed.dim(1) ||
        flow_mask.dim(1) != composed.dim(2))
        raise(ErrorCode::ShapeMismatch, "flow mask must be (H,W)");

    FlowComposeOutput out;
    out.warped_prev = backward_warp(prev_final, flow);
    out.flow_mask = flow_mask;
    out.final = TensorF(composed.shape());
    const std::size_t plane = composed.plane();
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < plane; ++i) {
            const float m = flow_mask.data()[i];
            out.final.channel(c)[i] =
                out.warped_prev.channel(c)[i] * m + composed.channel(c)[i] * (1.0f - m);
        }
    return out;
}

} // namespace tryonlab

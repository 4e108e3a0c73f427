// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tryonlab/tensor.hpp"

namespace tryonlab {

/// Per-pixel displacement from frame t to t+1. Channel 0 carries dx,
/// channel 1 dy, both in pixels.
struct FlowField {
    TensorF displacement; // (2,H,W)

    int height() const { return displacement.dim(1); }
    int width() const { return displacement.dim(2); }

    /// Wraps and validates a raw (2,H,W) tensor: finite everywhere,
    /// |dx| <= W and |dy| <= H.
    static FlowField from_tensor(TensorF displacement);
};

struct FlowComposeOutput {
    TensorF warped_prev; // (3,H,W)
    TensorF flow_mask;   // (H,W) in [0,1]
    TensorF final;       // warped_prev*mask + composed*(1-mask)
};

/// Samples prev at (x+dx, y+dy) per output pixel with bilinear weights;
/// out-of-bounds reads clamp to the border so frame edges never go dark.
TensorF backward_warp(const TensorF& prev, const FlowField& flow);

/// Blends the freshly synthesized frame with the flow-warped previous
/// output through the learned flow mask. The first frame of a video has
/// no previous output; callers skip this op there.
FlowComposeOutput flow_compose(const TensorF& composed, const TensorF& prev_final,
                               const FlowField& flow, const TensorF& flow_mask);

} // namespace tryonlab

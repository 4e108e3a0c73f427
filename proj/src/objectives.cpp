// SPDX-License-Identifier: Apache-2.0
#include "tryonlab/objectives.hpp"

#include "tryonlab/error.hpp"

namespace tryonlab {

void validate_loss_weights(const LossWeights& w) {
    const double v[] = {w.w_l1, w.w_mask, w.w_vgg, w.lambda_f};
    for (double x : v)
        if (!std::isfinite(x) || x < 0)
            raise(ErrorCode::ConfigInvalid, "loss weights must be finite and non-negative");
}

LossBreakdown combine_losses(double l1, double mask, double perceptual, double flow_pen,
                             const LossWeights& w) {
    validate_loss_weights(w);
    LossBreakdown b;
    b.l1 = l1;
    b.mask = mask;
    b.perceptual = perceptual;
    b.flow_pen = flow_pen;
    b.total = w.w_l1 * l1 + w.w_mask * mask + w.w_vgg * perceptual + w.lambda_f * flow_pen;
    return b;
}

} // namespace tryonlab

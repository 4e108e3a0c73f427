// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "tryonlab/nn.hpp"

namespace tryonlab {

struct LossWeights {
    double w_l1 = 1.0;
    double w_mask = 1.0;
    double w_vgg = 1.0;
    double lambda_f = 1e4;
};

void validate_loss_weights(const LossWeights& w);

struct LossBreakdown {
    double l1 = 0;
    double mask = 0;
    double perceptual = 0;
    double flow_pen = 0;
    double total = 0;
};

/// total = w_l1*l1 + w_mask*mask + w_vgg*perceptual + lambda_f*flow_pen
LossBreakdown combine_losses(double l1, double mask, double perceptual, double flow_pen,
                             const LossWeights& w);

/// Feature pyramid used by the perceptual loss. Weights are frozen: the
/// backward pass only propagates to the input image.
template <typename T>
class FeatureBackend {
  public:
    virtual ~FeatureBackend() = default;
    virtual int num_layers() const = 0;
    virtual std::vector<Tensor<T>> features(const Tensor<T>& image) = 0;
    /// d(image) given d(features); must follow the same image as the last
    /// features() call.
    virtual Tensor<T> features_backward(const std::vector<Tensor<T>>& dfeat) = 0;
};

/// Single identity layer; makes the perceptual loss collapse to plain L1.
template <typename T>
class IdentityFeatures : public FeatureBackend<T> {
  public:
    int num_layers() const override { return 1; }
    std::vector<Tensor<T>> features(const Tensor<T>& image) override { return {image}; }
    Tensor<T> features_backward(const std::vector<Tensor<T>>& dfeat) override {
        return dfeat.at(0);
    }
};

/// Frozen random five-stage strided conv stack. Each stage halves the
/// resolution; features are taken after every activation. Stands in for a
/// pretrained feature extractor while staying seed-reproducible.
template <typename T>
class ConvFeatures : public FeatureBackend<T> {
  public:
    static constexpr int kStages = 5;

    explicit ConvFeatures(std::uint64_t seed) {
        const int widths[kStages] = {16, 24, 32, 48, 64};
        int in_c = 3;
        for (int s = 0; s < kStages; ++s) {
            convs_[s].build("percept.conv" + std::to_string(s), in_c, widths[s], 3, 2, 1,
                            seed, InitKind::standard);
            acts_[s].build(Activation::gelu, T(1));
            in_c = widths[s];
        }
    }

    int num_layers() const override { return kStages; }

    std::vector<Tensor<T>> features(const Tensor<T>& image) override {
        std::vector<Tensor<T>> out;
        Tensor<T> cur = image;
        for (int s = 0; s < kStages; ++s) {
            cur = acts_[s].forward(convs_[s].forward(cur));
            out.push_back(cur);
        }
        return out;
    }

    Tensor<T> features_backward(const std::vector<Tensor<T>>& dfeat) override {
        Tensor<T> grad;
        for (int s = kStages - 1; s >= 0; --s) {
            if (grad.empty()) {
                grad = dfeat[static_cast<std::size_t>(s)];
            } else {
                for (std::size_t i = 0; i < grad.numel(); ++i)
                    grad[i] += dfeat[static_cast<std::size_t>(s)][i];
            }
            grad = convs_[s].backward(acts_[s].backward(grad));
        }
        return grad;
    }

  private:
    nn::Conv2d<T> convs_[kStages];
    nn::Act<T> acts_[kStages];
};

/// Mean absolute difference.
template <typename T>
double l1_loss(const Tensor<T>& pred, const Tensor<T>& target) {
    require_same_shape(pred, target, "l1_loss");
    double acc = 0;
    for (std::size_t i = 0; i < pred.numel(); ++i)
        acc += std::abs(static_cast<double>(pred[i]) - static_cast<double>(target[i]));
    return acc / static_cast<double>(pred.numel());
}

/// Mean absolute difference plus its gradient w.r.t. pred.
template <typename T>
double l1_loss_grad(const Tensor<T>& pred, const Tensor<T>& target, Tensor<T>& dpred) {
    require_same_shape(pred, target, "l1_loss");
    dpred = Tensor<T>(pred.shape());
    const double inv = 1.0 / static_cast<double>(pred.numel());
    double acc = 0;
    for (std::size_t i = 0; i < pred.numel(); ++i) {
        const double d = static_cast<double>(pred[i]) - static_cast<double>(target[i]);
        acc += std::abs(d);
        dpred[i] = static_cast<T>(d > 0 ? inv : (d < 0 ? -inv : 0.0));
    }
    return acc * inv;
}

/// Mask loss is the same mean-absolute form on single-channel masks.
template <typename T>
double mask_loss(const Tensor<T>& pred_mask, const Tensor<T>& target_mask) {
    return l1_loss(pred_mask, target_mask);
}

template <typename T>
double mask_loss_grad(const Tensor<T>& pred_mask, const Tensor<T>& target_mask,
                      Tensor<T>& dpred) {
    return l1_loss_grad(pred_mask, target_mask, dpred);
}

/// Mean absolute feature difference averaged over extraction layers.
template <typename T>
double perceptual_loss(const Tensor<T>& pred, const Tensor<T>& target,
                       FeatureBackend<T>& backend) {
    require_same_shape(pred, target, "perceptual_loss");
    const std::vector<Tensor<T>> fp = backend.features(pred);
    const std::vector<Tensor<T>> ft = backend.features(target);
    double acc = 0;
    for (std::size_t l = 0; l < fp.size(); ++l) acc += l1_loss(fp[l], ft[l]);
    return acc / static_cast<double>(fp.size());
}

template <typename T>
double perceptual_loss_grad(const Tensor<T>& pred, const Tensor<T>& target,
                            FeatureBackend<T>& backend, Tensor<T>& dpred) {
    require_same_shape(pred, target, "perceptual_loss");
    const std::vector<Tensor<T>> ft = backend.features(target);
    const std::vector<Tensor<T>> fp = backend.features(pred); // caches pred's pass
    const double inv_layers = 1.0 / static_cast<double>(fp.size());
    double acc = 0;
    std::vector<Tensor<T>> dfeat(fp.size());
    for (std::size_t l = 0; l < fp.size(); ++l) {
        const double inv = inv_layers / static_cast<double>(fp[l].numel());
        dfeat[l] = Tensor<T>(fp[l].shape());
        double layer = 0;
        for (std::size_t i = 0; i < fp[l].numel(); ++i) {
            const double d = static_cast<double>(fp[l][i]) - static_cast<double>(ft[l][i]);
            layer += std::abs(d);
            dfeat[l][i] = static_cast<T>(d > 0 ? inv : (d < 0 ? -inv : 0.0));
        }
        acc += layer / static_cast<double>(fp[l].numel());
    }
    dpred = backend.features_backward(dfeat);
    return acc * inv_layers;
}

/// Mean squared flow-mask value; large weights push the blend toward the
/// freshly synthesized frame.
template <typename T>
double flow_mask_penalty(const Tensor<T>& flow_mask) {
    double acc = 0;
    for (std::size_t i = 0; i < flow_mask.numel(); ++i) {
        const double v = static_cast<double>(flow_mask[i]);
        acc += v * v;
    }
    return acc / static_cast<double>(flow_mask.numel());
}

template <typename T>
double flow_mask_penalty_grad(const Tensor<T>& flow_mask, Tensor<T>& dmask) {
    dmask = Tensor<T>(flow_mask.shape());
    const double inv = 1.0 / static_cast<double>(flow_mask.numel());
    double acc = 0;
    for (std::size_t i = 0; i < flow_mask.numel(); ++i) {
        const double v = static_cast<double>(flow_mask[i]);
        acc += v * v;
        dmask[i] = static_cast<T>(2.0 * v * inv);
    }
    return acc * inv;
}

} // namespace tryonlab

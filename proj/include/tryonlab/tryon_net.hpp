// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tryonlab/nn.hpp"

namespace tryonlab {

/// Try-on network shape. in_channels counts the stacked person
/// representation plus 3 warped-cloth channels plus 1 warped-mask channel.
struct TryonConfig {
    int in_channels = 14;
    int base_width = 32;
    int depth = 4; // encoder/decoder levels; input dims must divide 2^depth
    bool attention = true;
    Activation activation = Activation::gelu;
    bool flow = false; // adds the flow-mask head
    std::uint64_t seed = 0;
};

void validate_config(const TryonConfig& cfg);

/// Eq: composed = warped * mask + rendered * (1 - mask). rendered and
/// warped are (3,H,W), mask is (H,W) shared across channels.
template <typename T>
Tensor<T> compose(const Tensor<T>& rendered, const Tensor<T>& mask, const Tensor<T>& warped) {
    if (rendered.ndim() != 3 || warped.ndim() != 3 || !rendered.same_shape(warped) ||
        mask.ndim() != 2 || mask.dim(0) != rendered.dim(1) || mask.dim(1) != rendered.dim(2))
        raise(ErrorCode::ShapeMismatch, "compose shapes disagree");
    Tensor<T> out(rendered.shape());
    const std::size_t plane = rendered.plane();
    for (int c = 0; c < rendered.dim(0); ++c) {
        const T* r = rendered.channel(c);
        const T* w = warped.channel(c);
        T* dst = out.channel(c);
        for (std::size_t i = 0; i < plane; ++i) {
            const T m = mask.data()[i];
            dst[i] = w[i] * m + r[i] * (T(1) - m);
        }
    }
    return out;
}

/// U-Net with skip concatenation. The encoder halves resolution each level
/// and doubles width up to 8x base; the decoder mirrors it with exact 2x
/// upsampling (1x1 conv + depth-to-space). When enabled, self-attention
/// sits where feature depth is greatest: the bottleneck and the deepest
/// decoder stage. Heads emit rendered (tanh rescaled to [0,1]) and mask
/// (sigmoid). Every layer draws its init from its own named seed stream,
/// so toggling one block never shifts another block's initial weights.
template <typename T>
class TryonNet {
  public:
    struct Output {
        Tensor<T> rendered; // (3,H,W)
        Tensor<T> mask;     // (H,W)
    };

    explicit TryonNet(const TryonConfig& cfg) : cfg_(cfg) {
        validate_config(cfg);
        const Activation act = cfg.activation;
        const bool sine = act == Activation::sine;
        const T omega_first = sine ? T(30) : T(1);

        widths_.resize(static_cast<std::size_t>(cfg.depth) + 1);
        for (int i = 0; i <= cfg.depth; ++i)
            widths_[static_cast<std::size_t>(i)] =
                std::min(cfg.base_width * (1 << i), 8 * cfg.base_width);

        stem_conv_.build("stem.conv", cfg.in_channels, widths_[0], 3, 1, 1, cfg.seed,
                         sine ? InitKind::siren_first : InitKind::standard);
        stem_norm_.build("stem.norm", widths_[0]);
        stem_act_.build(act, omega_first);

        enc_.resize(static_cast<std::size_t>(cfg.depth));
        for (int i = 0; i < cfg.depth; ++i) {
            auto& lvl = enc_[static_cast<std::size_t>(i)];
            const std::string base = "enc" + std::to_string(i + 1);
            lvl.conv.build(base + ".conv", widths_[static_cast<std::size_t>(i)],
                           widths_[static_cast<std::size_t>(i) + 1], 3, 2, 1, cfg.seed,
                           sine ? InitKind::siren_hidden : InitKind::standard);
            lvl.norm.build(base + ".norm", widths_[static_cast<std::size_t>(i) + 1]);
            lvl.act.build(act, T(1));
        }

        const int wd = widths_[static_cast<std::size_t>(cfg.depth)];
        bott_conv_.build("bottleneck.conv", wd, wd, 3, 1, 1, cfg.seed,
                         sine ? InitKind::siren_hidden : InitKind::standard);
        bott_norm_.build("bottleneck.norm", wd);
        bott_act_.build(act, T(1));
        if (cfg.attention) {
            attn_bott_.emplace();
            attn_bott_->build("bottleneck.attn", wd, cfg.seed);
        }

        dec_.resize(static_cast<std::size_t>(cfg.depth));
        for (int i = cfg.depth; i >= 1; --i) {
            auto& lvl = dec_[static_cast<std::size_t>(cfg.depth - i)];
            const std::string base = "dec" + std::to_string(i);
            const int cin = widths_[static_cast<std::size_t>(i)];
            const int cout = widths_[static_cast<std::size_t>(i) - 1];
            lvl.up.build(base + ".up", cin, 4 * cout, 1, 1, 0, cfg.seed,
                         sine ? InitKind::siren_hidden : InitKind::standard);
            lvl.up_norm.build(base + ".up_norm", cout);
            lvl.up_act.build(act, T(1));
            lvl.fuse.build(base + ".fuse", 2 * cout, cout, 3, 1, 1, cfg.seed,
                           sine ? InitKind::siren_hidden : InitKind::standard);
            lvl.fuse_norm.build(base + ".fuse_norm", cout);
            lvl.fuse_act.build(act, T(1));
        }
        if (cfg.attention) {
            attn_dec_.emplace();
            attn_dec_->build("dec" + std::to_string(cfg.depth) + ".attn",
                             widths_[static_cast<std::size_t>(cfg.depth) - 1], cfg.seed);
        }

        head_.build("head.conv", widths_[0], 4, 3, 1, 1, cfg.seed, InitKind::standard);

        if (cfg.flow) {
            flow1_.emplace();
            flow1_->build("flow.conv1", 6, 8, 3, 1, 1, cfg.seed, InitKind::standard);
            flow_act_.build(act, T(1));
            flow2_.emplace();
            flow2_->build("flow.conv2", 8, 1, 3, 1, 1, cfg.seed, InitKind::standard);
        }
    }

    const TryonConfig& config() const { return cfg_; }

    Output forward(const Tensor<T>& input) {
        const int h = input.dim(1), w = input.dim(2);
        if (h % (1 << cfg_.depth) != 0 || w % (1 << cfg_.depth) != 0)
            raise(ErrorCode::ConfigInvalid, "input dims must divide 2^depth",
                  std::to_string(h) + "x" + std::to_string(w));

        skips_.assign(static_cast<std::size_t>(cfg_.depth), Tensor<T>());
        Tensor<T> cur = stem_act_.forward(stem_norm_.forward(stem_conv_.forward(input)));
        skips_[0] = cur;
        for (int i = 0; i < cfg_.depth; ++i) {
            auto& lvl = enc_[static_cast<std::size_t>(i)];
            cur = lvl.act.forward(lvl.norm.forward(lvl.conv.forward(cur)));
            if (i + 1 < cfg_.depth) skips_[static_cast<std::size_t>(i) + 1] = cur;
        }
        cur = bott_act_.forward(bott_norm_.forward(bott_conv_.forward(cur)));
        if (attn_bott_) cur = attn_bott_->forward(cur);

        for (int i = cfg_.depth; i >= 1; --i) {
            auto& lvl = dec_[static_cast<std::size_t>(cfg_.depth - i)];
            cur = lvl.up_act.forward(
                lvl.up_norm.forward(lvl.d2s.forward(lvl.up.forward(cur))));
            const Tensor<T>& skip = skips_[static_cast<std::size_t>(i) - 1];
            cur = lvl.fuse_act.forward(lvl.fuse_norm.forward(
                lvl.fuse.forward(concat_channels(std::vector<const Tensor<T>*>{&cur, &skip}))));
            if (i == cfg_.depth && attn_dec_) cur = attn_dec_->forward(cur);
        }

        Tensor<T> raw = head_.forward(cur);
        Output out;
        out.rendered = Tensor<T>({3, h, w});
        out.mask = Tensor<T>({h, w});
        tanh_cache_ = Tensor<T>({3, h, w});
        sig_cache_ = Tensor<T>({h, w});
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < out.mask.numel(); ++i) {
                const T t = std::tanh(raw.channel(c)[i]);
                tanh_cache_.channel(c)[i] = t;
                out.rendered.channel(c)[i] = (t + T(1)) / T(2);
            }
        for (std::size_t i = 0; i < out.mask.numel(); ++i) {
            const T s = T(1) / (T(1) + std::exp(-raw.channel(3)[i]));
            sig_cache_[i] = s;
            out.mask[i] = s;
        }
        return out;
    }

    /// Backpropagate loss gradients w.r.t. rendered and mask; parameter
    /// gradients accumulate until zero_grad().
    void backward(const Tensor<T>& d_rendered, const Tensor<T>& d_mask) {
        Tensor<T> draw({4, d_mask.dim(0), d_mask.dim(1)});
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < d_mask.numel(); ++i) {
                const T t = tanh_cache_.channel(c)[i];
                draw.channel(c)[i] = d_rendered.channel(c)[i] * (T(1) - t * t) / T(2);
            }
        for (std::size_t i = 0; i < d_mask.numel(); ++i) {
            const T s = sig_cache_[i];
            draw.channel(3)[i] = d_mask[i] * s * (T(1) - s);
        }

        skip_grads_.assign(static_cast<std::size_t>(cfg_.depth), Tensor<T>());
        Tensor<T> cur = head_.backward(draw);
        for (int i = 1; i <= cfg_.depth; ++i) {
            auto& lvl = dec_[static_cast<std::size_t>(cfg_.depth - i)];
            if (i == cfg_.depth && attn_dec_) cur = attn_dec_->backward(cur);
            Tensor<T> dcat =
                lvl.fuse.backward(lvl.fuse_norm.backward(lvl.fuse_act.backward(cur)));
            // split concat gradient: first half feeds the upsample path, the
            // second half joins the skip gradient for level i-1
            const int cout = dcat.dim(0) / 2;
            Tensor<T> dup({cout, dcat.dim(1), dcat.dim(2)});
            Tensor<T> dskip({cout, dcat.dim(1), dcat.dim(2)});
            std::copy(dcat.data(), dcat.data() + dup.numel(), dup.data());
            std::copy(dcat.data() + dup.numel(), dcat.data() + dcat.numel(), dskip.data());
            skip_grads_[static_cast<std::size_t>(i) - 1] = std::move(dskip);
            cur = lvl.up.backward(
                lvl.d2s.backward(lvl.up_norm.backward(lvl.up_act.backward(dup))));
        }
        // walking back up the encoder, each level's gradient adds its skip term
        if (attn_bott_) cur = attn_bott_->backward(cur);
        cur = bott_conv_.backward(bott_norm_.backward(bott_act_.backward(cur)));
        for (int i = cfg_.depth - 1; i >= 0; --i) {
            auto& lvl = enc_[static_cast<std::size_t>(i)];
            if (i + 1 < cfg_.depth) {
                const Tensor<T>& sg = skip_grads_[static_cast<std::size_t>(i) + 1];
                for (std::size_t j = 0; j < cur.numel(); ++j) cur[j] += sg[j];
            }
            cur = lvl.conv.backward(lvl.norm.backward(lvl.act.backward(cur)));
        }
        const Tensor<T>& sg0 = skip_grads_[0];
        for (std::size_t j = 0; j < cur.numel(); ++j) cur[j] += sg0[j];
        stem_conv_.backward(stem_norm_.backward(stem_act_.backward(cur)));
    }

    /// Flow-mask head on [composed, warped_prev] (6 channels) -> (H,W) in
    /// (0,1). Only callable when the config enables flow.
    Tensor<T> flow_mask(const Tensor<T>& composed, const Tensor<T>& warped_prev) {
        if (!flow1_) raise(ErrorCode::ConfigInvalid, "flow head not built");
        const Tensor<T> stack =
            concat_channels(std::vector<const Tensor<T>*>{&composed, &warped_prev});
        Tensor<T> raw = flow2_->forward(flow_act_.forward(flow1_->forward(stack)));
        flow_sig_ = Tensor<T>({raw.dim(1), raw.dim(2)});
        for (std::size_t i = 0; i < flow_sig_.numel(); ++i)
            flow_sig_[i] = T(1) / (T(1) + std::exp(-raw[i]));
        return flow_sig_;
    }

    /// Backward of flow_mask; returns the gradient w.r.t. the composed
    /// image (first 3 stacked channels). warped_prev is detached history.
    Tensor<T> flow_mask_backward(const Tensor<T>& d_flow_mask) {
        if (!flow1_) raise(ErrorCode::ConfigInvalid, "flow head not built");
        Tensor<T> draw({1, d_flow_mask.dim(0), d_flow_mask.dim(1)});
        for (std::size_t i = 0; i < d_flow_mask.numel(); ++i) {
            const T s = flow_sig_[i];
            draw[i] = d_flow_mask.data()[i] * s * (T(1) - s);
        }
        Tensor<T> dstack =
            flow1_->backward(flow_act_.backward(flow2_->backward(draw)));
        Tensor<T> dcomposed({3, dstack.dim(1), dstack.dim(2)});
        std::copy(dstack.data(), dstack.data() + dcomposed.numel(), dcomposed.data());
        return dcomposed;
    }

    void visit_params(const nn::ParamVisitor<T>& fn) {
        stem_conv_.visit(fn);
        stem_norm_.visit(fn);
        for (auto& lvl : enc_) {
            lvl.conv.visit(fn);
            lvl.norm.visit(fn);
        }
        bott_conv_.visit(fn);
        bott_norm_.visit(fn);
        if (attn_bott_) attn_bott_->visit(fn);
        for (auto& lvl : dec_) {
            lvl.up.visit(fn);
            lvl.up_norm.visit(fn);
            lvl.fuse.visit(fn);
            lvl.fuse_norm.visit(fn);
        }
        if (attn_dec_) attn_dec_->visit(fn);
        head_.visit(fn);
        if (flow1_) {
            flow1_->visit(fn);
            flow2_->visit(fn);
        }
    }

    std::size_t param_count() {
        std::size_t n = 0;
        visit_params([&](const std::string&, std::vector<T>& w, std::vector<T>&) { n += w.size(); });
        return n;
    }

    void zero_grad() {
        visit_params([](const std::string&, std::vector<T>&, std::vector<T>& g) {
            std::fill(g.begin(), g.end(), T(0));
        });
    }

  private:
    struct EncLevel {
        nn::Conv2d<T> conv;
        nn::InstanceNorm<T> norm;
        nn::Act<T> act;
    };
    struct DecLevel {
        nn::Conv2d<T> up;
        nn::DepthToSpace<T> d2s;
        nn::InstanceNorm<T> up_norm;
        nn::Act<T> up_act;
        nn::Conv2d<T> fuse;
        nn::InstanceNorm<T> fuse_norm;
        nn::Act<T> fuse_act;
    };

    TryonConfig cfg_;
    std::vector<int> widths_;
    nn::Conv2d<T> stem_conv_;
    nn::InstanceNorm<T> stem_norm_;
    nn::Act<T> stem_act_;
    std::vector<EncLevel> enc_;
    nn::Conv2d<T> bott_conv_;
    nn::InstanceNorm<T> bott_norm_;
    nn::Act<T> bott_act_;
    std::optional<nn::SelfAttention<T>> attn_bott_;
    std::vector<DecLevel> dec_;
    std::optional<nn::SelfAttention<T>> attn_dec_;
    nn::Conv2d<T> head_;
    std::optional<nn::Conv2d<T>> flow1_;
    nn::Act<T> flow_act_;
    std::optional<nn::Conv2d<T>> flow2_;

    // forward caches
    std::vector<Tensor<T>> skips_;
    std::vector<Tensor<T>> skip_grads_;
    Tensor<T> tanh_cache_, sig_cache_, flow_sig_;
};

using TryonNetF = TryonNet<float>;

} // namespace tryonlab

// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <thread>

#include "tryonlab/cloth_warp.hpp"
#include "tryonlab/error.hpp"
#include "tryonlab/flow_compose.hpp"
#include "tryonlab/fp16.hpp"
#include "tryonlab/harness.hpp"
#include "tryonlab/rng.hpp"

namespace tryonlab {

namespace {

constexpr double kInitLossScale = 65536.0;   // 2^16
constexpr double kMaxLossScale = 16777216.0; // 2^24
constexpr double kMinLossScale = 1.0;
constexpr int kScaleGrowthInterval = 200; // non-overflowing steps between doublings
// The sampler draws frames i.i.d. with replacement, so an epoch is a step
// budget rather than a permutation pass; auto sizing visits each frame
// this many times per epoch in expectation.
constexpr int kAutoPassesPerEpoch = 8;

using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

struct SampleRef {
    int video = 0;
    int frame = 0;
};

struct SampleOut {
    double l1 = 0, mask = 0, perceptual = 0, flow_pen = 0, total = 0;
    double garment_l1 = 0;
    bool finite = true;
    std::string id;
};

/// One worker's private network clone plus its timing counters. All
/// replicas are built from the same config, so their initial parameters
/// are identical; updates are applied to replica 0 and broadcast.
struct Replica {
    TryonNetF net;
    ConvFeatures<float> extractor;
    double pipeline_seconds = 0;
    double compute_seconds = 0;

    Replica(const TryonConfig& net_cfg, std::uint64_t seed)
        : net(net_cfg), extractor(substream_seed(seed, "percept")) {}
};

TensorF as_one_channel(const TensorF& plane) {
    TensorF out({1, plane.dim(0), plane.dim(1)});
    std::memcpy(out.data(), plane.data(), plane.numel() * sizeof(float));
    return out;
}

class Trainer {
  public:
    explicit Trainer(const ExperimentConfig& cfg) : cfg_(cfg) {
        validate_experiment_config(cfg_);
        const auto root = resolve_dataset_root(cfg_);
        manifest_ = scan_manifest(root, cfg_.split);
        load_split();

        threads_ = cfg_.num_threads > 0 ? cfg_.num_threads
                                        : std::min(8u, std::max(1u, std::thread::hardware_concurrency()));
        threads_ = std::min<int>(threads_, cfg_.accumulated_batch);
        const TryonConfig net_cfg = tryon_config(cfg_);
        for (int r = 0; r < threads_; ++r)
            replicas_.push_back(std::make_unique<Replica>(net_cfg, cfg_.seed));

        replicas_[0]->net.visit_params(
            [&](const std::string& name, std::vector<float>& w, std::vector<float>&) {
                layout_.emplace_back(name, w.size());
                param_count_ += w.size();
            });
        // Parameter-block addresses are stable after construction; caching
        // them keeps the per-step broadcast a plain slotwise copy.
        for (auto& rep : replicas_) {
            std::vector<std::vector<float>*> s;
            rep->net.visit_params(
                [&](const std::string&, std::vector<float>& w, std::vector<float>&) {
                    s.push_back(&w);
                });
            slots_.push_back(std::move(s));
        }
        gacc_.assign(param_count_, 0.0f);
        adam_.m.assign(param_count_, 0.0f);
        adam_.v.assign(param_count_, 0.0f);
        data_rng_ = Rng(substream_seed(cfg_.seed, "train/data"));
        if (!cfg_.mixed_precision) loss_scale_ = 1.0;

        const int steps_auto = static_cast<int>(
            (pool_.size() * static_cast<std::size_t>(kAutoPassesPerEpoch) +
             static_cast<std::size_t>(cfg_.accumulated_batch) - 1) /
            static_cast<std::size_t>(cfg_.accumulated_batch));
        steps_per_epoch_ = cfg_.steps_per_epoch > 0 ? cfg_.steps_per_epoch : std::max(1, steps_auto);
    }

    TrainResult run(const std::filesystem::path& resume) {
        int start_epoch = 0;
        if (!resume.empty()) {
            const Checkpoint ckpt = load_checkpoint(resume);
            apply_checkpoint(ckpt, replicas_[0]->net, adam_);
            broadcast_params();
            data_rng_.deserialize(ckpt.rng_state);
            loss_scale_ = ckpt.loss_scale;
            good_steps_ = ckpt.good_steps;
            step_ = ckpt.step;
            start_epoch = ckpt.epoch;
            if (start_epoch >= cfg_.epochs)
                raise(ErrorCode::ConfigInvalid, "checkpoint already covers all epochs",
                      std::to_string(start_epoch));
        }

        const std::filesystem::path out(cfg_.out_dir);
        std::filesystem::create_directories(out / "checkpoints");
        std::ofstream csv(out / "losses.csv");
        if (!csv) raise(ErrorCode::IoFailure, "cannot open losses.csv", (out / "losses.csv").string());
        csv << "step,l1,mask,perceptual,flow_pen,total\n";

        TrainResult result;
        result.losses_csv = out / "losses.csv";
        const int h = manifest_.height, w = manifest_.width;
        result.input_bytes_per_step = static_cast<std::size_t>(input_channels(cfg_)) * h * w *
                                      sizeof(float) * cfg_.accumulated_batch;
        const int pose_ch = cfg_.pose_mode == PoseModeKind::dense ? 3 : KeypointSet::kNumPoints;
        result.pose_bytes_per_step =
            static_cast<std::size_t>(pose_ch) * h * w * sizeof(float) * cfg_.accumulated_batch;

        bool first_row = true;
        for (int epoch = start_epoch; epoch < cfg_.epochs; ++epoch) {
            const double lr = lr_schedule(epoch, cfg_);
            EpochStats es;
            es.epoch = epoch + 1;
            es.lr = lr;
            const double pipe0 = total_pipeline_seconds(), comp0 = total_compute_seconds();
            double total_sum = 0, garment_sum = 0;

            for (int s = 0; s < steps_per_epoch_; ++s) {
                const auto row = run_step(lr);
                ++step_;
                char line[256];
                std::snprintf(line, sizeof(line), "%lld,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                              static_cast<long long>(step_), row.l1, row.mask, row.perceptual,
                              row.flow_pen, row.total);
                csv << line;
                if (first_row) {
                    result.initial_total = row.total;
                    first_row = false;
                }
                result.final_total = row.total;
                total_sum += row.total;
                garment_sum += row.garment_l1;
            }
            csv.flush();

            es.mean_total = total_sum / steps_per_epoch_;
            es.mean_garment_l1 = garment_sum / steps_per_epoch_;
            es.pipeline_seconds = total_pipeline_seconds() - pipe0;
            es.compute_seconds = total_compute_seconds() - comp0;
            result.epochs.push_back(es);

            char name[32];
            std::snprintf(name, sizeof(name), "epoch_%02d.ckpt", epoch + 1);
            const auto ckpt_path = out / "checkpoints" / name;
            save_checkpoint(ckpt_path, snapshot(epoch + 1));
            result.checkpoints.push_back(ckpt_path);
        }

        result.steps = step_;
        result.skipped_steps = skipped_steps_;
        return result;
    }

  private:
    /// Losses for one optimizer step, averaged over the accumulated batch.
    SampleOut run_step(double lr) {
        std::fill(gacc_.begin(), gacc_.end(), 0.0f);
        std::vector<SampleRef> batch(cfg_.accumulated_batch);
        for (auto& ref : batch) ref = pool_[data_rng_.index(pool_.size())];

        std::vector<SampleOut> outs(batch.size());
        const float scale = static_cast<float>(loss_scale_);
        auto worker = [&](int r) {
            Replica& rep = *replicas_[r];
            for (std::size_t i = static_cast<std::size_t>(r); i < batch.size();
                 i += static_cast<std::size_t>(threads_))
                outs[i] = process_sample(rep, batch[i], scale);
        };
        if (threads_ == 1) {
            worker(0);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(threads_);
            for (int r = 0; r < threads_; ++r) pool.emplace_back(worker, r);
            for (auto& t : pool) t.join();
        }

        SampleOut mean;
        for (std::size_t i = 0; i < outs.size(); ++i) {
            if (!outs[i].finite)
                raise(ErrorCode::NanLoss,
                      "non-finite loss at step " + std::to_string(step_ + 1), outs[i].id);
            mean.l1 += outs[i].l1;
            mean.mask += outs[i].mask;
            mean.perceptual += outs[i].perceptual;
            mean.flow_pen += outs[i].flow_pen;
            mean.garment_l1 += outs[i].garment_l1;
        }
        const double n = static_cast<double>(outs.size());
        mean.l1 /= n;
        mean.mask /= n;
        mean.perceptual /= n;
        mean.flow_pen /= n;
        mean.garment_l1 /= n;
        mean.total =
            combine_losses(mean.l1, mean.mask, mean.perceptual, mean.flow_pen, cfg_.loss_weights)
                .total;

        reduce_grads();
        bool apply = true;
        if (cfg_.mixed_precision) {
            // Gradients pass through half precision on their way to the
            // optimizer; overflow discards the step and halves the scale.
            bool overflow = false;
            for (auto& g : gacc_) {
                g = round_fp16(g);
                if (!std::isfinite(g)) {
                    overflow = true;
                    break;
                }
            }
            if (overflow) {
                loss_scale_ = std::max(loss_scale_ / 2.0, kMinLossScale);
                good_steps_ = 0;
                ++skipped_steps_;
                apply = false;
            }
        }
        if (apply) {
            adam_step(replicas_[0]->net, adam_, gacc_, lr,
                      1.0 / (loss_scale_ * static_cast<double>(cfg_.accumulated_batch)));
            if (cfg_.mixed_precision && ++good_steps_ >= kScaleGrowthInterval) {
                loss_scale_ = std::min(loss_scale_ * 2.0, kMaxLossScale);
                good_steps_ = 0;
            }
            broadcast_params();
        }
        return mean;
    }

    SampleOut process_sample(Replica& rep, const SampleRef& ref, float scale) {
        const auto t0 = Clock::now();
        const VideoSample& vs = cache_[ref.video];
        const TensorF& gt = vs.frames[ref.frame];
        const TensorF& gmask = vs.garment_masks[ref.frame];
        const bool use_flow = cfg_.flow && !cfg_.force_zero_flow_mask;

        const PoseMode mode{cfg_.pose_mode, cfg_.heatmap_radius};
        const WarpedCloth warped = oracle_warp(vs, ref.frame);
        TensorF input = build_input(vs, ref.frame, mode, warped);

        TensorF prev_input;
        WarpedCloth warped_for_prev;
        if (use_flow) {
            warped_for_prev = oracle_warp(vs, ref.frame - 1);
            prev_input = build_input(vs, ref.frame - 1, mode, warped_for_prev);
        }
        const auto t1 = Clock::now();
        rep.pipeline_seconds += seconds_between(t0, t1);

        // The previous frame's output is treated as a constant input to the
        // temporal blend, so its forward pass runs first and leaves no
        // caches the current frame's backward would need.
        TensorF warped_prev;
        if (use_flow) {
            const auto prev_out = rep.net.forward(prev_input);
            const TensorF prev_final =
                compose(prev_out.rendered, prev_out.mask, warped_for_prev.image);
            warped_prev = backward_warp(prev_final, flows_[ref.video][ref.frame - 1]);
        }

        const auto out = rep.net.forward(input);
        const TensorF composed = compose(out.rendered, out.mask, warped.image);
        TensorF fm;
        TensorF final_frame = composed;
        if (use_flow) {
            fm = rep.net.flow_mask(composed, warped_prev);
            final_frame = TensorF(composed.shape());
            for (int c = 0; c < 3; ++c) {
                const float* cc = composed.channel(c);
                const float* wp = warped_prev.channel(c);
                float* dst = final_frame.channel(c);
                for (std::size_t i = 0; i < composed.plane(); ++i)
                    dst[i] = wp[i] * fm[i] + cc[i] * (1.0f - fm[i]);
            }
        }

        SampleOut so;
        so.id = vs.video_id + "/" + std::to_string(ref.frame);
        TensorF d_l1, d_perc, d_maskloss, d_fm_pen;
        so.l1 = l1_loss_grad(final_frame, gt, d_l1);
        so.perceptual = perceptual_loss_grad(final_frame, gt, rep.extractor, d_perc);
        so.mask = mask_loss_grad(out.mask, gmask, d_maskloss);
        if (use_flow) so.flow_pen = flow_mask_penalty_grad(fm, d_fm_pen);
        so.total = combine_losses(so.l1, so.mask, so.perceptual, so.flow_pen, cfg_.loss_weights)
                       .total;
        if (!std::isfinite(so.total)) {
            so.finite = false;
            return so;
        }
        so.garment_l1 = garment_region_l1(final_frame, gt, gmask);

        // Seed gradients carry the loss weights and the loss scale; every
        // path below is linear in them.
        const auto& lw = cfg_.loss_weights;
        TensorF d_final(final_frame.shape());
        for (std::size_t i = 0; i < d_final.numel(); ++i)
            d_final[i] = scale * (static_cast<float>(lw.w_l1) * d_l1[i] +
                                  static_cast<float>(lw.w_vgg) * d_perc[i]);
        TensorF d_mask(out.mask.shape());
        for (std::size_t i = 0; i < d_mask.numel(); ++i)
            d_mask[i] = scale * static_cast<float>(lw.w_mask) * d_maskloss[i];

        TensorF d_composed;
        if (use_flow) {
            d_composed = TensorF(composed.shape());
            TensorF d_fm(fm.shape());
            for (std::size_t i = 0; i < d_fm.numel(); ++i)
                d_fm[i] = scale * static_cast<float>(lw.lambda_f) * d_fm_pen[i];
            for (int c = 0; c < 3; ++c) {
                const float* df = d_final.channel(c);
                const float* cc = composed.channel(c);
                const float* wp = warped_prev.channel(c);
                float* dc = d_composed.channel(c);
                for (std::size_t i = 0; i < composed.plane(); ++i) {
                    dc[i] = df[i] * (1.0f - fm[i]);
                    d_fm[i] += df[i] * (wp[i] - cc[i]);
                }
            }
            const TensorF d_comp_head = rep.net.flow_mask_backward(d_fm);
            for (std::size_t i = 0; i < d_composed.numel(); ++i)
                d_composed[i] += d_comp_head[i];
        } else {
            d_composed = d_final;
        }

        // composed = warped*m + rendered*(1-m); warped is data, not a param.
        TensorF d_rendered(composed.shape());
        for (int c = 0; c < 3; ++c) {
            const float* dc = d_composed.channel(c);
            const float* wc = warped.image.channel(c);
            const float* rc = out.rendered.channel(c);
            float* dr = d_rendered.channel(c);
            for (std::size_t i = 0; i < composed.plane(); ++i) {
                dr[i] = dc[i] * (1.0f - out.mask[i]);
                d_mask[i] += dc[i] * (wc[i] - rc[i]);
            }
        }
        rep.net.backward(d_rendered, d_mask);

        rep.compute_seconds += seconds_between(t1, Clock::now());
        return so;
    }

    TensorF build_input(const VideoSample& vs, int frame, const PoseMode& mode,
                        const WarpedCloth& warped) {
        const PersonRepresentation pr = build_representation(vs, frame, mode);
        const TensorF mask_ch = as_one_channel(warped.mask);
        TensorF input = concat_channels(
            std::vector<const TensorF*>{&pr.channels, &warped.image, &mask_ch});
        if (cfg_.mixed_precision)
            for (std::size_t i = 0; i < input.numel(); ++i) input[i] = round_fp16(input[i]);
        return input;
    }

    static double garment_region_l1(const TensorF& pred, const TensorF& gt, const TensorF& gmask) {
        double acc = 0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < gmask.numel(); ++i) {
            if (gmask[i] <= 0.5f) continue;
            for (int c = 0; c < 3; ++c)
                acc += std::abs(static_cast<double>(pred.channel(c)[i]) - gt.channel(c)[i]);
            count += 3;
        }
        return count > 0 ? acc / static_cast<double>(count) : 0.0;
    }

    void load_split() {
        if (manifest_.video_ids.empty())
            raise(ErrorCode::DatasetError, "no videos in split", manifest_.root.string());
        const bool pairwise = cfg_.flow && !cfg_.force_zero_flow_mask;
        for (std::size_t v = 0; v < manifest_.video_ids.size(); ++v) {
            const std::string& id = manifest_.video_ids[v];
            cache_.push_back(load_sample(manifest_, id));
            const VideoSample& vs = cache_.back();
            if (pairwise) {
                std::vector<FlowField> vflows;
                for (int t = 0; t + 1 < vs.frame_count(); ++t)
                    vflows.push_back(FlowField::from_tensor(load_flow(manifest_, id, t)));
                flows_.push_back(std::move(vflows));
            }
            for (int t = 0; t < vs.frame_count(); ++t) {
                if (pairwise && t == 0) continue;
                pool_.push_back({static_cast<int>(v), t});
            }
        }
        if (pool_.empty())
            raise(ErrorCode::DatasetError, "split has no trainable frames",
                  manifest_.root.string());
    }

    void reduce_grads() {
        for (auto& rep : replicas_) {
            std::size_t off = 0;
            rep->net.visit_params(
                [&](const std::string&, std::vector<float>& w, std::vector<float>& g) {
                    (void)w;
                    for (std::size_t i = 0; i < g.size(); ++i) gacc_[off + i] += g[i];
                    off += g.size();
                });
            rep->net.zero_grad();
        }
    }

    void broadcast_params() {
        for (std::size_t r = 1; r < replicas_.size(); ++r)
            for (std::size_t k = 0; k < slots_[0].size(); ++k) *slots_[r][k] = *slots_[0][k];
    }

    double total_pipeline_seconds() const {
        double s = 0;
        for (const auto& r : replicas_) s += r->pipeline_seconds;
        return s;
    }
    double total_compute_seconds() const {
        double s = 0;
        for (const auto& r : replicas_) s += r->compute_seconds;
        return s;
    }

    Checkpoint snapshot(int completed_epochs) {
        Checkpoint ckpt;
        ckpt.config = cfg_;
        ckpt.epoch = completed_epochs;
        ckpt.step = step_;
        ckpt.adam_t = adam_.t;
        ckpt.loss_scale = loss_scale_;
        ckpt.good_steps = good_steps_;
        ckpt.rng_state = data_rng_.serialize();
        ckpt.layout = layout_;
        ckpt.params.reserve(param_count_);
        replicas_[0]->net.visit_params(
            [&](const std::string&, std::vector<float>& w, std::vector<float>&) {
                ckpt.params.insert(ckpt.params.end(), w.begin(), w.end());
            });
        ckpt.m = adam_.m;
        ckpt.v = adam_.v;
        return ckpt;
    }

    ExperimentConfig cfg_;
    DatasetManifest manifest_;
    std::vector<VideoSample> cache_;
    std::vector<std::vector<FlowField>> flows_;
    std::vector<SampleRef> pool_;
    std::vector<std::unique_ptr<Replica>> replicas_;
    std::vector<std::vector<std::vector<float>*>> slots_; // [replica][block]
    std::vector<std::pair<std::string, std::size_t>> layout_;
    std::size_t param_count_ = 0;
    std::vector<float> gacc_;
    AdamState adam_;
    Rng data_rng_{0};
    int threads_ = 1;
    int steps_per_epoch_ = 1;
    std::int64_t step_ = 0;
    int skipped_steps_ = 0;
    double loss_scale_ = kInitLossScale;
    int good_steps_ = 0;
};

} // namespace

void adam_step(TryonNetF& net, AdamState& state, const std::vector<float>& grads, double lr,
               double inv_scale) {
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    ++state.t;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.t));
    std::size_t off = 0;
    net.visit_params([&](const std::string&, std::vector<float>& w, std::vector<float>&) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double g = static_cast<double>(grads[off + i]) * inv_scale;
            const double m = kBeta1 * state.m[off + i] + (1.0 - kBeta1) * g;
            const double v = kBeta2 * state.v[off + i] + (1.0 - kBeta2) * g * g;
            state.m[off + i] = static_cast<float>(m);
            state.v[off + i] = static_cast<float>(v);
            w[i] = static_cast<float>(w[i] - lr * (m / c1) / (std::sqrt(v / c2) + kEps));
        }
        off += w.size();
    });
}

TrainResult train(const ExperimentConfig& cfg) { return train(cfg, {}); }

TrainResult train(const ExperimentConfig& cfg, const std::filesystem::path& resume) {
    Trainer trainer(cfg);
    return trainer.run(resume);
}

} // namespace tryonlab

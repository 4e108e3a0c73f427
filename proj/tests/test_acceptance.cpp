// SPDX-License-Identifier: Apache-2.0
//
// Release gate. Each case verifies one acceptance requirement end to end
// and prints a single PASS/FAIL line; tolerances and budgets are pinned
// inline, next to the checks they govern.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "tryonlab/flow_compose.hpp"
#include "tryonlab/harness.hpp"
#include "tryonlab/nn.hpp"
#include "tryonlab/objectives.hpp"

namespace {

using namespace tryonlab;
namespace fs = std::filesystem;
using TensorD = Tensor<double>;

// Prints the verdict when the case scope closes; a REQUIRE failure skips
// the `passed = true` line at the bottom and the destructor reports FAIL.
struct GateLine {
    explicit GateLine(const char* label_) : label(label_) {}
    ~GateLine() {
        std::printf("gate %-40s %s\n", label, passed ? "PASS" : "FAIL");
        std::fflush(stdout);
    }
    const char* label;
    bool passed = false;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const fs::path& gate_out_root() {
    static const fs::path root = [] {
        fs::path p = fs::temp_directory_path() / "tryonlab_gate_out";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

// 8 videos x 24 frames at 64x48: the desk-scale corpus.
const fs::path& desk_corpus() {
    static const fs::path root = [] {
        fs::path p = fs::temp_directory_path() / "tryonlab_gate_desk";
        fs::remove_all(p);
        SyntheticSpec spec;
        spec.num_videos = 8;
        spec.frames_per_video = 24;
        generate_synthetic(p, spec);
        return p;
    }();
    return root;
}

// 2 videos x 4 frames at 32x32: enough for determinism and resume checks.
const fs::path& small_corpus() {
    static const fs::path root = [] {
        fs::path p = fs::temp_directory_path() / "tryonlab_gate_small";
        fs::remove_all(p);
        SyntheticSpec spec;
        spec.num_videos = 2;
        spec.frames_per_video = 4;
        spec.height = 32;
        spec.width = 32;
        spec.seed = 11;
        generate_synthetic(p, spec);
        return p;
    }();
    return root;
}

template <typename Layer, typename T>
void set_param(Layer& layer, const std::string& suffix, const std::vector<T>& values) {
    layer.visit([&](const std::string& name, std::vector<T>& w, std::vector<T>&) {
        if (name.size() >= suffix.size() &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
            w = values;
    });
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) out.push_back(line);
    return out;
}

TensorF constant_flow(int h, int w, float dx, float dy) {
    TensorF t({2, h, w});
    for (std::size_t i = 0; i < t.plane(); ++i) {
        t.channel(0)[i] = dx;
        t.channel(1)[i] = dy;
    }
    return t;
}

} // namespace

TEST_CASE("gate: composition selection and bounds") {
    GateLine line{"01 composition selection and bounds"};
    const auto t0 = std::chrono::steady_clock::now();

    Rng rng(101);
    const int kTriples = 10000;
    for (int t = 0; t < kTriples; ++t) {
        Tensor<float> p({3, 1, 1}), w({3, 1, 1}), m({1, 1});
        for (int c = 0; c < 3; ++c) {
            p[static_cast<std::size_t>(c)] = rng.uniformf(0.0f, 1.0f);
            w[static_cast<std::size_t>(c)] = rng.uniformf(0.0f, 1.0f);
        }

        // blended mask: output stays inside the per-pixel [min, max] hull,
        // with 1e-6 headroom for the two float roundings in the blend
        m[0] = rng.uniformf(0.0f, 1.0f);
        const Tensor<float> mix = compose(p, m, w);
        for (std::size_t i = 0; i < 3; ++i) {
            const float lo = std::min(p[i], w[i]);
            const float hi = std::max(p[i], w[i]);
            REQUIRE(mix[i] >= lo - 1e-6f);
            REQUIRE(mix[i] <= hi + 1e-6f);
        }

        // binary mask: exact selection of one side
        m[0] = (t % 2 == 0) ? 1.0f : 0.0f;
        const Tensor<float> pick = compose(p, m, w);
        const Tensor<float>& want = (t % 2 == 0) ? w : p;
        for (std::size_t i = 0; i < 3; ++i) REQUIRE(pick[i] == want[i]);
    }

    const double elapsed = seconds_since(t0);
    std::printf("  %d triples in %.2f s (budget 5 s)\n", kTriples, elapsed);
    REQUIRE(elapsed < 5.0);
    line.passed = true;
}

TEST_CASE("gate: self-attention oracles") {
    GateLine line{"02 self-attention oracles"};
    const double kTol = 1e-6;

    // single token: softmax over one logit is 1, so the attended output is
    // the value path and y = x + wo * (wv * x)
    {
        nn::SelfAttention<double> att;
        att.build("att", 3, 99);
        set_param(att, ".gamma", std::vector<double>{1.0});
        Rng rng(53);
        TensorD x({3, 1, 1});
        for (std::size_t i = 0; i < 3; ++i) x[i] = rng.uniform(-1.0, 1.0);
        const TensorD y = att.forward(x);
        for (int i = 0; i < 3; ++i) {
            double o = 0;
            for (int j = 0; j < 3; ++j) {
                double v = 0;
                for (int k = 0; k < 3; ++k) v += att.wv.at(j, k) * x[static_cast<std::size_t>(k)];
                o += att.wo.at(i, j) * v;
            }
            REQUIRE(std::abs(y[static_cast<std::size_t>(i)] -
                             (x[static_cast<std::size_t>(i)] + o)) <= kTol);
        }
    }

    // zero query weight: all logits vanish, the softmax is uniform, and
    // every token receives the mean value
    {
        nn::SelfAttention<double> att;
        att.build("att", 1, 7);
        set_param(att, ".wq", std::vector<double>{0.0});
        set_param(att, ".wk", std::vector<double>{1.0});
        set_param(att, ".wv", std::vector<double>{1.0});
        set_param(att, ".wo", std::vector<double>{1.0});
        set_param(att, ".gamma", std::vector<double>{1.0});
        TensorD x({1, 2, 3});
        const double vals[6] = {0.2, -0.4, 0.9, 0.3, -1.1, 0.5};
        double mean = 0;
        for (std::size_t i = 0; i < 6; ++i) {
            x[i] = vals[i];
            mean += vals[i] / 6.0;
        }
        const TensorD y = att.forward(x);
        for (std::size_t i = 0; i < 6; ++i) REQUIRE(std::abs(y[i] - (vals[i] + mean)) <= kTol);
    }

    // two tokens x = [0, 1] with wq = ln 3: the second query weighs the
    // keys (0.25, 0.75), so its attended value is 0.75
    {
        nn::SelfAttention<double> att;
        att.build("att", 1, 0);
        set_param(att, ".wq", std::vector<double>{std::log(3.0)});
        set_param(att, ".wk", std::vector<double>{1.0});
        set_param(att, ".wv", std::vector<double>{1.0});
        set_param(att, ".wo", std::vector<double>{1.0});
        set_param(att, ".gamma", std::vector<double>{1.0});
        TensorD x({1, 1, 2});
        x[0] = 0.0;
        x[1] = 1.0;
        const TensorD y = att.forward(x);
        REQUIRE(std::abs(y[0] - 0.5) <= kTol);  // uniform over equal logits
        REQUIRE(std::abs(y[1] - 1.75) <= kTol); // 0.25 * 0 + 0.75 * 1, plus x
    }

    // fresh layers start at zero residual gain, so a network built with
    // attention matches the attention-free network everywhere
    {
        TryonConfig cfg;
        cfg.in_channels = 5;
        cfg.base_width = 8;
        cfg.depth = 2;
        cfg.activation = Activation::gelu;
        cfg.seed = 21;
        cfg.attention = true;
        TryonNetF with(cfg);
        cfg.attention = false;
        TryonNetF without(cfg);
        Rng rng(23);
        Tensor<float> x({5, 16, 12});
        for (std::size_t i = 0; i < x.numel(); ++i) x[i] = rng.uniformf(-1.0f, 1.0f);
        const auto ya = with.forward(x);
        const auto yb = without.forward(x);
        for (std::size_t i = 0; i < ya.rendered.numel(); ++i)
            REQUIRE(std::abs(ya.rendered[i] - yb.rendered[i]) <= kTol);
        for (std::size_t i = 0; i < ya.mask.numel(); ++i)
            REQUIRE(std::abs(ya.mask[i] - yb.mask[i]) <= kTol);
    }
    line.passed = true;
}

TEST_CASE("gate: activation values and derivatives") {
    GateLine line{"03 activation values and derivatives"};

    // closed-form anchor values, quoted to six decimals
    REQUIRE(std::abs(activate(Activation::gelu, 1.0, 1.0) - 0.841345) <= 1e-6);
    REQUIRE(std::abs(activate(Activation::swish, 1.0, 1.0) - 0.731059) <= 1e-6);
    REQUIRE(activate(Activation::relu, 1.5, 1.0) == 1.5);
    REQUIRE(activate(Activation::relu, -1.5, 1.0) == 0.0);
    REQUIRE(std::abs(activate(Activation::sine, 0.5, 30.0) - std::sin(15.0)) <= 1e-12);

    // central differences, h = 1e-4, 100 points per activation in [-5, 5];
    // relu skips the kink neighbourhood |x| < 1e-3
    const double h = 1e-4;
    const double kTol = 1e-4;
    Rng rng(211);
    const Activation acts[4] = {Activation::relu, Activation::gelu, Activation::swish,
                                Activation::sine};
    for (Activation a : acts) {
        const double omega = a == Activation::sine ? 30.0 : 1.0;
        for (int t = 0; t < 100; ++t) {
            double x = rng.uniform(-5.0, 5.0);
            while (a == Activation::relu && std::abs(x) < 1e-3) x = rng.uniform(-5.0, 5.0);
            const double fd =
                (activate(a, x + h, omega) - activate(a, x - h, omega)) / (2.0 * h);
            REQUIRE(std::abs(activate_grad(a, x, omega) - fd) <= kTol);
        }
    }
    line.passed = true;
}

TEST_CASE("gate: metric closed forms and aggregation") {
    GateLine line{"04 metric closed forms and aggregation"};

    // psnr: mse 0.01 at peak 1 is 20 dB; mse 0.25 is 10*log10(4) = 6.0206 dB
    TensorF zeros({3, 8, 8});
    TensorF tenth({3, 8, 8}), half({3, 8, 8});
    tenth.fill(0.1f);
    half.fill(0.5f);
    REQUIRE(std::abs(psnr(zeros, tenth, 1.0) - 20.0) <= 1e-5);
    REQUIRE(std::abs(psnr(zeros, half, 1.0) - 6.0206) <= 1e-4);
    REQUIRE(psnr(zeros, half, 1.0) == doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-12));

    // ssim: identity 1; constant-vs-constant collapses to the luminance
    // term c1 / (mu^2 + c1)
    Rng rng(307);
    TensorF x({3, 16, 14});
    for (std::size_t i = 0; i < x.numel(); ++i) x[i] = rng.uniformf(0.0f, 1.0f);
    REQUIRE(std::abs(ssim(x, x) - 1.0) <= 1e-12);
    TensorF ones({3, 16, 14});
    ones.fill(1.0f);
    const double c1 = 1e-4; // (0.01 * peak)^2
    REQUIRE(std::abs(ssim(TensorF({3, 16, 14}), ones) - c1 / (1.0 + c1)) <= 1e-9);

    // symmetry on 100 random pairs, bit-exact
    for (int t = 0; t < 100; ++t) {
        TensorF a({1, 12, 12}), b({1, 12, 12});
        for (std::size_t i = 0; i < a.numel(); ++i) {
            a[i] = rng.uniformf(0.0f, 1.0f);
            b[i] = rng.uniformf(0.0f, 1.0f);
        }
        REQUIRE(ssim(a, b) == ssim(b, a));
    }

    // aggregation against brute-force population mean/std; infinite psnr
    // rows are counted but excluded from the moments
    std::vector<MetricRow> rows;
    const double inf = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 100; ++i) {
        MetricRow r;
        r.video_id = "v" + std::to_string(i % 7);
        r.frame_idx = i / 7;
        r.ssim = rng.uniform(0.0, 1.0);
        r.psnr = (i % 17 == 0) ? inf : rng.uniform(10.0, 40.0);
        rows.push_back(r);
    }
    const MetricReport rep = aggregate(rows);
    double smean = 0, pmean = 0;
    int finite = 0, infs = 0;
    for (const MetricRow& r : rows) {
        smean += r.ssim;
        if (std::isinf(r.psnr)) {
            ++infs;
        } else {
            pmean += r.psnr;
            ++finite;
        }
    }
    smean /= static_cast<double>(rows.size());
    pmean /= static_cast<double>(finite);
    double svar = 0, pvar = 0;
    for (const MetricRow& r : rows) {
        svar += (r.ssim - smean) * (r.ssim - smean);
        if (!std::isinf(r.psnr)) pvar += (r.psnr - pmean) * (r.psnr - pmean);
    }
    svar /= static_cast<double>(rows.size());
    pvar /= static_cast<double>(finite);
    REQUIRE(std::abs(rep.overall.ssim_mean - smean) <= 1e-10);
    REQUIRE(std::abs(rep.overall.ssim_std - std::sqrt(svar)) <= 1e-10);
    REQUIRE(std::abs(rep.overall.psnr_mean - pmean) <= 1e-10);
    REQUIRE(std::abs(rep.overall.psnr_std - std::sqrt(pvar)) <= 1e-10);
    REQUIRE(rep.overall.psnr_inf_count == infs);
    REQUIRE(rep.overall.frames == 100);
    line.passed = true;
}

TEST_CASE("gate: end-to-end gradient check") {
    GateLine line{"05 end-to-end gradient check"};
    const auto t0 = std::chrono::steady_clock::now();

    // 2-level width-8 network at 16x12, driven through the full training
    // objective: compose with the warped cloth, then L1 + mask +
    // perceptual losses, all in double
    TryonConfig cfg;
    cfg.in_channels = 7;
    cfg.base_width = 8;
    cfg.depth = 2;
    cfg.attention = true;
    cfg.activation = Activation::gelu;
    cfg.seed = 5;
    TryonNet<double> net(cfg);
    net.visit_params([](const std::string& name, std::vector<double>& w, std::vector<double>&) {
        if (name.find(".attn.gamma") != std::string::npos) w[0] = 0.5;
    });

    Rng rng(71);
    auto rand_tensor = [&rng](std::vector<int> shape, double lo, double hi) {
        TensorD t(std::move(shape));
        for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
        return t;
    };
    const TensorD x = rand_tensor({7, 16, 12}, -1.0, 1.0);
    const TensorD warped = rand_tensor({3, 16, 12}, 0.0, 1.0);
    const TensorD gt = rand_tensor({3, 16, 12}, 0.0, 1.0);
    const TensorD gmask = rand_tensor({16, 12}, 0.0, 1.0);
    ConvFeatures<double> fx(909);
    const LossWeights lw;

    auto forward_loss = [&](TryonNet<double>::Output* keep) {
        const auto out = net.forward(x);
        const TensorD final = compose(out.rendered, out.mask, warped);
        TensorD d_unused(final.shape());
        const double l1 = l1_loss(final, gt);
        const double mask = mask_loss(out.mask, gmask);
        const double perc = perceptual_loss(final, gt, fx);
        if (keep) *keep = out;
        return combine_losses(l1, mask, perc, 0.0, lw).total;
    };

    // analytic pass: seed the adjoints exactly as the trainer does
    net.zero_grad();
    TryonNet<double>::Output out;
    forward_loss(&out);
    const TensorD final = compose(out.rendered, out.mask, warped);
    TensorD d_l1(final.shape()), d_perc(final.shape()), d_maskloss(out.mask.shape());
    l1_loss_grad(final, gt, d_l1);
    perceptual_loss_grad(final, gt, fx, d_perc);
    mask_loss_grad(out.mask, gmask, d_maskloss);
    TensorD d_final(final.shape());
    for (std::size_t i = 0; i < d_final.numel(); ++i)
        d_final[i] = lw.w_l1 * d_l1[i] + lw.w_vgg * d_perc[i];
    TensorD d_rendered(final.shape());
    TensorD d_mask(out.mask.shape());
    for (std::size_t i = 0; i < d_mask.numel(); ++i) d_mask[i] = lw.w_mask * d_maskloss[i];
    const std::size_t plane = out.mask.numel();
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < plane; ++i) {
            const std::size_t j = static_cast<std::size_t>(c) * plane + i;
            d_rendered[j] = d_final[j] * (1.0 - out.mask[i]);
            d_mask[i] += d_final[j] * (warped[j] - out.rendered[j]);
        }
    net.backward(d_rendered, d_mask);

    struct Slot {
        std::string name;
        std::vector<double>* w;
        std::vector<double>* g;
    };
    std::vector<Slot> slots;
    net.visit_params([&](const std::string& n, std::vector<double>& w, std::vector<double>& g) {
        slots.push_back({n, &w, &g});
    });
    std::size_t total = 0;
    for (const Slot& s : slots) total += s.w->size();

    const double hstep = 1e-3;
    const double kRel = 0.02;
    auto probe = [&](const Slot& s, std::size_t i) {
        const double keep = (*s.w)[i];
        (*s.w)[i] = keep + hstep;
        const double lp = forward_loss(nullptr);
        (*s.w)[i] = keep - hstep;
        const double lm = forward_loss(nullptr);
        (*s.w)[i] = keep;
        const double fd = (lp - lm) / (2.0 * hstep);
        const double an = (*s.g)[i];
        REQUIRE(std::abs(an - fd) <= kRel * std::max(std::abs(an), std::abs(fd)) + 1e-8);
    };
    Rng pick(73);
    for (int t = 0; t < 20; ++t) {
        std::size_t gi = pick.index(total);
        for (const Slot& s : slots) {
            if (gi < s.w->size()) {
                probe(s, gi);
                break;
            }
            gi -= s.w->size();
        }
    }

    const double elapsed = seconds_since(t0);
    std::printf("  20 parameter probes in %.1f s (budget 120 s)\n", elapsed);
    REQUIRE(elapsed < 120.0);
    line.passed = true;
}

TEST_CASE("gate: desk-scale reconstruction gain") {
    GateLine line{"06 desk-scale reconstruction gain"};
    const auto t0 = std::chrono::steady_clock::now();

    ExperimentConfig cfg; // stock defaults: 10 epochs, batch 64, lr decay
    cfg.dataset = desk_corpus().string();
    cfg.out_dir = (gate_out_root() / "desk_run").string();

    const DatasetManifest val = scan_manifest(cfg.dataset, Split::val);
    TryonNetF fresh(tryon_config(cfg));
    const MetricReport before = evaluate_net(fresh, cfg, val);

    const TrainResult r = train(cfg);
    REQUIRE(r.epochs.size() == 10);

    const Checkpoint ck = load_checkpoint(r.checkpoints.back());
    TryonNetF net(tryon_config(ck.config));
    AdamState st;
    apply_checkpoint(ck, net, st);
    const MetricReport after = evaluate_net(net, cfg, val);

    const double gain = after.overall.psnr_mean - before.overall.psnr_mean;
    const double elapsed = seconds_since(t0);
    std::printf("  val psnr %.3f -> %.3f dB (gain %.3f, floor 6.0)\n", before.overall.psnr_mean,
                after.overall.psnr_mean, gain);
    for (const EpochStats& e : r.epochs)
        std::printf("  epoch %02d garment_l1 %.6f\n", e.epoch, e.mean_garment_l1);
    std::printf("  wall time %.0f s (budget 14400 s cpu-only)\n", elapsed);

    REQUIRE(gain >= 6.0);
    for (std::size_t i = 1; i < r.epochs.size(); ++i)
        REQUIRE(r.epochs[i].mean_garment_l1 < r.epochs[i - 1].mean_garment_l1);
    REQUIRE(elapsed < 14400.0);
    line.passed = true;
}

TEST_CASE("gate: dense pose input cost") {
    GateLine line{"07 dense pose input cost"};

    auto run_mode = [&](PoseModeKind mode, const char* name) {
        ExperimentConfig cfg;
        cfg.dataset = desk_corpus().string();
        cfg.out_dir = (gate_out_root() / (std::string("pose_") + name)).string();
        cfg.pose_mode = mode;
        cfg.base_width = 16;
        cfg.depth = 3;
        cfg.epochs = 1;
        cfg.decay_start_epoch = 1;
        cfg.steps_per_epoch = 8;
        cfg.accumulated_batch = 16;
        cfg.micro_batch = 4;
        cfg.mixed_precision = false;
        cfg.seed = 2;
        return train(cfg);
    };
    const TrainResult dense = run_mode(PoseModeKind::dense, "dense");
    const TrainResult coco = run_mode(PoseModeKind::coco, "coco");

    std::printf("  input bytes/step: dense %zu vs coco %zu\n", dense.input_bytes_per_step,
                coco.input_bytes_per_step);
    std::printf("  pose bytes/step: dense %zu vs coco %zu (exactly 1/6)\n",
                dense.pose_bytes_per_step, coco.pose_bytes_per_step);
    std::printf("  pipeline s/epoch: dense %.4f vs coco %.4f\n", dense.epochs[0].pipeline_seconds,
                coco.epochs[0].pipeline_seconds);

    REQUIRE(dense.input_bytes_per_step < coco.input_bytes_per_step);
    REQUIRE(dense.pose_bytes_per_step * 6 == coco.pose_bytes_per_step);
    REQUIRE(dense.epochs[0].pipeline_seconds < coco.epochs[0].pipeline_seconds);
    line.passed = true;
}

TEST_CASE("gate: flow ablation direction") {
    GateLine line{"08 flow ablation direction"};

    auto run_flow = [&](bool flow, const char* name) {
        ExperimentConfig cfg;
        cfg.dataset = desk_corpus().string();
        cfg.out_dir = (gate_out_root() / (std::string("flow_") + name)).string();
        cfg.flow = flow;
        cfg.base_width = 16;
        cfg.depth = 3;
        cfg.epochs = 3;
        cfg.decay_start_epoch = 3;
        cfg.steps_per_epoch = 8;
        cfg.accumulated_batch = 16;
        cfg.micro_batch = 4;
        cfg.mixed_precision = false;
        cfg.seed = 5;
        const TrainResult r = train(cfg);
        const Checkpoint ck = load_checkpoint(r.checkpoints.back());
        TryonNetF net(tryon_config(ck.config));
        AdamState st;
        apply_checkpoint(ck, net, st);
        const DatasetManifest val = scan_manifest(cfg.dataset, Split::val);
        return evaluate_net(net, cfg, val);
    };
    const MetricReport without = run_flow(false, "off");
    const MetricReport with = run_flow(true, "on");

    // spread of the no-flow run's per-video ssim means: the noise band
    double mean = 0;
    for (const auto& [id, agg] : without.per_video) mean += agg.ssim_mean;
    mean /= static_cast<double>(without.per_video.size());
    double var = 0;
    for (const auto& [id, agg] : without.per_video)
        var += (agg.ssim_mean - mean) * (agg.ssim_mean - mean);
    const double noise = std::sqrt(var / static_cast<double>(without.per_video.size()));

    std::printf("  val ssim: no-flow %.6f, flow %.6f, noise band %.6f\n",
                without.overall.ssim_mean, with.overall.ssim_mean, noise);
    std::printf("  direction recorded at desk scale; synthetic data may not reproduce the\n"
                "  artifact severity seen on real footage\n");

    // flow must not beat no-flow by more than one noise band
    REQUIRE(with.overall.ssim_mean <= without.overall.ssim_mean + noise);
    line.passed = true;
}

TEST_CASE("gate: determinism and resume") {
    GateLine line{"09 determinism and resume"};

    auto base_cfg = [&](const char* name) {
        ExperimentConfig cfg;
        cfg.dataset = small_corpus().string();
        cfg.out_dir = (gate_out_root() / name).string();
        cfg.base_width = 8;
        cfg.depth = 2;
        cfg.epochs = 4;
        cfg.decay_start_epoch = 2;
        cfg.steps_per_epoch = 3;
        cfg.accumulated_batch = 8;
        cfg.micro_batch = 4;
        cfg.mixed_precision = false;
        cfg.seed = 3;
        return cfg;
    };

    // identical config + seed, two runs: byte-identical loss logs
    const TrainResult a = train(base_cfg("det_a"));
    const TrainResult b = train(base_cfg("det_b"));
    REQUIRE(read_file(a.losses_csv) == read_file(b.losses_csv));

    // stop at epoch 2, resume to epoch 4: the resumed rows must equal the
    // uninterrupted run's, byte for byte
    ExperimentConfig half = base_cfg("det_half");
    half.epochs = 2;
    const TrainResult first = train(half);
    ExperimentConfig rest = base_cfg("det_rest");
    const TrainResult second = train(rest, first.checkpoints.back());

    const std::vector<std::string> full = lines_of(read_file(a.losses_csv));
    const std::vector<std::string> tail = lines_of(read_file(second.losses_csv));
    REQUIRE(full.size() == 13); // header + 12 steps
    REQUIRE(tail.size() == 7);  // header + steps 7..12
    REQUIRE(tail[0] == full[0]);
    for (std::size_t i = 1; i < tail.size(); ++i) REQUIRE(tail[i] == full[i + 6]);
    line.passed = true;
}

TEST_CASE("gate: flow warp oracles") {
    GateLine line{"10 flow warp oracles"};

    Rng rng(103);
    TensorF prev({3, 8, 12});
    for (std::size_t i = 0; i < prev.numel(); ++i) prev[i] = rng.uniformf(0.0f, 1.0f);

    // zero flow: bit-exact identity
    const TensorF same = backward_warp(prev, FlowField::from_tensor(constant_flow(8, 12, 0, 0)));
    REQUIRE(same.vec() == prev.vec());

    // integer shift: interior pixels match the index-shift oracle exactly
    const int dx = 3, dy = -2;
    const TensorF moved = backward_warp(
        prev, FlowField::from_tensor(constant_flow(8, 12, static_cast<float>(dx),
                                                   static_cast<float>(dy))));
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 12; ++x) {
                const int sy = y + dy, sx = x + dx;
                if (sy < 0 || sy >= 8 || sx < 0 || sx >= 12) continue; // border clamp not asserted
                REQUIRE(moved.at(c, y, x) == prev.at(c, sy, sx));
            }
    line.passed = true;
}

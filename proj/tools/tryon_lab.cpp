// SPDX-License-Identifier: Apache-2.0
//
// tryon-lab: dataset generation, training, evaluation, and one-factor
// grid sweeps over the reconstruction try-on pipeline. All failures exit
// nonzero with a single JSON object on stderr.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tryonlab/harness.hpp"

namespace {

using namespace tryonlab;

// Options shared by train/evaluate/grid. CLI flags override the config
// file, which overrides built-in defaults.
struct CommonOpts {
    std::string config_file;
    std::vector<std::string> overrides; // key=value, applied in order
    std::string data;
    std::string out;
    std::int64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App& cmd, CommonOpts& opts, bool with_config = true) {
    if (with_config)
        cmd.add_option("--config", opts.config_file, "key=value config file");
    cmd.add_option("--set", opts.overrides, "config override key=value (repeatable)")
        ->expected(1)
        ->take_all();
    cmd.add_option("--data", opts.data, "dataset root (default: $TRYON_LAB_DATA)");
    cmd.add_option("--out", opts.out, "output directory");
    cmd.add_option("--seed", opts.seed, "RNG seed")->each([&opts](const std::string&) {
        opts.seed_set = true;
    });
}

ExperimentConfig build_config(const CommonOpts& opts) {
    ExperimentConfig cfg;
    if (!opts.config_file.empty()) cfg = load_config_file(opts.config_file);
    for (const std::string& kv : opts.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            raise(ErrorCode::ConfigInvalid, "--set expects key=value, got '" + kv + "'");
        set_config_field(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!opts.data.empty()) cfg.dataset = opts.data;
    if (!opts.out.empty()) cfg.out_dir = opts.out;
    if (opts.seed_set) cfg.seed = static_cast<std::uint64_t>(opts.seed);
    cfg.dataset = resolve_dataset_root(cfg).string();
    validate_experiment_config(cfg);
    return cfg;
}

void print_epoch(const EpochStats& e) {
    std::printf("epoch %02d  lr %.3g  total %.6f  garment_l1 %.6f  pipeline %.2fs  compute %.2fs\n",
                e.epoch, e.lr, e.mean_total, e.mean_garment_l1, e.pipeline_seconds,
                e.compute_seconds);
}

void print_train_result(const TrainResult& r) {
    for (const EpochStats& e : r.epochs) print_epoch(e);
    std::printf("steps %lld  skipped %d  total %.6f -> %.6f\n", static_cast<long long>(r.steps),
                r.skipped_steps, r.initial_total, r.final_total);
    std::printf("input bytes/step %zu  pose bytes/step %zu\n", r.input_bytes_per_step,
                r.pose_bytes_per_step);
    std::printf("losses: %s\n", r.losses_csv.string().c_str());
    if (!r.checkpoints.empty())
        std::printf("last checkpoint: %s\n", r.checkpoints.back().string().c_str());
}

void print_report(const MetricReport& rep) {
    std::printf("frames %d  ssim %.4f +/- %.4f  psnr %.3f +/- %.3f dB",
                rep.overall.frames, rep.overall.ssim_mean, rep.overall.ssim_std,
                rep.overall.psnr_mean, rep.overall.psnr_std);
    if (rep.overall.psnr_inf_count > 0)
        std::printf("  (%d frames at infinite psnr)", rep.overall.psnr_inf_count);
    std::printf("\n");
}

int run(int argc, char** argv) {
    CLI::App app{"reconstruction try-on lab"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "write a synthetic dataset");
    SyntheticSpec spec;
    std::string gen_out;
    std::int64_t gen_seed = 0;
    gen->add_option("--out", gen_out, "dataset root to create")->required();
    gen->add_option("--videos", spec.num_videos, "training videos");
    gen->add_option("--frames", spec.frames_per_video, "frames per video");
    gen->add_option("--height", spec.height, "frame height");
    gen->add_option("--width", spec.width, "frame width");
    gen->add_option("--seed", gen_seed, "RNG seed");

    // train
    auto* tr = app.add_subcommand("train", "train a model, writing checkpoints and losses.csv");
    CommonOpts tr_opts;
    std::string resume;
    add_common(*tr, tr_opts);
    tr->add_option("--resume", resume, "checkpoint to continue from");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "score a checkpoint over a dataset split");
    std::string ckpt_path;
    std::string split_name = "val";
    CommonOpts ev_opts;
    ev->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    ev->add_option("--split", split_name, "dataset split (train/val/test)");
    ev->add_option("--data", ev_opts.data, "dataset root (default: $TRYON_LAB_DATA)");
    ev->add_option("--out", ev_opts.out, "report directory");

    // grid
    auto* gr = app.add_subcommand("grid", "one-factor-at-a-time sweep around a base config");
    CommonOpts gr_opts;
    std::vector<std::string> axis_args;
    add_common(*gr, gr_opts);
    gr->add_option("--axis", axis_args, "axis as field=v1,v2,... (repeatable)")
        ->expected(1)
        ->take_all();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help and friends
        const nlohmann::json j{{"error", "UsageError"}, {"message", e.what()}};
        std::fprintf(stderr, "%s\n", j.dump().c_str());
        return 2;
    }

    if (gen->parsed()) {
        spec.seed = static_cast<std::uint64_t>(gen_seed);
        generate_synthetic(gen_out, spec);
        const DatasetManifest m = scan_manifest(gen_out, Split::train);
        std::printf("wrote %zu training videos (%dx%d) under %s\n", m.video_ids.size(), m.height,
                    m.width, gen_out.c_str());
        return 0;
    }

    if (tr->parsed()) {
        const ExperimentConfig cfg = build_config(tr_opts);
        const TrainResult r =
            resume.empty() ? train(cfg) : train(cfg, std::filesystem::path(resume));
        print_train_result(r);
        return 0;
    }

    if (ev->parsed()) {
        ExperimentConfig probe;
        probe.dataset = ev_opts.data;
        const std::filesystem::path root = resolve_dataset_root(probe);
        const std::filesystem::path out(ev_opts.out.empty() ? "eval" : ev_opts.out);
        const MetricReport rep = evaluate(ckpt_path, root, split_from_name(split_name), out);
        print_report(rep);
        std::printf("report: %s\n", (out / "report.json").string().c_str());
        return 0;
    }

    // grid
    const ExperimentConfig base = build_config(gr_opts);
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    for (const std::string& arg : axis_args) {
        const auto eq = arg.find('=');
        if (eq == std::string::npos)
            raise(ErrorCode::ConfigInvalid, "--axis expects field=v1,v2,..., got '" + arg + "'");
        std::vector<std::string> values;
        std::string rest = arg.substr(eq + 1);
        std::size_t pos = 0;
        while (pos <= rest.size()) {
            const auto comma = rest.find(',', pos);
            const auto end = comma == std::string::npos ? rest.size() : comma;
            if (end > pos) values.push_back(rest.substr(pos, end - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (values.empty())
            raise(ErrorCode::ConfigInvalid, "--axis '" + arg + "' lists no values");
        axes.emplace_back(arg.substr(0, eq), std::move(values));
    }
    const GridResult grid = run_grid(base, axes, base.out_dir);
    for (const GridCell& cell : grid.cells) {
        if (cell.ok)
            std::printf("%-24s ok    ssim %.4f  psnr %.3f dB\n", cell.name.c_str(),
                        cell.report.overall.ssim_mean, cell.report.overall.psnr_mean);
        else
            std::printf("%-24s FAIL  %s\n", cell.name.c_str(), cell.error.c_str());
    }
    std::printf("summary: %s\n", grid.summary_csv.string().c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const tryonlab::Error& e) {
        nlohmann::json j{{"error", tryonlab::error_code_name(e.code())}, {"message", e.what()}};
        if (!e.detail().empty()) j["detail"] = e.detail();
        std::fprintf(stderr, "%s\n", j.dump().c_str());
        return 1;
    } catch (const std::exception& e) {
        const nlohmann::json j{{"error", "Unhandled"}, {"message", e.what()}};
        std::fprintf(stderr, "%s\n", j.dump().c_str());
        return 1;
    }
}

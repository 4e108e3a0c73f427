// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <fstream>
#include <string>

#include "tryonlab/cloth_warp.hpp"
#include "tryonlab/error.hpp"
#include "tryonlab/flow_compose.hpp"
#include "tryonlab/harness.hpp"

namespace tryonlab {

namespace {

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

TensorF as_one_channel(const TensorF& plane) {
    TensorF out({1, plane.dim(0), plane.dim(1)});
    for (std::size_t i = 0; i < plane.numel(); ++i) out[i] = plane[i];
    return out;
}

int report_levels(const DatasetManifest& manifest) {
    const int levels = max_ms_ssim_levels(manifest.height, manifest.width);
    if (levels < 1)
        raise(ErrorCode::ImageTooSmall, "split images are smaller than the ssim window",
              std::to_string(manifest.height) + "x" + std::to_string(manifest.width));
    return levels;
}

} // namespace

MetricReport evaluate_net(TryonNetF& net, const ExperimentConfig& cfg,
                          const DatasetManifest& manifest) {
    const int levels = report_levels(manifest);
    const PoseMode mode{cfg.pose_mode, cfg.heatmap_radius};
    std::vector<MetricRow> rows;
    for (const std::string& id : manifest.video_ids) {
        const VideoSample vs = load_sample(manifest, id);
        TensorF prev_final;
        for (int t = 0; t < vs.frame_count(); ++t) {
            const WarpedCloth warped = oracle_warp(vs, t);
            const PersonRepresentation pr = build_representation(vs, t, mode);
            const TensorF mask_ch = as_one_channel(warped.mask);
            const TensorF input = concat_channels(
                std::vector<const TensorF*>{&pr.channels, &warped.image, &mask_ch});
            const auto out = net.forward(input);
            TensorF final_frame = compose(out.rendered, out.mask, warped.image);
            if (cfg.flow && t > 0) {
                const FlowField flow = FlowField::from_tensor(load_flow(manifest, id, t - 1));
                TensorF fm = net.flow_mask(final_frame,
                                           backward_warp(prev_final, flow));
                if (cfg.force_zero_flow_mask) fm.fill(0.0f);
                final_frame = flow_compose(final_frame, prev_final, flow, fm).final;
            }
            if (cfg.flow) prev_final = final_frame;
            const TensorF& gt = vs.frames[t];
            rows.push_back({id, t, ms_ssim(final_frame, gt, levels), psnr(final_frame, gt, 1.0)});
        }
    }
    return aggregate(std::move(rows));
}

MetricReport evaluate_identity(const DatasetManifest& manifest) {
    const int levels = report_levels(manifest);
    std::vector<MetricRow> rows;
    for (const std::string& id : manifest.video_ids) {
        const VideoSample vs = load_sample(manifest, id);
        for (int t = 0; t < vs.frame_count(); ++t) {
            const TensorF& gt = vs.frames[t];
            rows.push_back({id, t, ms_ssim(gt, gt, levels), psnr(gt, gt, 1.0)});
        }
    }
    return aggregate(std::move(rows));
}

MetricReport evaluate(const std::filesystem::path& checkpoint, const std::filesystem::path& root,
                      Split split, const std::filesystem::path& out_dir) {
    const Checkpoint ckpt = load_checkpoint(checkpoint);
    TryonNetF net(tryon_config(ckpt.config));
    AdamState adam;
    apply_checkpoint(ckpt, net, adam);

    const DatasetManifest manifest = scan_manifest(root, split);
    const MetricReport report = evaluate_net(net, ckpt.config, manifest);

    std::filesystem::create_directories(out_dir);
    write_report(report, out_dir / "report.json", out_dir / "report.csv");
    write_metric_plots(report, out_dir / "plots");
    return report;
}

namespace {

std::string csv_safe(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

} // namespace

GridResult run_grid(const ExperimentConfig& base,
                    const std::vector<std::pair<std::string, std::vector<std::string>>>& axes,
                    const std::filesystem::path& out_dir) {
    validate_experiment_config(base);

    // Cell list: the base config, then one variation per axis value that
    // actually changes it. Comparison ignores out_dir, which the sweep
    // rewrites per cell anyway.
    std::vector<GridCell> cells;
    {
        GridCell c;
        c.name = "base";
        c.config = base;
        cells.push_back(std::move(c));
    }
    ExperimentConfig base_norm = base;
    base_norm.out_dir.clear();
    const std::string base_text = config_to_text(base_norm);
    for (const auto& [axis, values] : axes) {
        for (const std::string& value : values) {
            ExperimentConfig cfg = base;
            set_config_field(cfg, axis, value); // unknown axes raise here
            ExperimentConfig norm = cfg;
            norm.out_dir.clear();
            if (config_to_text(norm) == base_text) continue;
            GridCell c;
            c.name = axis + "_" + value;
            c.axis = axis;
            c.value = value;
            c.config = cfg;
            cells.push_back(std::move(c));
        }
    }

    std::filesystem::create_directories(out_dir);
    for (GridCell& cell : cells) {
        cell.config.out_dir = (out_dir / cell.name).string();
        try {
            validate_experiment_config(cell.config);
            cell.training = train(cell.config);
            cell.report = evaluate(cell.training.checkpoints.back(),
                                   resolve_dataset_root(cell.config), cell.config.eval_split,
                                   out_dir / cell.name / "eval");
            cell.ok = true;
        } catch (const Error& e) {
            cell.error = e.what(); // already prefixed with the code name
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    }

    GridResult result;
    result.summary_csv = out_dir / "grid_summary.csv";
    std::ofstream csv(result.summary_csv);
    if (!csv) raise(ErrorCode::IoFailure, "cannot open grid summary", result.summary_csv.string());
    csv << "cell,axis,value,status,error,frames,ssim_mean,ssim_std,psnr_mean,psnr_std,"
           "psnr_inf_count\n";
    MetricReport comparison; // one pseudo-video per successful cell
    for (const GridCell& cell : cells) {
        csv << csv_safe(cell.name) << "," << csv_safe(cell.axis) << "," << csv_safe(cell.value)
            << ",";
        if (cell.ok) {
            const MetricAggregate& o = cell.report.overall;
            csv << "ok,," << o.frames << "," << fmt(o.ssim_mean) << "," << fmt(o.ssim_std) << ","
                << fmt(o.psnr_mean) << "," << fmt(o.psnr_std) << "," << o.psnr_inf_count << "\n";
            comparison.per_video[cell.name] = o;
        } else {
            csv << "failed," << csv_safe(cell.error) << ",0,,,,,\n";
        }
    }
    csv.flush();
    if (!csv) raise(ErrorCode::IoFailure, "failed writing grid summary", result.summary_csv.string());
    if (!comparison.per_video.empty()) write_metric_plots(comparison, out_dir / "plots");

    result.cells = std::move(cells);
    return result;
}

} // namespace tryonlab

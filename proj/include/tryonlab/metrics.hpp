// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tryonlab/tensor.hpp"

namespace tryonlab {

struct SsimOptions {
    int window = 11;
    double k1 = 0.01;
    double k2 = 0.03;
    double max_val = 1.0;
};

/// 10*log10(max_val^2 / MSE). Identical images return +infinity; callers
/// exclude those from means and count them separately.
double psnr(const TensorF& x, const TensorF& y, double max_val);

/// Mean over valid Gaussian-weighted windows (sigma = window/6) of the
/// luminance*contrast-structure product. RGB input is converted to BT.601
/// luma first.
double ssim(const TensorF& x, const TensorF& y, const SsimOptions& opts = {});

/// Product over dyadic scales of mean contrast-structure terms with the
/// luminance term applied at the coarsest scale; exponents are the first
/// `levels` standard weights renormalized to sum one. Negative level means
/// are clamped to zero before exponentiation.
double ms_ssim(const TensorF& x, const TensorF& y, int levels, const SsimOptions& opts = {});

/// Largest usable ms_ssim level count (capped at 5) such that the coarsest
/// dyadic scale still fits one window. Zero means even level 1 is too small.
int max_ms_ssim_levels(int height, int width, int window = 11);

struct MetricRow {
    std::string video_id;
    int frame_idx = 0;
    double ssim = 0;
    double psnr = 0; // may be +infinity
};

struct MetricAggregate {
    double ssim_mean = 0;
    double ssim_std = 0;
    double psnr_mean = 0; // over finite rows; +infinity if none are finite
    double psnr_std = 0;
    int psnr_inf_count = 0;
    int frames = 0;
};

/// Per-frame rows plus per-video and overall mean/std (population form).
struct MetricReport {
    std::vector<MetricRow> per_frame;
    std::map<std::string, MetricAggregate> per_video;
    MetricAggregate overall;
};

MetricReport aggregate(std::vector<MetricRow> rows);

std::string report_json(const MetricReport& report);
std::string report_csv(const MetricReport& report);
void write_report(const MetricReport& report, const std::filesystem::path& json_path,
                  const std::filesystem::path& csv_path);

/// Bar charts of per-video mean with a std whisker, one image per metric:
/// `ssim_per_video.png` and `psnr_per_video.png` under `dir`. Bars are
/// labeled by index in the sorted per-video order of the report.
void write_metric_plots(const MetricReport& report, const std::filesystem::path& dir);

} // namespace tryonlab

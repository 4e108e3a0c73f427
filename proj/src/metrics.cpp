// SPDX-License-Identifier: Apache-2.0
#include "tryonlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "tryonlab/error.hpp"
#include "tryonlab/image_ops.hpp"

namespace tryonlab {

namespace {

// accepts (3,H,W), (1,H,W) or (H,W); always hands back (1,H,W) grayscale
TensorF to_gray(const TensorF& img, const char* where) {
    if (img.ndim() == 3 && img.dim(0) == 3) {
        TensorF g = luma(img);
        TensorF out({1, g.dim(0), g.dim(1)});
        std::copy(g.data(), g.data() + g.numel(), out.data());
        return out;
    }
    if (img.ndim() == 3 && img.dim(0) == 1) return img;
    if (img.ndim() == 2) {
        TensorF out({1, img.dim(0), img.dim(1)});
        std::copy(img.data(), img.data() + img.numel(), out.data());
        return out;
    }
    raise(ErrorCode::ShapeMismatch, where, "expected (3,H,W), (1,H,W) or (H,W)");
}

std::vector<double> gaussian_window(int window) {
    const double sigma = static_cast<double>(window) / 6.0;
    const double center = (window - 1) / 2.0;
    std::vector<double> w(static_cast<std::size_t>(window) * window);
    double sum = 0;
    for (int y = 0; y < window; ++y)
        for (int x = 0; x < window; ++x) {
            const double dy = y - center, dx = x - center;
            const double v = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
            w[static_cast<std::size_t>(y) * window + x] = v;
            sum += v;
        }
    for (double& v : w) v /= sum;
    return w;
}

struct WindowTerms {
    double mean_product = 0; // mean over windows of luminance*cs (plain ssim)
    double mean_lum = 0;
    double mean_cs = 0;
};

// single pass over all valid window positions of a grayscale pair
WindowTerms window_terms(const TensorF& gx, const TensorF& gy, const SsimOptions& opts) {
    const int h = gx.dim(1), w = gx.dim(2), win = opts.window;
    if (h < win || w < win)
        raise(ErrorCode::ImageTooSmall, "image smaller than the comparison window",
              std::to_string(h) + "x" + std::to_string(w));
    const std::vector<double> weights = gaussian_window(win);
    const double c1 = (opts.k1 * opts.max_val) * (opts.k1 * opts.max_val);
    const double c2 = (opts.k2 * opts.max_val) * (opts.k2 * opts.max_val);

    WindowTerms t;
    std::size_t count = 0;
    for (int oy = 0; oy + win <= h; ++oy)
        for (int ox = 0; ox + win <= w; ++ox) {
            double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
            for (int ky = 0; ky < win; ++ky)
                for (int kx = 0; kx < win; ++kx) {
                    const double g = weights[static_cast<std::size_t>(ky) * win + kx];
                    const double a = gx.at(0, oy + ky, ox + kx);
                    const double b = gy.at(0, oy + ky, ox + kx);
                    mx += g * a;
                    my += g * b;
                    xx += g * (a * a);
                    yy += g * (b * b);
                    // grouped so the rounding is identical under x/y swap,
                    // keeping ssim exactly symmetric
                    xy += g * (a * b);
                }
            const double vx = xx - mx * mx;
            const double vy = yy - my * my;
            const double cov = xy - mx * my;
            const double lum = (2 * (mx * my) + c1) / (mx * mx + my * my + c1);
            const double cs = (2 * cov + c2) / (vx + vy + c2);
            t.mean_product += lum * cs;
            t.mean_lum += lum;
            t.mean_cs += cs;
            ++count;
        }
    t.mean_product /= static_cast<double>(count);
    t.mean_lum /= static_cast<double>(count);
    t.mean_cs /= static_cast<double>(count);
    return t;
}

constexpr double kMsWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

std::string format_metric(double v) {
    if (std::isinf(v)) return "inf";
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

nlohmann::json aggregate_json(const MetricAggregate& a) {
    nlohmann::json j;
    j["ssim_mean"] = a.ssim_mean;
    j["ssim_std"] = a.ssim_std;
    if (std::isinf(a.psnr_mean)) {
        j["psnr_mean"] = "inf";
        j["psnr_std"] = 0.0;
    } else {
        j["psnr_mean"] = a.psnr_mean;
        j["psnr_std"] = a.psnr_std;
    }
    j["psnr_inf_count"] = a.psnr_inf_count;
    j["frames"] = a.frames;
    return j;
}

MetricAggregate aggregate_rows(const std::vector<const MetricRow*>& rows) {
    MetricAggregate a;
    a.frames = static_cast<int>(rows.size());
    double ssim_sum = 0;
    for (const MetricRow* r : rows) ssim_sum += r->ssim;
    a.ssim_mean = ssim_sum / static_cast<double>(rows.size());
    double ssim_var = 0;
    for (const MetricRow* r : rows) {
        const double d = r->ssim - a.ssim_mean;
        ssim_var += d * d;
    }
    a.ssim_std = std::sqrt(ssim_var / static_cast<double>(rows.size()));

    std::vector<double> finite;
    for (const MetricRow* r : rows) {
        if (std::isinf(r->psnr))
            ++a.psnr_inf_count;
        else
            finite.push_back(r->psnr);
    }
    if (finite.empty()) {
        a.psnr_mean = std::numeric_limits<double>::infinity();
        a.psnr_std = 0;
        return a;
    }
    double sum = 0;
    for (double v : finite) sum += v;
    a.psnr_mean = sum / static_cast<double>(finite.size());
    double var = 0;
    for (double v : finite) {
        const double d = v - a.psnr_mean;
        var += d * d;
    }
    a.psnr_std = std::sqrt(var / static_cast<double>(finite.size()));
    return a;
}

} // namespace

double psnr(const TensorF& x, const TensorF& y, double max_val) {
    require_same_shape(x, y, "psnr");
    if (!(max_val > 0)) raise(ErrorCode::ConfigInvalid, "psnr max_val must be positive");
    double mse = 0;
    for (std::size_t i = 0; i < x.numel(); ++i) {
        const double d = static_cast<double>(x[i]) - static_cast<double>(y[i]);
        mse += d * d;
    }
    mse /= static_cast<double>(x.numel());
    if (mse == 0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(max_val * max_val / mse);
}

double ssim(const TensorF& x, const TensorF& y, const SsimOptions& opts) {
    require_same_shape(x, y, "ssim");
    if (opts.window < 2) raise(ErrorCode::ConfigInvalid, "ssim window too small");
    const TensorF gx = to_gray(x, "ssim");
    const TensorF gy = to_gray(y, "ssim");
    return window_terms(gx, gy, opts).mean_product;
}

int max_ms_ssim_levels(int height, int width, int window) {
    int levels = 0;
    int h = height, w = width;
    while (levels < 5 && h >= window && w >= window) {
        ++levels;
        h /= 2;
        w /= 2;
    }
    return levels;
}

double ms_ssim(const TensorF& x, const TensorF& y, int levels, const SsimOptions& opts) {
    require_same_shape(x, y, "ms_ssim");
    if (levels < 1 || levels > 5)
        raise(ErrorCode::ConfigInvalid, "ms_ssim levels must be in [1,5]",
              std::to_string(levels));
    TensorF gx = to_gray(x, "ms_ssim");
    TensorF gy = to_gray(y, "ms_ssim");
    if (max_ms_ssim_levels(gx.dim(1), gx.dim(2), opts.window) < levels)
        raise(ErrorCode::ImageTooSmall, "image cannot support requested ms_ssim levels");

    double weight_sum = 0;
    for (int l = 0; l < levels; ++l) weight_sum += kMsWeights[l];

    double result = 1.0;
    for (int l = 0; l < levels; ++l) {
        const WindowTerms t = window_terms(gx, gy, opts);
        const double e = kMsWeights[l] / weight_sum;
        const double cs = std::max(t.mean_cs, 0.0);
        result *= std::pow(cs, e);
        if (l == levels - 1) result *= std::pow(std::max(t.mean_lum, 0.0), e);
        if (l + 1 < levels) {
            gx = halve(gx);
            gy = halve(gy);
        }
    }
    return result;
}

MetricReport aggregate(std::vector<MetricRow> rows) {
    if (rows.empty()) raise(ErrorCode::EmptyInput, "no metric rows to aggregate");
    MetricReport report;
    report.per_frame = std::move(rows);

    std::map<std::string, std::vector<const MetricRow*>> by_video;
    std::vector<const MetricRow*> all;
    for (const MetricRow& r : report.per_frame) {
        by_video[r.video_id].push_back(&r);
        all.push_back(&r);
    }
    for (const auto& [vid, ptrs] : by_video) report.per_video[vid] = aggregate_rows(ptrs);
    report.overall = aggregate_rows(all);
    return report;
}

std::string report_json(const MetricReport& report) {
    nlohmann::json j;
    j["overall"] = aggregate_json(report.overall);
    j["per_video"] = nlohmann::json::object();
    for (const auto& [vid, agg] : report.per_video) j["per_video"][vid] = aggregate_json(agg);
    j["per_frame"] = nlohmann::json::array();
    for (const MetricRow& r : report.per_frame) {
        nlohmann::json row;
        row["video_id"] = r.video_id;
        row["frame_idx"] = r.frame_idx;
        row["ssim"] = r.ssim;
        if (std::isinf(r.psnr))
            row["psnr"] = "inf";
        else
            row["psnr"] = r.psnr;
        j["per_frame"].push_back(row);
    }
    return j.dump(2) + "\n";
}

std::string report_csv(const MetricReport& report) {
    std::string out = "video_id,frame_idx,ssim,psnr\n";
    for (const MetricRow& r : report.per_frame) {
        out += r.video_id;
        out += ',';
        out += std::to_string(r.frame_idx);
        out += ',';
        out += format_metric(r.ssim);
        out += ',';
        out += format_metric(r.psnr);
        out += '\n';
    }
    return out;
}

void write_report(const MetricReport& report, const std::filesystem::path& json_path,
                  const std::filesystem::path& csv_path) {
    std::ofstream js(json_path, std::ios::binary);
    js << report_json(report);
    if (!js) raise(ErrorCode::IoFailure, "cannot write report", json_path.string());
    std::ofstream cs(csv_path, std::ios::binary);
    cs << report_csv(report);
    if (!cs) raise(ErrorCode::IoFailure, "cannot write report", csv_path.string());
}

} // namespace tryonlab

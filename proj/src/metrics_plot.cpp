// SPDX-License-Identifier: Apache-2.0

// Bar-chart rendering for metric reports: per-video mean bars with a
// +/- one-std whisker, rasterized directly into a PNG. Text uses a tiny
// built-in 5x7 bitmap font (digits plus the handful of letters the chart
// labels need), which keeps the output byte-deterministic everywhere.

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tryonlab/error.hpp"
#include "tryonlab/image_io.hpp"
#include "tryonlab/metrics.hpp"

namespace tryonlab {

namespace {

struct Rgb8 {
    std::uint8_t r, g, b;
};

constexpr Rgb8 kBlack{20, 20, 20};
constexpr Rgb8 kGrid{225, 225, 225};
constexpr Rgb8 kBar{70, 114, 196};

struct Glyph {
    char ch;
    const char* rows[7]; // 5 chars each, '#' = ink
};

constexpr Glyph kFont[] = {
    {'0', {".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."}},
    {'1', {"..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."}},
    {'2', {".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"}},
    {'3', {".###.", "#...#", "....#", "..##.", "....#", "#...#", ".###."}},
    {'4', {"...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."}},
    {'5', {"#####", "#....", "####.", "....#", "....#", "#...#", ".###."}},
    {'6', {".###.", "#....", "#....", "####.", "#...#", "#...#", ".###."}},
    {'7', {"#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."}},
    {'8', {".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."}},
    {'9', {".###.", "#...#", "#...#", ".####", "....#", "....#", ".###."}},
    {'.', {".....", ".....", ".....", ".....", ".....", "..##.", "..##."}},
    {'-', {".....", ".....", ".....", ".###.", ".....", ".....", "....."}},
    {'S', {".####", "#....", "#....", ".###.", "....#", "....#", "####."}},
    {'P', {"####.", "#...#", "#...#", "####.", "#....", "#....", "#...."}},
    {'N', {"#...#", "##..#", "##..#", "#.#.#", "#..##", "#..##", "#...#"}},
    {'R', {"####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"}},
    {'I', {".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."}},
    {'M', {"#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"}},
    {'d', {"....#", "....#", ".####", "#...#", "#...#", "#...#", ".####"}},
    {'B', {"####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."}},
    {' ', {".....", ".....", ".....", ".....", ".....", ".....", "....."}},
};

const Glyph* find_glyph(char c) {
    for (const Glyph& g : kFont)
        if (g.ch == c) return &g;
    return nullptr;
}

void put_pixel(Image8& img, int x, int y, Rgb8 c) {
    if (x < 0 || x >= img.width || y < 0 || y >= img.height) return;
    img.at(y, x, 0) = c.r;
    img.at(y, x, 1) = c.g;
    img.at(y, x, 2) = c.b;
}

void fill_rect(Image8& img, int x0, int y0, int x1, int y1, Rgb8 c) {
    for (int y = std::max(0, y0); y <= std::min(img.height - 1, y1); ++y)
        for (int x = std::max(0, x0); x <= std::min(img.width - 1, x1); ++x)
            put_pixel(img, x, y, c);
}

void draw_text(Image8& img, int x, int y, const std::string& text, int scale, Rgb8 c) {
    int cx = x;
    for (char ch : text) {
        const Glyph* g = find_glyph(ch);
        if (g) {
            for (int ry = 0; ry < 7; ++ry)
                for (int rx = 0; rx < 5; ++rx)
                    if (g->rows[ry][rx] == '#')
                        fill_rect(img, cx + rx * scale, y + ry * scale, cx + rx * scale + scale - 1,
                                  y + ry * scale + scale - 1, c);
        }
        cx += 6 * scale;
    }
}

std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

struct BarEntry {
    double mean;
    double std;
    bool infinite;
};

void plot_bars(const std::filesystem::path& path, const std::string& title,
               const std::vector<BarEntry>& entries, double y_max) {
    const int width = 640, height = 360;
    const int px0 = 56, px1 = 624, py0 = 40, py1 = 312;
    Image8 img;
    img.height = height;
    img.width = width;
    img.channels = 3;
    img.pixels.assign(static_cast<std::size_t>(height) * width * 3, 255);

    const auto to_y = [&](double v) {
        const double f = std::clamp(v / y_max, 0.0, 1.0);
        return py1 - static_cast<int>(std::lround(f * (py1 - py0)));
    };

    for (int tick = 0; tick <= 4; ++tick) {
        const double v = y_max * tick / 4.0;
        const int ty = to_y(v);
        fill_rect(img, px0, ty, px1, ty, tick == 0 ? kBlack : kGrid);
        draw_text(img, 6, ty - 3, short_number(v), 1, kBlack);
    }
    fill_rect(img, px0, py0, px0, py1, kBlack);
    draw_text(img, 8, 10, title, 2, kBlack);

    const int n = static_cast<int>(entries.size());
    const double slot = static_cast<double>(px1 - px0) / std::max(1, n);
    for (int i = 0; i < n; ++i) {
        const BarEntry& e = entries[static_cast<std::size_t>(i)];
        const int cx = px0 + static_cast<int>(std::lround(slot * (i + 0.5)));
        const int half = std::max(2, static_cast<int>(std::lround(slot * 0.3)));
        const double mean = e.infinite ? y_max : e.mean;
        fill_rect(img, cx - half, to_y(mean), cx + half, py1 - 1, kBar);
        if (!e.infinite) {
            const int lo = to_y(std::max(0.0, e.mean - e.std));
            const int hi = to_y(e.mean + e.std);
            fill_rect(img, cx, hi, cx, lo, kBlack);
            fill_rect(img, cx - 3, hi, cx + 3, hi, kBlack);
            fill_rect(img, cx - 3, lo, cx + 3, lo, kBlack);
        }
        draw_text(img, cx - 2, py1 + 8, std::to_string(i), 1, kBlack);
    }
    write_png(path, img);
}

} // namespace

void write_metric_plots(const MetricReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) raise(ErrorCode::IoFailure, "cannot create plot directory", dir.string());

    std::vector<BarEntry> ssim_rows, psnr_rows;
    double psnr_top = 0;
    for (const auto& [vid, agg] : report.per_video) {
        ssim_rows.push_back({agg.ssim_mean, agg.ssim_std, false});
        const bool inf = std::isinf(agg.psnr_mean);
        psnr_rows.push_back({agg.psnr_mean, agg.psnr_std, inf});
        if (!inf) psnr_top = std::max(psnr_top, agg.psnr_mean + agg.psnr_std);
    }
    if (psnr_top <= 0) psnr_top = 1.0;

    plot_bars(dir / "ssim_per_video.png", "SSIM", ssim_rows, 1.0);
    plot_bars(dir / "psnr_per_video.png", "PSNR dB", psnr_rows, psnr_top * 1.08);
}

} // namespace tryonlab

// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "tryonlab/cloth_warp.hpp"
#include "tryonlab/error.hpp"

namespace tryonlab {

std::vector<float> TpsParams::uniform_lattice(int grid) {
    std::vector<float> pts;
    pts.reserve(static_cast<std::size_t>(grid) * grid * 2);
    for (int gy = 0; gy < grid; ++gy)
        for (int gx = 0; gx < grid; ++gx) {
            pts.push_back(-1.0f + 2.0f * static_cast<float>(gx) / (grid - 1));
            pts.push_back(-1.0f + 2.0f * static_cast<float>(gy) / (grid - 1));
        }
    return pts;
}

TpsParams TpsParams::identity(int grid) {
    TpsParams p;
    p.grid = grid;
    p.control = uniform_lattice(grid);
    p.target = p.control;
    return p;
}

namespace {

void validate(const TpsParams& p) {
    if (p.grid < 3) raise(ErrorCode::ConfigInvalid, "tps grid must be >= 3");
    const std::size_t n = static_cast<std::size_t>(p.grid) * p.grid * 2;
    if (p.control.size() != n || p.target.size() != n)
        raise(ErrorCode::ConfigInvalid, "tps point counts do not match grid");
    for (float v : p.target)
        if (!std::isfinite(v)) raise(ErrorCode::ConfigInvalid, "tps target not finite");
    for (float v : p.control)
        if (!std::isfinite(v)) raise(ErrorCode::ConfigInvalid, "tps control not finite");
}

double kernel_u(double r2) { return r2 > 0 ? r2 * std::log(r2) : 0.0; }

// Interpolating spline phi with phi(control_i) = target_i, one weight set
// per output dimension, solved with a small ridge on the kernel block.
struct TpsSolution {
    Eigen::MatrixXd weights; // (N+3) x 2
    Eigen::MatrixXd control; // N x 2

    Eigen::Vector2d apply(double x, double y) const {
        const int n = static_cast<int>(control.rows());
        Eigen::Vector2d out;
        for (int d = 0; d < 2; ++d) {
            double acc = weights(n, d) + weights(n + 1, d) * x + weights(n + 2, d) * y;
            for (int i = 0; i < n; ++i) {
                const double dx = x - control(i, 0), dy = y - control(i, 1);
                acc += weights(i, d) * kernel_u(dx * dx + dy * dy);
            }
            out[d] = acc;
        }
        return out;
    }
};

TpsSolution solve_tps(const TpsParams& p) {
    constexpr double kRidge = 1e-6;
    const int n = p.grid * p.grid;

    Eigen::MatrixXd control(n, 2), target(n, 2);
    for (int i = 0; i < n; ++i) {
        control(i, 0) = p.control[2 * i];
        control(i, 1) = p.control[2 * i + 1];
        target(i, 0) = p.target[2 * i];
        target(i, 1) = p.target[2 * i + 1];
    }

    // Affinely degenerate control points (all coincident or collinear) make
    // the polynomial block rank deficient; detect via the centered cloud.
    Eigen::MatrixXd centered = control.rowwise() - control.colwise().mean();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
    if (svd.singularValues()(1) <= 1e-9)
        raise(ErrorCode::DegenerateTps, "control points are coincident or collinear");

    Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(n + 3, n + 3);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double dx = control(i, 0) - control(j, 0), dy = control(i, 1) - control(j, 1);
            sys(i, j) = kernel_u(dx * dx + dy * dy);
        }
        sys(i, i) += kRidge;
        sys(i, n) = sys(n, i) = 1.0;
        sys(i, n + 1) = sys(n + 1, i) = control(i, 0);
        sys(i, n + 2) = sys(n + 2, i) = control(i, 1);
    }

    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n + 3, 2);
    rhs.topRows(n) = target;

    TpsSolution sol;
    sol.weights = Eigen::PartialPivLU<Eigen::MatrixXd>(sys).solve(rhs);
    sol.control = std::move(control);
    if (!sol.weights.allFinite()) raise(ErrorCode::DegenerateTps, "tps solve produced non-finite weights");
    return sol;
}

// Bilinear lookup with double coordinates and zero padding, so identity
// warps stay exact to rounding.
double sample_zero(const TensorF& img, int c, double y, double x) {
    const int h = img.dim(1), w = img.dim(2);
    const auto pix = [&](int yy, int xx) -> double {
        if (yy < 0 || yy >= h || xx < 0 || xx >= w) return 0.0;
        return img.at(c, yy, xx);
    };
    const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0, fy = y - y0;
    const double top = pix(y0, x0) * (1 - fx) + pix(y0, x0 + 1) * fx;
    const double bot = pix(y0 + 1, x0) * (1 - fx) + pix(y0 + 1, x0 + 1) * fx;
    return top * (1 - fy) + bot * fy;
}

} // namespace

std::string tps_to_text(const TpsParams& params) {
    validate(params);
    std::ostringstream out;
    out << "tps " << params.grid << "\n";
    out.precision(9);
    for (std::size_t i = 0; i < params.target.size(); ++i)
        out << params.target[i] << ((i + 1) % 8 == 0 ? "\n" : " ");
    return out.str();
}

TpsParams tps_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string tag;
    int grid = 0;
    if (!(in >> tag >> grid) || tag != "tps" || grid < 3)
        raise(ErrorCode::ConfigInvalid, "malformed tps header");
    TpsParams p;
    p.grid = grid;
    p.control = TpsParams::uniform_lattice(grid);
    p.target.resize(static_cast<std::size_t>(grid) * grid * 2);
    for (float& v : p.target)
        if (!(in >> v)) raise(ErrorCode::ConfigInvalid, "tps payload shorter than 2*G*G numbers");
    float extra;
    if (in >> extra) raise(ErrorCode::ConfigInvalid, "tps payload longer than 2*G*G numbers");
    validate(p);
    return p;
}

WarpedCloth tps_warp(const TensorF& cloth, const TensorF& cloth_mask, const TpsParams& params,
                     int out_h, int out_w) {
    validate(params);
    if (cloth.ndim() != 3 || cloth.dim(0) != 3)
        raise(ErrorCode::ShapeMismatch, "tps_warp expects (3,H,W) cloth");
    if (cloth_mask.ndim() != 2 || cloth_mask.dim(0) != cloth.dim(1) ||
        cloth_mask.dim(1) != cloth.dim(2))
        raise(ErrorCode::ShapeMismatch, "cloth mask shape does not match cloth");
    if (out_h < 1 || out_w < 1) raise(ErrorCode::ConfigInvalid, "warp output size must be positive");

    const TpsSolution sol = solve_tps(params);
    const int ch = cloth.dim(1), cw = cloth.dim(2);

    // Background outside the product mask must not bleed into the warp.
    TensorF masked({3, ch, cw});
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < ch; ++y)
            for (int x = 0; x < cw; ++x)
                masked.at(c, y, x) = cloth.at(c, y, x) * (cloth_mask.at(y, x) >= 0.5f ? 1.0f : 0.0f);
    TensorF mask3({1, ch, cw});
    for (int y = 0; y < ch; ++y)
        for (int x = 0; x < cw; ++x) mask3.at(0, y, x) = cloth_mask.at(y, x);

    WarpedCloth out;
    out.image = TensorF({3, out_h, out_w});
    out.mask = TensorF({out_h, out_w});
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x) {
            const double u = (2.0 * x + 1.0) / out_w - 1.0;
            const double v = (2.0 * y + 1.0) / out_h - 1.0;
            const Eigen::Vector2d s = sol.apply(u, v);
            const double sx = ((s[0] + 1.0) * cw - 1.0) / 2.0;
            const double sy = ((s[1] + 1.0) * ch - 1.0) / 2.0;
            const float m = sample_zero(mask3, 0, sy, sx) >= 0.5 ? 1.0f : 0.0f;
            out.mask.at(y, x) = m;
            for (int c = 0; c < 3; ++c)
                out.image.at(c, y, x) = m * static_cast<float>(sample_zero(masked, c, sy, sx));
        }
    return out;
}

WarpedCloth oracle_warp(const VideoSample& sample, int frame_idx) {
    if (frame_idx < 0 || frame_idx >= sample.frame_count())
        raise(ErrorCode::IndexOutOfRange, "frame index out of range", std::to_string(frame_idx));
    const TensorF& frame = sample.frames[frame_idx];
    const TensorF& mask = sample.garment_masks[frame_idx];
    WarpedCloth out;
    out.mask = mask;
    out.image = TensorF(frame.shape());
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < frame.dim(1); ++y)
            for (int x = 0; x < frame.dim(2); ++x)
                out.image.at(c, y, x) = frame.at(c, y, x) * mask.at(y, x);
    return out;
}

} // namespace tryonlab
